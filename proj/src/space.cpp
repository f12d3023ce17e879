#include "nonexp/space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nonexp/error.hpp"

namespace nonexp {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kOutsideBall: return "outside_ball";
    case ErrorCode::kNotNonexpansive: return "not_nonexpansive";
    case ErrorCode::kNoConvergence: return "no_convergence";
    case ErrorCode::kCertificationFailed: return "certification_failed";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kNoPairFound: return "no_pair_found";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kSchema: return "schema";
  }
  return "unknown";
}

std::string_view to_string(NormTag tag) noexcept {
  switch (tag) {
    case NormTag::kL1: return "l1";
    case NormTag::kL2: return "l2";
    case NormTag::kLinf: return "linf";
  }
  return "?";
}

std::optional<NormTag> norm_tag_from_string(std::string_view name) noexcept {
  if (name == "l1") return NormTag::kL1;
  if (name == "l2") return NormTag::kL2;
  if (name == "linf") return NormTag::kLinf;
  return std::nullopt;
}

NormTag dual_tag(NormTag tag) noexcept {
  switch (tag) {
    case NormTag::kL1: return NormTag::kLinf;
    case NormTag::kLinf: return NormTag::kL1;
    case NormTag::kL2: return NormTag::kL2;
  }
  return tag;
}

std::string_view to_string(PointTag tag) noexcept {
  switch (tag) {
    case PointTag::kInterior: return "INTERIOR";
    case PointTag::kExposed: return "EXPOSED";
    case PointTag::kAlmostExposedOnly: return "ALMOST_EXPOSED_ONLY";
    case PointTag::kBoundaryNotAlmostExposed:
      return "BOUNDARY_NOT_ALMOST_EXPOSED";
  }
  return "?";
}

Space::Space(int dim, NormTag norm) : dim_(dim), norm_(norm) {
  if (dim < 1) {
    fail(ErrorCode::kInvalidArgument,
         "space dimension must be >= 1, got " + std::to_string(dim));
  }
}

double norm(NormTag tag, const Vector& x) {
  switch (tag) {
    case NormTag::kL1: return x.lpNorm<1>();
    case NormTag::kL2: return x.norm();
    case NormTag::kLinf: return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

void require_vector(const Space& space, const Vector& x, std::string_view what) {
  if (x.size() != space.dim()) {
    fail(ErrorCode::kDimensionMismatch,
         std::string(what) + ": expected " + std::to_string(space.dim()) +
             " coordinates, got " + std::to_string(x.size()));
  }
  if (!x.allFinite()) {
    fail(ErrorCode::kInvalidArgument, std::string(what) + ": non-finite entry");
  }
}

double norm(const Space& space, const Vector& x) {
  require_vector(space, x, "norm");
  return norm(space.norm(), x);
}

double dual_norm(const Space& space, const Functional& phi) {
  require_vector(space, phi.coords, "dual_norm");
  return norm(dual_tag(space.norm()), phi.coords);
}

double support_value(const Space& space, const Functional& phi) {
  return dual_norm(space, phi);
}

namespace {

double l2_operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const Matrix gram = a.transpose() * a;
  if (gram.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  const Eigen::Index n = gram.cols();
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = 1.0 + 0.1 * static_cast<double>(i + 1) / static_cast<double>(n);
  }
  v.normalize();

  constexpr int kBudget = 100000;
  constexpr double kResidualTol = 1e-12;
  double previous = -1.0;
  int stagnant = 0;
  for (int iter = 0; iter < kBudget; ++iter) {
    const Vector w = gram * v;
    const double rho = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    if ((w - rho * v).norm() <= kResidualTol * rho) return std::sqrt(rho);
    // A Rayleigh quotient that no longer moves means the top eigenvalues are
    // clustered below resolution; the estimate is then accurate anyway.
    if (previous >= 0.0 && std::abs(rho - previous) <= 1e-16 * rho) {
      if (++stagnant >= 20) return std::sqrt(rho);
    } else {
      stagnant = 0;
    }
    previous = rho;
    v = w / wn;
  }
  fail(ErrorCode::kNoConvergence,
       "l2 operator norm: power iteration did not converge within " +
           std::to_string(kBudget) + " steps");
}

}  // namespace

double operator_norm(NormTag tag, const Matrix& a) {
  if (!a.allFinite()) {
    fail(ErrorCode::kInvalidArgument, "operator_norm: non-finite entry");
  }
  if (a.size() == 0) return 0.0;
  switch (tag) {
    case NormTag::kLinf: return a.cwiseAbs().rowwise().sum().maxCoeff();
    case NormTag::kL1: return a.cwiseAbs().colwise().sum().maxCoeff();
    case NormTag::kL2: return l2_operator_norm(a);
  }
  return 0.0;
}

double operator_norm(const Space& in, const Space& out, const Matrix& a) {
  if (in.norm() != out.norm()) {
    fail(ErrorCode::kUnsupported,
         "operator_norm: mixed norm tags are not supported");
  }
  if (a.rows() != out.dim() || a.cols() != in.dim()) {
    fail(ErrorCode::kDimensionMismatch,
         "operator_norm: matrix is " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()) + ", expected " +
             std::to_string(out.dim()) + "x" + std::to_string(in.dim()));
  }
  return operator_norm(in.norm(), a);
}

namespace {

void require_in_ball(const Space& space, const Vector& x, double tol,
                     std::string_view what) {
  const double n = norm(space, x);
  if (n > 1.0 + tol) {
    fail(ErrorCode::kOutsideBall, std::string(what) + ": point has norm " +
                                      std::to_string(n) + " > 1");
  }
}

}  // namespace

bool is_extreme_point(const Space& space, const Vector& x, double tol) {
  require_in_ball(space, x, tol, "is_extreme_point");
  switch (space.norm()) {
    case NormTag::kL1: {
      int big = 0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x(i));
        if (a >= 1.0 - tol) {
          ++big;
        } else if (a > tol) {
          return false;
        }
      }
      return big == 1;
    }
    case NormTag::kLinf:
      return (x.cwiseAbs().array() >= 1.0 - tol).all();
    case NormTag::kL2:
      return std::abs(x.norm() - 1.0) <= tol;
  }
  return false;
}

NormalCone normal_cone_generators(const Space& space, const Vector& x,
                                  double tol) {
  const double n = norm(space, x);
  if (n > 1.0 + tol) {
    fail(ErrorCode::kOutsideBall, "normal_cone_generators: point outside ball");
  }
  if (n < 1.0 - tol) {
    fail(ErrorCode::kInvalidArgument,
         "normal_cone_generators: interior point has no supporting hyperplane");
  }

  NormalCone cone{x, {}};
  const int dim = space.dim();
  switch (space.norm()) {
    case NormTag::kLinf:
      for (int i = 0; i < dim; ++i) {
        if (std::abs(x(i)) >= 1.0 - tol) {
          Vector g = Vector::Zero(dim);
          g(i) = x(i) > 0 ? 1.0 : -1.0;
          cone.generators.push_back({std::move(g)});
        }
      }
      break;
    case NormTag::kL1: {
      if (dim > kMaxL1ConeDim) {
        fail(ErrorCode::kUnsupported,
             "normal_cone_generators: l1 cones are enumerated only up to "
             "dimension " + std::to_string(kMaxL1ConeDim));
      }
      std::vector<int> free;
      Vector base(dim);
      for (int i = 0; i < dim; ++i) {
        if (std::abs(x(i)) > tol) {
          base(i) = x(i) > 0 ? 1.0 : -1.0;
        } else {
          base(i) = 1.0;
          free.push_back(i);
        }
      }
      const std::size_t count = std::size_t{1} << free.size();
      cone.generators.reserve(count);
      for (std::size_t pattern = 0; pattern < count; ++pattern) {
        Vector g = base;
        for (std::size_t b = 0; b < free.size(); ++b) {
          if ((pattern >> b) & 1U) g(free[b]) = -1.0;
        }
        cone.generators.push_back({std::move(g)});
      }
      break;
    }
    case NormTag::kL2:
      cone.generators.push_back({x / x.norm()});
      break;
  }
  return cone;
}

bool exposes_singleton(const Space& space, const Functional& phi, double tol) {
  const double dn = dual_norm(space, phi);
  if (dn <= tol) return false;
  const Vector scaled = phi.coords / dn;
  switch (space.norm()) {
    case NormTag::kLinf:
      // Face pins z_i = sign(phi_i) where phi_i != 0 and leaves the rest free.
      return (scaled.cwiseAbs().array() > tol).all();
    case NormTag::kL1: {
      // Face is the hull of sign(phi_k) e_k over the maximizing k.
      int maximizers = 0;
      for (Eigen::Index i = 0; i < scaled.size(); ++i) {
        if (std::abs(scaled(i)) >= 1.0 - tol) ++maximizers;
      }
      return maximizers == 1;
    }
    case NormTag::kL2:
      return true;
  }
  return false;
}

int numerical_rank(const std::vector<Vector>& rows, double rel_tol) {
  if (rows.empty()) return 0;
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

PointClass classify_point(const Space& space, const Vector& x, double tol) {
  const double n = norm(space, x);
  if (n > 1.0 + tol) {
    fail(ErrorCode::kOutsideBall, "classify_point: point outside ball");
  }
  PointClass out;
  if (n < 1.0 - tol) return out;

  const NormalCone cone = normal_cone_generators(space, x, tol);
  std::vector<Vector> rows;
  rows.reserve(cone.generators.size());
  Vector sum = Vector::Zero(space.dim());
  for (const Functional& g : cone.generators) {
    rows.push_back(g.coords);
    sum += g.coords;
  }
  out.cone_rank = numerical_rank(rows, tol);

  // The sum of all generators lies in the relative interior of the cone, so
  // its maximizing face is the smallest face of C that contains x.
  Functional candidate{sum / dual_norm(space, Functional{sum})};
  out.exposed = exposes_singleton(space, candidate, tol);
  if (out.exposed) out.exposing_functional = candidate;

  if (space.norm() == NormTag::kL2) {
    out.almost_exposed = exposes_singleton(space, cone.generators.front(), tol);
  } else {
    out.almost_exposed = out.cone_rank == space.dim();
  }
  out.extreme = is_extreme_point(space, x, tol);

  if (out.exposed) {
    out.tag = PointTag::kExposed;
  } else if (out.almost_exposed) {
    out.tag = PointTag::kAlmostExposedOnly;
  } else {
    out.tag = PointTag::kBoundaryNotAlmostExposed;
  }
  return out;
}

}  // namespace nonexp
