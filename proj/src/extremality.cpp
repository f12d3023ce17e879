#include "nonexp/extremality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nonexp/error.hpp"

namespace nonexp {

std::string_view to_string(SplitKind kind) noexcept {
  switch (kind) {
    case SplitKind::kNone: return "NONE";
    case SplitKind::kShortRow: return "SHORT_ROW";
    case SplitKind::kZeroRow: return "ZERO_ROW";
    case SplitKind::kSupportSplit: return "SUPPORT_SPLIT";
  }
  return "?";
}

std::string_view to_string(UrysohnProfile profile) noexcept {
  return profile == UrysohnProfile::kIndicator ? "INDICATOR" : "TENT";
}

std::optional<UrysohnProfile> urysohn_profile_from_string(std::string_view s) noexcept {
  if (s == "INDICATOR") return UrysohnProfile::kIndicator;
  if (s == "TENT") return UrysohnProfile::kTent;
  return std::nullopt;
}

std::string_view to_string(PinDirection d) noexcept {
  return d == PinDirection::kPlus ? "PLUS" : "MINUS";
}

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

RowAnalysis analyze_row(const Vector& phi, double tol) {
  RowAnalysis row;
  row.phi = phi;
  row.l1 = phi.lpNorm<1>();
  for (Eigen::Index j = 0; j < phi.size(); ++j) {
    if (std::abs(phi(j)) > tol) row.support.push_back(static_cast<std::size_t>(j));
  }
  row.extreme = row.support.size() == 1 && std::abs(row.l1 - 1.0) <= tol &&
                std::abs(std::abs(phi(static_cast<Eigen::Index>(row.support[0]))) - 1.0) <= tol;
  return row;
}

}  // namespace

LinearExtremalityVerdict classify_linear_extremal(const Matrix& a, double tol) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    fail(ErrorCode::kDimensionMismatch, "classify_linear_extremal: matrix must be square");
  }
  const double op = operator_norm(NormTag::kLinf, a);
  if (op > 1.0 + tol) {
    fail(ErrorCode::kNotNonexpansive,
         "classify_linear_extremal: operator norm " + std::to_string(op) + " exceeds 1");
  }
  const Space space(static_cast<int>(a.rows()), NormTag::kLinf);
  LinearExtremalityVerdict out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out.rows.push_back(analyze_row(a.row(i).transpose(), tol));
  }
  const auto bad = std::find_if(out.rows.begin(), out.rows.end(),
                                [](const RowAnalysis& r) { return !r.extreme; });
  out.extremal = bad == out.rows.end();

  if (out.extremal) {
    Form7Data form;
    form.fibers.resize(static_cast<std::size_t>(a.cols()));
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
      const std::size_t j = out.rows[i].support[0];
      form.pi.push_back(j);
      form.eps.push_back(out.rows[i].phi(static_cast<Eigen::Index>(j)) > 0.0 ? 1 : -1);
      form.fibers[j].push_back(i);
    }
    out.form7 = std::move(form);
    return out;
  }

  const auto i = static_cast<Eigen::Index>(bad - out.rows.begin());
  out.split_row = static_cast<std::size_t>(i);
  const RowAnalysis& row = *bad;
  Matrix g = a;
  Matrix h = a;
  double lambda = 0.0;
  if (row.support.empty()) {
    out.split = SplitKind::kZeroRow;
    lambda = 0.5;
    g.row(i).setZero();
    h.row(i).setZero();
    g(i, 0) = 1.0;
    h(i, 0) = -1.0;
  } else if (row.l1 < 1.0 - tol) {
    out.split = SplitKind::kShortRow;
    lambda = 1.0 - row.l1;
    g.row(i) = row.phi.transpose() / row.l1;
    h.row(i).setZero();
  } else {
    out.split = SplitKind::kSupportSplit;
    const auto j = static_cast<Eigen::Index>(row.support[0]);
    const double xi = row.phi(j);
    lambda = std::abs(xi);
    Vector rest = row.phi;
    rest(j) = 0.0;
    g.row(i) = rest.transpose() / (1.0 - lambda);
    h.row(i).setZero();
    h(i, j) = sgn(xi);
  }
  out.certificate = make_certificate(Mapping::linear(space, a), lambda,
                                     Mapping::linear(space, g),
                                     Mapping::linear(space, h));
  return out;
}

Mapping make_rotation(const Space& space, const std::vector<std::size_t>& perm,
                      const std::vector<int>& signs) {
  const auto n = static_cast<std::size_t>(space.dim());
  if (perm.size() != n || signs.size() != n) {
    fail(ErrorCode::kDimensionMismatch, "make_rotation: perm and signs need one entry per coordinate");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) fail(ErrorCode::kInvalidArgument, "make_rotation: perm is not a bijection");
    seen[p] = true;
  }
  Matrix m = Matrix::Zero(space.dim(), space.dim());
  for (std::size_t i = 0; i < n; ++i) {
    if (signs[i] != 1 && signs[i] != -1) {
      fail(ErrorCode::kInvalidArgument, "make_rotation: signs must be +1 or -1");
    }
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i])) = signs[i];
  }
  return Mapping::linear(space, std::move(m));
}

std::vector<PinViolation> verify_pinning(const Mapping& big_f,
                                         const std::vector<PinSample>& samples,
                                         double tol) {
  const int n = big_f.space().dim();
  std::vector<PinViolation> out;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const PinSample& sample = samples[s];
    require_vector(big_f.space(), sample.f, "pinning sample");
    if (sample.x >= static_cast<std::size_t>(n)) {
      fail(ErrorCode::kInvalidArgument, "pinning sample index out of range");
    }
    const auto x = static_cast<Eigen::Index>(sample.x);
    if (std::abs(std::abs(sample.f(x)) - 1.0) > tol) {
      fail(ErrorCode::kInvalidArgument,
           "pinning sample " + std::to_string(s) + " has |f(x)| != 1");
    }
    const double actual = big_f(sample.f)(x);
    if (std::abs(actual - sample.f(x)) > tol) {
      out.push_back({s, sample.f(x), actual});
    }
  }
  return out;
}

UrysohnPair urysohn_pair(const Vector& f, std::size_t x0, double gamma,
                         UrysohnProfile profile) {
  if (x0 >= static_cast<std::size_t>(f.size())) {
    fail(ErrorCode::kInvalidArgument, "urysohn_pair: x0 out of range");
  }
  if (f.lpNorm<Eigen::Infinity>() > 1.0) {
    fail(ErrorCode::kOutsideBall, "urysohn_pair: ||f|| exceeds 1");
  }
  const double c = f(static_cast<Eigen::Index>(x0));
  if (std::abs(c) >= 1.0) {
    fail(ErrorCode::kInvalidArgument, "urysohn_pair: |f(x0)| = 1");
  }
  const double bound = std::min(1.0 - c, 1.0 + c);
  if (!(gamma > 0.0) || !(gamma < bound)) {
    fail(ErrorCode::kInvalidArgument,
         "urysohn_pair: gamma must lie in (0, " + std::to_string(bound) + ")");
  }
  UrysohnPair out;
  out.gamma = gamma;
  out.r = Vector::Zero(f.size());
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    const double gap = std::abs(f(x) - c);
    if (gap < gamma) out.u.push_back(static_cast<std::size_t>(x));
    if (profile == UrysohnProfile::kTent) {
      out.r(x) = std::max(0.0, 1.0 - gap / gamma);
    }
  }
  out.r(static_cast<Eigen::Index>(x0)) = 1.0;
  out.g_plus = f.array() + out.r.array() * (1.0 - f.array());
  out.g_minus = f.array() - out.r.array() * (1.0 + f.array());
  const auto i0 = static_cast<Eigen::Index>(x0);
  out.g_plus(i0) = 1.0;
  out.g_minus(i0) = -1.0;
  return out;
}

UrysohnCheck check_urysohn(const UrysohnPair& pair, const Vector& f, std::size_t x0) {
  UrysohnCheck out;
  const auto i0 = static_cast<Eigen::Index>(x0);
  const double c = f(i0);
  out.pinned = std::max(std::abs(pair.g_plus(i0) - 1.0), std::abs(pair.g_minus(i0) + 1.0));
  std::vector<bool> in_u(static_cast<std::size_t>(f.size()), false);
  for (std::size_t x : pair.u) in_u[x] = true;
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    if (in_u[static_cast<std::size_t>(x)]) continue;
    out.off_u = std::max({out.off_u, std::abs(pair.g_plus(x) - f(x)),
                          std::abs(pair.g_minus(x) - f(x))});
  }
  out.plus_dist = (f - pair.g_plus).lpNorm<Eigen::Infinity>();
  out.minus_dist = (f - pair.g_minus).lpNorm<Eigen::Infinity>();
  out.plus_excess = std::max(0.0, out.plus_dist - (1.0 - c + pair.gamma));
  out.minus_excess = std::max(0.0, out.minus_dist - (1.0 + c + pair.gamma));
  return out;
}

double pin_violation_gamma(double fx0, double gx0) {
  return 0.5 * std::min({std::abs(gx0 - fx0), 1.0 - fx0, 1.0 + fx0});
}

PinViolationWitness pin_violation_witness(const Mapping& big_g, const Vector& f0,
                                          std::size_t x0, double tol) {
  require_vector(big_g.space(), f0, "f0");
  if (x0 >= static_cast<std::size_t>(f0.size())) {
    fail(ErrorCode::kInvalidArgument, "pin_violation_witness: x0 out of range");
  }
  const auto i0 = static_cast<Eigen::Index>(x0);
  const double fx0 = f0(i0);
  if (std::abs(fx0) >= 1.0) {
    fail(ErrorCode::kInvalidArgument, "pin_violation_witness: |f0(x0)| must be < 1");
  }
  const Vector gf0 = big_g(f0);
  const double gx0 = gf0(i0);
  if (std::abs(gx0 - fx0) <= tol) {
    fail(ErrorCode::kInvalidArgument,
         "pin_violation_witness: G(f0)(x0) = f0(x0), hypothesis unsatisfied");
  }
  PinViolationWitness out;
  out.f0 = f0;
  out.x0 = x0;
  out.pair = urysohn_pair(f0, x0, pin_violation_gamma(fx0, gx0));
  out.direction = gx0 > fx0 ? PinDirection::kMinus : PinDirection::kPlus;
  out.perturbed = out.direction == PinDirection::kMinus ? out.pair.g_minus : out.pair.g_plus;
  out.lhs = norm(NormTag::kLinf, gf0 - big_g(out.perturbed));
  out.rhs = norm(NormTag::kLinf, f0 - out.perturbed);
  if (!(out.lhs > out.rhs)) {
    fail(ErrorCode::kCertificationFailed,
         "pin_violation_witness: lhs " + std::to_string(out.lhs) + " <= rhs " +
             std::to_string(out.rhs) + "; G does not pin the boundary at the perturbation");
  }
  return out;
}

GridOracleResult grid_extreme_oracle(const Mapping& f, double tol) {
  const auto* grid = std::get_if<GridNode>(&f.node().value);
  if (!grid) fail(ErrorCode::kUnsupported, "grid_extreme_oracle: GRID mapping required");
  if (f.space().norm() != NormTag::kLinf) {
    fail(ErrorCode::kUnsupported, "grid_extreme_oracle: only the linf range norm is supported");
  }
  const std::size_t p = grid->points.size();
  const int n = f.space().dim();
  GridOracleResult out;
  out.d.assign(p, Vector::Zero(n));

  std::vector<double> dist(p * p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      dist[a * p + b] = norm(f.space(), grid->points[a] - grid->points[b]);
    }
  }

  for (int k = 0; k < n; ++k) {
    std::vector<double> r(p);
    for (std::size_t a = 0; a < p; ++a) {
      r[a] = 1.0 - std::abs(grid->values[a](k));
      if (r[a] < -tol) fail(ErrorCode::kNotNonexpansive, "grid_extreme_oracle: value outside C");
      r[a] = std::max(r[a], 0.0);
    }
    const auto weight = [&](std::size_t a, std::size_t b) {
      const double w = dist[a * p + b] - std::abs(grid->values[a](k) - grid->values[b](k));
      if (w < -tol) {
        fail(ErrorCode::kNotNonexpansive, "grid_extreme_oracle: f is not nonexpansive");
      }
      return std::max(w, 0.0);
    };
    // Dijkstra from a virtual source with edge a -> r[a]: u = largest
    // admissible |d_k| at each point.
    std::vector<double> u = r;
    std::vector<bool> done(p, false);
    for (std::size_t it = 0; it < p; ++it) {
      std::size_t best = p;
      for (std::size_t a = 0; a < p; ++a) {
        if (!done[a] && (best == p || u[a] < u[best])) best = a;
      }
      done[best] = true;
      for (std::size_t b = 0; b < p; ++b) {
        if (!done[b]) u[b] = std::min(u[b], u[best] + weight(best, b));
      }
    }
    for (std::size_t a = 0; a < p; ++a) {
      out.d[a](k) = u[a];
      out.max_slack = std::max(out.max_slack, u[a]);
    }
  }
  out.extreme = out.max_slack <= tol;
  if (out.extreme) {
    for (Vector& v : out.d) v.setZero();
  }
  return out;
}

DecompositionCertificate reduce_to_identity(const Mapping& iso,
                                            const DecompositionCertificate& cert,
                                            double tol) {
  Matrix a;
  if (const auto* lin = std::get_if<LinearNode>(&iso.node().value)) {
    a = lin->matrix;
  } else if (const auto* aff = std::get_if<AffineNode>(&iso.node().value)) {
    if (aff->offset.lpNorm<Eigen::Infinity>() > tol) {
      fail(ErrorCode::kInvalidArgument,
           "reduce_to_identity: a translation cannot map C onto C");
    }
    a = aff->matrix;
  } else {
    fail(ErrorCode::kUnsupported, "reduce_to_identity: iso must be linear or affine");
  }
  const Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) fail(ErrorCode::kInvalidArgument, "reduce_to_identity: iso is not invertible");
  const Matrix inv = lu.inverse();
  const NormTag tag = iso.space().norm();
  if (operator_norm(tag, a) > 1.0 + tol || operator_norm(tag, inv) > 1.0 + tol) {
    fail(ErrorCode::kInvalidArgument, "reduce_to_identity: iso is not an isometry");
  }
  if (!cert.target.same_node(iso) &&
      distance_infty(cert.target, iso).value > kCertResidualTol) {
    fail(ErrorCode::kInvalidArgument, "reduce_to_identity: certificate is for a different map");
  }
  return make_certificate(Mapping::identity(iso.space()), cert.lambda,
                          compose_linear_left(inv, cert.g),
                          compose_linear_left(inv, cert.h));
}

}  // namespace nonexp
