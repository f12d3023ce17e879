#include "nonexp/pf_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nonexp/error.hpp"

namespace nonexp {

bool FeasibleLambdaSet::contains(double lambda) const noexcept {
  return std::any_of(feasible.begin(), feasible.end(), [&](const LambdaInterval& i) {
    return i.lo <= lambda && lambda <= i.hi;
  });
}

std::optional<double> FeasibleLambdaSet::representative() const noexcept {
  if (feasible.empty()) return std::nullopt;
  return 0.5 * (feasible.front().lo + feasible.front().hi);
}

std::string_view to_string(HullStatus status) noexcept {
  switch (status) {
    case HullStatus::kCertified: return "CERTIFIED";
    case HullStatus::kNotInHull: return "NOT_IN_HULL";
    case HullStatus::kOutsideM: return "OUTSIDE_M";
    case HullStatus::kFailed: return "FAILED";
  }
  return "?";
}

namespace {

// Relative slack in the feasibility tests, so h's norms stay <= 1 + 1e-13.
constexpr double kFeasSlack = 1e-13;

void require_window(double q) {
  if (!std::isfinite(q) || q <= 0.0 || q >= 0.5) {
    fail(ErrorCode::kInvalidArgument, "q outside (0, 1/2)");
  }
}

const Matrix& linear_matrix(const Mapping& m, const char* what) {
  const auto* lin = std::get_if<LinearNode>(&m.node().value);
  if (!lin) {
    fail(ErrorCode::kUnsupported,
         std::string(what) + ": exact membership needs linear mappings");
  }
  return lin->matrix;
}

// Row constraint ||F_i - (1 - lambda) G_i||_1 <= lambda; convex in lambda.
struct RowConstraint {
  Vector f;
  Vector g;

  double excess(double lambda) const {
    return (f - (1.0 - lambda) * g).lpNorm<1>() - lambda * (1.0 + kFeasSlack);
  }
  bool feasible(double lambda) const { return excess(lambda) <= 0.0; }
};

// Boundary of a convex feasible set between an infeasible and a feasible
// point, returned on the feasible side.
double bisect_boundary(const RowConstraint& row, double infeasible, double feasible) {
  while (std::abs(feasible - infeasible) > 0.25 * kLambdaBisectionTol) {
    const double mid = 0.5 * (infeasible + feasible);
    if (row.feasible(mid)) {
      feasible = mid;
    } else {
      infeasible = mid;
    }
  }
  return feasible;
}

std::optional<LambdaInterval> row_interval(const RowConstraint& row, double q) {
  const double lo_w = q;
  const double hi_w = 1.0 - q;
  // Piecewise linear: the minimum sits at a breakpoint or a window end.
  double best = lo_w;
  double best_val = row.excess(lo_w);
  const auto try_point = [&](double l) {
    if (l < lo_w || l > hi_w) return;
    const double v = row.excess(l);
    if (v < best_val) {
      best_val = v;
      best = l;
    }
  };
  try_point(hi_w);
  for (Eigen::Index j = 0; j < row.g.size(); ++j) {
    if (row.g(j) != 0.0) try_point(1.0 - row.f(j) / row.g(j));
  }
  if (best_val > 0.0) return std::nullopt;

  LambdaInterval out{lo_w, hi_w};
  if (!row.feasible(lo_w)) {
    out.lo = std::min(bisect_boundary(row, lo_w, best) + kLambdaBisectionTol, best);
  }
  if (!row.feasible(hi_w)) {
    out.hi = std::max(bisect_boundary(row, hi_w, best) - kLambdaBisectionTol, best);
  }
  return out;
}

std::vector<Vector> joint_points(const Mapping& f, const Mapping& g, bool& lattice) {
  auto df = sample_domain(f);
  auto dg = sample_domain(g);
  lattice = false;
  if (df && dg) {
    GridNode lookup{*dg, *dg};
    std::vector<Vector> out;
    for (const Vector& p : *df) {
      if (lookup.find(p)) out.push_back(p);
    }
    if (out.empty()) {
      fail(ErrorCode::kInvalidArgument, "mappings share no sample points");
    }
    return out;
  }
  if (df) return *df;
  if (dg) return *dg;
  lattice = true;
  return probe_lattice(f.space());
}

FeasibleLambdaSet scan_membership(const Mapping& f, const Mapping& g, double q,
                                  double step) {
  if (!std::isfinite(step) || step <= 0.0) {
    fail(ErrorCode::kInvalidArgument, "lambda scan step must be positive");
  }
  const NormTag tag = f.space().norm();
  bool lattice = false;
  const std::vector<Vector> pts = joint_points(f, g, lattice);
  std::vector<Vector> fv, gv;
  for (const Vector& p : pts) {
    fv.push_back(f(p));
    gv.push_back(g(p));
  }

  const auto feasible = [&](double lambda) {
    const double cap = lambda * (1.0 + kFeasSlack);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (norm(tag, fv[i] - (1.0 - lambda) * gv[i]) > cap) return false;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double lhs = norm(tag, (fv[i] - fv[j]) - (1.0 - lambda) * (gv[i] - gv[j]));
        if (lhs > cap * norm(tag, pts[i] - pts[j])) return false;
      }
    }
    return true;
  };

  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double l = q + static_cast<double>(k) * step;
    if (l >= 1.0 - q) break;
    grid.push_back(l);
  }
  grid.push_back(1.0 - q);

  FeasibleLambdaSet out;
  out.q = q;
  out.method = Method::scanned(step);
  if (lattice) out.method.samples = pts.size();
  // Feasibility is convex in lambda, so consecutive feasible scan points
  // certify the whole segment between them.
  std::optional<LambdaInterval> run;
  for (double l : grid) {
    if (feasible(l)) {
      if (run) {
        run->hi = l;
      } else {
        run = LambdaInterval{l, l};
      }
    } else if (run) {
      out.feasible.push_back(*run);
      run.reset();
    }
  }
  if (run) out.feasible.push_back(*run);
  return out;
}

}  // namespace

FeasibleLambdaSet pfq_membership(const Mapping& f, const Mapping& g, double q,
                                 MembershipMethod method, double scan_step) {
  require_window(q);
  if (!(f.space() == g.space())) {
    fail(ErrorCode::kDimensionMismatch, "pfq_membership: different spaces");
  }
  if (method == MembershipMethod::kGridScan) {
    return scan_membership(f, g, q, scan_step);
  }
  if (f.space().norm() != NormTag::kLinf) {
    fail(ErrorCode::kUnsupported, "exact membership is implemented for linf only");
  }
  const Matrix& fm = linear_matrix(f, "pfq_membership");
  const Matrix& gm = linear_matrix(g, "pfq_membership");

  FeasibleLambdaSet out;
  out.q = q;
  out.method = Method::exact();
  LambdaInterval total{q, 1.0 - q};
  for (Eigen::Index i = 0; i < fm.rows(); ++i) {
    const RowConstraint row{fm.row(i).transpose(), gm.row(i).transpose()};
    const auto iv = row_interval(row, q);
    if (!iv) return out;
    total.lo = std::max(total.lo, iv->lo);
    total.hi = std::min(total.hi, iv->hi);
  }
  if (total.lo <= total.hi) out.feasible.push_back(total);
  return out;
}

Mapping complement_member(const Mapping& f, const Mapping& g, double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0) {
    fail(ErrorCode::kInvalidArgument, "complement_member: lambda must lie in (0, 1]");
  }
  return mix(g, f, 1.0 / lambda);
}

DecompositionCertificate certificate_at(const Mapping& f, const Mapping& g,
                                        double lambda) {
  if (lambda == 0.0) return make_certificate(f, 0.0, g, f);
  return make_certificate(f, lambda, g, complement_member(f, g, lambda));
}

DecompositionCertificate ray_extend(const DecompositionCertificate& cert, double t) {
  if (!std::isfinite(t)) fail(ErrorCode::kInvalidArgument, "ray_extend: t not finite");
  const Mapping& f = cert.target;
  const Mapping member = mix(f, cert.g, t);
  const SelfMapCheck check = check_self_map(member, kCertPartTol);
  if (!check.ok) {
    fail(ErrorCode::kNotNonexpansive,
         "ray_extend: extended point leaves M (lip " +
             std::to_string(check.lipschitz) + ", sup norm " +
             std::to_string(check.max_norm) + ")");
  }
  if (t == 0.0 || cert.lambda == 0.0) return make_certificate(f, 0.0, member, f);

  DecompositionCertificate base = cert;
  double ts = t;
  if (t < 0.0) {
    // f + t (g - f) = f + t' (h - f) with t' = -t lambda / (1 - lambda).
    base = swap_parts(cert);
    ts = -t * cert.lambda / (1.0 - cert.lambda);
  }
  const double l = base.lambda;
  const double mu = l * ts / (l * ts + 1.0 - l);
  return make_certificate(f, mu, member, base.h);
}

MergeResult merge_certs(const DecompositionCertificate& first,
                        const DecompositionCertificate& second, double theta) {
  if (!std::isfinite(theta) || theta < 0.0 || theta >= 1.0) {
    fail(ErrorCode::kInvalidArgument, "merge_certs: theta must lie in [0, 1)");
  }
  const Mapping& f = first.target;
  if (!first.target.same_node(second.target) &&
      distance_infty(first.target, second.target).value > kCertResidualTol) {
    fail(ErrorCode::kInvalidArgument, "merge_certs: certificates have different targets");
  }
  const double l1 = first.lambda;
  const double l2 = second.lambda;

  MergeResult out{first, 0.0, l1, 0.0, {}};
  const double denom = 1.0 - (theta * l1 + (1.0 - theta) * l2);
  if (!(denom > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "merge_certs: degenerate denominator");
  }
  out.beta = theta * (1.0 - l1) / denom;
  out.lambda = (1.0 - out.beta) * l1 + out.beta * l2;
  out.mu = out.lambda > 0.0 ? out.beta * l2 / out.lambda : 0.0;

  const double b = out.beta, l = out.lambda, m = out.mu;
  out.system_residuals = {
      std::abs((1.0 - l) * (1.0 - theta) - (1.0 - b) * (1.0 - l1)),
      std::abs((1.0 - l) * theta - b * (1.0 - l2)),
      std::abs(l * (1.0 - m) - (1.0 - b) * l1),
      std::abs(l * m - b * l2),
  };
  if (theta == 0.0) return out;

  out.cert = make_certificate(f, l, mix(first.g, second.g, theta),
                              mix(first.h, second.h, m));
  return out;
}

DecompositionCertificate complement_witness(
    const DecompositionCertificate& combo_cert, const Mapping& g1,
    const Mapping& g2, double theta) {
  if (!std::isfinite(theta) || theta < 0.0 || theta >= 1.0) {
    fail(ErrorCode::kInvalidArgument, "complement_witness: theta must lie in [0, 1)");
  }
  const double lambda = combo_cert.lambda;
  const double mu = lambda * (1.0 - theta) + theta;
  if (mu == 0.0) {
    fail(ErrorCode::kDegenerate,
         "complement_witness: mu = 0 (lambda = theta = 0), g1 is the trivial member");
  }
  const double gap = distance_infty(combo_cert.g, mix(g1, g2, theta)).value;
  if (gap > kCertResidualTol) {
    fail(ErrorCode::kInvalidArgument,
         "complement_witness: certificate member is not (1 - theta) g1 + theta g2");
  }
  return make_certificate(combo_cert.target, mu, g1,
                          mix(g2, combo_cert.h, lambda / mu));
}

namespace {

std::vector<Vector> hull_points(const Mapping& f) {
  if (auto domain = sample_domain(f)) return *domain;
  return probe_lattice(f.space(), 3);
}

Vector stacked_difference(const Mapping& g, const Mapping& f,
                          const std::vector<Vector>& pts) {
  const int n = f.space().dim();
  Vector out(static_cast<Eigen::Index>(pts.size()) * n);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * n, n) = g(pts[i]) - f(pts[i]);
  }
  return out;
}

// The member (1/n) sum_i ((1 - beta_i) f + beta_i g_i) with its certificate,
// assembled from merges exactly as the convexity argument does.
DecompositionCertificate averaged_member(
    const Mapping& f, const std::vector<DecompositionCertificate>& parts,
    const std::vector<double>& beta) {
  const DecompositionCertificate trivial = trivial_certificate(f);
  std::optional<DecompositionCertificate> acc;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    DecompositionCertificate shrunk =
        beta[i] >= 1.0 ? parts[i] : merge_certs(trivial, parts[i], beta[i]).cert;
    if (!acc) {
      acc = std::move(shrunk);
    } else {
      acc = merge_certs(*acc, shrunk, 1.0 / static_cast<double>(i + 1)).cert;
    }
  }
  return acc ? *acc : trivial;
}

}  // namespace

AffineHullReport affine_hull_probe(
    const Mapping& f, const std::vector<DecompositionCertificate>& certs,
    const std::vector<Mapping>& candidates, const std::vector<double>& alpha) {
  if (certs.empty()) {
    fail(ErrorCode::kInvalidArgument, "affine_hull_probe: no valid certs supplied");
  }
  for (const auto& c : certs) {
    if (!c.target.same_node(f) && distance_infty(c.target, f).value > kCertResidualTol) {
      fail(ErrorCode::kInvalidArgument,
           "affine_hull_probe: certificate for a different target");
    }
  }

  const std::vector<Vector> pts = hull_points(f);
  std::vector<Vector> directions;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < certs.size(); ++i) {
    if (certs[i].lambda == 0.0) continue;
    Vector d = stacked_difference(certs[i].g, f, pts);
    if (d.norm() <= 1e-12) continue;
    directions.push_back(d);
    if (numerical_rank(directions, kHullRankTol) < static_cast<int>(directions.size())) {
      directions.pop_back();
      continue;
    }
    kept.push_back(i);
  }

  std::vector<double> weights = alpha;
  if (weights.empty()) weights.assign(kept.size(), 1.0);
  if (weights.size() != kept.size()) {
    fail(ErrorCode::kInvalidArgument,
         "affine_hull_probe: alpha must have one entry per independent direction (" +
             std::to_string(kept.size()) + ")");
  }
  double total = 0.0;
  for (double a : weights) {
    if (!(a > 0.0)) fail(ErrorCode::kInvalidArgument, "affine_hull_probe: alpha must be positive");
    total += a;
  }

  std::vector<DecompositionCertificate> parts;
  std::vector<Mapping> members;
  std::vector<double> beta;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    parts.push_back(certs[kept[k]]);
    members.push_back(certs[kept[k]].g);
    beta.push_back(weights[k] / total);
  }
  DecompositionCertificate tilde = averaged_member(f, parts, beta);

  FeasibleLambdaSet window;
  if (tilde.lambda > 0.0) {
    const double q = std::min(0.49, 0.5 * std::min(tilde.lambda, 1.0 - tilde.lambda));
    const bool linear = f.kind() == MappingKind::kLinear &&
                        tilde.g.kind() == MappingKind::kLinear &&
                        f.space().norm() == NormTag::kLinf;
    window = pfq_membership(f, tilde.g, q,
                            linear ? MembershipMethod::kExactLinear
                                   : MembershipMethod::kGridScan);
  }

  AffineHullReport report{
      AffineHullBasis{f, members, kept, weights, beta, tilde.g, tilde, window, pts.size()},
      {}};

  Matrix basis(directions.empty() ? 0 : directions.front().size(),
               static_cast<Eigen::Index>(directions.size()));
  for (std::size_t k = 0; k < directions.size(); ++k) {
    basis.col(static_cast<Eigen::Index>(k)) = directions[k];
  }

  for (const Mapping& cand : candidates) {
    HullCandidateReport rep;
    try {
      const SelfMapCheck in_m = check_self_map(cand, kCertPartTol);
      if (!in_m.ok) {
        rep.status = HullStatus::kOutsideM;
        rep.detail = "candidate is not a nonexpansive self-map";
        report.candidates.push_back(std::move(rep));
        continue;
      }
      const Vector v = stacked_difference(cand, f, pts);
      Vector coef = Vector::Zero(static_cast<Eigen::Index>(directions.size()));
      if (!directions.empty()) {
        coef = basis.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(v);
      }
      const Vector fitted = directions.empty() ? Vector::Zero(v.size()) : Vector(basis * coef);
      rep.projection_residual = (fitted - v).norm();
      rep.coefficients.assign(coef.data(), coef.data() + coef.size());
      if (rep.projection_residual > kHullRankTol * std::max(1.0, v.norm())) {
        rep.status = HullStatus::kNotInHull;
        report.candidates.push_back(std::move(rep));
        continue;
      }
      if (v.norm() <= 1e-12) {
        rep.certificate = make_certificate(f, 0.0, cand, f);
        rep.status = HullStatus::kCertified;
        report.candidates.push_back(std::move(rep));
        continue;
      }

      // Make every coefficient positive by reading negative ones along h_i.
      std::vector<DecompositionCertificate> chosen;
      std::vector<double> positive;
      for (std::size_t k = 0; k < kept.size(); ++k) {
        const double a = coef(static_cast<Eigen::Index>(k));
        if (std::abs(a) <= 1e-14) continue;
        const DecompositionCertificate& c = certs[kept[k]];
        if (a > 0.0) {
          chosen.push_back(c);
          positive.push_back(a);
        } else {
          chosen.push_back(swap_parts(c));
          positive.push_back(-a * c.lambda / (1.0 - c.lambda));
        }
      }
      double sum = 0.0;
      for (double a : positive) sum += a;
      std::vector<double> b;
      for (double a : positive) b.push_back(a / sum);
      const DecompositionCertificate g_tilde = averaged_member(f, chosen, b);
      const double t = static_cast<double>(chosen.size()) * sum;
      const DecompositionCertificate along = ray_extend(g_tilde, t);
      rep.certificate = make_certificate(f, along.lambda, cand, along.h);
      rep.status = HullStatus::kCertified;
    } catch (const Error& e) {
      rep.status = HullStatus::kFailed;
      rep.detail = e.what();
    }
    report.candidates.push_back(std::move(rep));
  }
  return report;
}

}  // namespace nonexp
