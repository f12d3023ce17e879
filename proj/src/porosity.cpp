#include "nonexp/porosity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nonexp/rng.hpp"

namespace nonexp {

PorosityParams PorosityParams::make(double q, double epsilon) {
  if (!std::isfinite(q) || q <= 0.0 || q >= 0.5) {
    fail(ErrorCode::kInvalidArgument, "q outside (0, 1/2)");
  }
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    fail(ErrorCode::kInvalidArgument, "epsilon must be positive");
  }
  const double a = q / (2.0 * (1.0 + q));
  return {q, epsilon, a, a};
}

std::string_view to_string(ProbeKind kind) noexcept {
  return kind == ProbeKind::kRandom ? "RANDOM" : "PAIR_SPLIT";
}

namespace {

double pair_ratio(const Mapping& f, const Vector& a, const Vector& b, double& eta) {
  eta = norm(f.space(), b - a);
  if (eta == 0.0) return 0.0;
  return norm(f.space(), f(b) - f(a)) / eta;
}

std::vector<NearIsometricPair> finite_pairs(const Mapping& f,
                                            const std::vector<Vector>& pts,
                                            double delta, double epsilon,
                                            std::size_t keep) {
  std::vector<Vector> vals;
  for (const Vector& p : pts) vals.push_back(f(p));
  std::vector<NearIsometricPair> found;
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      const double eta = norm(f.space(), pts[j] - pts[i]);
      if (!(eta > 0.0) || !(eta < epsilon)) continue;
      const double ratio = norm(f.space(), vals[j] - vals[i]) / eta;
      best = std::max(best, ratio);
      if (ratio > 1.0 - delta) found.push_back({pts[i], pts[j], eta, ratio});
    }
  }
  if (found.empty()) {
    throw NoPairFound("no sample pair with eta < epsilon and ratio > 1 - delta", best);
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const NearIsometricPair& a, const NearIsometricPair& b) {
                     if (a.ratio != b.ratio) return a.ratio > b.ratio;
                     return a.eta > b.eta;
                   });
  if (found.size() > keep) found.resize(keep);
  return found;
}

bool in_ball(const Space& space, const Vector& x) {
  return norm(space, x) <= 1.0 + kBallTol;
}

}  // namespace

std::vector<NearIsometricPair> near_isometric_pairs(const Mapping& f, double delta,
                                                    double epsilon,
                                                    const PairSearchBudget& budget) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon must be positive");
  const std::size_t keep = std::max<std::size_t>(1, budget.alternatives);
  if (auto domain = sample_domain(f)) {
    return finite_pairs(f, *domain, delta, epsilon, keep);
  }

  const LipschitzReport lip = lipschitz_bounds(f, budget.sampling);
  Vector a = lip.witness.x;
  Vector b = lip.witness.y;
  double eta = 0.0;
  double ratio = pair_ratio(f, a, b, eta);
  if (!(ratio > 1.0 - delta)) {
    throw NoPairFound("Lipschitz witness ratio does not exceed 1 - delta", lip.lower);
  }
  // Halving keeps the better half; the triangle inequality means the ratio
  // never drops.
  for (int step = 0; !(eta < epsilon); ++step) {
    if (step >= budget.bisection_steps) {
      throw NoPairFound("bisection budget exhausted before eta < epsilon", ratio);
    }
    const Vector m = 0.5 * (a + b);
    double e1 = 0.0, e2 = 0.0;
    const double r1 = pair_ratio(f, a, m, e1);
    const double r2 = pair_ratio(f, m, b, e2);
    if (r1 >= r2) {
      b = m;
      ratio = r1;
      eta = e1;
    } else {
      a = m;
      ratio = r2;
      eta = e2;
    }
  }
  if (!(ratio > 1.0 - delta) || !(eta > 0.0)) {
    throw NoPairFound("bisection lost the ratio", ratio);
  }

  std::vector<NearIsometricPair> out{{a, b, eta, ratio}};
  const Vector d = b - a;
  for (int s = 1; out.size() < keep && s <= 64; ++s) {
    for (int sign : {1, -1}) {
      if (out.size() >= keep) break;
      const Vector a2 = a + (sign * s * 0.5) * d;
      const Vector b2 = b + (sign * s * 0.5) * d;
      if (!in_ball(f.space(), a2) || !in_ball(f.space(), b2)) continue;
      double e = 0.0;
      const double r = pair_ratio(f, a2, b2, e);
      if (r > 1.0 - delta && e > 0.0 && e < epsilon) out.push_back({a2, b2, e, r});
    }
  }
  return out;
}

NearIsometricPair find_near_isometric_pair(const Mapping& f, double delta,
                                           double epsilon,
                                           const PairSearchBudget& budget) {
  return near_isometric_pairs(f, delta, epsilon, budget).front();
}

PorosityWitness build_porosity_witness(const Mapping& f, const Mapping& g, double q,
                                       double epsilon, const PairSearchBudget& budget) {
  if (!(f.space() == g.space())) {
    fail(ErrorCode::kDimensionMismatch, "build_porosity_witness: f and g on different spaces");
  }
  const PorosityParams params = PorosityParams::make(q, epsilon);
  const SelfMapCheck gcheck = check_self_map(g);
  if (!gcheck.ok) {
    fail(ErrorCode::kNotNonexpansive, "build_porosity_witness: g is not a nonexpansive self-map");
  }
  PairSearchBudget b = budget;
  b.alternatives = std::max<std::size_t>(b.alternatives, kPorosityRetries);
  const std::vector<NearIsometricPair> pairs =
      near_isometric_pairs(f, params.delta, epsilon, b);

  std::vector<Vector> base = evaluation_points(f);
  std::size_t tried = 0;
  for (const NearIsometricPair& pair : pairs) {
    if (tried >= kPorosityRetries) break;
    ++tried;
    std::vector<Vector> samples = base;
    GridNode lookup{samples, samples};
    std::size_t ix = 0, iy = 0;
    if (auto i = lookup.find(pair.x0)) {
      ix = *i;
    } else {
      ix = samples.size();
      samples.push_back(pair.x0);
    }
    lookup = GridNode{samples, samples};
    if (auto i = lookup.find(pair.y)) {
      iy = *i;
    } else {
      iy = samples.size();
      samples.push_back(pair.y);
    }

    const Mapping g_tilde = Mapping::retract(g, pair.eta, pair.x0);
    if ((g_tilde(pair.y) - g_tilde(pair.x0)).lpNorm<Eigen::Infinity>() != 0.0) {
      fail(ErrorCode::kDegenerate, "build_porosity_witness: retraction does not collapse the pair");
    }
    double cd = 0.0;
    for (const Vector& p : samples) cd = std::max(cd, norm(f.space(), g_tilde(p) - g(p)));
    if (!(cd > 0.0)) continue;

    PorosityWitness w{params, pair, g, g_tilde, std::move(samples), ix, iy,
                      cd, pair.eta, params.alpha * cd, tried};
    return w;
  }
  fail(ErrorCode::kDegenerate,
       "build_porosity_witness: d(g~, g) = 0 on the samples for all " +
           std::to_string(tried) + " candidate pairs");
}

namespace {

// Bound on ||v|| for ||v||_inf <= 1.
double coordinate_factor(const Space& space) {
  switch (space.norm()) {
    case NormTag::kL1: return space.dim();
    case NormTag::kL2: return std::sqrt(static_cast<double>(space.dim()));
    case NormTag::kLinf: return 1.0;
  }
  return space.dim();
}

struct ProbeContext {
  const PorosityWitness& w;
  const Space& space;
  std::vector<Vector> center;  // g~ on the samples
  double min_pair_dist = 0.0;
  Vector split_dir;
};

bool admissible(const ProbeContext& ctx, const std::vector<Vector>& probe, double& dist) {
  const auto& s = ctx.w.samples;
  dist = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    dist = std::max(dist, norm(ctx.space, probe[i] - ctx.center[i]));
    if (norm(ctx.space, probe[i]) > 1.0 + 1e-12) return false;
  }
  if (dist > ctx.w.radius) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (norm(ctx.space, probe[i] - probe[j]) > norm(ctx.space, s[i] - s[j]) * (1.0 + 1e-12)) {
        return false;
      }
    }
  }
  return true;
}

// (1 - tau) g~ plus bounded noise: contracting first leaves room for the
// noise without losing nonexpansiveness.
std::vector<Vector> random_probe(const ProbeContext& ctx, CounterRng& rng, double& tau) {
  const double radius = ctx.w.radius;
  tau = rng.uniform(0.0, 0.5 * radius);
  const double c = coordinate_factor(ctx.space);
  const double nu = std::min({tau * ctx.min_pair_dist / 2.0, radius - tau, tau}) / c;
  std::vector<Vector> out;
  for (const Vector& v : ctx.center) {
    Vector p = (1.0 - tau) * v;
    for (Eigen::Index k = 0; k < p.size(); ++k) p(k) += rng.uniform(-nu, nu);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Vector> split_probe(const ProbeContext& ctx, CounterRng& rng, double& dist) {
  const double radius = ctx.w.radius;
  const double tau = rng.uniform(0.0, 0.5 * radius);
  double s = radius - tau;
  std::vector<Vector> base;
  for (const Vector& v : ctx.center) base.push_back((1.0 - tau) * v);
  for (int halvings = 0; halvings < 80; ++halvings, s *= 0.5) {
    std::vector<Vector> probe = base;
    probe[ctx.w.y_index] += s * ctx.split_dir;
    probe[ctx.w.x0_index] -= s * ctx.split_dir;
    if (admissible(ctx, probe, dist)) return probe;
  }
  admissible(ctx, base, dist);
  return base;
}

}  // namespace

BallCertificate certify_ball_empty(const PorosityWitness& witness, const Mapping& f,
                                   std::size_t probes, double lambda_step,
                                   std::uint64_t seed) {
  if (!std::isfinite(lambda_step) || lambda_step <= 0.0) {
    fail(ErrorCode::kInvalidArgument, "lambda step must be positive");
  }
  if (!(witness.radius > 0.0)) fail(ErrorCode::kDegenerate, "witness radius is zero");
  const Space& space = f.space();
  const double q = witness.params.q;
  const double eta = witness.pair.eta;

  ProbeContext ctx{witness, space, {}, 0.0, Vector::Zero(space.dim())};
  for (const Vector& p : witness.samples) ctx.center.push_back(witness.g_tilde(p));
  ctx.min_pair_dist = 2.0;
  for (std::size_t i = 0; i < witness.samples.size(); ++i) {
    for (std::size_t j = i + 1; j < witness.samples.size(); ++j) {
      ctx.min_pair_dist = std::min(ctx.min_pair_dist,
                                   norm(space, witness.samples[i] - witness.samples[j]));
    }
  }
  const Vector df = f(witness.pair.y) - f(witness.pair.x0);
  if (norm(space, df) > 0.0) {
    ctx.split_dir = df / norm(space, df);
  } else {
    ctx.split_dir(0) = 1.0;
  }

  std::vector<double> lambdas;
  for (std::size_t k = 0;; ++k) {
    const double l = q + static_cast<double>(k) * lambda_step;
    if (l >= 1.0 - q) break;
    lambdas.push_back(l);
  }
  lambdas.push_back(1.0 - q);

  BallCertificate out;
  out.requested = probes;
  out.lambda_count = lambdas.size();
  out.lambda_step = lambda_step;
  out.min_margin = std::numeric_limits<double>::infinity();
  out.proof_margin_bound =
      eta * ((witness.pair.ratio - 2.0 * witness.params.alpha * q) / (1.0 - q) - 1.0);

  const std::size_t max_attempts = 20 * probes + 20;
  for (std::size_t attempt = 0; out.accepted < probes && attempt < max_attempts; ++attempt) {
    CounterRng rng(seed, attempt);
    const ProbeKind kind = out.accepted % 4 == 3 ? ProbeKind::kPairSplit : ProbeKind::kRandom;
    double dist = 0.0;
    std::vector<Vector> probe;
    if (kind == ProbeKind::kPairSplit) {
      probe = split_probe(ctx, rng, dist);
    } else {
      double tau = 0.0;
      probe = random_probe(ctx, rng, tau);
    }
    if (!admissible(ctx, probe, dist)) {
      ++out.rejected;
      continue;
    }
    const Vector dg = probe[witness.y_index] - probe[witness.x0_index];
    ProbeRecord rec{out.accepted, kind, dist, 0.0, std::numeric_limits<double>::infinity()};
    for (double l : lambdas) {
      const double margin = norm(space, (df - (1.0 - l) * dg) / l) - eta;
      if (margin < rec.min_margin) {
        rec.min_margin = margin;
        rec.worst_lambda = l;
      }
      if (!(margin > 0.0)) out.failures.push_back({out.accepted, l, margin});
    }
    out.min_margin = std::min(out.min_margin, rec.min_margin);
    out.records.push_back(rec);
    ++out.accepted;
  }
  if (out.records.empty()) out.min_margin = 0.0;
  return out;
}

}  // namespace nonexp
