// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "generators.hpp"
#include "nonexp/error.hpp"
#include "nonexp/extremality.hpp"
#include "nonexp/io.hpp"
#include "nonexp/pf_geometry.hpp"
#include "nonexp/porosity.hpp"
#include "oracles.hpp"

using namespace nonexp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double linf(const Vector& x) { return x.cwiseAbs().maxCoeff(); }

const Matrix& matrix_of(const Mapping& m) { return std::get<LinearNode>(m.node().value).matrix; }

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Recombination defect of a linear certificate on the linf^n vertices.
double vertex_defect(const DecompositionCertificate& c) {
  double worst = 0.0;
  for (const Vector& v : oracle::ball_vertices(0, c.target.space().dim())) {
    worst = std::max(worst, linf(c.target(v) - ((1 - c.lambda) * c.g(v) + c.lambda * c.h(v))));
  }
  return worst;
}

// 1. Classifier against the row polytope oracle over every matrix with entries
//    in {-1, -1/2, 0, 1/2, 1}, rows rescaled into the l1 ball.
Outcome classifier_oracle() {
  const auto t0 = Clock::now();
  const double vals[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  std::size_t instances = 0, disagreements = 0, bad_certs = 0, extremal = 0;
  double worst_residual = 0.0, worst_norm = 0.0;
  for (int n : {2, 3}) {
    // Oracle verdict per distinct row, computed once.
    std::map<std::vector<double>, bool> row_extreme;
    const std::size_t total = static_cast<std::size_t>(std::pow(5, n * n));
    for (std::size_t code = 0; code < total; ++code) {
      Matrix a(n, n);
      std::size_t c = code;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          a(i, j) = vals[c % 5];
          c /= 5;
        }
        const double l1 = a.row(i).lpNorm<1>();
        if (l1 > 1.0) a.row(i) /= l1;
      }
      bool oracle_extremal = true;
      for (int i = 0; i < n && oracle_extremal; ++i) {
        std::vector<double> key;
        for (int j = 0; j < n; ++j) key.push_back(a(i, j));
        auto it = row_extreme.find(key);
        if (it == row_extreme.end()) {
          it = row_extreme.emplace(key, oracle::row_polytope_extreme(a.row(i))).first;
        }
        oracle_extremal = it->second;
      }
      const LinearExtremalityVerdict v = classify_linear_extremal(a, 1e-12);
      ++instances;
      if (v.extremal != oracle_extremal) ++disagreements;
      if (v.extremal) {
        ++extremal;
        continue;
      }
      if (!v.certificate) {
        ++bad_certs;
        continue;
      }
      const double res = std::max(v.certificate->residual, vertex_defect(*v.certificate));
      const double ng = oracle::operator_norm_vertices(0, matrix_of(v.certificate->g));
      const double nh = oracle::operator_norm_vertices(0, matrix_of(v.certificate->h));
      worst_residual = std::max(worst_residual, res);
      worst_norm = std::max({worst_norm, ng, nh});
      if (res > 1e-12 || ng > 1 + 1e-12 || nh > 1 + 1e-12) ++bad_certs;
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = instances >= 10000 && disagreements == 0 && bad_certs == 0 && secs < 60.0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "instances=%zu extremal=%zu disagreements=%zu bad_certificates=%zu "
                "max_residual=%.3g max_part_norm=%.17g runtime=%.1fs",
                instances, extremal, disagreements, bad_certs, worst_residual, worst_norm, secs);
  o.detail = buf;
  return o;
}

// 2. Every signed permutation for n in {2, 3}.
Outcome rotations() {
  std::size_t count = 0, failures = 0;
  CounterRng rng(2002);
  for (int n : {2, 3}) {
    const Space s(n, NormTag::kLinf);
    std::vector<PointPair> pairs;
    for (int k = 0; k < 1000; ++k) pairs.push_back({gen::in_ball(rng, s), gen::in_ball(rng, s)});
    std::vector<std::size_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> signs;
        for (int i = 0; i < n; ++i) signs.push_back((mask >> i) & 1 ? -1 : 1);
        const Mapping r = make_rotation(s, perm, signs);
        ++count;
        const bool ok = classify_linear_extremal(matrix_of(r), 1e-12).extremal &&
                        is_isometry_on_pairs(r, pairs, 1e-12).isometric;
        if (!ok) ++failures;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  Outcome o;
  o.pass = count == 4 * 2 + 8 * 6 && failures == 0;
  o.detail = "rotations=" + std::to_string(count) + " failures=" + std::to_string(failures) +
             " pairs_each=1000";
  return o;
}

// 3. Urysohn pairs on random finite K.
Outcome urysohn() {
  CounterRng rng(3003);
  std::size_t failures = 0, tight_cases = 0, tight_failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(50));
    Vector f(n);
    for (int i = 0; i < n; ++i) f(i) = rng.uniform(-1, 1);
    if (rng.index(4) == 0) f(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)))) = rng.sign();
    std::size_t x0 = rng.index(static_cast<std::size_t>(n));
    if (trial % 2 == 0) {
      // x0 at the minimum of f, so f(x0) is also the minimum over U.
      Eigen::Index arg = 0;
      f.minCoeff(&arg);
      x0 = static_cast<std::size_t>(arg);
    }
    const auto xi = static_cast<Eigen::Index>(x0);
    if (std::abs(f(xi)) >= 1.0) f(xi) = 0.5 * f(xi);
    const double bound = std::min(1 - f(xi), 1 + f(xi));
    const double gamma = rng.uniform(0.001, 0.999) * bound;
    const auto profile = trial % 3 == 2 ? UrysohnProfile::kTent : UrysohnProfile::kIndicator;
    const UrysohnPair p = urysohn_pair(f, x0, gamma, profile);
    double err = std::max(std::abs(p.g_plus(xi) - 1), std::abs(p.g_minus(xi) + 1));
    double min_u = f(xi);
    for (int i = 0; i < n; ++i) {
      if (std::abs(f(i) - f(xi)) >= gamma) {
        err = std::max({err, std::abs(p.g_plus(i) - f(i)), std::abs(p.g_minus(i) - f(i))});
      } else {
        min_u = std::min(min_u, f(i));
      }
    }
    const double dplus = linf(f - p.g_plus), dminus = linf(f - p.g_minus);
    err = std::max({err, dplus - (1 - f(xi) + gamma), dminus - (1 + f(xi) + gamma), 0.0});
    worst = std::max(worst, err);
    if (err > 1e-12) ++failures;
    if (profile == UrysohnProfile::kIndicator && f(xi) == min_u) {
      ++tight_cases;
      if (std::abs(dplus - (1 - min_u)) > 1e-12) ++tight_failures;
    }
  }
  Outcome o;
  o.pass = failures == 0 && tight_failures == 0 && tight_cases > 0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "instances=1000 failures=%zu max_error=%.3g indicator_tight_cases=%zu tight_failures=%zu",
                failures, worst, tight_cases, tight_failures);
  o.detail = buf;
  return o;
}

// 4. Boundary-pinning toy maps G(v)(k) = v(k) + c_k (1 - |v(k)|).
Outcome pin_violation() {
  CounterRng rng(4004);
  std::size_t failures = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(10));
    const Space s(n, NormTag::kLinf);
    Vector c(n), f0(n);
    for (int i = 0; i < n; ++i) {
      c(i) = rng.sign() * rng.uniform(0.05, 0.5);
      f0(i) = rng.uniform(-0.95, 0.95);
    }
    const std::size_t x0 = rng.index(static_cast<std::size_t>(n));
    const auto big_g = [&](const Vector& v) {
      Vector out(n);
      for (int i = 0; i < n; ++i) out(i) = v(i) + c(i) * (1 - std::abs(v(i)));
      return out;
    };
    const auto xi = static_cast<Eigen::Index>(x0);
    const double gamma = pin_violation_gamma(f0(xi), big_g(f0)(xi));
    const UrysohnPair pair = urysohn_pair(f0, x0, gamma);
    const std::vector<Vector> pts = {f0, pair.g_minus, pair.g_plus};
    std::vector<Vector> vals;
    for (const Vector& p : pts) vals.push_back(big_g(p));
    try {
      const PinViolationWitness w = pin_violation_witness(Mapping::grid(s, pts, vals), f0, x0);
      min_margin = std::min(min_margin, w.lhs - w.rhs);
      if (!(w.lhs > w.rhs)) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  Outcome o;
  o.pass = failures == 0 && min_margin > 0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "maps=100 failures=%zu min_margin=%.6g", failures, min_margin);
  o.detail = buf;
  return o;
}

// 5. Ray, merge and complement on random certificate pairs.
Outcome pf_formulas() {
  CounterRng rng(5005);
  std::size_t failures = 0;
  double worst_res = 0.0, worst_sys = 0.0;
  const auto random_contraction = [&](int n, double rho) {
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1, 1);
    for (int r = 0; r < n; ++r) a.row(r) *= rho / a.row(r).lpNorm<1>();
    return a;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(2));
    const Space s(n, NormTag::kLinf);
    const double rho = rng.uniform(0, 0.6);
    const Matrix f = random_contraction(n, rho);
    const Mapping fm = Mapping::linear(s, f);
    const auto cert = [&] {
      const double lam = rng.uniform((1 + rho) / 2, 0.98);
      const Matrix g = random_contraction(n, rng.uniform());
      return make_certificate(fm, lam, Mapping::linear(s, g),
                              Mapping::linear(s, (f - (1 - lam) * g) / lam));
    };
    try {
      const DecompositionCertificate c1 = cert(), c2 = cert();
      const double t = rng.uniform(-(1 - rho) / (1 + rho), 1.0);
      const DecompositionCertificate ray = ray_extend(c1, t);
      const double theta = rng.uniform();
      const MergeResult m = merge_certs(c1, c2, theta);
      const DecompositionCertificate w =
          complement_witness(m.cert, c1.g, c2.g, theta);
      double res = 0.0;
      for (const auto* c : {&ray, &m.cert, &w}) {
        res = std::max({res, c->residual, vertex_defect(*c)});
        if (!(c->lambda >= 0 && c->lambda < 1)) ++failures;
      }
      for (double p : {m.beta, m.lambda, m.mu}) {
        if (!(p >= 0 && p < 1)) ++failures;
      }
      const double sys = *std::max_element(m.system_residuals.begin(), m.system_residuals.end());
      worst_res = std::max(worst_res, res);
      worst_sys = std::max(worst_sys, sys);
      if (res > 1e-10 || sys > 1e-12) ++failures;
    } catch (const Error& e) {
      std::fprintf(stderr, "  pf trial %d: %s\n", trial, e.what());
      ++failures;
    }
  }
  Outcome o;
  o.pass = failures == 0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "pairs=1000 failures=%zu max_residual=%.3g max_system_residual=%.3g",
                failures, worst_res, worst_sys);
  o.detail = buf;
  return o;
}

// 6. Porosity witness for the identity on a 9x9 grid of the linf^2 ball.
Outcome porosity() {
  const auto t0 = Clock::now();
  const Space s(2, NormTag::kLinf);
  const auto pts = oracle::cube_grid(2, 9);
  const Mapping f = Mapping::grid(s, pts, pts);
  const Mapping g = Mapping::identity(s);
  Outcome o;
  std::string detail;
  for (double q : {0.1, 0.25, 0.4}) {
    char buf[320];
    try {
      const PorosityWitness w = build_porosity_witness(f, g, q, 0.5);
      const BallCertificate c = certify_ball_empty(w, f, 1000, 1e-3, 20240601);
      const bool ok = w.center_distance > 0 && w.center_distance <= 0.5 && c.certified() &&
                      c.accepted == 1000 && c.min_margin > 0 && c.failures.empty() &&
                      w.g_tilde(w.pair.y) == w.g_tilde(w.pair.x0);
      o.pass = o.pass && ok;
      std::snprintf(buf, sizeof buf,
                    " [q=%g d=%.17g radius=%.6g probes=%zu lambdas=%zu min_margin=%.6g failures=%zu]",
                    q, w.center_distance, w.radius, c.accepted, c.lambda_count, c.min_margin,
                    c.failures.size());
    } catch (const Error& e) {
      o.pass = false;
      std::snprintf(buf, sizeof buf, " [q=%g error: %s]", q, e.what());
    }
    detail += buf;
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < 300.0;
  char tbuf[64];
  std::snprintf(tbuf, sizeof tbuf, " runtime=%.1fs", secs);
  o.detail = detail.substr(1) + tbuf;
  return o;
}

// 7. Grid oracle on chains, the zero map and the T_lambda fixtures.
Outcome grid_oracle() {
  std::size_t failures = 0;
  const Space s1(1, NormTag::kLinf);
  for (int k = 2; k <= 21; ++k) {
    const auto chain = oracle::cube_grid(1, k);
    if (!grid_extreme_oracle(Mapping::grid(s1, chain, chain)).extreme) ++failures;
    const std::vector<Vector> zeros(chain.size(), Vector::Zero(1));
    const GridOracleResult z = grid_extreme_oracle(Mapping::grid(s1, chain, zeros));
    std::vector<Vector> plus, minus;
    double size = 0.0;
    for (const Vector& d : z.d) {
      plus.push_back(d);
      minus.push_back(-d);
      size = std::max(size, linf(d));
    }
    if (z.extreme || size == 0.0 || !oracle::grid_nonexpansive(0, chain, plus) ||
        !oracle::grid_nonexpansive(0, chain, minus)) {
      ++failures;
    }
  }
  // T_lambda(x) = (lambda, x_2) on a 5x5 grid of linf^2.
  const Space s2(2, NormTag::kLinf);
  const auto grid = oracle::cube_grid(2, 5);
  const auto t_map = [&](double lam) {
    Matrix a = Matrix::Zero(2, 2);
    a(1, 1) = 1;
    Vector b = Vector::Zero(2);
    b(0) = lam;
    return Mapping::affine(s2, a, b);
  };
  std::size_t fixtures = 0;
  for (double lam : {-1.0, -0.5, 0.0, 0.25, 0.5, 1.0}) {
    std::vector<Vector> vals;
    for (const Vector& p : grid) vals.push_back(t_map(lam)(p));
    const bool extreme = grid_extreme_oracle(Mapping::grid(s2, grid, vals)).extreme;
    ++fixtures;
    if (extreme != (std::abs(lam) == 1.0)) ++failures;
    if (std::abs(lam) < 1.0) {
      const auto c = make_certificate(t_map(lam), (1 + lam) / 2, t_map(-1), t_map(1));
      if (c.residual > 1e-12) ++failures;
    }
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = "chains=20 t_lambda_fixtures=" + std::to_string(fixtures) +
             " failures=" + std::to_string(failures);
  return o;
}

// 8. Point taxonomy.
Outcome points() {
  CounterRng rng(8008);
  std::size_t failures = 0;
  const Space l2(2, NormTag::kL2), li(2, NormTag::kLinf);
  for (int k = 0; k < 1000; ++k) {
    const double t = rng.uniform(0, 2 * M_PI);
    Vector x(2);
    x << std::cos(t), std::sin(t);
    if (classify_point(l2, x).tag != PointTag::kExposed) ++failures;
  }
  for (int k = 0; k < 1000; ++k) {
    Vector x(2);
    const double u = rng.uniform(-0.999, 0.999);
    if (k % 2) x << rng.sign(), u; else x << u, rng.sign();
    if (classify_point(li, x).tag != PointTag::kBoundaryNotAlmostExposed) ++failures;
  }
  for (const Vector& v : oracle::ball_vertices(0, 2)) {
    if (classify_point(li, v).tag != PointTag::kExposed) ++failures;
  }
  std::size_t implication = 0;
  for (int k = 0; k < 10000; ++k) {
    static const NormTag tags[] = {NormTag::kL1, NormTag::kL2, NormTag::kLinf};
    const Space s(2 + static_cast<int>(rng.index(3)), tags[k % 3]);
    Vector x(s.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-1, 1);
    // Snap a coordinate now and then to reach vertices and lower faces.
    if (k % 5 == 0) x(0) = 0;
    if (k % 7 == 0) x = x.cwiseSign();
    if (norm(s, x) == 0) continue;
    x /= norm(s, x);
    const PointClass c = classify_point(s, x);
    ++implication;
    if (c.exposed && !c.almost_exposed) ++failures;
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = "l2_boundary=1000 linf_facets=1000 linf_vertices=4 implication_points=" +
             std::to_string(implication) + " failures=" + std::to_string(failures);
  return o;
}

// 9. Byte-identical reports and lossless document round-trips.
Outcome determinism() {
  const Json swap = {{"space", {{"dim", 2}, {"norm", "linf"}}},
                     {"expr", {{"tag", "linear"}, {"matrix", {{0, 1}, {1, 0}}}}}};
  const Json ident = {{"space", {{"dim", 2}, {"norm", "linf"}}},
                      {"expr", {{"tag", "linear"}, {"matrix", {{1, 0}, {0, 1}}}}}};
  const std::vector<Json> configs = {
      {{"command", "classify"}, {"input", swap}},
      {{"command", "points"}, {"space", {{"dim", 3}, {"norm", "l1"}}},
       {"random_boundary_points", 50}, {"seed", 9}},
      {{"command", "porosity"}, {"input", ident}, {"q", 0.25}, {"seed", 7}, {"probes", 200}},
      {{"command", "pf-probe"}, {"input", ident}, {"g", swap}, {"q", 0.1}},
  };
  std::size_t mismatches = 0;
  for (const Json& cfg : configs) {
    const std::string a = emit_report(dispatch(cfg).report, ReportFormat::kJson);
    const std::string b = emit_report(dispatch(cfg).report, ReportFormat::kJson);
    const std::string ca = emit_report(dispatch(cfg).report, ReportFormat::kCsv);
    const std::string cb = emit_report(dispatch(cfg).report, ReportFormat::kCsv);
    if (a != b || ca != cb) ++mismatches;
  }
  CounterRng rng(9009);
  std::size_t lossy = 0;
  for (int i = 0; i < 1000; ++i) {
    const Space s = gen::space(rng);
    const Mapping m = gen::mapping(rng, s, 3);
    const std::string text = dump_canonical(mapping_to_json(m));
    const Mapping back = parse_mapping_text(text);
    bool same = dump_canonical(mapping_to_json(back)) == text;
    const auto dom = sample_domain(m);
    const std::vector<Vector> pts = dom ? *dom : std::vector<Vector>{gen::in_ball(rng, s)};
    for (const Vector& p : pts) same = same && m(p) == back(p);
    if (!same) ++lossy;
  }
  Outcome o;
  o.pass = mismatches == 0 && lossy == 0;
  o.detail = "configs=" + std::to_string(configs.size()) + " mismatches=" +
             std::to_string(mismatches) + " documents=1000 lossy=" + std::to_string(lossy);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"classifier_oracle_equivalence", classifier_oracle},
      {"rotation_extremality", rotations},
      {"urysohn_pair_properties", urysohn},
      {"pin_violation_witness", pin_violation},
      {"pf_formula_suite", pf_formulas},
      {"porosity_witness", porosity},
      {"grid_oracle_sanity", grid_oracle},
      {"point_taxonomy", points},
      {"determinism_round_trip", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
