#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "nonexp/error.hpp"
#include "nonexp/extremality.hpp"
#include "nonexp/io.hpp"
#include "nonexp/pf_geometry.hpp"
#include "nonexp/porosity.hpp"
#include "nonexp/rng.hpp"

namespace nonexp {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitRefuted = 2;

// Thrown when a certification step is refuted; carries the partial entries.
struct Refuted {
  Json entries;
  int exit_code = kExitRefuted;
};

Json read_json_file(const std::string& path, const std::string& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidArgument, "$." + key + ": cannot open \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kSchema, "$." + key + ": malformed JSON in \"" + path + "\": " + e.what());
  }
}

class Config {
 public:
  explicit Config(Json doc) : doc_(std::move(doc)) {
    if (!doc_.is_object()) fail(ErrorCode::kSchema, "$: config must be an object");
  }

  const Json& doc() const { return doc_; }
  bool has(const char* key) const { return doc_.contains(key) && !doc_[key].is_null(); }

  std::string command() const {
    if (!has("command") || !doc_["command"].is_string()) {
      fail(ErrorCode::kSchema, "$.command: expected a string");
    }
    return doc_["command"].get<std::string>();
  }

  double number(const char* key, double fallback) {
    if (!has(key)) {
      doc_[key] = fallback;
      return fallback;
    }
    return required_number(key);
  }

  double required_number(const char* key) const {
    if (!has(key) || !doc_[key].is_number() || !std::isfinite(doc_[key].get<double>())) {
      fail(ErrorCode::kSchema, std::string("$.") + key + ": expected a finite number");
    }
    return doc_[key].get<double>();
  }

  std::uint64_t count(const char* key, std::uint64_t fallback) {
    if (!has(key)) {
      doc_[key] = fallback;
      return fallback;
    }
    return required_count(key);
  }

  std::uint64_t required_count(const char* key) const {
    if (!has(key) || !doc_[key].is_number_integer() || doc_[key].get<std::int64_t>() < 0) {
      fail(ErrorCode::kSchema, std::string("$.") + key + ": expected a non-negative integer");
    }
    return doc_[key].get<std::uint64_t>();
  }

  std::uint64_t seed() const {
    if (!has("seed")) fail(ErrorCode::kSchema, "$.seed: required for this command");
    return required_count("seed");
  }

  std::string string(const char* key, const std::string& fallback) {
    if (!has(key)) {
      doc_[key] = fallback;
      return fallback;
    }
    if (!doc_[key].is_string()) fail(ErrorCode::kSchema, std::string("$.") + key + ": expected a string");
    return doc_[key].get<std::string>();
  }

  /// Inline mapping document or a path to one; the path is replaced by the
  /// document so the config hash covers the content.
  Mapping mapping(const char* key) {
    if (!has(key)) fail(ErrorCode::kSchema, std::string("$.") + key + ": mapping required");
    if (doc_[key].is_string()) doc_[key] = read_json_file(doc_[key].get<std::string>(), key);
    try {
      return parse_mapping(doc_[key]);
    } catch (const Error& e) {
      std::string what = e.what();
      if (what.rfind("$", 0) == 0) what = std::string("$.") + key + what.substr(1);
      fail(e.code(), what);
    }
  }

  Vector vector(const char* key, int dim = -1) const {
    if (!has(key)) fail(ErrorCode::kSchema, std::string("$.") + key + ": vector required");
    return parse_vector(doc_[key], std::string("$.") + key, dim);
  }

 private:
  Json doc_;
};

Json entry(const std::string& kind, const std::string& verdict, const std::string& method,
           const Json& value) {
  return {{"kind", kind}, {"verdict", verdict}, {"method", method}, {"value", value}};
}

std::size_t index_in(const Config& cfg, const char* key, std::size_t size) {
  const std::uint64_t i = cfg.required_count(key);
  if (i >= size) fail(ErrorCode::kInvalidArgument, std::string("$.") + key + ": index out of range");
  return static_cast<std::size_t>(i);
}

Json verdict_to_json(const LinearExtremalityVerdict& v) {
  Json rows = Json::array();
  for (const RowAnalysis& r : v.rows) {
    rows.push_back({{"phi", vector_to_json(r.phi)}, {"l1", r.l1},
                    {"support", r.support}, {"extreme", r.extreme}});
  }
  Json out = {{"extremal", v.extremal}, {"rows", rows}};
  if (v.form7) {
    out["form7"] = {{"pi", v.form7->pi}, {"eps", v.form7->eps}, {"fibers", v.form7->fibers}};
  }
  if (v.split_row) {
    out["split_row"] = *v.split_row;
    out["split"] = std::string(to_string(v.split));
  }
  if (v.certificate) out["certificate"] = certificate_to_json(*v.certificate);
  return out;
}

const Matrix& require_linear(const Mapping& m) {
  const auto* lin = std::get_if<LinearNode>(&m.node().value);
  if (!lin) fail(ErrorCode::kUnsupported, "$.input: a linear mapping is required");
  return lin->matrix;
}

Json run_classify(Config& cfg, double tol) {
  const Mapping a = cfg.mapping("input");
  if (a.space().norm() != NormTag::kLinf) {
    fail(ErrorCode::kUnsupported, "$.input.space.norm: classify works on linf");
  }
  const LinearExtremalityVerdict v = classify_linear_extremal(require_linear(a), tol);
  Json e = entry("linear_extremality", v.extremal ? "EXTREMAL" : "NOT_EXTREMAL", "EXACT",
                 operator_norm(NormTag::kLinf, require_linear(a)));
  e["detail"] = verdict_to_json(v);
  return Json::array({e});
}

Json run_decompose(Config& cfg, double tol) {
  const Mapping f = cfg.mapping("input");
  if (cfg.has("g")) {
    const Mapping g = cfg.mapping("g");
    const double lambda = cfg.required_number("lambda");
    try {
      const DecompositionCertificate c = certificate_at(f, g, lambda);
      Json e = entry("certificate", "CERTIFIED", c.method.tag(), c.residual);
      e["certificate"] = certificate_to_json(c);
      return Json::array({e});
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kCertificationFailed) throw;
      Json e = entry("certificate", "REFUTED", "EXACT", nullptr);
      e["reason"] = err.what();
      throw Refuted{Json::array({e})};
    }
  }
  if (f.space().norm() != NormTag::kLinf) {
    fail(ErrorCode::kUnsupported, "$.input.space.norm: decompose without g works on linf");
  }
  const LinearExtremalityVerdict v = classify_linear_extremal(require_linear(f), tol);
  if (v.extremal) {
    Json e = entry("certificate", "EXTREMAL", "EXACT", nullptr);
    e["form7"] = verdict_to_json(v)["form7"];
    return Json::array({e});
  }
  Json e = entry("certificate", "CERTIFIED", v.certificate->method.tag(), v.certificate->residual);
  e["split_row"] = *v.split_row;
  e["split"] = std::string(to_string(v.split));
  e["certificate"] = certificate_to_json(*v.certificate);
  return Json::array({e});
}

Json run_pin_check(Config& cfg, double tol) {
  const Mapping big_f = cfg.mapping("input");
  if (!cfg.has("samples") || !cfg.doc()["samples"].is_array()) {
    fail(ErrorCode::kSchema, "$.samples: expected an array of {f, x}");
  }
  std::vector<PinSample> samples;
  const Json& arr = cfg.doc()["samples"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "$.samples[" + std::to_string(i) + "]";
    if (!arr[i].is_object() || !arr[i].contains("f") || !arr[i].contains("x") ||
        !arr[i]["x"].is_number_integer() || arr[i]["x"].get<std::int64_t>() < 0) {
      fail(ErrorCode::kSchema, path + ": expected {\"f\": [...], \"x\": index}");
    }
    samples.push_back({parse_vector(arr[i]["f"], path + ".f", big_f.space().dim()),
                       arr[i]["x"].get<std::size_t>()});
  }
  const auto violations = verify_pinning(big_f, samples, tol);
  Json list = Json::array();
  for (const PinViolation& v : violations) {
    list.push_back({{"sample", v.sample}, {"expected", v.expected}, {"actual", v.actual}});
  }
  Json e = entry("pinning", violations.empty() ? "PINNED" : "VIOLATED",
                 "SAMPLED(" + std::to_string(samples.size()) + ")", violations.size());
  e["violations"] = list;
  return Json::array({e});
}

Json urysohn_to_json(const UrysohnPair& p) {
  return {{"g_plus", vector_to_json(p.g_plus)}, {"g_minus", vector_to_json(p.g_minus)},
          {"u", p.u}, {"r", vector_to_json(p.r)}, {"gamma", p.gamma}};
}

Json run_urysohn(Config& cfg, double) {
  const Vector f = cfg.vector("f");
  const std::size_t x0 = index_in(cfg, "x0", static_cast<std::size_t>(f.size()));
  const double gamma = cfg.required_number("gamma");
  const std::string profile_s = cfg.string("profile", "INDICATOR");
  const auto profile = urysohn_profile_from_string(profile_s);
  if (!profile) fail(ErrorCode::kSchema, "$.profile: expected \"INDICATOR\" or \"TENT\"");
  const UrysohnPair p = urysohn_pair(f, x0, gamma, *profile);
  const UrysohnCheck c = check_urysohn(p, f, x0);
  const double c0 = f(static_cast<Eigen::Index>(x0));
  Json e = entry("urysohn_pair", "OK", "EXACT", c.plus_dist);
  e["pair"] = urysohn_to_json(p);
  e["profile"] = profile_s;
  e["properties"] = {
      {"pinned_defect", c.pinned},
      {"off_u_defect", c.off_u},
      {"plus_distance", c.plus_dist},
      {"plus_bound", 1.0 - c0 + gamma},
      {"minus_distance", c.minus_dist},
      {"minus_bound", 1.0 + c0 + gamma},
  };
  return Json::array({e});
}

Json run_pin_violate(Config& cfg, double tol) {
  const Mapping g = cfg.mapping("input");
  const Vector f0 = cfg.vector("f0", g.space().dim());
  const std::size_t x0 = index_in(cfg, "x0", static_cast<std::size_t>(f0.size()));
  try {
    const PinViolationWitness w = pin_violation_witness(g, f0, x0, tol);
    Json e = entry("pin_violation", "VIOLATED", "EXACT", w.lhs - w.rhs);
    e["witness"] = {{"f0", vector_to_json(w.f0)}, {"x0", w.x0},
                    {"direction", std::string(to_string(w.direction))},
                    {"perturbed", vector_to_json(w.perturbed)}, {"gamma", w.pair.gamma},
                    {"lhs", w.lhs}, {"rhs", w.rhs}};
    return Json::array({e});
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kCertificationFailed) throw;
    Json e = entry("pin_violation", "REFUTED", "EXACT", nullptr);
    e["reason"] = err.what();
    throw Refuted{Json::array({e})};
  }
}

Json run_oracle(Config& cfg, double tol) {
  const Mapping f = cfg.mapping("input");
  const GridOracleResult r = grid_extreme_oracle(f, tol);
  Json e = entry("grid_extremality", r.extreme ? "EXTREME" : "NOT_EXTREME", "EXACT", r.max_slack);
  if (!r.extreme) {
    Json d = Json::array();
    for (const Vector& v : r.d) d.push_back(vector_to_json(v));
    e["perturbation"] = d;
  }
  return Json::array({e});
}

Json point_entry(const Space& space, const Vector& x, double tol) {
  const PointClass c = classify_point(space, x, tol);
  Json e = entry("point", std::string(to_string(c.tag)), "EXACT", norm(space, x));
  e["point"] = vector_to_json(x);
  e["exposed"] = c.exposed;
  e["almost_exposed"] = c.almost_exposed;
  e["extreme"] = c.extreme;
  e["cone_rank"] = c.cone_rank;
  if (c.exposing_functional) e["exposing_functional"] = vector_to_json(c.exposing_functional->coords);
  return e;
}

Json run_points(Config& cfg, double tol) {
  if (!cfg.has("space")) fail(ErrorCode::kSchema, "$.space: required");
  const Space space = parse_space(cfg.doc()["space"]);
  Json out = Json::array();
  if (cfg.has("points")) {
    const Json& pts = cfg.doc()["points"];
    if (!pts.is_array()) fail(ErrorCode::kSchema, "$.points: expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out.push_back(point_entry(space, parse_vector(pts[i], "$.points[" + std::to_string(i) + "]",
                                                    space.dim()),
                                tol));
    }
  }
  if (cfg.has("random_boundary_points")) {
    const std::uint64_t n = cfg.required_count("random_boundary_points");
    CounterRng rng(cfg.seed());
    for (std::uint64_t i = 0; i < n; ++i) {
      Vector x(space.dim());
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = rng.uniform(-1.0, 1.0);
      const double nx = norm(space, x);
      if (nx == 0.0) x(0) = 1.0; else x /= nx;
      out.push_back(point_entry(space, x, tol));
    }
  }
  return out;
}

Json membership_to_json(const FeasibleLambdaSet& s) {
  Json iv = Json::array();
  for (const LambdaInterval& i : s.feasible) iv.push_back({i.lo, i.hi});
  return {{"q", s.q}, {"intervals", iv}, {"method", s.method.tag()}};
}

Json run_pf_probe(Config& cfg, double) {
  const Mapping f = cfg.mapping("input");
  const Mapping g = cfg.mapping("g");
  const double q = cfg.number("q", 0.25);
  const bool linear = f.kind() == MappingKind::kLinear && g.kind() == MappingKind::kLinear &&
                      f.space().norm() == NormTag::kLinf;
  const std::string how = cfg.string("membership", linear ? "exact" : "scan");
  if (how != "exact" && how != "scan") fail(ErrorCode::kSchema, "$.membership: expected \"exact\" or \"scan\"");
  const double step = cfg.number("lambda_step", 1e-3);
  const FeasibleLambdaSet s = pfq_membership(
      f, g, q, how == "exact" ? MembershipMethod::kExactLinear : MembershipMethod::kGridScan, step);
  Json out = Json::array();
  Json e = entry("pfq_membership", s.empty() ? "NOT_MEMBER" : "MEMBER", s.method.tag(),
                 s.representative() ? Json(*s.representative()) : Json(nullptr));
  e["membership"] = membership_to_json(s);
  out.push_back(e);
  if (s.empty()) return out;

  const DecompositionCertificate base = certificate_at(f, g, *s.representative());
  Json be = entry("certificate", "CERTIFIED", base.method.tag(), base.residual);
  be["certificate"] = certificate_to_json(base);
  out.push_back(be);

  if (cfg.has("t")) {
    const double t = cfg.required_number("t");
    const DecompositionCertificate c = ray_extend(base, t);
    Json re = entry("ray_extend", "CERTIFIED", c.method.tag(), c.residual);
    re["t"] = t;
    re["mu"] = c.lambda;
    re["certificate"] = certificate_to_json(c);
    out.push_back(re);
  }
  if (cfg.has("g2")) {
    const Mapping g2 = cfg.mapping("g2");
    const double theta = cfg.number("theta", 0.5);
    const FeasibleLambdaSet s2 = pfq_membership(
        f, g2, q, how == "exact" ? MembershipMethod::kExactLinear : MembershipMethod::kGridScan, step);
    if (s2.empty()) fail(ErrorCode::kInvalidArgument, "$.g2: not a member of P_{f,q}");
    const DecompositionCertificate c2 = certificate_at(f, g2, *s2.representative());
    const MergeResult m = merge_certs(base, c2, theta);
    Json me = entry("merge", "CERTIFIED", m.cert.method.tag(), m.cert.residual);
    me["theta"] = theta;
    me["beta"] = m.beta;
    me["lambda"] = m.lambda;
    me["mu"] = m.mu;
    me["system_residuals"] = m.system_residuals;
    me["certificate"] = certificate_to_json(m.cert);
    out.push_back(me);
    if (m.lambda > 0.0 || theta > 0.0) {
      const DecompositionCertificate w = complement_witness(m.cert, g, g2, theta);
      Json ce = entry("complement_witness", "CERTIFIED", w.method.tag(), w.residual);
      ce["mu"] = w.lambda;
      ce["certificate"] = certificate_to_json(w);
      out.push_back(ce);
    }
  }
  return out;
}

Json run_porosity(Config& cfg, double) {
  const std::uint64_t seed = cfg.seed();
  const Mapping f = cfg.mapping("input");
  const Mapping g = cfg.has("g") ? cfg.mapping("g") : Mapping::identity(f.space());
  const double q = cfg.number("q", 0.25);
  const double epsilon = cfg.number("epsilon", 0.5);
  const std::uint64_t probes = cfg.count("probes", 1000);
  const double step = cfg.number("lambda_step", 1e-3);

  Json out = Json::array();
  PorosityWitness w = [&] {
    try {
      return build_porosity_witness(f, g, q, epsilon);
    } catch (const NoPairFound& e) {
      Json pe = entry("pair_search", "NO_PAIR_FOUND", "EXACT", e.best_ratio());
      pe["reason"] = e.what();
      throw Refuted{Json::array({pe}), kExitInput};
    }
  }();
  const PorosityParams& p = w.params;
  Json we = entry("porosity_witness", "BUILT", "SAMPLED(" + std::to_string(w.samples.size()) + ")",
                  w.center_distance);
  we["params"] = {{"q", p.q}, {"epsilon", p.epsilon}, {"delta", p.delta}, {"alpha", p.alpha},
                  {"formula", "delta = alpha = q/(2(1+q))"},
                  {"threshold", p.threshold()}, {"rearranged", p.rearranged()}};
  we["pair"] = {{"x0", vector_to_json(w.pair.x0)}, {"y", vector_to_json(w.pair.y)},
                {"eta", w.pair.eta}, {"ratio", w.pair.ratio}};
  we["center_distance"] = w.center_distance;
  we["center_distance_upper"] = w.center_distance_upper;
  we["radius"] = w.radius;
  we["pairs_tried"] = w.pairs_tried;
  we["g_tilde"] = mapping_to_json(w.g_tilde);
  out.push_back(we);

  const BallCertificate c = certify_ball_empty(w, f, probes, step, seed);
  char tag[64];
  std::snprintf(tag, sizeof tag, "SCANNED(%.17g)", step);
  Json ce = entry("ball_certificate", c.certified() ? "CERTIFIED" : "REFUTED",
                  std::string(tag) + "+SAMPLED(" + std::to_string(c.accepted) + ")", c.min_margin);
  ce["probes"] = {{"requested", c.requested}, {"accepted", c.accepted}, {"rejected", c.rejected}};
  ce["lambda_count"] = c.lambda_count;
  ce["min_margin"] = c.min_margin;
  ce["proof_margin_bound"] = c.proof_margin_bound;
  ce["failure_count"] = c.failures.size();
  Json fails = Json::array();
  for (std::size_t i = 0; i < c.failures.size() && i < 10; ++i) {
    fails.push_back({{"probe", c.failures[i].probe}, {"lambda", c.failures[i].lambda},
                     {"margin", c.failures[i].margin}});
  }
  ce["failures"] = fails;
  out.push_back(ce);
  if (!c.certified()) throw Refuted{out};
  return out;
}

using Handler = std::function<Json(Config&, double)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"classify", run_classify},   {"decompose", run_decompose},
      {"pin-check", run_pin_check}, {"urysohn", run_urysohn},
      {"pin-violate", run_pin_violate}, {"oracle", run_oracle},
      {"points", run_points},       {"pf-probe", run_pf_probe},
      {"porosity", run_porosity},
  };
  return table;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

namespace {

RunResult make_report(const std::string& command, Json effective, Json entries,
                      const Json& error, int exit_code) {
  RunResult result;
  result.exit_code = exit_code;
  if (effective.is_object()) effective.erase("format");
  Json& report = result.report;
  report["schema_version"] = kSchemaVersion;
  report["provenance"] = {{"command", command},
                          {"config_hash", "fnv1a64:" + hex64(fnv1a64(dump_canonical(effective)))},
                          {"version", kVersion}};
  report["entries"] = std::move(entries);
  report["exit_code"] = exit_code;
  report["status"] = exit_code == kExitOk ? "ok" : (exit_code == kExitRefuted ? "refuted" : "error");
  if (!error.is_null()) report["error"] = error;
  return result;
}

}  // namespace

RunResult dispatch(const Json& config) {
  Json entries = Json::array();
  Json error;
  std::string command = "?";
  Json effective = config;
  int exit_code = kExitOk;
  try {
    Config cfg(config);
    command = cfg.command();
    if (cfg.has("schema_version") &&
        (!cfg.doc()["schema_version"].is_number_integer() ||
         cfg.doc()["schema_version"].get<std::int64_t>() != kSchemaVersion)) {
      fail(ErrorCode::kSchema, "$.schema_version: unsupported version");
    }
    const auto it = handlers().find(command);
    if (it == handlers().end()) fail(ErrorCode::kInvalidArgument, "$.command: unknown command \"" + command + "\"");
    const double tol = cfg.number("tol", default_tolerance());
    if (!(tol > 0.0)) fail(ErrorCode::kInvalidArgument, "$.tol: must be positive");
    try {
      entries = it->second(cfg, tol);
    } catch (Refuted& r) {
      entries = std::move(r.entries);
      exit_code = r.exit_code;
    }
    effective = cfg.doc();
  } catch (const Error& e) {
    error = {{"code", to_string(e.code())}, {"message", e.what()}};
    exit_code = kExitInput;
  } catch (const std::exception& e) {
    error = {{"code", "INTERNAL"}, {"message", e.what()}};
    exit_code = kExitInput;
  }
  return make_report(command, std::move(effective), std::move(entries), error, exit_code);
}

RunResult dispatch_text(std::string_view config_text) {
  Json config;
  try {
    config = Json::parse(config_text);
  } catch (const Json::parse_error& e) {
    return make_report("?", Json(nullptr), Json::array(),
                       {{"code", to_string(ErrorCode::kSchema)},
                        {"message", std::string("$: malformed config: ") + e.what()}},
                       kExitInput);
  }
  return dispatch(config);
}

}  // namespace nonexp
