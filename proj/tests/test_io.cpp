#include <gtest/gtest.h>

#include <cstdlib>
#include <string>

#include "generators.hpp"
#include "nonexp/error.hpp"
#include "nonexp/io.hpp"

using namespace nonexp;

namespace {

const char* kSwapDoc =
    R"({"space":{"dim":2,"norm":"linf"},"expr":{"tag":"linear","matrix":[[0,1],[1,0]]}})";

std::string error_of(std::string_view text, ErrorCode* code = nullptr) {
  try {
    parse_mapping_text(text);
  } catch (const Error& e) {
    if (code) *code = e.code();
    return e.what();
  }
  return {};
}

Json config(const std::string& command, const Json& input) {
  return {{"command", command}, {"input", input}};
}

Json linear_doc(const Json& matrix) {
  return {{"space", {{"dim", matrix.size()}, {"norm", "linf"}}},
          {"expr", {{"tag", "linear"}, {"matrix", matrix}}}};
}

}  // namespace

TEST(Parse, SwapDocument) {
  const Mapping m = parse_mapping_text(kSwapDoc);
  EXPECT_EQ(m.kind(), MappingKind::kLinear);
  Vector x(2);
  x << 0.25, -0.5;
  Vector y(2);
  y << -0.5, 0.25;
  EXPECT_EQ(m(x), y);
}

TEST(Parse, InvariantMessages) {
  ErrorCode code{};
  const std::string combo = error_of(
      R"({"space":{"dim":1,"norm":"linf"},"expr":{"tag":"combo","lambda":1.5,)"
      R"("left":{"tag":"linear","matrix":[[1]]},"right":{"tag":"linear","matrix":[[0]]}}})",
      &code);
  EXPECT_NE(combo.find("lambda out of [0,1]"), std::string::npos) << combo;
  EXPECT_EQ(combo.rfind("$.expr", 0), 0u) << combo;
  EXPECT_EQ(code, ErrorCode::kInvalidArgument);

  const std::string eta = error_of(
      R"({"space":{"dim":1,"norm":"linf"},"expr":{"tag":"retract","eta":0,"x0":[0],)"
      R"("inner":{"tag":"linear","matrix":[[1]]}}})");
  EXPECT_NE(eta.find("eta must be positive"), std::string::npos) << eta;

  const std::string grid = error_of(
      R"({"space":{"dim":1,"norm":"linf"},"expr":{"tag":"grid","points":[[0]],"values":[[2]]}})",
      &code);
  EXPECT_EQ(code, ErrorCode::kOutsideBall) << grid;
}

TEST(Parse, SchemaErrorsArePathAddressed) {
  ErrorCode code{};
  const std::string bad_row = error_of(
      R"({"space":{"dim":2,"norm":"linf"},"expr":{"tag":"linear","matrix":[[0,1],[1]]}})", &code);
  EXPECT_EQ(code, ErrorCode::kSchema);
  EXPECT_NE(bad_row.find("$.expr.matrix[1]"), std::string::npos) << bad_row;

  const std::string nested = error_of(
      R"({"space":{"dim":1,"norm":"linf"},"expr":{"tag":"combo","lambda":0.5,)"
      R"("left":{"tag":"linear","matrix":[[1]]},"right":{"tag":"spline"}}})", &code);
  EXPECT_EQ(code, ErrorCode::kSchema);
  EXPECT_NE(nested.find("$.expr.right.tag"), std::string::npos) << nested;

  EXPECT_NE(error_of(R"({"space":{"dim":1,"norm":"l7"},"expr":{"tag":"linear","matrix":[[1]]}})", &code)
                .find("$.space.norm"),
            std::string::npos);
  EXPECT_NE(error_of("{not json", &code).find("malformed JSON"), std::string::npos);
  EXPECT_EQ(code, ErrorCode::kSchema);
  EXPECT_NE(error_of(R"({"schema_version":2,"space":{"dim":1,"norm":"linf"},)"
                     R"("expr":{"tag":"linear","matrix":[[1]]}})", &code)
                .find("schema_version"),
            std::string::npos);
}

TEST(Canonical, Formatting) {
  const Json doc = {{"b", 0.1}, {"a", {1, 2.5}}, {"c", 3}, {"d", std::nan("")}};
  const std::string out = dump_canonical(doc);
  EXPECT_EQ(out,
            "{\n  \"a\": [1, 2.5],\n  \"b\": 0.10000000000000001,\n  \"c\": 3,\n  \"d\": null\n}\n");
}

TEST(Canonical, Fnv1a) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(RoundTrip, GeneratedDocuments) {
  CounterRng rng(51);
  for (int i = 0; i < 300; ++i) {
    const Space s = gen::space(rng);
    const Mapping m = gen::mapping(rng, s, 2);
    const std::string text = dump_canonical(mapping_to_json(m));
    const Mapping back = parse_mapping_text(text);
    EXPECT_EQ(dump_canonical(mapping_to_json(back)), text);
    const auto dom = sample_domain(m);
    const std::vector<Vector> pts = dom ? *dom : std::vector<Vector>{gen::in_ball(rng, s)};
    for (const Vector& p : pts) EXPECT_EQ(m(p), back(p));
  }
}

TEST(Report, CsvAndEmpty) {
  const Json report = {{"schema_version", 1},
                       {"entries", Json::array({{{"kind", "point"}, {"verdict", "EXPOSED"},
                                                 {"method", "EXACT"}, {"value", 1}}})}};
  EXPECT_EQ(emit_report(report, ReportFormat::kCsv),
            "entry,kind,verdict,method,value\n0,point,EXPOSED,EXACT,1\n");
  const Json empty = {{"schema_version", 1}, {"entries", Json::array()}};
  const Json parsed = Json::parse(emit_report(empty, ReportFormat::kJson));
  EXPECT_TRUE(parsed["entries"].empty());
  EXPECT_EQ(emit_report(empty, ReportFormat::kCsv), "entry,kind,verdict,method,value\n");
  EXPECT_EQ(report_format_from_string("csv"), ReportFormat::kCsv);
  EXPECT_FALSE(report_format_from_string("xml").has_value());
}

TEST(Dispatch, ClassifyNegativeIdentity) {
  const RunResult r = dispatch(config("classify", linear_doc({{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}})));
  EXPECT_EQ(r.exit_code, 0);
  const Json& e = r.report["entries"][0];
  EXPECT_EQ(e["verdict"], "EXTREMAL");
  EXPECT_EQ(e["detail"]["form7"]["pi"], Json({0, 1, 2}));
  EXPECT_EQ(e["detail"]["form7"]["eps"], Json({-1, -1, -1}));
  EXPECT_EQ(r.report["schema_version"], 1);
  EXPECT_EQ(r.report["provenance"]["version"], kVersion);
  EXPECT_EQ(r.report["provenance"]["config_hash"].get<std::string>().size(), 8u + 16u);
}

TEST(Dispatch, DecomposeHalfDiagonal) {
  const RunResult r = dispatch(config("decompose", linear_doc({{0.5, 0}, {0, 1}})));
  EXPECT_EQ(r.exit_code, 0);
  const Json& c = r.report["entries"][0]["certificate"];
  EXPECT_EQ(c["weights"], Json({0.5, 0.5}));
  EXPECT_EQ(c["residual"], 0);
  EXPECT_EQ(r.report["entries"][0]["method"], "EXACT");
}

TEST(Dispatch, ExitCodes) {
  EXPECT_EQ(dispatch({{"command", "frobnicate"}}).exit_code, 1);
  EXPECT_EQ(dispatch_text("{oops").exit_code, 1);
  const RunResult missing = dispatch({{"command", "classify"}});
  EXPECT_EQ(missing.exit_code, 1);
  EXPECT_EQ(missing.report["status"], "error");
  EXPECT_TRUE(missing.report.contains("error"));

  // The lifting toy map is not boundary pinning at g+, so the witness is refuted.
  const Json grid = {{"space", {{"dim", 2}, {"norm", "linf"}}},
                     {"expr",
                      {{"tag", "grid"},
                       {"points", {{0, 0}, {1, 0}}},
                       {"values", {{-0.2, 0}, {0.8, 0}}}}}};
  Json cfg = config("pin-violate", grid);
  cfg["f0"] = {0, 0};
  cfg["x0"] = 0;
  const RunResult refuted = dispatch(cfg);
  EXPECT_EQ(refuted.exit_code, 2);
  EXPECT_EQ(refuted.report["status"], "refuted");

  Json lip = config("porosity", linear_doc({{0.8, 0}, {0, 0.8}}));
  lip["seed"] = 1;
  const RunResult nopair = dispatch(lip);
  EXPECT_EQ(nopair.exit_code, 1);
  EXPECT_EQ(nopair.report["entries"][0]["verdict"], "NO_PAIR_FOUND");
}

TEST(Dispatch, PorosityDeterministicAndEchoesParams) {
  Json cfg = config("porosity", linear_doc({{1, 0}, {0, 1}}));
  cfg["q"] = 0.25;
  cfg["seed"] = 7;
  cfg["probes"] = 100;
  const std::string a = emit_report(dispatch(cfg).report, ReportFormat::kJson);
  const std::string b = emit_report(dispatch(cfg).report, ReportFormat::kJson);
  EXPECT_EQ(a, b);
  const Json r = Json::parse(a);
  EXPECT_EQ(r["exit_code"], 0);
  const Json& params = r["entries"][0]["params"];
  EXPECT_NEAR(params["delta"].get<double>(), 0.1, 1e-15);
  EXPECT_EQ(params["delta"], params["alpha"]);
  cfg["seed"] = 8;
  EXPECT_NE(emit_report(dispatch(cfg).report, ReportFormat::kJson), a);
}

TEST(Dispatch, ConfigHashIgnoresFormatOnly) {
  Json cfg = config("classify", linear_doc({{0, 1}, {1, 0}}));
  const Json h1 = dispatch(cfg).report["provenance"]["config_hash"];
  cfg["format"] = "csv";
  EXPECT_EQ(dispatch(cfg).report["provenance"]["config_hash"], h1);
  cfg["tol"] = 1e-6;
  EXPECT_NE(dispatch(cfg).report["provenance"]["config_hash"], h1);
}

TEST(Tolerance, EnvironmentOverride) {
  unsetenv("NONEXP_TOL");
  EXPECT_EQ(default_tolerance(), kDefaultTol);
  setenv("NONEXP_TOL", "1e-6", 1);
  EXPECT_EQ(default_tolerance(), 1e-6);
  setenv("NONEXP_TOL", "garbage", 1);
  EXPECT_EQ(default_tolerance(), kDefaultTol);
  setenv("NONEXP_TOL", "-1", 1);
  EXPECT_EQ(default_tolerance(), kDefaultTol);
  unsetenv("NONEXP_TOL");
}
