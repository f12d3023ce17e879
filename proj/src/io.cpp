#include "nonexp/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "nonexp/error.hpp"

namespace nonexp {

namespace {

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

void write(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::null:
    case Json::value_t::discarded:
      out += "null";
      return;
    case Json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    case Json::value_t::string:
      out += j.dump();
      return;
    case Json::value_t::binary:
      fail(ErrorCode::kSchema, "binary values are not supported");
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), is_scalar);
      out += '[';
      bool first = true;
      for (const Json& e : j) {
        if (!first) out += flat ? ", " : ",";
        first = false;
        if (!flat) out += "\n" + inner;
        write(out, e, indent + 1);
      }
      if (!flat) out += "\n" + pad;
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += "\n" + inner + Json(it.key()).dump() + ": ";
        write(out, it.value(), indent + 1);
      }
      out += "\n" + pad + '}';
      return;
    }
  }
}

[[noreturn]] void schema_error(const std::string& path, const std::string& why) {
  fail(ErrorCode::kSchema, path + ": " + why);
}

const Json& member(const Json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path, std::string("missing \"") + key + "\"");
  return *it;
}

double parse_number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "expected a finite number");
  return v;
}

Matrix parse_matrix(const Json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    schema_error(path, "expected an array of " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    m.row(i) = parse_vector(j[static_cast<std::size_t>(i)],
                            path + "[" + std::to_string(i) + "]", cols)
                   .transpose();
  }
  return m;
}

std::vector<Vector> parse_vectors(const Json& j, const std::string& path, int dim) {
  if (!j.is_array()) schema_error(path, "expected an array of vectors");
  std::vector<Vector> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_vector(j[i], path + "[" + std::to_string(i) + "]", dim));
  }
  return out;
}

Mapping parse_expr(const Json& j, const std::string& path, const Space& space) {
  const Json& tag_j = member(j, path, "tag");
  if (!tag_j.is_string()) schema_error(path + ".tag", "expected a string");
  const std::string tag = tag_j.get<std::string>();
  const int n = space.dim();
  try {
    if (tag == "linear") {
      return Mapping::linear(space, parse_matrix(member(j, path, "matrix"), path + ".matrix", n, n));
    }
    if (tag == "affine") {
      return Mapping::affine(space,
                             parse_matrix(member(j, path, "matrix"), path + ".matrix", n, n),
                             parse_vector(member(j, path, "offset"), path + ".offset", n));
    }
    if (tag == "grid") {
      return Mapping::grid(space, parse_vectors(member(j, path, "points"), path + ".points", n),
                           parse_vectors(member(j, path, "values"), path + ".values", n));
    }
    if (tag == "combo") {
      const double lambda = parse_number(member(j, path, "lambda"), path + ".lambda");
      return Mapping::combo(lambda, parse_expr(member(j, path, "left"), path + ".left", space),
                            parse_expr(member(j, path, "right"), path + ".right", space));
    }
    if (tag == "retract") {
      const double eta = parse_number(member(j, path, "eta"), path + ".eta");
      const Vector x0 = parse_vector(member(j, path, "x0"), path + ".x0", n);
      return Mapping::retract(parse_expr(member(j, path, "inner"), path + ".inner", space), eta, x0);
    }
    if (tag == "translate") {
      const Vector offset = parse_vector(member(j, path, "offset"), path + ".offset", n);
      return Mapping::translate(parse_expr(member(j, path, "inner"), path + ".inner", space), offset);
    }
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind("$", 0) == 0) throw;
    fail(e.code(), path + ": " + what);
  }
  schema_error(path + ".tag", "unknown tag \"" + tag + "\"");
}

}  // namespace

std::string dump_canonical(const Json& doc) {
  std::string out;
  write(out, doc, 0);
  out += '\n';
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
  return out;
}

Vector parse_vector(const Json& j, const std::string& path, int dim) {
  if (!j.is_array() || (dim >= 0 && static_cast<int>(j.size()) != dim)) {
    schema_error(path, dim >= 0 ? "expected an array of " + std::to_string(dim) + " numbers"
                                : std::string("expected an array of numbers"));
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = parse_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Json space_to_json(const Space& space) {
  return {{"dim", space.dim()}, {"norm", std::string(to_string(space.norm()))}};
}

Space parse_space(const Json& doc, const std::string& path) {
  const Json& dim = member(doc, path, "dim");
  if (!dim.is_number_integer() || dim.get<std::int64_t>() < 1 || dim.get<std::int64_t>() > 64) {
    schema_error(path + ".dim", "expected an integer in [1, 64]");
  }
  const Json& norm_j = member(doc, path, "norm");
  if (!norm_j.is_string()) schema_error(path + ".norm", "expected a string");
  const auto tag = norm_tag_from_string(norm_j.get<std::string>());
  if (!tag) schema_error(path + ".norm", "expected \"l1\", \"l2\" or \"linf\"");
  return Space(static_cast<int>(dim.get<std::int64_t>()), *tag);
}

Mapping parse_mapping(const Json& doc) {
  if (!doc.is_object()) schema_error("$", "expected an object");
  if (const auto it = doc.find("schema_version"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() != kSchemaVersion) {
      schema_error("$.schema_version", "unsupported version");
    }
  }
  const Space space = parse_space(member(doc, "$", "space"));
  return parse_expr(member(doc, "$", "expr"), "$.expr", space);
}

Mapping parse_mapping_text(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kSchema, std::string("$: malformed JSON: ") + e.what());
  }
  return parse_mapping(doc);
}

Json expr_to_json(const Mapping& m) {
  const auto& v = m.node().value;
  if (const auto* n = std::get_if<LinearNode>(&v)) {
    return {{"tag", "linear"}, {"matrix", matrix_to_json(n->matrix)}};
  }
  if (const auto* n = std::get_if<AffineNode>(&v)) {
    return {{"tag", "affine"}, {"matrix", matrix_to_json(n->matrix)},
            {"offset", vector_to_json(n->offset)}};
  }
  if (const auto* n = std::get_if<GridNode>(&v)) {
    Json pts = Json::array(), vals = Json::array();
    for (const Vector& p : n->points) pts.push_back(vector_to_json(p));
    for (const Vector& p : n->values) vals.push_back(vector_to_json(p));
    return {{"tag", "grid"}, {"points", pts}, {"values", vals}};
  }
  if (const auto* n = std::get_if<ComboNode>(&v)) {
    return {{"tag", "combo"}, {"lambda", n->lambda},
            {"left", expr_to_json(n->left)}, {"right", expr_to_json(n->right)}};
  }
  if (const auto* n = std::get_if<RetractNode>(&v)) {
    return {{"tag", "retract"}, {"eta", n->eta}, {"x0", vector_to_json(n->x0)},
            {"inner", expr_to_json(n->inner)}};
  }
  const auto& t = std::get<TranslateNode>(v);
  return {{"tag", "translate"}, {"offset", vector_to_json(t.offset)},
          {"inner", expr_to_json(t.inner)}};
}

Json mapping_to_json(const Mapping& m) {
  return {{"schema_version", kSchemaVersion},
          {"space", space_to_json(m.space())},
          {"expr", expr_to_json(m)}};
}

Json certificate_to_json(const DecompositionCertificate& cert) {
  return {{"lambda", cert.lambda},
          {"weights", {1.0 - cert.lambda, cert.lambda}},
          {"g", mapping_to_json(cert.g)},
          {"h", mapping_to_json(cert.h)},
          {"residual", cert.residual},
          {"method", cert.method.tag()}};
}

std::optional<ReportFormat> report_format_from_string(std::string_view s) noexcept {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  return std::nullopt;
}

namespace {

std::string csv_field(const Json& j) {
  std::string s;
  if (j.is_string()) {
    s = j.get<std::string>();
  } else if (j.is_null()) {
    return "";
  } else {
    s = dump_canonical(j);
    s.pop_back();
  }
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string emit_report(const Json& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return dump_canonical(report);
  std::ostringstream out;
  out << "entry,kind,verdict,method,value\n";
  const auto it = report.find("entries");
  if (it == report.end()) return out.str();
  std::size_t i = 0;
  for (const Json& e : *it) {
    const auto field = [&](const char* key) {
      const auto f = e.find(key);
      return f == e.end() ? std::string() : csv_field(*f);
    };
    out << i++ << ',' << field("kind") << ',' << field("verdict") << ','
        << field("method") << ',' << field("value") << '\n';
  }
  return out.str();
}

double default_tolerance() {
  const char* env = std::getenv("NONEXP_TOL");
  if (!env || !*env) return kDefaultTol;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !std::isfinite(v) || v <= 0.0) return kDefaultTol;
  return v;
}

}  // namespace nonexp
