#pragma once

// JSON documents: mappings, certificates and run reports, plus the command
// dispatcher behind the CLI and the C API.

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nonexp/certificate.hpp"
#include "nonexp/mapping.hpp"

namespace nonexp {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

/// Sorted keys, two-space indent, floats with 17 significant digits,
/// integral values without a fraction. Non-finite floats become null.
std::string dump_canonical(const Json& doc);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

/// Throws kSchema with a "$.path: reason" message; node invariants are
/// reported with their own codes, prefixed by the path.
Mapping parse_mapping(const Json& doc);
Mapping parse_mapping_text(std::string_view text);

/// {"schema_version", "space", "expr"}.
Json mapping_to_json(const Mapping& m);
Json expr_to_json(const Mapping& m);

Json space_to_json(const Space& space);
Space parse_space(const Json& doc, const std::string& path = "$.space");

Json vector_to_json(const Vector& v);
Json matrix_to_json(const Matrix& m);
Vector parse_vector(const Json& doc, const std::string& path, int dim = -1);

Json certificate_to_json(const DecompositionCertificate& cert);

enum class ReportFormat { kJson, kCsv };

std::optional<ReportFormat> report_format_from_string(std::string_view s) noexcept;

/// CSV summary: one row per report entry with its method tag.
std::string emit_report(const Json& report, ReportFormat format);

/// kDefaultTol unless NONEXP_TOL holds a positive number.
double default_tolerance();

struct RunResult {
  Json report;
  int exit_code = 0;
};

/// Runs one command described by a config document. Never throws: input
/// errors give exit code 1 and a report with an "error" block, refuted
/// certifications give exit code 2.
RunResult dispatch(const Json& config);
RunResult dispatch_text(std::string_view config_text);

}  // namespace nonexp
