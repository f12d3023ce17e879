#include "nonexp/nonexp.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "nonexp/error.hpp"
#include "nonexp/extremality.hpp"
#include "nonexp/io.hpp"

struct nxp_mapping {
  nonexp::Mapping mapping;
};

namespace {

thread_local std::string g_last_error;

nxp_status to_status(nonexp::ErrorCode code) {
  return static_cast<nxp_status>(static_cast<int>(code));
}

template <class F>
nxp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return NXP_OK;
  } catch (const nonexp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NXP_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return NXP_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nonexp::NormTag to_tag(nxp_norm n) {
  switch (n) {
    case NXP_L1: return nonexp::NormTag::kL1;
    case NXP_L2: return nonexp::NormTag::kL2;
    case NXP_LINF: return nonexp::NormTag::kLinf;
  }
  nonexp::fail(nonexp::ErrorCode::kInvalidArgument, "unknown norm");
}

void require(const void* p, const char* what) {
  if (!p) nonexp::fail(nonexp::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

nonexp::Vector to_vector(const double* x, size_t n) {
  return Eigen::Map<const nonexp::Vector>(x, static_cast<Eigen::Index>(n));
}

nonexp::Matrix to_matrix(const double* a, size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      a, k, k);
}

}  // namespace

extern "C" {

const char* nxp_version(void) { return nonexp::kVersion; }

const char* nxp_last_error(void) { return g_last_error.c_str(); }

void nxp_string_free(char* s) { std::free(s); }

nxp_status nxp_norm_value(nxp_norm norm, const double* x, size_t n, double* out) {
  return guarded([&] {
    require(x, "x");
    require(out, "out");
    *out = nonexp::norm(to_tag(norm), to_vector(x, n));
  });
}

nxp_status nxp_operator_norm(nxp_norm norm, const double* a, size_t n, double* out) {
  return guarded([&] {
    require(a, "a");
    require(out, "out");
    *out = nonexp::operator_norm(to_tag(norm), to_matrix(a, n));
  });
}

nxp_status nxp_classify_point(nxp_norm norm, const double* x, size_t n, double tol,
                              nxp_point_tag* tag, int* extreme) {
  return guarded([&] {
    require(x, "x");
    require(tag, "tag");
    const nonexp::Space space(static_cast<int>(n), to_tag(norm));
    const nonexp::PointClass c = nonexp::classify_point(space, to_vector(x, n), tol);
    *tag = static_cast<nxp_point_tag>(static_cast<int>(c.tag));
    if (extreme) *extreme = c.extreme ? 1 : 0;
  });
}

nxp_status nxp_mapping_parse(const char* json, nxp_mapping** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new nxp_mapping{nonexp::parse_mapping_text(json)};
  });
}

void nxp_mapping_free(nxp_mapping* m) { delete m; }

size_t nxp_mapping_dim(const nxp_mapping* m) {
  return m ? static_cast<size_t>(m->mapping.space().dim()) : 0;
}

nxp_status nxp_mapping_evaluate(const nxp_mapping* m, const double* x, double* y) {
  return guarded([&] {
    require(m, "mapping");
    require(x, "x");
    require(y, "y");
    const auto n = static_cast<size_t>(m->mapping.space().dim());
    const nonexp::Vector v = m->mapping(to_vector(x, n));
    std::memcpy(y, v.data(), n * sizeof(double));
  });
}

nxp_status nxp_mapping_to_json(const nxp_mapping* m, char** out) {
  return guarded([&] {
    require(m, "mapping");
    require(out, "out");
    *out = copy_string(nonexp::dump_canonical(nonexp::mapping_to_json(m->mapping)));
  });
}

nxp_status nxp_classify_linear(const double* a, size_t n, double tol, int* extremal,
                               char** certificate_json) {
  return guarded([&] {
    require(a, "a");
    require(extremal, "extremal");
    const auto v = nonexp::classify_linear_extremal(to_matrix(a, n), tol);
    *extremal = v.extremal ? 1 : 0;
    if (certificate_json) {
      *certificate_json = v.certificate
                              ? copy_string(nonexp::dump_canonical(
                                    nonexp::certificate_to_json(*v.certificate)))
                              : nullptr;
    }
  });
}

nxp_status nxp_run(const char* config_json, int csv, char** report, int* exit_code) {
  return guarded([&] {
    require(config_json, "config_json");
    require(report, "report");
    const nonexp::RunResult result = nonexp::dispatch_text(config_json);
    *report = copy_string(nonexp::emit_report(
        result.report, csv ? nonexp::ReportFormat::kCsv : nonexp::ReportFormat::kJson));
    if (exit_code) *exit_code = result.exit_code;
  });
}

}  // extern "C"
