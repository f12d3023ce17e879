#pragma once

#include <cstddef>
#include <string>

#include "nonexp/mapping.hpp"

namespace nonexp {

/// How a numeric claim was established.
struct Method {
  enum class Kind { kExact, kSampled, kScanned };

  Kind kind = Kind::kExact;
  std::size_t samples = 0;
  double step = 0.0;

  static Method exact() { return {}; }
  static Method sampled(std::size_t n) { return {Kind::kSampled, n, 0.0}; }
  static Method scanned(double step) { return {Kind::kScanned, 0, step}; }

  /// "EXACT", "SAMPLED(81)", "SCANNED(0.001)".
  std::string tag() const;
};

/// Recombination tolerance every certificate must meet.
inline constexpr double kCertResidualTol = 1e-10;
/// Slack allowed on the nonexpansiveness / range checks of the two parts.
inline constexpr double kCertPartTol = 1e-12;

/// Machine-checked witness that target = (1 - lambda) g + lambda h with
/// g, h nonexpansive self-maps and lambda in [0, 1).
struct DecompositionCertificate {
  double lambda = 0.0;
  Mapping g;
  Mapping h;
  Mapping target;
  double residual = 0.0;
  Method method;
};

struct CertificateCheck {
  double residual = 0.0;
  Method method;
  SelfMapCheck g_check;
  SelfMapCheck h_check;

  bool valid(double residual_tol = kCertResidualTol) const {
    return residual <= residual_tol && g_check.ok && h_check.ok;
  }
};

/// Recombination residual sup ||(1-lambda) g + lambda h - target|| (exact for
/// affine triples, over the common sample domain or probe lattice otherwise)
/// and self-map checks on both parts.
CertificateCheck check_certificate(const Mapping& target, double lambda,
                                   const Mapping& g, const Mapping& h,
                                   double part_tol = kCertPartTol);

/// Validates and packages; throws kCertificationFailed on any violation.
DecompositionCertificate make_certificate(const Mapping& target, double lambda,
                                          const Mapping& g, const Mapping& h,
                                          double part_tol = kCertPartTol);

/// f = 1 * f + 0 * f; the lambda = 0 member with h recorded as f.
DecompositionCertificate trivial_certificate(const Mapping& f);

/// The same identity read with the parts interchanged: lambda -> 1 - lambda.
/// Requires lambda > 0.
DecompositionCertificate swap_parts(const DecompositionCertificate& cert);

}  // namespace nonexp
