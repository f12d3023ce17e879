#include "nonexp/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "nonexp/error.hpp"

namespace nonexp {

std::string Method::tag() const {
  char buf[96];
  switch (kind) {
    case Kind::kExact:
      return "EXACT";
    case Kind::kSampled:
      std::snprintf(buf, sizeof buf, "SAMPLED(%zu)", samples);
      return buf;
    case Kind::kScanned:
      if (samples > 0) {
        std::snprintf(buf, sizeof buf, "SCANNED(%.17g,SAMPLED(%zu))", step, samples);
      } else {
        std::snprintf(buf, sizeof buf, "SCANNED(%.17g)", step);
      }
      return buf;
  }
  return "?";
}

CertificateCheck check_certificate(const Mapping& target, double lambda,
                                   const Mapping& g, const Mapping& h,
                                   double part_tol) {
  if (!std::isfinite(lambda) || lambda < 0.0 || lambda >= 1.0) {
    fail(ErrorCode::kInvalidArgument, "certificate lambda must lie in [0, 1)");
  }
  if (!(target.space() == g.space()) || !(target.space() == h.space())) {
    fail(ErrorCode::kDimensionMismatch, "certificate parts live on different spaces");
  }
  CertificateCheck out;
  const DistanceReport dist = distance_infty(target, mix(g, h, lambda));
  out.residual = dist.value;
  out.g_check = check_self_map(g, part_tol);
  out.h_check = lambda > 0.0 ? check_self_map(h, part_tol) : out.g_check;

  const bool exact = dist.exact && out.g_check.exact && out.h_check.exact;
  if (exact) {
    out.method = Method::exact();
  } else {
    out.method = Method::sampled(std::max(
        {dist.samples, out.g_check.samples, out.h_check.samples}));
  }
  return out;
}

DecompositionCertificate make_certificate(const Mapping& target, double lambda,
                                          const Mapping& g, const Mapping& h,
                                          double part_tol) {
  const CertificateCheck check = check_certificate(target, lambda, g, h, part_tol);
  if (!check.valid()) {
    std::string why;
    if (check.residual > kCertResidualTol) {
      why += " residual " + std::to_string(check.residual);
    }
    if (!check.g_check.ok) {
      why += " g not a nonexpansive self-map (lip " +
             std::to_string(check.g_check.lipschitz) + ", sup norm " +
             std::to_string(check.g_check.max_norm) + ")";
    }
    if (!check.h_check.ok) {
      why += " h not a nonexpansive self-map (lip " +
             std::to_string(check.h_check.lipschitz) + ", sup norm " +
             std::to_string(check.h_check.max_norm) + ")";
    }
    fail(ErrorCode::kCertificationFailed, "certificate rejected:" + why);
  }
  return {lambda, g, h, target, check.residual, check.method};
}

DecompositionCertificate trivial_certificate(const Mapping& f) {
  return make_certificate(f, 0.0, f, f);
}

DecompositionCertificate swap_parts(const DecompositionCertificate& cert) {
  if (!(cert.lambda > 0.0)) {
    fail(ErrorCode::kInvalidArgument,
         "swap_parts: lambda = 0 has no second part to exchange");
  }
  return {1.0 - cert.lambda, cert.h, cert.g, cert.target, cert.residual,
          cert.method};
}

}  // namespace nonexp
