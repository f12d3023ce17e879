#pragma once

// Convex geometry of P_f = {g in M : f = (1 - lambda) g + lambda h for some
// lambda in [0, 1), h in M}: membership with feasible lambda windows, ray
// extension, merging of certificates, the complement argument and probing
// of the affine hull A_f.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nonexp/certificate.hpp"

namespace nonexp {

enum class MembershipMethod { kExactLinear, kGridScan };

struct LambdaInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Set of lambda in [q, 1 - q] for which h(lambda) = (f - (1 - lambda) g) /
/// lambda is a nonexpansive self-map. Feasibility is convex in lambda, so at
/// most one interval is ever reported.
struct FeasibleLambdaSet {
  double q = 0.0;
  std::vector<LambdaInterval> feasible;
  Method method;

  bool empty() const noexcept { return feasible.empty(); }
  bool contains(double lambda) const noexcept;
  /// Midpoint of the first interval.
  std::optional<double> representative() const noexcept;
};

/// Bisection tolerance for exact-linear interval endpoints; reported
/// endpoints found by bisection are moved inward by this amount.
inline constexpr double kLambdaBisectionTol = 1e-10;

FeasibleLambdaSet pfq_membership(const Mapping& f, const Mapping& g, double q,
                                 MembershipMethod method,
                                 double scan_step = 1e-3);

/// h(lambda) = (f - (1 - lambda) g) / lambda.
Mapping complement_member(const Mapping& f, const Mapping& g, double lambda);

/// Certificate for f with member g at the given lambda (h = complement).
DecompositionCertificate certificate_at(const Mapping& f, const Mapping& g,
                                        double lambda);

/// From f = (1 - lambda) g + lambda h, a certificate whose member is
/// f + t (g - f): mu = lambda t / (lambda t + 1 - lambda), parts swapped
/// first for t < 0. Throws kNotNonexpansive if the extended point leaves M.
DecompositionCertificate ray_extend(const DecompositionCertificate& cert,
                                    double t);

struct MergeResult {
  DecompositionCertificate cert;
  double beta = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  /// Residuals of the four scalar equations tying (beta, lambda, mu) to
  /// (theta, lambda1, lambda2).
  std::array<double, 4> system_residuals{};
};

/// Certificate for the member (1 - theta) g1 + theta g2 built from
/// certificates for g1 and g2 against the same target.
MergeResult merge_certs(const DecompositionCertificate& first,
                        const DecompositionCertificate& second, double theta);

/// Given f = (1 - lambda)((1 - theta) g1 + theta g2) + lambda h, rewrites it
/// as f = (1 - mu) g1 + mu ((mu - lambda)/mu g2 + lambda/mu h) with
/// mu = lambda (1 - theta) + theta, exhibiting g1 in P_f.
DecompositionCertificate complement_witness(
    const DecompositionCertificate& combo_cert, const Mapping& g1,
    const Mapping& g2, double theta);

struct AffineHullBasis {
  Mapping base;
  /// Members g_i whose directions g_i - f were kept (linearly independent).
  std::vector<Mapping> members;
  std::vector<std::size_t> cert_indices;
  std::vector<double> alpha;
  std::vector<double> beta;
  Mapping tilde_g;
  DecompositionCertificate tilde_cert;
  FeasibleLambdaSet tilde_window;
  std::size_t probe_points = 0;
};

enum class HullStatus { kCertified, kNotInHull, kOutsideM, kFailed };

std::string_view to_string(HullStatus status) noexcept;

struct HullCandidateReport {
  HullStatus status = HullStatus::kFailed;
  double projection_residual = 0.0;
  std::vector<double> coefficients;
  std::optional<DecompositionCertificate> certificate;
  std::string detail;
};

struct AffineHullReport {
  AffineHullBasis basis;
  std::vector<HullCandidateReport> candidates;
};

/// Rank threshold for direction independence, relative to sigma_max.
inline constexpr double kHullRankTol = 1e-8;

/// Builds a basis of directions from the certificates' members, the point
/// g~ = f + (1/n) sum beta_i (g_i - f) with beta_i = alpha_i / sum alpha
/// (alpha defaults to all ones) together with an explicit certificate for it,
/// then tries to certify each candidate through the ray argument.
AffineHullReport affine_hull_probe(
    const Mapping& f, const std::vector<DecompositionCertificate>& certs,
    const std::vector<Mapping>& candidates,
    const std::vector<double>& alpha = {});

}  // namespace nonexp
