#pragma once

// Extremality of nonexpansive maps: the row classifier for linear maps on
// linf^n with its decompositions, boundary pinning, Urysohn pairs, the
// pinning contradiction witness and a brute-force oracle for grid maps.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonexp/certificate.hpp"

namespace nonexp {

struct RowAnalysis {
  Vector phi;
  double l1 = 0.0;
  /// Indices with |phi_j| > tol.
  std::vector<std::size_t> support;
  bool extreme = false;
};

/// Rows of an extremal matrix are eps(i) e_{pi(i)}; fibers[k] = {i : pi(i) = k}.
struct Form7Data {
  std::vector<std::size_t> pi;
  std::vector<int> eps;
  std::vector<std::vector<std::size_t>> fibers;
};

enum class SplitKind { kNone, kShortRow, kZeroRow, kSupportSplit };

std::string_view to_string(SplitKind kind) noexcept;

struct LinearExtremalityVerdict {
  bool extremal = false;
  std::vector<RowAnalysis> rows;
  /// First non-extreme row and how it was split.
  std::optional<std::size_t> split_row;
  SplitKind split = SplitKind::kNone;
  std::optional<DecompositionCertificate> certificate;
  std::optional<Form7Data> form7;
};

/// Requires a square matrix with linf operator norm <= 1 + tol. Extremal iff
/// every row is a signed unit vector. Otherwise the first offending row is
/// split:
///   ||phi|| = mu in (0, 1): lambda = 1 - mu, g row phi/mu, h row 0;
///   phi = 0: lambda = 1/2, g row +e_0, h row -e_0;
///   |J| >= 2: lambda = |xi_j|, g row (phi - xi_j e_j)/(1 - |xi_j|),
///             h row sgn(xi_j) e_j, j the first support index.
LinearExtremalityVerdict classify_linear_extremal(const Matrix& a,
                                                  double tol = kDefaultTol);

/// Rows signs[i] * e_{perm[i]}; perm is 0-based.
Mapping make_rotation(const Space& space, const std::vector<std::size_t>& perm,
                      const std::vector<int>& signs);

struct PinSample {
  Vector f;
  std::size_t x = 0;
};

struct PinViolation {
  std::size_t sample = 0;
  double expected = 0.0;
  double actual = 0.0;
};

/// Samples where |F(f)(x) - f(x)| > tol. Every sample needs |f(x)| = 1.
std::vector<PinViolation> verify_pinning(const Mapping& big_f,
                                         const std::vector<PinSample>& samples,
                                         double tol = kDefaultTol);

enum class UrysohnProfile { kIndicator, kTent };

std::string_view to_string(UrysohnProfile profile) noexcept;
std::optional<UrysohnProfile> urysohn_profile_from_string(std::string_view s) noexcept;

struct UrysohnPair {
  Vector g_plus;
  Vector g_minus;
  std::vector<std::size_t> u;
  Vector r;
  double gamma = 0.0;
};

/// U = {x : |f(x) - f(x0)| < gamma}; INDICATOR r = [x = x0], TENT
/// r = max(0, 1 - |f - f(x0)|/gamma). g+ = f + r(1 - f), g- = f - r(1 + f).
UrysohnPair urysohn_pair(const Vector& f, std::size_t x0, double gamma,
                         UrysohnProfile profile = UrysohnProfile::kIndicator);

/// Worst defects of the four defining properties; all zero up to rounding.
struct UrysohnCheck {
  double pinned = 0.0;     ///< |g+(x0) - 1| and |g-(x0) + 1|
  double off_u = 0.0;      ///< |g - f| off U
  double plus_excess = 0.0;   ///< ||f - g+|| - (1 - f(x0) + gamma), clipped at 0
  double minus_excess = 0.0;  ///< ||f - g-|| - (1 + f(x0) + gamma), clipped at 0
  double plus_dist = 0.0;
  double minus_dist = 0.0;
};

UrysohnCheck check_urysohn(const UrysohnPair& pair, const Vector& f, std::size_t x0);

enum class PinDirection { kPlus, kMinus };

std::string_view to_string(PinDirection d) noexcept;

struct PinViolationWitness {
  Vector f0;
  std::size_t x0 = 0;
  UrysohnPair pair;
  PinDirection direction = PinDirection::kMinus;
  Vector perturbed;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Midpoint of (0, min(|gx0 - fx0|, 1 - fx0, 1 + fx0)).
double pin_violation_gamma(double fx0, double gx0);

/// Builds g- (if G(f0)(x0) > f0(x0)) or g+ with the midpoint gamma and
/// evaluates ||G(f0) - G(g)|| against ||f0 - g||. Throws kInvalidArgument
/// when G(f0)(x0) is within tol of f0(x0) or |f0(x0)| >= 1, and
/// kCertificationFailed when the inequality does not come out strict.
PinViolationWitness pin_violation_witness(const Mapping& big_g, const Vector& f0,
                                          std::size_t x0, double tol = kDefaultTol);

struct GridOracleResult {
  bool extreme = true;
  /// Maximal admissible perturbation per sample point (all zero if extreme).
  std::vector<Vector> d;
  double max_slack = 0.0;
};

/// Decides by slack propagation whether some nonzero d on the grid's samples
/// keeps f + d and f - d nonexpansive self-maps. linf range only. Throws
/// kNotNonexpansive on negative slack beyond tol.
GridOracleResult grid_extreme_oracle(const Mapping& f, double tol = kDefaultTol);

/// From a certificate for an affine isometric bijection iso of C, the
/// certificate (lambda, iso^-1 o g, iso^-1 o h) for the identity.
DecompositionCertificate reduce_to_identity(const Mapping& iso,
                                            const DecompositionCertificate& cert,
                                            double tol = kDefaultTol);

}  // namespace nonexp
