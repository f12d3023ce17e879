#pragma once

// Finite-dimensional normed-space kernel: the unit balls of l1^n, l2^n and
// linf^n, their operator norms, extreme points, normal cones and the
// exposed / almost-exposed taxonomy of ball points.

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nonexp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute tolerance used wherever a caller does not supply one.
inline constexpr double kDefaultTol = 1e-9;

enum class NormTag { kL1, kL2, kLinf };

std::string_view to_string(NormTag tag) noexcept;
/// Accepts "l1", "l2", "linf".
std::optional<NormTag> norm_tag_from_string(std::string_view name) noexcept;
/// The dual exponent: l1 <-> linf, l2 <-> l2.
NormTag dual_tag(NormTag tag) noexcept;

/// Dimension plus norm tag; fixes the ball C = B_X.
class Space {
 public:
  Space(int dim, NormTag norm);

  int dim() const noexcept { return dim_; }
  NormTag norm() const noexcept { return norm_; }

  friend bool operator==(const Space&, const Space&) = default;

 private:
  int dim_;
  NormTag norm_;
};

/// A linear functional acting on vectors by the standard pairing.
struct Functional {
  Vector coords;

  double operator()(const Vector& x) const { return coords.dot(x); }
};

double norm(NormTag tag, const Vector& x);
double norm(const Space& space, const Vector& x);

/// Norm of a functional in the dual of `space`.
double dual_norm(const Space& space, const Functional& phi);

/// sup over the unit ball of phi; equals the dual norm.
double support_value(const Space& space, const Functional& phi);

/// Throws kDimensionMismatch unless x has space.dim() entries, all finite.
void require_vector(const Space& space, const Vector& x, std::string_view what);

/// Induced norm of A : (R^cols, tag) -> (R^rows, tag).
///
/// linf and l1 are closed form (max row / column l1 norm). l2 runs power
/// iteration on A^T A until the Rayleigh residual drops below 1e-12 relative,
/// which puts the singular value within 1e-10 relative of the true one; the
/// iteration budget is 100000 steps, after which kNoConvergence is thrown.
double operator_norm(NormTag tag, const Matrix& a);
double operator_norm(const Space& in, const Space& out, const Matrix& a);

/// Extreme points of the unit ball: l1 -> +-e_k, linf -> cube vertices,
/// l2 -> the sphere. Throws kOutsideBall when ||x|| > 1 + tol.
bool is_extreme_point(const Space& space, const Vector& x,
                      double tol = kDefaultTol);

/// Generators of the cone of supporting functionals at a boundary point,
/// each normalized to dual norm one.
struct NormalCone {
  Vector base_point;
  std::vector<Functional> generators;
};

/// l1 normal cones enumerate 2^z sign patterns (z = number of zero
/// coordinates); the dimension is capped at kMaxL1ConeDim for that reason.
inline constexpr int kMaxL1ConeDim = 20;

NormalCone normal_cone_generators(const Space& space, const Vector& x,
                                  double tol = kDefaultTol);

/// Whether {z in C : phi(z) = sup_C phi} is the single point x.
bool exposes_singleton(const Space& space, const Functional& phi,
                       double tol = kDefaultTol);

enum class PointTag {
  kInterior,
  kExposed,
  kAlmostExposedOnly,
  kBoundaryNotAlmostExposed,
};

std::string_view to_string(PointTag tag) noexcept;

struct PointClass {
  PointTag tag = PointTag::kInterior;
  bool almost_exposed = false;
  bool exposed = false;
  bool extreme = false;
  /// Present when `exposed`: a functional whose maximizing face is {x}.
  std::optional<Functional> exposing_functional;
  /// Rank of the normal cone generators (0 for interior points).
  int cone_rank = 0;
};

PointClass classify_point(const Space& space, const Vector& x,
                          double tol = kDefaultTol);

/// Numerical rank of the given vectors (as rows) with singular values below
/// rel_tol * sigma_max treated as zero.
int numerical_rank(const std::vector<Vector>& rows, double rel_tol);

}  // namespace nonexp
