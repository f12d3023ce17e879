#pragma once

// Expression trees for self-mappings of the unit ball and their metric
// analysis: evaluation, Lipschitz bounds, the uniform distance d_inf and the
// isometry / rigidity probes.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nonexp/space.hpp"

namespace nonexp {

enum class MappingKind {
  kLinear,
  kAffine,
  kGrid,
  kConvexCombo,
  kRetractCompose,
  kTranslate,
};

std::string_view to_string(MappingKind kind) noexcept;

struct MappingNode;

/// Immutable expression tree describing a map C -> C. Copies share nodes.
///
/// Every factory validates the node invariants: matching dimensions, grid
/// samples and values inside C, combo weights in [0, 1], positive eta.
class Mapping {
 public:
  static Mapping linear(const Space& space, Matrix matrix);
  static Mapping affine(const Space& space, Matrix matrix, Vector offset);
  /// A mapping known only on its sample set; never interpolated.
  static Mapping grid(const Space& space, std::vector<Vector> points,
                      std::vector<Vector> values, double tol = kDefaultTol);
  /// (1 - lambda) * left + lambda * right.
  static Mapping combo(double lambda, Mapping left, Mapping right);
  /// inner o R_{eta, x0}.
  static Mapping retract(Mapping inner, double eta, Vector x0);
  /// inner + offset.
  static Mapping translate(Mapping inner, Vector offset);

  static Mapping identity(const Space& space);
  static Mapping zero(const Space& space);

  const Space& space() const noexcept { return space_; }
  MappingKind kind() const noexcept;
  const MappingNode& node() const noexcept { return *node_; }

  /// Evaluates at x; throws kOutsideBall for x outside C and kUnsupported
  /// for grid lookups off the sample set.
  Vector operator()(const Vector& x) const;

  /// Structural identity (same node object), not mathematical equality.
  bool same_node(const Mapping& other) const noexcept {
    return node_ == other.node_;
  }

 private:
  Mapping(const Space& space, std::shared_ptr<const MappingNode> node)
      : space_(space), node_(std::move(node)) {}

  Space space_;
  std::shared_ptr<const MappingNode> node_;
};

struct LinearNode {
  Matrix matrix;
};

struct AffineNode {
  Matrix matrix;
  Vector offset;
};

struct GridNode {
  std::vector<Vector> points;
  std::vector<Vector> values;

  /// Index of the sample equal to x (max-coordinate distance <= 1e-12).
  std::optional<std::size_t> find(const Vector& x) const;
};

struct ComboNode {
  double lambda;
  Mapping left;
  Mapping right;
};

struct RetractNode {
  Mapping inner;
  double eta;
  Vector x0;
};

struct TranslateNode {
  Mapping inner;
  Vector offset;
};

struct MappingNode {
  std::variant<LinearNode, AffineNode, GridNode, ComboNode, RetractNode,
               TranslateNode>
      value;
};

/// Tolerance for "x lies in C" checks at evaluation time.
inline constexpr double kBallTol = 1e-9;

/// R_{eta,x0}(x) = x - eta (x - x0)/||x - x0|| if ||x - x0|| > eta, else x0.
Vector radial_retract(const Space& space, const Vector& x, double eta,
                      const Vector& x0);

/// Finite set on which the mapping is defined, or nullopt when it is defined
/// on all of C. Combos intersect their children's domains. Throws
/// kUnsupported for a retraction of a grid-backed map (no finite domain).
std::optional<std::vector<Vector>> sample_domain(const Mapping& m);

/// Lattice {-1, ..., 1}^n with `per_axis` (odd) points per axis, restricted
/// to the ball. Falls back to fewer points per axis when the lattice would
/// exceed `max_points`.
std::vector<Vector> probe_lattice(const Space& space, int per_axis = 5,
                                  std::size_t max_points = 20000);

/// Spacing of the lattice probe_lattice() actually produced.
double probe_lattice_step(const Space& space, int per_axis = 5,
                          std::size_t max_points = 20000);

/// The mapping's finite domain if it has one, else probe_lattice().
std::vector<Vector> evaluation_points(const Mapping& m, int per_axis = 5);

struct SamplingBudget {
  std::size_t pairs = 4096;
  std::uint64_t seed = 0;
  int lattice_per_axis = 5;
};

struct PointPair {
  Vector x;
  Vector y;
};

/// lip(f) bracket. `lower` is attained by `witness`; `exact` means
/// lower == upper is the true Lipschitz constant (on the domain, for grids).
struct LipschitzReport {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;
  PointPair witness;
};

LipschitzReport lipschitz_bounds(const Mapping& f,
                                 const SamplingBudget& budget = {});

/// Pair attaining the operator norm of a matrix on the ball (x, -x).
PointPair operator_norm_witness(const Space& space, const Matrix& a);

struct DistanceReport {
  double value = 0.0;  ///< certified lower bound (the exact value if `exact`)
  double upper = 0.0;  ///< certified upper bound
  bool exact = false;
  std::optional<Vector> attaining_point;
  std::size_t samples = 0;  ///< 0 for closed-form results
};

/// d_inf(f, g) = sup_x ||f(x) - g(x)||. Linear pairs are exact (operator norm
/// of the difference); pairs with a common finite domain are exact on it;
/// otherwise a lattice lower bound plus a Lipschitz-based upper bound.
DistanceReport distance_infty(const Mapping& f, const Mapping& g,
                              const SamplingBudget& budget = {});

struct IsometryCheck {
  bool isometric = true;
  std::optional<std::size_t> first_violation;
  double worst_defect = 0.0;
};

IsometryCheck is_isometry_on_pairs(const Mapping& f,
                                   std::span<const PointPair> pairs,
                                   double tol = kDefaultTol);

struct RigidityViolation {
  Vector base;
  double t = 0.0;
  double magnitude = 0.0;
};

/// Probes g(x + t e) = g(x) + t e; returns the (x, t) where it fails by more
/// than tol. Requires e almost exposed and every x + t e inside C.
std::vector<RigidityViolation> directional_rigidity_check(
    const Mapping& g, const Vector& e, std::span<const Vector> base_points,
    std::span<const double> t_values, double tol = kDefaultTol);

/// (1 - s) a + s b. Closed forms for linear/affine/grid pairs (any real s);
/// otherwise a combo node for s in [0, 1], or a tabulated grid over
/// evaluation_points() for extrapolation (which then must stay inside C).
Mapping mix(const Mapping& a, const Mapping& b, double s);

/// B o m, distributing over every node kind.
Mapping compose_linear_left(const Matrix& b, const Mapping& m);

/// Whether m is a nonexpansive self-map of C: exact for linear maps
/// (operator norm), exact on the domain for grid-backed maps, otherwise
/// checked on the probe lattice plus the Lipschitz calculus bound.
struct SelfMapCheck {
  bool ok = false;
  bool exact = false;
  std::size_t samples = 0;
  double lipschitz = 0.0;  ///< exact value or upper bound
  double max_norm = 0.0;   ///< sup of ||m(x)|| seen
};

SelfMapCheck check_self_map(const Mapping& m, double tol = 1e-12,
                            int per_axis = 5);

}  // namespace nonexp
