#include "nonexp/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nonexp/error.hpp"
#include "nonexp/rng.hpp"

namespace nonexp {

std::string_view to_string(MappingKind kind) noexcept {
  switch (kind) {
    case MappingKind::kLinear: return "linear";
    case MappingKind::kAffine: return "affine";
    case MappingKind::kGrid: return "grid";
    case MappingKind::kConvexCombo: return "combo";
    case MappingKind::kRetractCompose: return "retract";
    case MappingKind::kTranslate: return "translate";
  }
  return "?";
}

namespace {

constexpr double kGridMatchTol = 1e-12;

void require_square(const Space& space, const Matrix& m, const char* what) {
  if (m.rows() != space.dim() || m.cols() != space.dim()) {
    fail(ErrorCode::kDimensionMismatch,
         std::string(what) + ": matrix must be " + std::to_string(space.dim()) +
             "x" + std::to_string(space.dim()));
  }
  if (!m.allFinite()) {
    fail(ErrorCode::kInvalidArgument, std::string(what) + ": non-finite entry");
  }
}

void require_same_space(const Mapping& a, const Mapping& b, const char* what) {
  if (!(a.space() == b.space())) {
    fail(ErrorCode::kDimensionMismatch,
         std::string(what) + ": mappings live on different spaces");
  }
}

void require_in_ball(const Space& space, const Vector& x, double tol,
                     const std::string& what) {
  require_vector(space, x, what);
  const double n = norm(space.norm(), x);
  if (n > 1.0 + tol) {
    fail(ErrorCode::kOutsideBall,
         what + ": point has norm " + std::to_string(n) + " > 1");
  }
}

Vector eval(const Mapping& m, const Vector& x);

Vector eval_node(const Space& space, const MappingNode& node, const Vector& x) {
  const auto& v = node.value;
  if (const auto* lin = std::get_if<LinearNode>(&v)) return lin->matrix * x;
  if (const auto* aff = std::get_if<AffineNode>(&v)) {
    return aff->matrix * x + aff->offset;
  }
  if (const auto* grid = std::get_if<GridNode>(&v)) {
    const auto idx = grid->find(x);
    if (!idx) {
      fail(ErrorCode::kUnsupported,
           "grid mapping evaluated off its sample set");
    }
    return grid->values[*idx];
  }
  if (const auto* combo = std::get_if<ComboNode>(&v)) {
    return (1.0 - combo->lambda) * eval(combo->left, x) +
           combo->lambda * eval(combo->right, x);
  }
  if (const auto* ret = std::get_if<RetractNode>(&v)) {
    return eval(ret->inner, radial_retract(space, x, ret->eta, ret->x0));
  }
  const auto& tr = std::get<TranslateNode>(v);
  return eval(tr.inner, x) + tr.offset;
}

Vector eval(const Mapping& m, const Vector& x) {
  return eval_node(m.space(), m.node(), x);
}

}  // namespace

std::optional<std::size_t> GridNode::find(const Vector& x) const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() == x.size() &&
        (points[i] - x).cwiseAbs().maxCoeff() <= kGridMatchTol) {
      return i;
    }
  }
  return std::nullopt;
}

MappingKind Mapping::kind() const noexcept {
  return static_cast<MappingKind>(node_->value.index());
}

Mapping Mapping::linear(const Space& space, Matrix matrix) {
  require_square(space, matrix, "linear");
  return Mapping(space, std::make_shared<const MappingNode>(
                            MappingNode{LinearNode{std::move(matrix)}}));
}

Mapping Mapping::affine(const Space& space, Matrix matrix, Vector offset) {
  require_square(space, matrix, "affine");
  require_vector(space, offset, "affine offset");
  return Mapping(space, std::make_shared<const MappingNode>(MappingNode{
                            AffineNode{std::move(matrix), std::move(offset)}}));
}

Mapping Mapping::grid(const Space& space, std::vector<Vector> points,
                      std::vector<Vector> values, double tol) {
  if (points.empty()) {
    fail(ErrorCode::kInvalidArgument, "grid: at least one sample is required");
  }
  if (points.size() != values.size()) {
    fail(ErrorCode::kInvalidArgument,
         "grid: points and values differ in length");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    require_in_ball(space, points[i], tol,
                    "grid point " + std::to_string(i));
    require_in_ball(space, values[i], tol,
                    "grid value " + std::to_string(i));
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto lex = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(points[a].begin(), points[a].end(),
                                        points[b].begin(), points[b].end());
  };
  std::sort(order.begin(), order.end(), lex);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if ((points[order[i]] - points[order[i - 1]]).cwiseAbs().maxCoeff() <=
        kGridMatchTol) {
      fail(ErrorCode::kInvalidArgument, "grid: duplicate sample point");
    }
  }
  return Mapping(space, std::make_shared<const MappingNode>(MappingNode{
                            GridNode{std::move(points), std::move(values)}}));
}

Mapping Mapping::combo(double lambda, Mapping left, Mapping right) {
  require_same_space(left, right, "combo");
  if (!std::isfinite(lambda) || lambda < 0.0 || lambda > 1.0) {
    fail(ErrorCode::kInvalidArgument, "lambda out of [0,1]");
  }
  Space space = left.space();
  return Mapping(space,
                 std::make_shared<const MappingNode>(MappingNode{ComboNode{
                     lambda, std::move(left), std::move(right)}}));
}

Mapping Mapping::retract(Mapping inner, double eta, Vector x0) {
  if (!std::isfinite(eta) || eta <= 0.0) {
    fail(ErrorCode::kInvalidArgument, "eta must be positive");
  }
  require_in_ball(inner.space(), x0, kBallTol, "retract x0");
  Space space = inner.space();
  return Mapping(space,
                 std::make_shared<const MappingNode>(MappingNode{
                     RetractNode{std::move(inner), eta, std::move(x0)}}));
}

Mapping Mapping::translate(Mapping inner, Vector offset) {
  require_vector(inner.space(), offset, "translate offset");
  Space space = inner.space();
  return Mapping(space, std::make_shared<const MappingNode>(MappingNode{
                            TranslateNode{std::move(inner), std::move(offset)}}));
}

Mapping Mapping::identity(const Space& space) {
  return linear(space, Matrix::Identity(space.dim(), space.dim()));
}

Mapping Mapping::zero(const Space& space) {
  return linear(space, Matrix::Zero(space.dim(), space.dim()));
}

Vector Mapping::operator()(const Vector& x) const {
  require_in_ball(space_, x, kBallTol, "evaluate");
  return eval(*this, x);
}

Vector radial_retract(const Space& space, const Vector& x, double eta,
                      const Vector& x0) {
  const Vector d = x - x0;
  const double nd = norm(space.norm(), d);
  if (nd > eta) return x - (eta / nd) * d;
  return x0;
}

namespace {

std::vector<Vector> intersect_points(const std::vector<Vector>& a,
                                     const std::vector<Vector>& b) {
  GridNode lookup{b, b};
  std::vector<Vector> out;
  for (const Vector& p : a) {
    if (lookup.find(p)) out.push_back(p);
  }
  return out;
}

}  // namespace

std::optional<std::vector<Vector>> sample_domain(const Mapping& m) {
  const auto& v = m.node().value;
  if (std::holds_alternative<LinearNode>(v) ||
      std::holds_alternative<AffineNode>(v)) {
    return std::nullopt;
  }
  if (const auto* grid = std::get_if<GridNode>(&v)) return grid->points;
  if (const auto* combo = std::get_if<ComboNode>(&v)) {
    auto left = sample_domain(combo->left);
    auto right = sample_domain(combo->right);
    if (!left) return right;
    if (!right) return left;
    return intersect_points(*left, *right);
  }
  if (const auto* ret = std::get_if<RetractNode>(&v)) {
    if (sample_domain(ret->inner)) {
      fail(ErrorCode::kUnsupported,
           "retraction of a grid-backed mapping has no finite sample domain");
    }
    return std::nullopt;
  }
  return sample_domain(std::get<TranslateNode>(v).inner);
}

namespace {

int lattice_axis_count(const Space& space, int per_axis,
                       std::size_t max_points) {
  int m = std::max(3, per_axis | 1);
  const auto size = [&](int k) {
    double total = 1.0;
    for (int i = 0; i < space.dim(); ++i) total *= k;
    return total;
  };
  while (m > 3 && size(m) > static_cast<double>(max_points)) m -= 2;
  if (size(m) > static_cast<double>(max_points)) return 0;
  return m;
}

}  // namespace

std::vector<Vector> probe_lattice(const Space& space, int per_axis,
                                  std::size_t max_points) {
  const int dim = space.dim();
  const int m = lattice_axis_count(space, per_axis, max_points);
  std::vector<Vector> out;
  if (m == 0) {
    // Too many axes for a lattice: origin, +-e_k and the normalized diagonals.
    out.push_back(Vector::Zero(dim));
    for (int k = 0; k < dim; ++k) {
      for (int s : {1, -1}) {
        Vector e = Vector::Zero(dim);
        e(k) = s;
        out.push_back(e);
      }
    }
    for (int s : {1, -1}) {
      Vector d = Vector::Constant(dim, s);
      out.push_back(d / norm(space.norm(), d));
    }
    return out;
  }
  const double step = 2.0 / (m - 1);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Vector p(dim);
    for (int i = 0; i < dim; ++i) p(i) = -1.0 + step * idx[static_cast<std::size_t>(i)];
    if (norm(space.norm(), p) <= 1.0 + 1e-12) out.push_back(p);
    int i = 0;
    while (i < dim && ++idx[static_cast<std::size_t>(i)] == m) {
      idx[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == dim) break;
  }
  return out;
}

double probe_lattice_step(const Space& space, int per_axis,
                          std::size_t max_points) {
  const int m = lattice_axis_count(space, per_axis, max_points);
  if (m == 0) return std::numeric_limits<double>::infinity();
  return 2.0 / (m - 1);
}

std::vector<Vector> evaluation_points(const Mapping& m, int per_axis) {
  if (auto domain = sample_domain(m)) return *domain;
  return probe_lattice(m.space(), per_axis);
}

PointPair operator_norm_witness(const Space& space, const Matrix& a) {
  const int dim = space.dim();
  Vector x = Vector::Zero(dim);
  switch (space.norm()) {
    case NormTag::kLinf: {
      Eigen::Index row = 0;
      a.cwiseAbs().rowwise().sum().maxCoeff(&row);
      for (int j = 0; j < dim; ++j) {
        const double v = a(row, j);
        x(j) = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
      }
      break;
    }
    case NormTag::kL1: {
      Eigen::Index col = 0;
      a.cwiseAbs().colwise().sum().maxCoeff(&col);
      x(col) = 1.0;
      break;
    }
    case NormTag::kL2: {
      Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinV);
      x = svd.matrixV().col(0);
      break;
    }
  }
  if (x.cwiseAbs().maxCoeff() == 0.0) x(0) = 1.0;
  return {x, -x};
}

namespace {

double lipschitz_upper(const Mapping& m) {
  const auto& v = m.node().value;
  if (const auto* lin = std::get_if<LinearNode>(&v)) {
    return operator_norm(m.space().norm(), lin->matrix);
  }
  if (const auto* aff = std::get_if<AffineNode>(&v)) {
    return operator_norm(m.space().norm(), aff->matrix);
  }
  if (const auto* grid = std::get_if<GridNode>(&v)) {
    const NormTag tag = m.space().norm();
    double best = 0.0;
    for (std::size_t i = 0; i < grid->points.size(); ++i) {
      for (std::size_t j = i + 1; j < grid->points.size(); ++j) {
        const double dx = norm(tag, grid->points[i] - grid->points[j]);
        best = std::max(best, norm(tag, grid->values[i] - grid->values[j]) / dx);
      }
    }
    return best;
  }
  if (const auto* combo = std::get_if<ComboNode>(&v)) {
    return (1.0 - combo->lambda) * lipschitz_upper(combo->left) +
           combo->lambda * lipschitz_upper(combo->right);
  }
  if (const auto* ret = std::get_if<RetractNode>(&v)) {
    return lipschitz_upper(ret->inner);
  }
  return lipschitz_upper(std::get<TranslateNode>(v).inner);
}

struct PairScan {
  double best = -1.0;
  PointPair pair;
};

void scan_pairs_on(const Mapping& f, const std::vector<Vector>& pts,
                   const std::vector<Vector>& vals, PairScan& scan) {
  const NormTag tag = f.space().norm();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dx = norm(tag, pts[i] - pts[j]);
      if (dx == 0.0) continue;
      const double r = norm(tag, vals[i] - vals[j]) / dx;
      if (r > scan.best) scan = {r, {pts[i], pts[j]}};
    }
  }
}

void consider(const Mapping& f, const Vector& x, const Vector& y,
              PairScan& scan) {
  const NormTag tag = f.space().norm();
  const double dx = norm(tag, x - y);
  if (dx == 0.0) return;
  const double r = norm(tag, eval(f, x) - eval(f, y)) / dx;
  if (r > scan.best) scan = {r, {x, y}};
}

Vector random_ball_point(const Space& space, CounterRng& rng) {
  Vector p(space.dim());
  for (int i = 0; i < space.dim(); ++i) p(i) = rng.uniform(-1.0, 1.0);
  const double n = norm(space.norm(), p);
  if (n > 1.0) p /= n;
  return p;
}

// Pairs lying on rays out of every retraction centre, beyond its radius, and
// the operator-norm witnesses of every linear piece.
void structural_pairs(const Mapping& root, const Mapping& m,
                      const std::vector<Vector>& boundary, PairScan& scan) {
  const auto& v = m.node().value;
  const NormTag tag = root.space().norm();
  if (const auto* lin = std::get_if<LinearNode>(&v)) {
    const PointPair w = operator_norm_witness(root.space(), lin->matrix);
    consider(root, w.x, w.y, scan);
    consider(root, w.x, Vector::Zero(w.x.size()), scan);
    return;
  }
  if (const auto* aff = std::get_if<AffineNode>(&v)) {
    const PointPair w = operator_norm_witness(root.space(), aff->matrix);
    consider(root, w.x, w.y, scan);
    return;
  }
  if (const auto* combo = std::get_if<ComboNode>(&v)) {
    structural_pairs(root, combo->left, boundary, scan);
    structural_pairs(root, combo->right, boundary, scan);
    return;
  }
  if (const auto* ret = std::get_if<RetractNode>(&v)) {
    for (const Vector& p : boundary) {
      const Vector d = p - ret->x0;
      const double len = norm(tag, d);
      if (len <= ret->eta) continue;
      const Vector q = ret->x0 + ((ret->eta + len) / (2.0 * len)) * d;
      consider(root, p, q, scan);
    }
    structural_pairs(root, ret->inner, boundary, scan);
    return;
  }
  if (const auto* tr = std::get_if<TranslateNode>(&v)) {
    structural_pairs(root, tr->inner, boundary, scan);
  }
}

}  // namespace

LipschitzReport lipschitz_bounds(const Mapping& f, const SamplingBudget& budget) {
  const auto& v = f.node().value;
  LipschitzReport out;
  if (const auto* lin = std::get_if<LinearNode>(&v)) {
    out.upper = out.lower = operator_norm(f.space().norm(), lin->matrix);
    out.exact = true;
    out.witness = operator_norm_witness(f.space(), lin->matrix);
    return out;
  }
  if (const auto* aff = std::get_if<AffineNode>(&v)) {
    out.upper = out.lower = operator_norm(f.space().norm(), aff->matrix);
    out.exact = true;
    out.witness = operator_norm_witness(f.space(), aff->matrix);
    return out;
  }

  if (auto domain = sample_domain(f)) {
    if (domain->size() < 2) {
      fail(ErrorCode::kInvalidArgument,
           "lipschitz_bounds: grid needs at least 2 samples");
    }
    std::vector<Vector> vals;
    vals.reserve(domain->size());
    for (const Vector& p : *domain) vals.push_back(eval(f, p));
    PairScan scan;
    scan_pairs_on(f, *domain, vals, scan);
    out.lower = out.upper = scan.best;
    out.exact = true;
    out.witness = scan.pair;
    return out;
  }

  out.upper = lipschitz_upper(f);
  PairScan scan;
  std::vector<Vector> boundary;
  for (const Vector& p : probe_lattice(f.space(), budget.lattice_per_axis)) {
    if (norm(f.space().norm(), p) >= 1.0 - 1e-12) boundary.push_back(p);
  }
  structural_pairs(f, f, boundary, scan);
  CounterRng rng(budget.seed, 0x11b);
  for (std::size_t k = 0; k < budget.pairs; ++k) {
    const Vector x = random_ball_point(f.space(), rng);
    const Vector y = random_ball_point(f.space(), rng);
    consider(f, x, y, scan);
  }
  if (scan.best < 0.0) {
    scan = {0.0, {Vector::Unit(f.space().dim(), 0),
                  -Vector::Unit(f.space().dim(), 0)}};
  }
  out.lower = std::min(scan.best, out.upper);
  out.witness = scan.pair;
  out.exact = out.upper - out.lower <= 1e-12 * std::max(1.0, out.upper);
  return out;
}

namespace {

bool affine_parts(const Mapping& m, Matrix& a, Vector& b) {
  const auto& v = m.node().value;
  if (const auto* lin = std::get_if<LinearNode>(&v)) {
    a = lin->matrix;
    b = Vector::Zero(m.space().dim());
    return true;
  }
  if (const auto* aff = std::get_if<AffineNode>(&v)) {
    a = aff->matrix;
    b = aff->offset;
    return true;
  }
  return false;
}

// Vertices of polytopal balls, or nothing when there are too many / none.
std::vector<Vector> ball_vertices(const Space& space) {
  const int dim = space.dim();
  std::vector<Vector> out;
  if (space.norm() == NormTag::kL1) {
    for (int k = 0; k < dim; ++k) {
      out.push_back(Vector::Unit(dim, k));
      out.push_back(-Vector::Unit(dim, k));
    }
  } else if (space.norm() == NormTag::kLinf && dim <= 16) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << dim); ++mask) {
      Vector p(dim);
      for (int i = 0; i < dim; ++i) p(i) = ((mask >> i) & 1U) ? -1.0 : 1.0;
      out.push_back(p);
    }
  }
  return out;
}

double covering_radius(const Space& space, int per_axis) {
  const double step = probe_lattice_step(space, per_axis);
  const double n = space.dim();
  switch (space.norm()) {
    case NormTag::kLinf: return step;
    case NormTag::kL1: return step * n;
    case NormTag::kL2: return step * std::sqrt(n);
  }
  return step;
}

}  // namespace

DistanceReport distance_infty(const Mapping& f, const Mapping& g,
                              const SamplingBudget& budget) {
  require_same_space(f, g, "distance_infty");
  const Space& space = f.space();
  DistanceReport out;

  Matrix af, ag;
  Vector bf, bg;
  if (affine_parts(f, af, bf) && affine_parts(g, ag, bg)) {
    const Matrix diff = af - ag;
    const Vector shift = bf - bg;
    if (shift.cwiseAbs().maxCoeff() == 0.0) {
      out.value = out.upper = operator_norm(space.norm(), diff);
      out.exact = true;
      out.attaining_point = operator_norm_witness(space, diff).x;
      return out;
    }
    // A convex function of x peaks at a vertex of a polytopal ball.
    const auto vertices = ball_vertices(space);
    if (!vertices.empty()) {
      double best = -1.0;
      for (const Vector& p : vertices) {
        const double d = norm(space.norm(), diff * p + shift);
        if (d > best) {
          best = d;
          out.attaining_point = p;
        }
      }
      out.value = out.upper = best;
      out.exact = true;
      out.samples = vertices.size();
      return out;
    }
  }

  auto df = sample_domain(f);
  auto dg = sample_domain(g);
  std::optional<std::vector<Vector>> domain;
  if (df && dg) {
    domain = intersect_points(*df, *dg);
    if (domain->empty()) {
      fail(ErrorCode::kInvalidArgument,
           "distance_infty: grids share no sample points");
    }
  } else if (df) {
    domain = std::move(df);
  } else if (dg) {
    domain = std::move(dg);
  }

  const std::vector<Vector> pts =
      domain ? *domain : probe_lattice(space, budget.lattice_per_axis);
  double best = 0.0;
  out.attaining_point = pts.front();
  for (const Vector& p : pts) {
    const double d = norm(space.norm(), eval(f, p) - eval(g, p));
    if (d > best) {
      best = d;
      out.attaining_point = p;
    }
  }
  out.value = best;
  out.samples = pts.size();
  if (domain) {
    out.upper = best;
    out.exact = true;
  } else {
    out.upper = best + (lipschitz_upper(f) + lipschitz_upper(g)) *
                           covering_radius(space, budget.lattice_per_axis);
  }
  return out;
}

IsometryCheck is_isometry_on_pairs(const Mapping& f,
                                   std::span<const PointPair> pairs, double tol) {
  IsometryCheck out;
  const NormTag tag = f.space().norm();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double before = norm(tag, pairs[i].x - pairs[i].y);
    const double after = norm(tag, f(pairs[i].x) - f(pairs[i].y));
    const double defect = std::abs(after - before);
    out.worst_defect = std::max(out.worst_defect, defect);
    if (defect > tol && out.isometric) {
      out.isometric = false;
      out.first_violation = i;
    }
  }
  return out;
}

std::vector<RigidityViolation> directional_rigidity_check(
    const Mapping& g, const Vector& e, std::span<const Vector> base_points,
    std::span<const double> t_values, double tol) {
  const Space& space = g.space();
  const PointClass cls = classify_point(space, e);
  if (!cls.almost_exposed) {
    fail(ErrorCode::kInvalidArgument,
         "directional_rigidity_check: direction is not an almost exposed point");
  }
  std::vector<RigidityViolation> out;
  for (const Vector& x : base_points) {
    for (double t : t_values) {
      const Vector p = x + t * e;
      if (norm(space, p) > 1.0 + kBallTol) {
        fail(ErrorCode::kOutsideBall,
             "directional_rigidity_check: probe point escapes C");
      }
      const double mag = norm(space.norm(), g(p) - g(x) - t * e);
      if (mag > tol) out.push_back({x, t, mag});
    }
  }
  return out;
}

Mapping mix(const Mapping& a, const Mapping& b, double s) {
  require_same_space(a, b, "mix");
  if (!std::isfinite(s)) fail(ErrorCode::kInvalidArgument, "mix: weight not finite");
  if (s == 0.0) return a;
  if (s == 1.0) return b;
  const Space& space = a.space();

  const auto* la = std::get_if<LinearNode>(&a.node().value);
  const auto* lb = std::get_if<LinearNode>(&b.node().value);
  if (la && lb) return Mapping::linear(space, (1.0 - s) * la->matrix + s * lb->matrix);

  Matrix ma, mb;
  Vector oa, ob;
  if (affine_parts(a, ma, oa) && affine_parts(b, mb, ob)) {
    return Mapping::affine(space, (1.0 - s) * ma + s * mb, (1.0 - s) * oa + s * ob);
  }

  const auto* ga = std::get_if<GridNode>(&a.node().value);
  const auto* gb = std::get_if<GridNode>(&b.node().value);
  if (ga && gb && ga->points.size() == gb->points.size()) {
    bool aligned = true;
    for (std::size_t i = 0; i < ga->points.size() && aligned; ++i) {
      aligned = (ga->points[i] - gb->points[i]).cwiseAbs().maxCoeff() <= kGridMatchTol;
    }
    if (aligned) {
      std::vector<Vector> vals;
      vals.reserve(ga->values.size());
      for (std::size_t i = 0; i < ga->values.size(); ++i) {
        vals.push_back((1.0 - s) * ga->values[i] + s * gb->values[i]);
      }
      return Mapping::grid(space, ga->points, std::move(vals));
    }
  }

  if (s > 0.0 && s < 1.0) return Mapping::combo(s, a, b);

  // Extrapolation outside closed forms: tabulate on the joint domain.
  auto da = sample_domain(a);
  auto db = sample_domain(b);
  std::vector<Vector> pts;
  if (da && db) {
    pts = intersect_points(*da, *db);
  } else if (da) {
    pts = std::move(*da);
  } else if (db) {
    pts = std::move(*db);
  } else {
    pts = probe_lattice(space);
  }
  std::vector<Vector> vals;
  vals.reserve(pts.size());
  for (const Vector& p : pts) vals.push_back((1.0 - s) * eval(a, p) + s * eval(b, p));
  return Mapping::grid(space, std::move(pts), std::move(vals));
}

Mapping compose_linear_left(const Matrix& b, const Mapping& m) {
  const Space& space = m.space();
  require_square(space, b, "compose_linear_left");
  const auto& v = m.node().value;
  if (const auto* lin = std::get_if<LinearNode>(&v)) {
    return Mapping::linear(space, b * lin->matrix);
  }
  if (const auto* aff = std::get_if<AffineNode>(&v)) {
    return Mapping::affine(space, b * aff->matrix, b * aff->offset);
  }
  if (const auto* grid = std::get_if<GridNode>(&v)) {
    std::vector<Vector> vals;
    vals.reserve(grid->values.size());
    for (const Vector& y : grid->values) vals.push_back(b * y);
    return Mapping::grid(space, grid->points, std::move(vals));
  }
  if (const auto* combo = std::get_if<ComboNode>(&v)) {
    return Mapping::combo(combo->lambda, compose_linear_left(b, combo->left),
                          compose_linear_left(b, combo->right));
  }
  if (const auto* ret = std::get_if<RetractNode>(&v)) {
    return Mapping::retract(compose_linear_left(b, ret->inner), ret->eta, ret->x0);
  }
  const auto& tr = std::get<TranslateNode>(v);
  return Mapping::translate(compose_linear_left(b, tr.inner), b * tr.offset);
}

SelfMapCheck check_self_map(const Mapping& m, double tol, int per_axis) {
  const Space& space = m.space();
  SelfMapCheck out;
  Matrix a;
  Vector b;
  if (affine_parts(m, a, b)) {
    out.lipschitz = operator_norm(space.norm(), a);
    if (b.cwiseAbs().maxCoeff() == 0.0) {
      out.max_norm = out.lipschitz;
      out.exact = true;
    } else if (auto vertices = ball_vertices(space); !vertices.empty()) {
      for (const Vector& p : vertices) {
        out.max_norm = std::max(out.max_norm, norm(space.norm(), a * p + b));
      }
      out.exact = true;
      out.samples = vertices.size();
    } else {
      const double bound = out.lipschitz + norm(space.norm(), b);
      const auto pts = probe_lattice(space, per_axis);
      for (const Vector& p : pts) {
        out.max_norm = std::max(out.max_norm, norm(space.norm(), a * p + b));
      }
      out.samples = pts.size();
      if (bound <= 1.0 + tol) {
        out.max_norm = std::max(out.max_norm, bound);
        out.exact = true;
      }
    }
    out.ok = out.lipschitz <= 1.0 + tol && out.max_norm <= 1.0 + tol;
    return out;
  }

  const auto domain = sample_domain(m);
  const std::vector<Vector> pts = domain ? *domain : probe_lattice(space, per_axis);
  std::vector<Vector> vals;
  vals.reserve(pts.size());
  for (const Vector& p : pts) {
    vals.push_back(eval(m, p));
    out.max_norm = std::max(out.max_norm, norm(space.norm(), vals.back()));
  }
  out.samples = pts.size();
  if (domain) {
    PairScan scan;
    scan_pairs_on(m, pts, vals, scan);
    out.lipschitz = std::max(scan.best, 0.0);
    out.exact = true;
  } else {
    out.lipschitz = lipschitz_upper(m);
  }
  out.ok = out.lipschitz <= 1.0 + tol && out.max_norm <= 1.0 + tol;
  return out;
}

}  // namespace nonexp
