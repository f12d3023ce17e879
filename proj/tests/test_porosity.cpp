#include <gtest/gtest.h>

#include <cmath>

#include "nonexp/porosity.hpp"
#include "oracles.hpp"

using namespace nonexp;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const Space kLinf2(2, NormTag::kLinf);

double linf(const Vector& x) { return x.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Params, Examples) {
  const PorosityParams a = PorosityParams::make(0.25, 0.5);
  EXPECT_NEAR(a.delta, 0.1, 1e-15);
  EXPECT_NEAR(a.alpha, 0.1, 1e-15);
  const PorosityParams b = PorosityParams::make(0.4, 0.5);
  EXPECT_NEAR(b.delta, 1.0 / 7.0, 1e-15);
  EXPECT_NEAR(b.threshold(), 0.8, 1e-15);
  EXPECT_GT(b.threshold(), 1.0 - b.q);
}

TEST(Params, RearrangementIdentityOnGrid) {
  for (int k = 1; k <= 100; ++k) {
    const double q = 0.5 * k / 101.0;
    const PorosityParams p = PorosityParams::make(q, 1.0);
    EXPECT_EQ(p.delta, p.alpha);
    EXPECT_NEAR(p.delta, q / (2.0 * (1.0 + q)), 1e-15);
    EXPECT_NEAR(p.rearranged(), (2.0 - q) / 2.0, 1e-14);
    EXPECT_GT(p.threshold(), 1.0 - q);
  }
}

TEST(Params, AlphaMonotoneInQ) {
  double prev = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double a = PorosityParams::make(0.5 * k / 101.0, 1.0).alpha;
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(Params, Rejected) {
  EXPECT_THROW(PorosityParams::make(0.0, 1.0), Error);
  EXPECT_THROW(PorosityParams::make(0.5, 1.0), Error);
  EXPECT_THROW(PorosityParams::make(0.25, 0.0), Error);
}

TEST(PairSearch, IdentityHasRatioOne) {
  const NearIsometricPair p = find_near_isometric_pair(Mapping::identity(kLinf2), 0.1, 0.5);
  EXPECT_DOUBLE_EQ(p.ratio, 1.0);
  EXPECT_GT(p.eta, 0.0);
  EXPECT_LT(p.eta, 0.5);
  EXPECT_DOUBLE_EQ(p.eta, linf(p.y - p.x0));
  EXPECT_LE(linf(p.x0), 1.0);
  EXPECT_LE(linf(p.y), 1.0);
}

TEST(PairSearch, DiagonalKeepsFirstAxis) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1;
  a(1, 1) = 0.5;
  const Mapping f = Mapping::linear(kLinf2, a);
  const NearIsometricPair p = find_near_isometric_pair(f, 0.1, 0.25);
  EXPECT_NEAR(p.ratio, 1.0, 1e-12);
  EXPECT_LT(p.eta, 0.25);
  const Vector d = p.y - p.x0;
  EXPECT_GE(std::abs(d(0)), std::abs(d(1)));
  EXPECT_NEAR(linf(f(p.y) - f(p.x0)) / p.eta, p.ratio, 1e-12);
}

TEST(PairSearch, ShortLipschitzReportsBestRatio) {
  const Mapping f = Mapping::linear(kLinf2, 0.8 * Matrix::Identity(2, 2));
  try {
    find_near_isometric_pair(f, 0.1, 0.5);
    FAIL() << "expected NoPairFound";
  } catch (const NoPairFound& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoPairFound);
    EXPECT_LE(e.best_ratio(), 0.8 + 1e-12);
    EXPECT_GT(e.best_ratio(), 0.0);
  }
}

TEST(PairSearch, FiniteDomainOrdering) {
  const Space s1(1, NormTag::kLinf);
  const std::vector<Vector> pts = {vec({-1}), vec({-0.9}), vec({0}), vec({0.05})};
  const std::vector<Vector> vals = {vec({-1}), vec({-0.9}), vec({0}), vec({0.04})};
  const auto pairs = near_isometric_pairs(Mapping::grid(s1, pts, vals), 0.25, 0.5);
  ASSERT_GE(pairs.size(), 2u);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    EXPECT_GE(pairs[i - 1].ratio, pairs[i].ratio);
    if (pairs[i - 1].ratio == pairs[i].ratio) EXPECT_GE(pairs[i - 1].eta, pairs[i].eta);
  }
  EXPECT_DOUBLE_EQ(pairs.front().ratio, 1.0);
  for (const auto& p : pairs) EXPECT_LT(p.eta, 0.5);
}

TEST(Witness, IdentityGeometry) {
  const Mapping id = Mapping::identity(kLinf2);
  const PorosityWitness w = build_porosity_witness(id, id, 0.25, 0.5);
  EXPECT_NEAR(w.params.alpha, 0.1, 1e-15);
  EXPECT_LT(w.pair.eta, 0.5);
  EXPECT_GT(w.center_distance, 0.0);
  EXPECT_LE(w.center_distance, w.pair.eta + 1e-15);
  EXPECT_EQ(w.center_distance_upper, w.pair.eta);
  EXPECT_DOUBLE_EQ(w.radius, w.params.alpha * w.center_distance);
  EXPECT_EQ(w.g_tilde(w.pair.y), w.g_tilde(w.pair.x0));
  EXPECT_EQ(w.samples[w.x0_index], w.pair.x0);
  EXPECT_EQ(w.samples[w.y_index], w.pair.y);
}

TEST(Witness, RetractionAtOriginMovesByEta) {
  // g~ = R_{0.4, 0}: every sample at distance >= 0.4 from 0 moves by exactly 0.4.
  const Mapping id = Mapping::identity(kLinf2);
  const Mapping r = Mapping::retract(id, 0.4, vec({0, 0}));
  const DistanceReport d = distance_infty(r, id);
  EXPECT_NEAR(d.value, 0.4, 1e-15);
  EXPECT_NEAR(PorosityParams::make(0.25, 0.5).alpha * d.value, 0.04, 1e-15);
  EXPECT_EQ(r(vec({0.4, 0})), r(vec({0, 0})));
}

TEST(Witness, ConstantGIsDegenerate) {
  const Mapping id = Mapping::identity(kLinf2);
  try {
    build_porosity_witness(id, Mapping::zero(kLinf2), 0.25, 0.5);
    FAIL() << "expected a degenerate witness";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(Ball, IdentityProbesAllRefuted) {
  const Mapping id = Mapping::identity(kLinf2);
  const PorosityWitness w = build_porosity_witness(id, id, 0.25, 0.5);
  const BallCertificate c = certify_ball_empty(w, id, 200, 1e-2, 7);
  EXPECT_TRUE(c.certified());
  EXPECT_EQ(c.accepted, 200u);
  EXPECT_GT(c.min_margin, 0.0);
  EXPECT_GE(c.min_margin, c.proof_margin_bound - 1e-12);
  EXPECT_GT(c.proof_margin_bound, 0.0);
  for (const ProbeRecord& r : c.records) EXPECT_LE(r.distance, w.radius * (1 + 1e-12));
}

TEST(Ball, DeterministicInSeed) {
  const Mapping id = Mapping::identity(kLinf2);
  const PorosityWitness w = build_porosity_witness(id, id, 0.4, 0.5);
  const BallCertificate a = certify_ball_empty(w, id, 50, 1e-2, 11);
  const BallCertificate b = certify_ball_empty(w, id, 50, 1e-2, 11);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].distance, b.records[i].distance);
    EXPECT_EQ(a.records[i].min_margin, b.records[i].min_margin);
  }
  EXPECT_EQ(a.min_margin, b.min_margin);
}

TEST(Ball, ExactCenterMarginMatchesChain) {
  // With g' = g~ and lambda = 1 - q the violated margin is
  // (ratio - (1 - lambda) * 0) / lambda * eta - eta, far above the bound.
  const Mapping id = Mapping::identity(kLinf2);
  const PorosityWitness w = build_porosity_witness(id, id, 0.25, 0.5);
  const double lam = 1.0 - w.params.q;
  const Vector dg = w.g_tilde(w.pair.y) - w.g_tilde(w.pair.x0);
  const Vector df = id(w.pair.y) - id(w.pair.x0);
  const double margin = linf((df - (1 - lam) * dg) / lam) - w.pair.eta;
  EXPECT_NEAR(margin, w.pair.eta * (1.0 / lam - 1.0), 1e-15);
  EXPECT_GT(margin, 0.0);
}
