#pragma once

// Holes in P_{f,q}: a near-isometric pair of f, the retracted center
// g~ = g o R_{eta,x0} and a probe-based check that the ball of radius
// alpha * d(g~, g) around g~ misses P_{f,q}.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nonexp/error.hpp"
#include "nonexp/mapping.hpp"

namespace nonexp {

struct PorosityParams {
  double q = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double alpha = 0.0;

  /// delta = alpha = q / (2 (1 + q)); q in (0, 1/2), epsilon > 0.
  static PorosityParams make(double q, double epsilon);

  /// (2 - q) / 2.
  double threshold() const noexcept { return (2.0 - q) / 2.0; }
  /// (1 - delta - 2 alpha) / (1 - 2 alpha); equals threshold().
  double rearranged() const noexcept {
    return (1.0 - delta - 2.0 * alpha) / (1.0 - 2.0 * alpha);
  }
};

struct NearIsometricPair {
  Vector x0;
  Vector y;
  double eta = 0.0;
  double ratio = 0.0;
};

class NoPairFound : public Error {
 public:
  NoPairFound(const std::string& what, double best_ratio)
      : Error(ErrorCode::kNoPairFound, what), best_ratio_(best_ratio) {}

  double best_ratio() const noexcept { return best_ratio_; }

 private:
  double best_ratio_;
};

struct PairSearchBudget {
  SamplingBudget sampling;
  int bisection_steps = 200;
  std::size_t alternatives = 8;
};

/// Pairs with ratio > 1 - delta and 0 < eta < epsilon, best first. On a
/// finite domain every sample pair is tried (higher ratio first, then
/// larger eta); otherwise the Lipschitz witness is bisected toward the
/// better half and shifted copies of the result serve as alternatives.
/// Throws NoPairFound with the best ratio seen.
std::vector<NearIsometricPair> near_isometric_pairs(const Mapping& f, double delta,
                                                    double epsilon,
                                                    const PairSearchBudget& budget = {});

NearIsometricPair find_near_isometric_pair(const Mapping& f, double delta,
                                           double epsilon,
                                           const PairSearchBudget& budget = {});

struct PorosityWitness {
  PorosityParams params;
  NearIsometricPair pair;
  Mapping g;
  Mapping g_tilde;
  /// Sample set: f's domain (or the probe lattice) plus x0 and y.
  std::vector<Vector> samples;
  std::size_t x0_index = 0;
  std::size_t y_index = 0;
  /// max over samples of ||g~ - g||; the radius is built from it.
  double center_distance = 0.0;
  /// eta bounds d(g~, g) everywhere since R moves points by at most eta.
  double center_distance_upper = 0.0;
  double radius = 0.0;
  std::size_t pairs_tried = 0;
};

inline constexpr std::size_t kPorosityRetries = 8;

/// Throws NoPairFound from the pair search and kDegenerate when every
/// candidate pair leaves g~ = g on the samples.
PorosityWitness build_porosity_witness(const Mapping& f, const Mapping& g, double q,
                                       double epsilon,
                                       const PairSearchBudget& budget = {});

enum class ProbeKind { kRandom, kPairSplit };

std::string_view to_string(ProbeKind kind) noexcept;

struct ProbeRecord {
  std::size_t index = 0;
  ProbeKind kind = ProbeKind::kRandom;
  double distance = 0.0;  ///< max over samples of ||g' - g~||
  double worst_lambda = 0.0;
  double min_margin = 0.0;  ///< min over lambda of ||h(y) - h(x0)|| - eta
};

struct ProbeFailure {
  std::size_t probe = 0;
  double lambda = 0.0;
  double margin = 0.0;
};

struct BallCertificate {
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t lambda_count = 0;
  double lambda_step = 0.0;
  double min_margin = 0.0;
  /// eta ((ratio - 2 alpha q) / (1 - q) - 1): the smallest margin the
  /// inequality chain allows at lambda = 1 - q.
  double proof_margin_bound = 0.0;
  std::vector<ProbeRecord> records;
  std::vector<ProbeFailure> failures;

  bool certified() const noexcept {
    return failures.empty() && accepted == requested;
  }
};

/// Draws `probes` grid perturbations g' of g~ on the witness samples with
/// ||g' - g~|| <= radius and g' nonexpansive there, and checks for every
/// lambda in {q, q + step, ..., 1 - q} that h = (f - (1 - lambda) g')/lambda
/// breaks nonexpansiveness at (x0, y).
BallCertificate certify_ball_empty(const PorosityWitness& witness, const Mapping& f,
                                   std::size_t probes, double lambda_step,
                                   std::uint64_t seed);

}  // namespace nonexp
