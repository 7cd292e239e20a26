#pragma once

// Independent reference implementations used to cross-check the library.
// They favour obviousness over speed and share no code with src/.

#include "soda/engine.hpp"
#include "soda/eval.hpp"
#include "soda/infofilter.hpp"
#include "soda/rng.hpp"

#include <cstdint>
#include <vector>

namespace oracle {

using soda::Mat2;
using soda::ObjectId;
using soda::Vec2;

/// Batch weighted least squares over isotropic-or-not measurements,
/// solved with Eigen's LU inverse.
struct Wls {
  Vec2 x_hat;
  Mat2 P;
};
Wls weighted_least_squares(const std::vector<Vec2>& z, const std::vector<Mat2>& R);

/// Random SPD 2x2 matrix with eigenvalues in [lo, hi].
Mat2 random_spd(soda::Rng& rng, double lo, double hi);

/// Reclustering by exhaustive DFS over an adjacency matrix.
struct ReclusterOutcome {
  std::vector<soda::PotentialObject> potentials;  // ascending id, after fusion
  std::vector<std::vector<ObjectId>> components;  // fused groups (size > 1), ascending
  std::vector<ObjectId> output_ids;               // w >= w_min, ascending
};
ReclusterOutcome recluster(const soda::EngineState& s);

/// Random engine state with up to `max_potentials` potentials and random
/// shared density, valid for Engine::from_state.
soda::EngineState random_state(soda::Rng& rng, std::size_t max_potentials);

/// Best (max pair count, then min total distance) gated matching found by
/// enumerating every partial assignment. Intended for <= 8 x 8.
struct MatchOptimum {
  std::size_t pairs = 0;
  double total_distance = 0.0;
};
MatchOptimum exhaustive_match(const std::vector<Vec2>& gt, const std::vector<double>& gate,
                              const std::vector<Vec2>& est);

/// Two-sided exact signed-rank p-value by enumerating all 2^n sign patterns.
double wilcoxon_exact_p(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle
