#pragma once

#include "soda/core.hpp"
#include "soda/sim.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace soda::eval {

enum class RadiusMode { Normal, Strict };

/// Matching radius of a type under the given mode.
[[nodiscard]] double radius_for(const sim::ObjectTypeSpec& spec, RadiusMode mode);

struct MatchPair {
  std::uint64_t gt_id = 0;
  ObjectId estimate_id = 0;
  double distance = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // ascending gt id
  std::vector<ObjectId> false_positives;
  std::vector<std::uint64_t> false_negatives;
  RadiusMode mode = RadiusMode::Normal;

  [[nodiscard]] std::size_t tp() const { return pairs.size(); }
  [[nodiscard]] std::size_t fp() const { return false_positives.size(); }
  [[nodiscard]] std::size_t fn() const { return false_negatives.size(); }
  [[nodiscard]] double total_distance() const;
};

/// Minimum-cost assignment on a dense rows x cols matrix (Hungarian
/// algorithm). Returns, for each row, the assigned column or -1 when
/// rows > cols leaves it unassigned.
[[nodiscard]] std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

/// One-to-one matching that maximizes the number of radius-gated pairs and,
/// among those, minimizes the total distance.
[[nodiscard]] MatchResult match(std::span<const EstimatedObject> estimates,
                                const sim::ScenarioTruth& truth,
                                std::span<const sim::ObjectTypeSpec> types, RadiusMode mode);

/// 2TP / (2TP + FP + FN). Throws InvalidInput when TP+FP+FN == 0.
[[nodiscard]] double f1(const MatchResult& m);
/// TP / (TP + FP), 0 when there are no estimates.
[[nodiscard]] double precision(const MatchResult& m);
/// TP / (TP + FN), 0 when there is no ground truth.
[[nodiscard]] double recall(const MatchResult& m);
/// Root mean squared pair distance; nullopt when there are no pairs.
[[nodiscard]] std::optional<double> rmse(const MatchResult& m);

struct Checkpoint {
  std::size_t detections_consumed = 0;
  std::vector<EstimatedObject> estimates;
};

struct MotFrame {
  std::size_t detections_consumed = 0;
  std::size_t matches = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t idsw = 0;
  std::optional<double> motp;  // cumulative; nullopt until the first match
  double mota = 0.0;           // cumulative
};

/// Online CLEAR-MOT accumulator. Each call to add_frame is one frame.
class ClearMot {
 public:
  ClearMot(const sim::ScenarioTruth& truth, std::span<const sim::ObjectTypeSpec> types,
           RadiusMode mode);

  /// Throws InvalidInput when detections_consumed does not increase.
  MotFrame add_frame(std::size_t detections_consumed, std::span<const EstimatedObject> estimates);

 private:
  const sim::ScenarioTruth* truth_;
  std::vector<double> radius_;  // by truth index
  RadiusMode mode_;
  std::map<std::uint64_t, ObjectId> last_match_;  // gt id -> estimate id
  std::optional<std::size_t> last_consumed_;
  double sum_distance_ = 0.0;
  std::size_t sum_matches_ = 0;
  std::size_t sum_errors_ = 0;
  std::size_t sum_gt_ = 0;
};

[[nodiscard]] std::vector<MotFrame> clear_mot(std::span<const Checkpoint> series,
                                              const sim::ScenarioTruth& truth,
                                              std::span<const sim::ObjectTypeSpec> types,
                                              RadiusMode mode);

struct InsufficientSample : InvalidInput {
  using InvalidInput::InvalidInput;
};

struct WilcoxonResult {
  std::size_t n = 0;  ///< non-zero differences
  double w_plus = 0.0;
  double w_minus = 0.0;
  double statistic = 0.0;  ///< min(W+, W-)
  double p_value = 1.0;    ///< two-sided
  bool exact = false;      ///< exact null distribution instead of normal approximation
};

/// Largest n for which the exact sign-flip distribution is used.
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// Paired two-sided Wilcoxon signed-rank test on x - y. Zero differences
/// are dropped and ties get midranks. All-zero differences give p = 1;
/// fewer than 10 non-zero differences throw InsufficientSample.
[[nodiscard]] WilcoxonResult wilcoxon_signed_rank(std::span<const double> x,
                                                  std::span<const double> y);

}  // namespace soda::eval
