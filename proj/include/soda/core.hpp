#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace soda {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Object and potential-object identifiers. Issued by a monotone counter so
/// replays are deterministic and ids order by age.
using ObjectId = std::uint64_t;

// Error hierarchy. The CLI maps these onto exit codes 1/2/3.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Ground-truth label carried alongside a detection. Only simulation and
/// evaluation read it.
struct ObjectTruth {
  std::uint64_t object_id = 0;
  bool operator==(const ObjectTruth&) const = default;
};
struct ClutterTruth {
  bool operator==(const ClutterTruth&) const = default;
};
using TruthLabel = std::variant<ObjectTruth, ClutterTruth>;

/// The part of a detection the association engine is allowed to see.
struct Measurement {
  Vec2 z = Vec2::Zero();
  double pi = 0.0;
  Mat2 R = Mat2::Identity();
};

/// One sensor report.
struct Detection {
  std::string sensor;
  Vec2 z = Vec2::Zero();
  double pi = 0.0;  ///< confidence that this is a true object detection
  Mat2 R = Mat2::Identity();
  std::optional<TruthLabel> truth;

  [[nodiscard]] Measurement measurement() const { return {z, pi, R}; }
};

/// True iff R is symmetric with both eigenvalues strictly positive.
[[nodiscard]] bool is_spd(const Mat2& R);

/// Throws InvalidInput when pi is outside [0,1], R is not SPD, or any value
/// is non-finite.
void validate(const Measurement& m);
inline void validate(const Detection& d) { validate(d.measurement()); }

struct EngineParams {
  double radius = 1.1;   ///< clustering radius r [m]
  double beta = 6.0;     ///< confidence-transform steepness
  double w_max = 10.0;   ///< weight of a detection with pi = 1
  double w_min = 4.0;    ///< minimum weight of a reported object
  double alpha = 0.3;    ///< intersection factor
  double eps_odds = 1e-6;

  /// Throws InvalidInput on any out-of-range value.
  void validate() const;
};

/// Default parameters of the density-stream baseline (unit weights).
[[nodiscard]] inline EngineParams baseline_defaults() {
  EngineParams p;
  p.w_min = 3.0;
  return p;
}

/// Monotone id counter, starts at 0.
class IdSource {
 public:
  IdSource() = default;
  explicit IdSource(ObjectId next) : next_(next) {}

  ObjectId next() { return next_++; }
  [[nodiscard]] ObjectId peek() const { return next_; }

 private:
  ObjectId next_ = 0;
};

/// Micro-cluster state: information-form position estimate plus the
/// accumulated confidence weight.
struct PotentialObject {
  ObjectId id = 0;
  Vec2 y_info = Vec2::Zero();
  Mat2 Y_info = Mat2::Zero();
  double w = 0.0;
  double log_odds = 0.0;  // initial log-odds, kept for export only
};

/// A confirmed track as returned by reclustering.
struct EstimatedObject {
  ObjectId id = 0;
  Vec2 x_hat = Vec2::Zero();
  Mat2 P_cov = Mat2::Identity();
  double w = 0.0;
};

}  // namespace soda
