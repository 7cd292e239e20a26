#pragma once

#include "soda/core.hpp"
#include "soda/rng.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace soda::sim {

enum class ObjectType { A, B, C, D };

inline constexpr std::array<ObjectType, 4> kAllTypes = {ObjectType::A, ObjectType::B,
                                                        ObjectType::C, ObjectType::D};

[[nodiscard]] std::string to_string(ObjectType t);
/// Throws InvalidInput for anything but "A".."D".
[[nodiscard]] ObjectType parse_object_type(const std::string& s);

/// Per-type matching radii used by evaluation.
struct ObjectTypeSpec {
  ObjectType type = ObjectType::A;
  double radius_normal = 0.0;
  double radius_strict = 0.0;
  bool operator==(const ObjectTypeSpec&) const = default;
};

/// Number of detections a sensor emits for one detected object.
struct CountModel {
  enum class Kind { Fixed, DiscreteNormal };
  Kind kind = Kind::Fixed;
  int fixed = 1;
  double mean = 0.0;
  double sd = 0.0;
  bool operator==(const CountModel&) const = default;
};

/// Distribution of reported detection confidence.
struct ConfidenceModel {
  enum class Kind { PmfS1, Beta };
  Kind kind = Kind::Beta;
  double a = 1.0;
  double b = 1.0;
  bool operator==(const ConfidenceModel&) const = default;
};

struct SensorSpec {
  std::string name;
  std::map<ObjectType, double> pd;  ///< absent type: sensor cannot detect it
  std::map<ObjectType, CountModel> count;
  double sigma2 = 1.0;  ///< isotropic position variance [m^2]
  ConfidenceModel conf_det;
  ConfidenceModel conf_clutter;
  double clutter_rate = 0.0;  ///< clutter detections per m^2 per scan

  void validate() const;
  bool operator==(const SensorSpec&) const = default;
};

/// Object types plus sensors: everything needed to simulate one campaign.
struct SensorSuite {
  std::vector<ObjectTypeSpec> types;
  std::vector<SensorSpec> sensors;

  [[nodiscard]] const ObjectTypeSpec& type_spec(ObjectType t) const;
  void validate() const;
  bool operator==(const SensorSuite&) const = default;
};

/// The reference five-sensor, four-type configuration.
[[nodiscard]] SensorSuite table1();

struct Roi {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 150.0;
  double y_max = 150.0;

  [[nodiscard]] double area() const { return (x_max - x_min) * (y_max - y_min); }
  [[nodiscard]] bool contains(const Vec2& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
  bool operator==(const Roi&) const = default;
};

struct TruthObject {
  std::uint64_t id = 0;
  ObjectType type = ObjectType::A;
  Vec2 position = Vec2::Zero();
};

struct ScenarioTruth {
  Roi roi;
  std::vector<TruthObject> objects;
};

/// Objects placed i.i.d. uniformly over the ROI, `per_type[t]` of each type.
struct UniformLayout {
  Roi roi;
  std::map<ObjectType, int> per_type;
};

/// Rows of `row_type` objects, each with a `pair_type` partner placed
/// uniformly in an annulus around it.
struct RowLayout {
  Roi roi;
  int rows = 5;
  int per_row = 21;
  double row_y0 = 25.0;       ///< y of the first row
  double row_spacing = 25.0;
  double x0 = 25.0;           ///< x of the first object in a row
  double spacing = 5.0;
  double jitter_sd = 0.25;
  ObjectType row_type = ObjectType::A;
  ObjectType pair_type = ObjectType::B;
  double pair_r_min = 0.5;
  double pair_r_max = 1.5;
};

struct ScenarioSpec {
  std::string name;
  std::variant<UniformLayout, RowLayout> layout;
};

[[nodiscard]] ScenarioSpec scenario_a_spec();
[[nodiscard]] ScenarioSpec scenario_b_spec();

[[nodiscard]] ScenarioTruth generate(const ScenarioSpec& spec, std::uint64_t seed);
[[nodiscard]] inline ScenarioTruth gen_scenario_a(std::uint64_t seed) {
  return generate(scenario_a_spec(), seed);
}
[[nodiscard]] inline ScenarioTruth gen_scenario_b(std::uint64_t seed) {
  return generate(scenario_b_spec(), seed);
}

struct SimOptions {
  /// Allow a detected object to yield zero detections from a
  /// discrete-normal count (default clamps to at least one).
  bool allow_zero_count = false;
};

/// One full ROI scan per sensor, all detections concatenated and shuffled.
[[nodiscard]] std::vector<Detection> simulate(const ScenarioTruth& truth, const SensorSuite& suite,
                                              std::uint64_t seed, const SimOptions& opts = {});

/// 0.5 w.p. 1/4, 0.75 w.p. 1/4, 1.0 w.p. 1/2.
[[nodiscard]] double sample_pi_s1(Rng& rng);
[[nodiscard]] double sample_beta(double a, double b, Rng& rng);
[[nodiscard]] double sample_confidence(const ConfidenceModel& m, Rng& rng);
[[nodiscard]] int sample_count(const CountModel& m, Rng& rng, bool allow_zero = false);

/// Analytic expected number of detections of one run (one scan per sensor).
[[nodiscard]] double expected_detections(const ScenarioTruth& truth, const SensorSuite& suite);

}  // namespace soda::sim
