#pragma once

#include "soda/core.hpp"
#include "soda/infofilter.hpp"
#include "soda/spatial.hpp"

#include <cstddef>
#include <unordered_map>
#include <vector>

namespace soda {

enum class EngineMode {
  SodaCitron,        ///< confidence weights + information-filter centers
  BaselineDbstream,  ///< unit weights + unweighted centroid centers
};

/// Which member of a fused component keeps its id.
enum class SurvivorPolicy {
  OldestId,  ///< smallest id survives (track persistence)
  NewestId,  ///< largest id survives (literal loop order, for differential tests)
};

/// Confidence-to-weight transform
///   w = (exp(beta*pi) - 1) / (exp(beta) - 1) * w_max.
/// Throws InvalidInput for pi outside [0,1] or non-positive beta/w_max.
[[nodiscard]] double confidence_weight(double pi, double beta, double w_max);

/// Symmetric map {i,j} -> accumulated co-assignment weight.
class SharedDensityTable {
 public:
  struct Entry {
    ObjectId a;  ///< smaller id
    ObjectId b;  ///< larger id
    double d;
  };

  /// d(i,j) += w, creating the entry at 0 first if absent. i != j.
  void add(ObjectId i, ObjectId j, double w);
  /// Overwrites d(i,j); used when restoring exported state.
  void set(ObjectId i, ObjectId j, double d);
  [[nodiscard]] double get(ObjectId i, ObjectId j) const;
  [[nodiscard]] bool contains(ObjectId i, ObjectId j) const;
  /// Drops every entry that references `id`.
  void purge(ObjectId id);

  [[nodiscard]] std::size_t size() const { return map_.size(); }
  [[nodiscard]] bool empty() const { return map_.empty(); }
  /// All entries ordered by (a, b).
  [[nodiscard]] std::vector<Entry> entries() const;

 private:
  struct Key {
    ObjectId lo;
    ObjectId hi;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.lo * 0x9E3779B97F4A7C15ULL;
      h ^= k.hi + 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };
  static Key key(ObjectId i, ObjectId j);

  std::unordered_map<Key, double, KeyHash> map_;
  std::unordered_map<ObjectId, std::vector<ObjectId>> partners_;
};

/// Serializable snapshot of everything the engine holds.
struct EngineState {
  EngineParams params;
  EngineMode mode = EngineMode::SodaCitron;
  SurvivorPolicy survivor = SurvivorPolicy::OldestId;
  ObjectId next_id = 0;
  std::vector<PotentialObject> potentials;  // ascending id
  std::vector<SharedDensityTable::Entry> density;
};

/// Online static-object association engine.
///
/// Each detection either seeds a new potential object or is absorbed by
/// every potential object whose center lies strictly within `radius`.
/// Detections falling into several neighborhoods accumulate shared density
/// between them; updates that would pull two neighbors closer than `radius`
/// are rolled back. recluster() fuses potential objects linked by
/// sufficient shared density and reports those with enough weight.
///
/// The engine is a value type: copy it to take a snapshot.
class Engine {
 public:
  explicit Engine(EngineParams params, EngineMode mode = EngineMode::SodaCitron,
                  SurvivorPolicy survivor = SurvivorPolicy::OldestId);

  /// Rebuilds an engine from exported state. Throws InvalidInput on
  /// inconsistent state (duplicate ids, singular information, dangling
  /// density entries, ids >= next_id).
  [[nodiscard]] static Engine from_state(const EngineState& state);
  [[nodiscard]] EngineState state() const;

  /// Processes one detection. Throws InvalidInput before any mutation if
  /// the measurement is invalid.
  void update(const Measurement& m);
  void update(const Detection& d) { update(d.measurement()); }

  /// Fuses connected potential objects (mutating) and returns every
  /// potential object with w >= w_min, ascending by id.
  std::vector<EstimatedObject> recluster();

  /// Weight a detection with confidence `pi` contributes in this mode.
  [[nodiscard]] double detection_weight(double pi) const;

  [[nodiscard]] const EngineParams& params() const { return params_; }
  [[nodiscard]] EngineMode mode() const { return mode_; }
  [[nodiscard]] SurvivorPolicy survivor_policy() const { return survivor_; }
  [[nodiscard]] const SharedDensityTable& density() const { return density_; }
  [[nodiscard]] const RadiusIndex& index() const { return index_; }

  [[nodiscard]] std::size_t num_potentials() const { return slots_.size(); }
  [[nodiscard]] bool contains(ObjectId id) const { return slots_.contains(id); }
  /// Throws std::out_of_range for unknown ids.
  [[nodiscard]] const PotentialObject& potential(ObjectId id) const;
  [[nodiscard]] Vec2 center(ObjectId id) const;
  /// Ids of all potential objects, ascending.
  [[nodiscard]] std::vector<ObjectId> ids() const;
  [[nodiscard]] double total_weight() const;
  [[nodiscard]] ObjectId next_id() const { return id_source_.peek(); }

 private:
  struct Slot {
    PotentialObject obj;
    Vec2 center;
  };

  [[nodiscard]] Vec2 center_of(const PotentialObject& p) const;
  [[nodiscard]] EstimatedObject estimate_of(const PotentialObject& p) const;
  [[nodiscard]] info::Contribution contribution_of(const Measurement& m) const;

  EngineParams params_;
  EngineMode mode_;
  SurvivorPolicy survivor_;
  std::unordered_map<ObjectId, Slot> slots_;
  SharedDensityTable density_;
  RadiusIndex index_;
  IdSource id_source_;
};

}  // namespace soda
