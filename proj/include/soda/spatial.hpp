#pragma once

#include "soda/core.hpp"

#include <cstddef>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace soda {

/// Raised when the index is mutated inconsistently (engine bug surface).
struct IndexConsistencyError : InternalError {
  using InternalError::InternalError;
};

/// Uniform grid hash for fixed-radius neighbor queries. A query with
/// radius <= cell_size only needs the 3x3 block of cells around the point.
class RadiusIndex {
 public:
  explicit RadiusIndex(double cell_size);

  void insert(ObjectId id, const Vec2& p);
  void remove(ObjectId id, const Vec2& p);
  void relocate(ObjectId id, const Vec2& from, const Vec2& to);

  /// Ids whose point lies strictly closer than `radius` to `p`, ascending.
  /// Optionally reports how many grid cells were inspected.
  [[nodiscard]] std::vector<ObjectId> query_within(const Vec2& p, double radius,
                                                   std::size_t* cells_scanned = nullptr) const;

  [[nodiscard]] double cell_size() const { return cell_size_; }
  [[nodiscard]] std::size_t size() const { return ids_.size(); }
  [[nodiscard]] bool empty() const { return ids_.empty(); }

 private:
  struct Cell {
    std::int64_t cx;
    std::int64_t cy;
    bool operator==(const Cell&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const Cell& c) const noexcept {
      auto h = static_cast<std::uint64_t>(c.cx) * 0x9E3779B97F4A7C15ULL;
      h ^= static_cast<std::uint64_t>(c.cy) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };
  struct Entry {
    ObjectId id;
    Vec2 p;
  };

  [[nodiscard]] Cell cell_of(const Vec2& p) const;

  double cell_size_;
  std::unordered_map<Cell, std::vector<Entry>, CellHash> cells_;
  std::unordered_set<ObjectId> ids_;
};

}  // namespace soda
