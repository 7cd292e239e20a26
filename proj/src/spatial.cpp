#include "soda/spatial.hpp"

#include <algorithm>
#include <cmath>

namespace soda {

RadiusIndex::RadiusIndex(double cell_size) : cell_size_(cell_size) {
  if (!(cell_size > 0.0 && std::isfinite(cell_size))) {
    throw InvalidInput("grid cell size must be positive");
  }
}

RadiusIndex::Cell RadiusIndex::cell_of(const Vec2& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell_size_)),
          static_cast<std::int64_t>(std::floor(p.y() / cell_size_))};
}

void RadiusIndex::insert(ObjectId id, const Vec2& p) {
  if (!p.allFinite()) throw IndexConsistencyError("cannot index a non-finite point");
  if (!ids_.insert(id).second) throw IndexConsistencyError("id already indexed");
  cells_[cell_of(p)].push_back({id, p});
}

void RadiusIndex::remove(ObjectId id, const Vec2& p) {
  const auto it = cells_.find(cell_of(p));
  if (it == cells_.end()) throw IndexConsistencyError("id not indexed at the given point");
  auto& bucket = it->second;
  const auto pos = std::find_if(bucket.begin(), bucket.end(),
                                [id](const Entry& e) { return e.id == id; });
  if (pos == bucket.end()) throw IndexConsistencyError("id not indexed at the given point");
  *pos = bucket.back();
  bucket.pop_back();
  if (bucket.empty()) cells_.erase(it);
  ids_.erase(id);
}

void RadiusIndex::relocate(ObjectId id, const Vec2& from, const Vec2& to) {
  const Cell a = cell_of(from);
  const Cell b = cell_of(to);
  if (a == b) {
    const auto it = cells_.find(a);
    if (it != cells_.end()) {
      for (auto& e : it->second) {
        if (e.id == id) {
          e.p = to;
          return;
        }
      }
    }
    throw IndexConsistencyError("id not indexed at the given point");
  }
  remove(id, from);
  insert(id, to);
}

std::vector<ObjectId> RadiusIndex::query_within(const Vec2& p, double radius,
                                                std::size_t* cells_scanned) const {
  if (radius > cell_size_) {
    throw IndexConsistencyError("query radius exceeds grid cell size");
  }
  std::vector<ObjectId> out;
  std::size_t scanned = 0;
  const Cell c = cell_of(p);
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      ++scanned;
      const auto it = cells_.find({c.cx + dx, c.cy + dy});
      if (it == cells_.end()) continue;
      for (const auto& e : it->second) {
        if ((e.p - p).norm() < radius) out.push_back(e.id);
      }
    }
  }
  std::sort(out.begin(), out.end());
  if (cells_scanned != nullptr) *cells_scanned = scanned;
  return out;
}

}  // namespace soda
