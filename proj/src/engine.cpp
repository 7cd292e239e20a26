#include "soda/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace soda {

double confidence_weight(double pi, double beta, double w_max) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw InvalidInput("confidence outside [0,1]");
  if (!(beta > 0.0) || !(w_max > 0.0)) throw InvalidInput("beta and w_max must be positive");
  if (beta < 30.0) return std::expm1(beta * pi) / std::expm1(beta) * w_max;
  // Rescaled by exp(-beta) so large beta does not overflow.
  const double tail = std::exp(-beta);
  return (std::exp(beta * (pi - 1.0)) - tail) / (1.0 - tail) * w_max;
}

// ---------------------------------------------------------------------------
// SharedDensityTable

SharedDensityTable::Key SharedDensityTable::key(ObjectId i, ObjectId j) {
  if (i == j) throw InternalError("shared density requires two distinct ids");
  return i < j ? Key{i, j} : Key{j, i};
}

void SharedDensityTable::add(ObjectId i, ObjectId j, double w) {
  const Key k = key(i, j);
  auto [it, inserted] = map_.try_emplace(k, 0.0);
  if (inserted) {
    partners_[k.lo].push_back(k.hi);
    partners_[k.hi].push_back(k.lo);
  }
  it->second += w;
}

void SharedDensityTable::set(ObjectId i, ObjectId j, double d) {
  const Key k = key(i, j);
  auto [it, inserted] = map_.try_emplace(k, d);
  if (inserted) {
    partners_[k.lo].push_back(k.hi);
    partners_[k.hi].push_back(k.lo);
  } else {
    it->second = d;
  }
}

double SharedDensityTable::get(ObjectId i, ObjectId j) const {
  const auto it = map_.find(key(i, j));
  return it == map_.end() ? 0.0 : it->second;
}

bool SharedDensityTable::contains(ObjectId i, ObjectId j) const {
  return i != j && map_.contains(key(i, j));
}

void SharedDensityTable::purge(ObjectId id) {
  const auto it = partners_.find(id);
  if (it == partners_.end()) return;
  for (const ObjectId other : it->second) {
    map_.erase(key(id, other));
    auto& back = partners_[other];
    back.erase(std::remove(back.begin(), back.end(), id), back.end());
    if (back.empty()) partners_.erase(other);
  }
  partners_.erase(id);
}

std::vector<SharedDensityTable::Entry> SharedDensityTable::entries() const {
  std::vector<Entry> out;
  out.reserve(map_.size());
  for (const auto& [k, d] : map_) out.push_back({k.lo, k.hi, d});
  std::sort(out.begin(), out.end(), [](const Entry& x, const Entry& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(EngineParams params, EngineMode mode, SurvivorPolicy survivor)
    : params_(params), mode_(mode), survivor_(survivor), index_(params.radius) {
  params_.validate();
}

double Engine::detection_weight(double pi) const {
  if (mode_ == EngineMode::BaselineDbstream) {
    if (!(pi >= 0.0 && pi <= 1.0)) throw InvalidInput("confidence outside [0,1]");
    return 1.0;
  }
  return confidence_weight(pi, params_.beta, params_.w_max);
}

info::Contribution Engine::contribution_of(const Measurement& m) const {
  // The baseline accumulates sum(z) and count*I, whose recovered center is
  // the running mean of its members.
  if (mode_ == EngineMode::BaselineDbstream) return info::contribution(m.z, Mat2::Identity());
  return info::contribution(m.z, m.R);
}

Vec2 Engine::center_of(const PotentialObject& p) const {
  return info::recover({p.y_info, p.Y_info}).x_hat;
}

EstimatedObject Engine::estimate_of(const PotentialObject& p) const {
  const auto est = info::recover({p.y_info, p.Y_info});
  EstimatedObject out;
  out.id = p.id;
  out.x_hat = est.x_hat;
  // Centroid mode has no covariance model; report the unit placeholder.
  out.P_cov = mode_ == EngineMode::BaselineDbstream ? Mat2::Identity() : est.P;
  out.w = p.w;
  return out;
}

void Engine::update(const Measurement& m) {
  validate(m);
  const auto neighbors = index_.query_within(m.z, params_.radius);
  const double w = detection_weight(m.pi);
  const auto c = contribution_of(m);

  if (neighbors.empty()) {
    PotentialObject p;
    p.id = id_source_.next();
    p.y_info = c.dy;
    p.Y_info = c.dY;
    p.w = w;
    const double pi_clamped = std::clamp(m.pi, params_.eps_odds, 1.0 - params_.eps_odds);
    p.log_odds = std::log(pi_clamped / (1.0 - pi_clamped));
    const Vec2 center = center_of(p);
    index_.insert(p.id, center);
    slots_.emplace(p.id, Slot{p, center});
    return;
  }

  std::vector<Slot> snapshot;
  snapshot.reserve(neighbors.size());
  std::vector<Slot*> live;
  live.reserve(neighbors.size());
  for (const ObjectId id : neighbors) {
    Slot& s = slots_.at(id);
    snapshot.push_back(s);
    live.push_back(&s);
  }

  for (std::size_t a = 0; a < live.size(); ++a) {
    Slot& s = *live[a];
    s.obj.y_info += c.dy;
    s.obj.Y_info += c.dY;
    s.obj.w += w;
    s.center = center_of(s.obj);
    for (std::size_t b = a + 1; b < live.size(); ++b) density_.add(neighbors[a], neighbors[b], w);
  }

  // Collapse prevention. Restoring one member can leave it within r of a
  // neighbor that kept its update, so repeat until no such pair remains.
  std::vector<char> revert(live.size(), 0);
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<char> mark(revert);
    for (std::size_t a = 0; a < live.size(); ++a) {
      for (std::size_t b = a + 1; b < live.size(); ++b) {
        if (revert[a] && revert[b]) continue;
        if ((live[a]->center - live[b]->center).norm() < params_.radius) mark[a] = mark[b] = 1;
      }
    }
    for (std::size_t k = 0; k < live.size(); ++k) {
      if (mark[k] && !revert[k]) {
        revert[k] = 1;
        *live[k] = snapshot[k];
        changed = true;
      }
    }
  }
  for (std::size_t a = 0; a < live.size(); ++a) {
    if (!revert[a]) index_.relocate(neighbors[a], snapshot[a].center, live[a]->center);
  }
}

std::vector<EstimatedObject> Engine::recluster() {
  const auto ids_sorted = ids();
  std::unordered_map<ObjectId, std::size_t> pos;
  pos.reserve(ids_sorted.size());
  for (std::size_t k = 0; k < ids_sorted.size(); ++k) pos.emplace(ids_sorted[k], k);

  // Union-find over positions in ids_sorted.
  std::vector<std::size_t> parent(ids_sorted.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  for (const auto& e : density_.entries()) {
    const auto ia = pos.find(e.a);
    const auto ib = pos.find(e.b);
    if (ia == pos.end() || ib == pos.end()) {
      throw InternalError("shared density references a deleted potential object");
    }
    const double wa = slots_.at(e.a).obj.w;
    const double wb = slots_.at(e.b).obj.w;
    if (wa < params_.w_min || wb < params_.w_min) continue;
    const double v = e.d / ((wa + wb) / 2.0);
    if (v < params_.alpha) continue;
    const std::size_t ra = find(ia->second);
    const std::size_t rb = find(ib->second);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  std::unordered_map<std::size_t, std::vector<ObjectId>> groups;
  for (std::size_t k = 0; k < ids_sorted.size(); ++k) {
    groups[find(k)].push_back(ids_sorted[k]);
  }

  std::vector<std::size_t> roots;
  roots.reserve(groups.size());
  for (const auto& [root, members] : groups) {
    if (members.size() > 1) roots.push_back(root);
  }
  std::sort(roots.begin(), roots.end());

  for (const std::size_t root : roots) {
    const auto& members = groups.at(root);  // ascending ids
    const ObjectId keep = survivor_ == SurvivorPolicy::OldestId ? members.front() : members.back();
    Slot& s = slots_.at(keep);
    const Vec2 old_center = s.center;
    for (const ObjectId m : members) {
      if (m == keep) continue;
      Slot& other = slots_.at(m);
      s.obj.y_info += other.obj.y_info;
      s.obj.Y_info += other.obj.Y_info;
      s.obj.w += other.obj.w;
      index_.remove(m, other.center);
      density_.purge(m);
      slots_.erase(m);
    }
    s.center = center_of(s.obj);
    index_.relocate(keep, old_center, s.center);
  }

  std::vector<EstimatedObject> out;
  for (const ObjectId id : ids()) {
    const auto& p = slots_.at(id).obj;
    if (p.w >= params_.w_min) out.push_back(estimate_of(p));
  }
  return out;
}

const PotentialObject& Engine::potential(ObjectId id) const { return slots_.at(id).obj; }

Vec2 Engine::center(ObjectId id) const { return slots_.at(id).center; }

std::vector<ObjectId> Engine::ids() const {
  std::vector<ObjectId> out;
  out.reserve(slots_.size());
  for (const auto& [id, slot] : slots_) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

double Engine::total_weight() const {
  double sum = 0.0;
  for (const ObjectId id : ids()) sum += slots_.at(id).obj.w;
  return sum;
}

EngineState Engine::state() const {
  EngineState st;
  st.params = params_;
  st.mode = mode_;
  st.survivor = survivor_;
  st.next_id = id_source_.peek();
  for (const ObjectId id : ids()) st.potentials.push_back(slots_.at(id).obj);
  st.density = density_.entries();
  return st;
}

Engine Engine::from_state(const EngineState& state) {
  Engine e(state.params, state.mode, state.survivor);
  e.id_source_ = IdSource(state.next_id);
  for (const auto& p : state.potentials) {
    if (p.id >= state.next_id) throw InvalidInput("potential id " + std::to_string(p.id) + " >= next_id");
    if (e.slots_.contains(p.id)) throw InvalidInput("duplicate potential id " + std::to_string(p.id));
    if (!(p.w >= 0.0)) throw InvalidInput("negative potential weight");
    Vec2 center;
    try {
      center = e.center_of(p);
    } catch (const info::UnrecoverableState&) {
      throw InvalidInput("potential " + std::to_string(p.id) + " has a singular information matrix");
    }
    e.index_.insert(p.id, center);
    e.slots_.emplace(p.id, Slot{p, center});
  }
  for (const auto& d : state.density) {
    if (d.a == d.b || !e.contains(d.a) || !e.contains(d.b)) {
      throw InvalidInput("density entry references an unknown potential object");
    }
    if (!(d.d >= 0.0)) throw InvalidInput("negative shared density");
    e.density_.set(d.a, d.b, d.d);
  }
  return e;
}

}  // namespace soda
