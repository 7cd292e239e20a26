#include "soda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace soda::eval {

double radius_for(const sim::ObjectTypeSpec& spec, RadiusMode mode) {
  return mode == RadiusMode::Normal ? spec.radius_normal : spec.radius_strict;
}

double MatchResult::total_distance() const {
  double s = 0.0;
  for (const auto& p : pairs) s += p.distance;
  return s;
}

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t rows = cost.size();
  if (rows == 0) return {};
  const std::size_t cols = cost.front().size();
  for (const auto& r : cost) {
    if (r.size() != cols) throw InvalidInput("assignment cost matrix is ragged");
  }
  if (cols == 0) return std::vector<int>(rows, -1);

  if (rows > cols) {
    std::vector<std::vector<double>> t(cols, std::vector<double>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) t[j][i] = cost[i][j];
    }
    const auto col_to_row = solve_assignment(t);
    std::vector<int> out(rows, -1);
    for (std::size_t j = 0; j < cols; ++j) out[static_cast<std::size_t>(col_to_row[j])] = static_cast<int>(j);
    return out;
  }

  // Shortest augmenting path with potentials, rows <= cols. 1-based.
  const std::size_t n = rows;
  const std::size_t m = cols;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0);
  std::vector<std::size_t> way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> out(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) out[p[j] - 1] = static_cast<int>(j - 1);
  }
  return out;
}

namespace {

struct GatedEdge {
  std::size_t gt;   // index into the gt list
  std::size_t est;  // index into the estimate list
  double distance;
};

/// Optimal gated matching between `gts` and `ests` (indices into the
/// caller's arrays, both sorted by id). Components of the gating graph are
/// solved independently.
std::vector<GatedEdge> gated_assignment(const std::vector<Vec2>& gt_pos,
                                        const std::vector<double>& gt_radius,
                                        const std::vector<Vec2>& est_pos) {
  const std::size_t ng = gt_pos.size();
  const std::size_t ne = est_pos.size();
  std::vector<GatedEdge> edges;
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t e = 0; e < ne; ++e) {
      const double d = (gt_pos[g] - est_pos[e]).norm();
      if (d <= gt_radius[g]) edges.push_back({g, e, d});
    }
  }
  if (edges.empty()) return {};

  // Components over nodes gt: [0, ng), est: [ng, ng + ne).
  std::vector<std::size_t> parent(ng + ne);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : edges) {
    const auto a = find(e.gt);
    const auto b = find(ng + e.est);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  std::map<std::size_t, std::vector<std::size_t>> comp_edges;  // root -> edge indices
  for (std::size_t k = 0; k < edges.size(); ++k) comp_edges[find(edges[k].gt)].push_back(k);

  std::vector<GatedEdge> out;
  for (const auto& [root, idx] : comp_edges) {
    if (idx.size() == 1) {
      out.push_back(edges[idx.front()]);
      continue;
    }
    std::vector<std::size_t> g_nodes;
    std::vector<std::size_t> e_nodes;
    for (const auto k : idx) {
      g_nodes.push_back(edges[k].gt);
      e_nodes.push_back(edges[k].est);
    }
    std::sort(g_nodes.begin(), g_nodes.end());
    g_nodes.erase(std::unique(g_nodes.begin(), g_nodes.end()), g_nodes.end());
    std::sort(e_nodes.begin(), e_nodes.end());
    e_nodes.erase(std::unique(e_nodes.begin(), e_nodes.end()), e_nodes.end());

    // Each admissible pair earns -big, so the optimum first maximizes the
    // number of pairs and then minimizes total distance.
    double max_r = 0.0;
    for (const auto g : g_nodes) max_r = std::max(max_r, gt_radius[g]);
    const double big = (static_cast<double>(std::min(g_nodes.size(), e_nodes.size())) + 1.0) * (max_r + 1.0);
    std::vector<std::vector<double>> cost(g_nodes.size(), std::vector<double>(e_nodes.size(), 0.0));
    std::unordered_map<std::size_t, std::size_t> g_at;
    std::unordered_map<std::size_t, std::size_t> e_at;
    for (std::size_t a = 0; a < g_nodes.size(); ++a) g_at[g_nodes[a]] = a;
    for (std::size_t b = 0; b < e_nodes.size(); ++b) e_at[e_nodes[b]] = b;
    std::vector<std::vector<double>> dist(g_nodes.size(),
                                          std::vector<double>(e_nodes.size(), -1.0));
    for (const auto k : idx) {
      const auto a = g_at.at(edges[k].gt);
      const auto b = e_at.at(edges[k].est);
      cost[a][b] = edges[k].distance - big;
      dist[a][b] = edges[k].distance;
    }
    const auto assign = solve_assignment(cost);
    for (std::size_t a = 0; a < assign.size(); ++a) {
      if (assign[a] < 0) continue;
      const auto b = static_cast<std::size_t>(assign[a]);
      if (dist[a][b] >= 0.0) out.push_back({g_nodes[a], e_nodes[b], dist[a][b]});
    }
  }
  return out;
}

std::vector<std::size_t> order_by_id(std::span<const EstimatedObject> est) {
  std::vector<std::size_t> order(est.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return est[a].id < est[b].id; });
  return order;
}

std::vector<std::size_t> truth_order(const sim::ScenarioTruth& truth) {
  std::vector<std::size_t> order(truth.objects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return truth.objects[a].id < truth.objects[b].id;
  });
  return order;
}

}  // namespace

MatchResult match(std::span<const EstimatedObject> estimates, const sim::ScenarioTruth& truth,
                  std::span<const sim::ObjectTypeSpec> types, RadiusMode mode) {
  auto radius_of = [&](sim::ObjectType t) {
    for (const auto& s : types) {
      if (s.type == t) return radius_for(s, mode);
    }
    throw InvalidInput("no matching radius for object type " + sim::to_string(t));
  };

  const auto g_order = truth_order(truth);
  const auto e_order = order_by_id(estimates);
  std::vector<Vec2> gt_pos;
  std::vector<double> gt_radius;
  for (const auto gi : g_order) {
    gt_pos.push_back(truth.objects[gi].position);
    gt_radius.push_back(radius_of(truth.objects[gi].type));
  }
  std::vector<Vec2> est_pos;
  for (const auto ei : e_order) est_pos.push_back(estimates[ei].x_hat);

  auto assigned = gated_assignment(gt_pos, gt_radius, est_pos);
  std::sort(assigned.begin(), assigned.end(),
            [](const GatedEdge& a, const GatedEdge& b) { return a.gt < b.gt; });

  MatchResult r;
  r.mode = mode;
  std::vector<char> gt_used(g_order.size(), 0);
  std::vector<char> est_used(e_order.size(), 0);
  for (const auto& e : assigned) {
    r.pairs.push_back({truth.objects[g_order[e.gt]].id, estimates[e_order[e.est]].id, e.distance});
    gt_used[e.gt] = 1;
    est_used[e.est] = 1;
  }
  for (std::size_t g = 0; g < g_order.size(); ++g) {
    if (!gt_used[g]) r.false_negatives.push_back(truth.objects[g_order[g]].id);
  }
  for (std::size_t e = 0; e < e_order.size(); ++e) {
    if (!est_used[e]) r.false_positives.push_back(estimates[e_order[e]].id);
  }
  return r;
}

double f1(const MatchResult& m) {
  const double denom = 2.0 * static_cast<double>(m.tp()) + static_cast<double>(m.fp() + m.fn());
  if (denom == 0.0) throw InvalidInput("F1 undefined: no estimates and no ground truth");
  return 2.0 * static_cast<double>(m.tp()) / denom;
}

double precision(const MatchResult& m) {
  const auto denom = m.tp() + m.fp();
  return denom == 0 ? 0.0 : static_cast<double>(m.tp()) / static_cast<double>(denom);
}

double recall(const MatchResult& m) {
  const auto denom = m.tp() + m.fn();
  return denom == 0 ? 0.0 : static_cast<double>(m.tp()) / static_cast<double>(denom);
}

std::optional<double> rmse(const MatchResult& m) {
  if (m.pairs.empty()) return std::nullopt;
  double s = 0.0;
  for (const auto& p : m.pairs) s += p.distance * p.distance;
  return std::sqrt(s / static_cast<double>(m.pairs.size()));
}

// ---------------------------------------------------------------------------
// CLEAR-MOT

ClearMot::ClearMot(const sim::ScenarioTruth& truth, std::span<const sim::ObjectTypeSpec> types,
                   RadiusMode mode)
    : truth_(&truth), mode_(mode) {
  for (const auto& obj : truth.objects) {
    bool found = false;
    for (const auto& s : types) {
      if (s.type == obj.type) {
        radius_.push_back(radius_for(s, mode));
        found = true;
        break;
      }
    }
    if (!found) throw InvalidInput("no matching radius for object type " + sim::to_string(obj.type));
  }
}

MotFrame ClearMot::add_frame(std::size_t detections_consumed,
                             std::span<const EstimatedObject> estimates) {
  if (last_consumed_ && detections_consumed <= *last_consumed_) {
    throw InvalidInput("checkpoint detection counts must be strictly increasing");
  }
  last_consumed_ = detections_consumed;

  const auto& objs = truth_->objects;
  std::unordered_map<ObjectId, std::size_t> est_at;
  for (std::size_t e = 0; e < estimates.size(); ++e) est_at.emplace(estimates[e].id, e);

  std::vector<char> gt_done(objs.size(), 0);
  std::vector<char> est_done(estimates.size(), 0);
  MotFrame f;
  f.detections_consumed = detections_consumed;
  double frame_distance = 0.0;

  // Keep correspondences from the previous frame that are still valid.
  for (std::size_t g = 0; g < objs.size(); ++g) {
    const auto last = last_match_.find(objs[g].id);
    if (last == last_match_.end()) continue;
    const auto it = est_at.find(last->second);
    if (it == est_at.end() || est_done[it->second]) continue;
    const double d = (objs[g].position - estimates[it->second].x_hat).norm();
    if (d > radius_[g]) continue;
    gt_done[g] = 1;
    est_done[it->second] = 1;
    ++f.matches;
    frame_distance += d;
  }

  // Optimal assignment for the rest, in id order.
  const auto g_order = truth_order(*truth_);
  const auto e_order = order_by_id(estimates);
  std::vector<std::size_t> g_free;
  std::vector<std::size_t> e_free;
  std::vector<Vec2> gt_pos;
  std::vector<double> gt_radius;
  std::vector<Vec2> est_pos;
  for (const auto g : g_order) {
    if (gt_done[g]) continue;
    g_free.push_back(g);
    gt_pos.push_back(objs[g].position);
    gt_radius.push_back(radius_[g]);
  }
  for (const auto e : e_order) {
    if (est_done[e]) continue;
    e_free.push_back(e);
    est_pos.push_back(estimates[e].x_hat);
  }
  for (const auto& a : gated_assignment(gt_pos, gt_radius, est_pos)) {
    const std::size_t g = g_free[a.gt];
    const std::size_t e = e_free[a.est];
    gt_done[g] = 1;
    est_done[e] = 1;
    ++f.matches;
    frame_distance += a.distance;
    auto [it, inserted] = last_match_.try_emplace(objs[g].id, estimates[e].id);
    if (!inserted && it->second != estimates[e].id) {
      ++f.idsw;
      it->second = estimates[e].id;
    }
  }

  f.fn = static_cast<std::size_t>(std::count(gt_done.begin(), gt_done.end(), 0));
  f.fp = static_cast<std::size_t>(std::count(est_done.begin(), est_done.end(), 0));

  sum_distance_ += frame_distance;
  sum_matches_ += f.matches;
  sum_errors_ += f.fn + f.fp + f.idsw;
  sum_gt_ += objs.size();
  if (sum_matches_ > 0) f.motp = sum_distance_ / static_cast<double>(sum_matches_);
  f.mota = sum_gt_ == 0 ? 0.0
                        : 1.0 - static_cast<double>(sum_errors_) / static_cast<double>(sum_gt_);
  return f;
}

std::vector<MotFrame> clear_mot(std::span<const Checkpoint> series, const sim::ScenarioTruth& truth,
                                std::span<const sim::ObjectTypeSpec> types, RadiusMode mode) {
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k].detections_consumed <= series[k - 1].detections_consumed) {
      throw InvalidInput("checkpoint detection counts must be strictly increasing");
    }
  }
  ClearMot acc(truth, types, mode);
  std::vector<MotFrame> out;
  out.reserve(series.size());
  for (const auto& c : series) out.push_back(acc.add_frame(c.detections_consumed, c.estimates));
  return out;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("paired samples must have equal length");
  std::vector<double> diff;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (!std::isfinite(d)) throw InvalidInput("non-finite paired difference");
    if (d != 0.0) diff.push_back(d);
  }
  WilcoxonResult res;
  res.n = diff.size();
  if (diff.empty()) return res;  // p = 1
  if (diff.size() < 10) {
    throw InsufficientSample("Wilcoxon signed-rank test needs at least 10 non-zero differences");
  }

  const std::size_t n = diff.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diff[a]) < std::abs(diff[b]); });

  // Midranks, stored doubled so they stay integral.
  std::vector<long> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diff[order[j + 1]]) == std::abs(diff[order[i]])) ++j;
    const auto t = static_cast<double>(j - i + 1);
    const long r2 = static_cast<long>(i + 1 + j + 1);  // 2 * midrank
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    tie_term += t * t * t - t;
    i = j + 1;
  }

  long wp2 = 0;
  long total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diff[i] > 0.0) wp2 += rank2[i];
  }
  res.w_plus = static_cast<double>(wp2) / 2.0;
  res.w_minus = static_cast<double>(total2 - wp2) / 2.0;
  res.statistic = std::min(res.w_plus, res.w_minus);

  if (n <= kWilcoxonExactMaxN) {
    // Null distribution of the doubled W+ under independent random signs.
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (long s = reach; s >= 0; --s) {
        if (count[static_cast<std::size_t>(s)] != 0.0) {
          count[static_cast<std::size_t>(s + rank2[i])] += count[static_cast<std::size_t>(s)];
        }
      }
      reach += rank2[i];
    }
    const long obs = std::abs(2 * wp2 - total2);
    double extreme = 0.0;
    for (long s = 0; s <= total2; ++s) {
      if (std::abs(2 * s - total2) >= obs) extreme += count[static_cast<std::size_t>(s)];
    }
    res.p_value = std::min(1.0, extreme / std::ldexp(1.0, static_cast<int>(n)));
    res.exact = true;
    return res;
  }

  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, (mean - res.statistic - 0.5) / std::sqrt(var));
  res.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return res;
}

}  // namespace soda::eval
