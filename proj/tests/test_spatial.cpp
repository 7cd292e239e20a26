#include "soda/rng.hpp"
#include "soda/spatial.hpp"

#include <doctest.h>

#include <map>

using namespace soda;

namespace {

std::vector<ObjectId> brute(const std::map<ObjectId, Vec2>& pts, const Vec2& q, double r) {
  std::vector<ObjectId> out;
  for (const auto& [id, p] : pts) {
    if ((p - q).norm() < r) out.push_back(id);
  }
  return out;
}

}  // namespace

TEST_SUITE("spatial") {
  TEST_CASE("query finds only the near center") {
    RadiusIndex idx(1.1);
    idx.insert(1, Vec2(0, 0));
    idx.insert(2, Vec2(5, 5));
    CHECK(idx.query_within(Vec2(0.5, 0), 1.1) == std::vector<ObjectId>{1});
  }

  TEST_CASE("distance exactly r is excluded") {
    RadiusIndex idx(1.0);
    idx.insert(7, Vec2(1.0, 0.0));
    CHECK(idx.query_within(Vec2(0, 0), 1.0).empty());
  }

  TEST_CASE("empty index") {
    RadiusIndex idx(1.1);
    CHECK(idx.empty());
    CHECK(idx.query_within(Vec2(3, 3), 1.1).empty());
  }

  TEST_CASE("insert then remove") {
    RadiusIndex idx(1.1);
    idx.insert(4, Vec2(2, 2));
    idx.remove(4, Vec2(2, 2));
    CHECK(idx.query_within(Vec2(2, 2), 1.1).empty());
    CHECK(idx.size() == 0);
  }

  TEST_CASE("relocation moves the entry") {
    RadiusIndex idx(1.1);
    idx.insert(1, Vec2(0, 0));
    idx.relocate(1, Vec2(0, 0), Vec2(100, 100));
    CHECK(idx.query_within(Vec2(0, 0), 1.1).empty());
    CHECK(idx.query_within(Vec2(100, 100), 1.1) == std::vector<ObjectId>{1});
  }

  TEST_CASE("self lookup after many inserts") {
    RadiusIndex idx(1.1);
    Rng rng(1);
    std::vector<Vec2> pts;
    for (ObjectId i = 0; i < 1000; ++i) {
      pts.emplace_back(rng.uniform(-50, 50), rng.uniform(-50, 50));
      idx.insert(i, pts.back());
    }
    for (ObjectId i = 0; i < 1000; ++i) {
      const auto hits = idx.query_within(pts[i], 1e-9);
      CHECK(std::find(hits.begin(), hits.end(), i) != hits.end());
    }
    CHECK(idx.size() == 1000);
  }

  TEST_CASE("misuse raises consistency errors") {
    RadiusIndex idx(1.0);
    idx.insert(1, Vec2(0, 0));
    CHECK_THROWS_AS(idx.insert(1, Vec2(3, 3)), IndexConsistencyError);
    CHECK_THROWS_AS(idx.remove(2, Vec2(0, 0)), IndexConsistencyError);
    CHECK_THROWS_AS(idx.remove(1, Vec2(5, 5)), IndexConsistencyError);
    CHECK_THROWS_AS(idx.relocate(3, Vec2(0, 0), Vec2(1, 1)), IndexConsistencyError);
    CHECK_THROWS_AS((void)idx.query_within(Vec2(0, 0), 1.5), IndexConsistencyError);
  }

  TEST_CASE("grid query equals brute force over 10^4 random queries") {
    Rng rng(42);
    std::size_t queries = 0;
    std::size_t nonempty = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const double cell = rng.uniform(0.3, 2.0);
      RadiusIndex idx(cell);
      std::map<ObjectId, Vec2> pts;
      const double side = rng.uniform(2.0, 40.0);
      ObjectId next = 0;
      for (int step = 0; step < 800; ++step) {
        const double u = rng.uniform();
        if (u < 0.5 || pts.empty()) {
          Vec2 p(rng.uniform(-side, side), rng.uniform(-side, side));
          if (rng.bernoulli(0.1)) p = (p / cell).array().round().matrix() * cell;  // cell borders
          idx.insert(next, p);
          pts.emplace(next++, p);
        } else if (u < 0.6) {
          auto it = std::next(pts.begin(), static_cast<long>(rng.uniform(0, static_cast<double>(pts.size()))));
          if (it == pts.end()) --it;
          idx.remove(it->first, it->second);
          pts.erase(it);
        } else if (u < 0.7) {
          auto it = std::next(pts.begin(), static_cast<long>(rng.uniform(0, static_cast<double>(pts.size()))));
          if (it == pts.end()) --it;
          const Vec2 to = it->second + Vec2(rng.normal(0, cell), rng.normal(0, cell));
          idx.relocate(it->first, it->second, to);
          it->second = to;
        } else {
          const Vec2 q(rng.uniform(-side, side), rng.uniform(-side, side));
          const double r = rng.bernoulli(0.8) ? cell : rng.uniform(0.0, cell);
          std::size_t cells = 0;
          const auto got = idx.query_within(q, r, &cells);
          const auto want = brute(pts, q, r);
          CHECK(got == want);
          CHECK(cells <= 9);
          ++queries;
          nonempty += want.empty() ? 0 : 1;
        }
      }
    }
    CHECK(queries >= 4000);
    // Second phase: pure query load.
    RadiusIndex idx(1.1);
    std::map<ObjectId, Vec2> pts;
    for (ObjectId i = 0; i < 3000; ++i) {
      const Vec2 p(rng.uniform(0, 60), rng.uniform(0, 60));
      idx.insert(i, p);
      pts.emplace(i, p);
    }
    for (int q = 0; q < 8000; ++q) {
      const Vec2 p(rng.uniform(-2, 62), rng.uniform(-2, 62));
      const auto want = brute(pts, p, 1.1);
      CHECK(idx.query_within(p, 1.1) == want);
      ++queries;
      nonempty += want.empty() ? 0 : 1;
    }
    CHECK(queries >= 10000);
    CHECK(nonempty > 1000);
  }

  TEST_CASE("query cost does not depend on ROI size") {
    for (const double side : {10.0, 1000.0, 100000.0}) {
      RadiusIndex idx(1.0);
      Rng rng(3);
      for (ObjectId i = 0; i < 2000; ++i) idx.insert(i, Vec2(rng.uniform(0, side), rng.uniform(0, side)));
      std::size_t cells = 0;
      (void)idx.query_within(Vec2(side / 2, side / 2), 1.0, &cells);
      CHECK(cells <= 9);
    }
  }
}
