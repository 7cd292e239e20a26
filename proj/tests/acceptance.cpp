// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "properties.hpp"
#include "soda/engine.hpp"
#include "soda/pipeline.hpp"
#include "soda/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>

using namespace soda;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] %d %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = props::info_filter_vs_wls(1000, 1, 50);
  const double t = seconds_since(t0);
  report(1, r.ok() && r.cases == 1000 && t < 1.0,
         fmt("information filter equals batch WLS within 1e-9: %zu/%zu instances, %.3f s (< 1 s)%s",
             r.cases - r.failures, r.cases, t, r.first_failure.empty() ? "" : (" " + r.first_failure).c_str()));
}

void criterion_2() {
  const double f0 = confidence_weight(0.0, 6.0, 10.0);
  const double f1 = confidence_weight(1.0, 6.0, 10.0);
  const double fh = confidence_weight(0.5, 6.0, 10.0);
  const double eps = std::numeric_limits<double>::epsilon();
  const auto mono = props::confidence_weight_monotone(10000, 2);
  const bool ok = f0 == 0.0 && std::abs(f1 - 10.0) <= 4.0 * eps * 10.0 && std::abs(fh - 0.4743) <= 1e-4 &&
                  mono.ok() && mono.cases == 10000;
  report(2, ok,
         fmt("confidence weight: f(0)=%.17g f(1)=%.17g f(0.5)=%.6f (0.4743 +- 1e-4), monotone on %zu/%zu pairs", f0,
             f1, fh, mono.cases - mono.failures, mono.cases));
}

void criterion_3() {
  const auto r = props::recluster_vs_oracle(1000, 3, 20);
  report(3, r.ok() && r.cases == 1000,
         fmt("recluster equals DFS oracle on %zu/%zu random states (<= 20 potentials)%s", r.cases - r.failures,
             r.cases, r.first_failure.empty() ? "" : (" " + r.first_failure).c_str()));
}

void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto suite = sim::table1();
  double a = 0.0;
  double b = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    a += static_cast<double>(sim::simulate(sim::gen_scenario_a(seed), suite, seed).size());
    b += static_cast<double>(sim::simulate(sim::gen_scenario_b(seed), suite, seed).size());
  }
  a /= 100.0;
  b /= 100.0;
  const double t = seconds_since(t0);
  report(4, a >= 1650.0 && a <= 1900.0 && b >= 2050.0 && b <= 2310.0 && t < 30.0,
         fmt("simulation envelope over 100 seeds: mean A = %.1f in [1650, 1900], mean B = %.1f in [2050, 2310], "
             "%.2f s (< 30 s)",
             a, b, t));
}

void criteria_5_and_6() {
  const auto t0 = std::chrono::steady_clock::now();
  pipeline::MonteCarloConfig cfg;
  cfg.runs = 100;
  cfg.record_timing = false;
  cfg.methods = {{pipeline::Method::SodaCitron, pipeline::default_params(pipeline::Method::SodaCitron)},
                 {pipeline::Method::DbstreamBaseline, pipeline::default_params(pipeline::Method::DbstreamBaseline)}};
  const auto res = pipeline::run_montecarlo(cfg);
  const double t = seconds_since(t0);

  std::map<std::string, const pipeline::Comparison*> cmp;
  for (const auto& c : res.comparisons) cmp[c.metric] = &c;
  const auto* f = cmp["f1"];
  const auto* r = cmp["rmse_normal"];
  const bool have = f && r && f->test && r->test;
  const bool ok5 = have && f->median_a > f->median_b && r->median_a < r->median_b && f->test->p_value < 0.01 &&
                   r->test->p_value < 0.01 && t < 600.0;
  report(5, ok5,
         have ? fmt("100 runs of scenario A: median F1 %.4f vs %.4f (p = %.3g), median RMSE %.4f vs %.4f "
                    "(p = %.3g), %.1f s (< 600 s)",
                    f->median_a, f->median_b, f->test->p_value, r->median_a, r->median_b, r->test->p_value, t)
              : std::string("100 runs of scenario A: comparison unavailable"));

  std::size_t runs = 0;
  std::size_t f1_up = 0;
  std::size_t mota_up = 0;
  for (const auto& s : res.runs) {
    if (s.method_index != 0 || s.rows.empty()) continue;
    ++runs;
    const double quarter = 0.25 * static_cast<double>(s.rows.back().n_detections);
    const auto* q = &s.rows.back();
    for (const auto& row : s.rows) {
      if (static_cast<double>(row.n_detections) >= quarter) {
        q = &row;
        break;
      }
    }
    const auto& last = s.rows.back();
    f1_up += last.f1 >= q->f1 ? 1 : 0;
    mota_up += last.mota && q->mota && *last.mota >= *q->mota ? 1 : 0;
  }
  const double pf = runs ? static_cast<double>(f1_up) / static_cast<double>(runs) : 0.0;
  const double pm = runs ? static_cast<double>(mota_up) / static_cast<double>(runs) : 0.0;
  report(6, runs == 100 && pf >= 0.90 && pm >= 0.85,
         fmt("online trend over %zu runs: final F1 >= 25%%-checkpoint F1 in %.0f%% (>= 90%%), final MOTA >= "
             "25%%-checkpoint MOTA in %.0f%% (>= 85%%)",
             runs, 100.0 * pf, 100.0 * pm));
}

void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  pipeline::BenchConfig cfg;
  cfg.sizes = {2000, 8000, 32000};
  cfg.methods = {{pipeline::Method::SodaCitron, pipeline::default_params(pipeline::Method::SodaCitron)},
                 {pipeline::Method::DbstreamBaseline, pipeline::default_params(pipeline::Method::DbstreamBaseline)}};
  const auto res = pipeline::run_bench(cfg);
  const double t = seconds_since(t0);
  double min_rate = std::numeric_limits<double>::infinity();
  for (const auto& p : res.points) min_rate = std::min(min_rate, p.detections_per_second);
  double max_exp = -std::numeric_limits<double>::infinity();
  std::string exps;
  for (const auto& [m, e] : res.exponents) {
    max_exp = std::max(max_exp, e);
    exps += fmt(" %s=%.3f", m.c_str(), e);
  }
  report(7, min_rate >= 250.0 && max_exp <= 1.3 && t < 120.0,
         fmt("bench 2k/8k/32k: min throughput %.0f det/s (>= 250), exponents%s (<= 1.3), %.1f s (< 120 s)",
             min_rate, exps.c_str(), t));
}

void criterion_8() {
  const auto suite = props::invariant_suite(200, 8);
  bool ok = true;
  std::string detail;
  for (const auto& r : suite) {
    ok = ok && r.ok() && r.cases >= 100;
    if (!r.ok()) detail += " [" + r.name + ": " + r.first_failure + "]";
  }
  report(8, ok, fmt("invariant suite: %zu properties x 200 randomized cases%s", suite.size(), detail.c_str()));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criteria_5_and_6();
  criterion_7();
  criterion_8();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
