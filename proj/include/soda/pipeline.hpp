#pragma once

#include "soda/engine.hpp"
#include "soda/eval.hpp"
#include "soda/sim.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace soda::pipeline {

enum class Method { SodaCitron, DbstreamBaseline };

[[nodiscard]] std::string to_string(Method m);
/// Accepts "soda-citron" and "dbstream-baseline".
[[nodiscard]] Method parse_method(const std::string& s);
/// Default parameters per method (baseline uses w_min = 3).
[[nodiscard]] EngineParams default_params(Method m);
[[nodiscard]] EngineMode engine_mode(Method m);
/// Only id-bearing methods get CLEAR-MOT columns.
[[nodiscard]] bool reports_tracking(Method m);

struct RunConfig {
  Method method = Method::SodaCitron;
  EngineParams params;
  std::size_t checkpoint_interval = 100;
  std::string scenario = "A";
  std::uint64_t seed = 0;
  bool record_timing = true;
};

/// One row of the metrics CSV.
struct MetricsRow {
  std::uint64_t run_seed = 0;
  std::string method;
  std::string scenario;
  std::size_t checkpoint = 0;
  std::size_t n_detections = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::optional<std::size_t> idsw;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> rmse_normal;
  std::optional<double> rmse_strict;
  std::optional<double> motp;
  std::optional<double> mota;
  std::optional<double> runtime_ms;
};

inline constexpr const char* kMetricsHeader =
    "run_seed,method,scenario,checkpoint,n_detections,tp,fp,fn,idsw,f1,precision,recall,"
    "rmse_normal,rmse_strict,motp,mota,runtime_ms";

[[nodiscard]] std::string format_row(const MetricsRow& r);
[[nodiscard]] std::string format_csv(const std::vector<MetricsRow>& rows);

struct RunResult {
  std::vector<MetricsRow> rows;  // one per checkpoint
  std::vector<EstimatedObject> final_estimates;
  Engine engine;  // after the final recluster
  double runtime_ms = 0.0;  // engine update + recluster time only
};

/// Feeds `detections` in order; at every checkpoint reclusters a copy of the
/// engine and scores it; finally reclusters the engine itself.
[[nodiscard]] RunResult run_stream(const std::vector<Detection>& detections,
                                   const sim::ScenarioTruth& truth, const sim::SensorSuite& suite,
                                   const RunConfig& cfg);

/// Scores a single estimate set (no tracking columns).
[[nodiscard]] MetricsRow score(const std::vector<EstimatedObject>& estimates,
                               const sim::ScenarioTruth& truth, const sim::SensorSuite& suite);

struct MethodSpec {
  Method method = Method::SodaCitron;
  EngineParams params;
};

struct MonteCarloConfig {
  sim::ScenarioSpec scenario = sim::scenario_a_spec();
  sim::SensorSuite suite = sim::table1();
  std::vector<MethodSpec> methods;
  std::size_t runs = 50;
  std::size_t checkpoint_interval = 100;
  bool record_timing = true;
  /// Worker threads for the parallel driver; 0 = environment default.
  int threads = 0;
};

/// Final-checkpoint summary for one (run, method).
struct RunSummary {
  std::uint64_t seed = 0;
  std::size_t method_index = 0;
  std::size_t n_detections = 0;
  double f1 = 0.0;
  std::optional<double> rmse_normal;
  std::optional<double> mota;
  std::vector<MetricsRow> rows;
};

struct Comparison {
  std::string method_a;
  std::string method_b;
  std::string metric;
  std::size_t n_pairs = 0;
  double median_a = 0.0;
  double median_b = 0.0;
  std::optional<eval::WilcoxonResult> test;
  std::string note;  // set when the test could not be run
};

struct MonteCarloResult {
  std::vector<RunSummary> runs;  // ordered by (seed, method index)
  std::vector<Comparison> comparisons;

  [[nodiscard]] std::vector<MetricsRow> all_rows() const;
};

/// Runs seeds 0..runs-1 with an OpenMP worker pool (one engine per run).
[[nodiscard]] MonteCarloResult run_montecarlo(const MonteCarloConfig& cfg);
/// Single-threaded reference; must produce the same result as the parallel
/// driver (timing excluded).
[[nodiscard]] MonteCarloResult run_montecarlo_serial(const MonteCarloConfig& cfg);

/// Paired Wilcoxon tests between the first method and each other method
/// on final F1 and final RMSE (normal radius).
[[nodiscard]] std::vector<Comparison> compare_methods(const std::vector<RunSummary>& runs,
                                                      const std::vector<MethodSpec>& methods);
[[nodiscard]] std::string format_report(const MonteCarloResult& r,
                                        const std::vector<MethodSpec>& methods);

/// Worker count from SODA_THREADS, else the OpenMP default.
[[nodiscard]] int default_threads();

[[nodiscard]] double median(std::vector<double> v);

struct BenchConfig {
  std::vector<std::size_t> sizes;
  std::vector<MethodSpec> methods;
  std::uint64_t seed = 0;
  /// Evenly spaced reclusters per stream, in addition to the final one.
  std::size_t reclusters = 10;
  int repeats = 3;
};

struct BenchPoint {
  std::string method;
  std::size_t n_detections = 0;
  double seconds = 0.0;
  double detections_per_second = 0.0;
};

struct BenchResult {
  std::vector<BenchPoint> points;
  /// Log-log slope of runtime against stream size, per method.
  std::vector<std::pair<std::string, double>> exponents;
};

/// Scenario-A-like stream of exactly `n` detections: object count and ROI
/// area scale with n so the detection density stays constant.
[[nodiscard]] std::vector<Detection> synth_stream(std::size_t n, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x).
[[nodiscard]] double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Throws InvalidInput for an empty or non-ascending size list.
[[nodiscard]] BenchResult run_bench(const BenchConfig& cfg);
[[nodiscard]] std::string format_bench_csv(const BenchResult& r);

}  // namespace soda::pipeline
