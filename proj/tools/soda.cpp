// Command-line front end: simulate, run, evaluate, montecarlo, bench.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error,
// 3 internal invariant violation.

#include "soda/io.hpp"
#include "soda/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace soda;

namespace {

struct ParamFlags {
  std::optional<double> beta;
  std::optional<double> wmax;
  std::optional<double> wmin;
  std::optional<double> radius;
  std::optional<double> alpha;

  void add_to(CLI::App* app) {
    app->add_option("--beta", beta, "confidence transform steepness (default 6)");
    app->add_option("--wmax", wmax, "maximum detection weight (default 10)");
    app->add_option("--wmin", wmin, "minimum object weight (default 4; baseline 3)");
    app->add_option("--radius", radius, "clustering radius in meters (default 1.1)");
    app->add_option("--alpha", alpha, "intersection factor (default 0.3)");
  }

  [[nodiscard]] EngineParams apply(EngineParams p) const {
    if (beta) p.beta = *beta;
    if (wmax) p.w_max = *wmax;
    if (wmin) p.w_min = *wmin;
    if (radius) p.radius = *radius;
    if (alpha) p.alpha = *alpha;
    p.validate();
    return p;
  }
};

sim::ScenarioSpec load_scenario(const std::string& s) {
  if (s == "A" || s == "a") return sim::scenario_a_spec();
  if (s == "B" || s == "b") return sim::scenario_b_spec();
  if (!fs::exists(s)) throw InvalidInput("scenario must be A, B or an existing JSON file: '" + s + "'");
  return io::scenario_from_json(io::read_json_file(s));
}

sim::SensorSuite load_suite(const std::string& path) {
  if (path.empty()) return sim::table1();
  if (!fs::exists(path)) throw InvalidInput("sensor file not found: '" + path + "'");
  return io::suite_from_json(io::read_json_file(path));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidInput("cannot create output directory '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static object data association by online clustering of sensor detections"};
  app.require_subcommand(1);

  // simulate ---------------------------------------------------------------
  std::string sim_scenario = "A";
  std::string sim_sensors;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "out";
  bool sim_zero = false;
  auto* cmd_sim = app.add_subcommand("simulate", "write truth.json and detections.jsonl for one scenario draw");
  cmd_sim->add_option("--scenario", sim_scenario, "A, B or a scenario JSON file");
  cmd_sim->add_option("--sensors", sim_sensors, "sensor suite JSON (default: built-in five-sensor table)");
  cmd_sim->add_option("--seed", sim_seed, "random seed");
  cmd_sim->add_option("--out", sim_out, "output directory");
  cmd_sim->add_flag("--allow-zero-count", sim_zero, "discrete-normal counts may round to zero");

  // run --------------------------------------------------------------------
  std::string run_dets;
  std::string run_truth;
  std::string run_sensors;
  std::string run_method = "soda-citron";
  std::string run_scenario = "A";
  std::uint64_t run_seed = 0;
  std::size_t run_interval = 100;
  std::string run_out = "out";
  bool run_no_timing = false;
  bool run_export = false;
  ParamFlags run_params;
  auto* cmd_run = app.add_subcommand("run", "feed a detection stream through the engine and score it");
  cmd_run->add_option("--detections", run_dets, "detection stream (JSONL)")->required();
  cmd_run->add_option("--truth", run_truth, "truth.json for scoring")->required();
  cmd_run->add_option("--sensors", run_sensors, "sensor suite JSON with matching radii");
  cmd_run->add_option("--method", run_method, "soda-citron | dbstream-baseline");
  cmd_run->add_option("--scenario", run_scenario, "scenario label written to the CSV");
  cmd_run->add_option("--seed", run_seed, "run seed label written to the CSV");
  cmd_run->add_option("--checkpoint-interval", run_interval, "detections between checkpoints");
  cmd_run->add_option("--out", run_out, "output directory");
  cmd_run->add_flag("--no-timing", run_no_timing, "leave runtime_ms empty (byte-stable output)");
  cmd_run->add_flag("--export-state", run_export, "also write engine_state.json");
  run_params.add_to(cmd_run);

  // evaluate ---------------------------------------------------------------
  std::string ev_est;
  std::string ev_truth;
  std::string ev_sensors;
  std::string ev_out;
  auto* cmd_eval = app.add_subcommand("evaluate", "score an estimates.json against truth.json");
  cmd_eval->add_option("--estimates", ev_est, "estimates.json")->required();
  cmd_eval->add_option("--truth", ev_truth, "truth.json")->required();
  cmd_eval->add_option("--sensors", ev_sensors, "sensor suite JSON with matching radii");
  cmd_eval->add_option("--out", ev_out, "output directory (default: print CSV to stdout)");

  // montecarlo -------------------------------------------------------------
  std::string mc_scenario = "A";
  std::string mc_sensors;
  std::size_t mc_runs = 50;
  std::vector<std::string> mc_methods = {"soda-citron", "dbstream-baseline"};
  std::size_t mc_interval = 100;
  std::string mc_out = "out";
  double mc_baseline_wmin = 3.0;
  int mc_threads = 0;
  bool mc_no_timing = false;
  ParamFlags mc_params;
  auto* cmd_mc = app.add_subcommand("montecarlo", "repeat simulate+run over seeds 0..runs-1 and compare methods");
  cmd_mc->add_option("--scenario", mc_scenario, "A, B or a scenario JSON file");
  cmd_mc->add_option("--sensors", mc_sensors, "sensor suite JSON");
  cmd_mc->add_option("--runs", mc_runs, "number of Monte Carlo runs (>= 2)");
  cmd_mc->add_option("--method", mc_methods, "methods to run; the first is the reference")->delimiter(',');
  cmd_mc->add_option("--checkpoint-interval", mc_interval, "detections between checkpoints");
  cmd_mc->add_option("--out", mc_out, "output directory");
  cmd_mc->add_option("--baseline-wmin", mc_baseline_wmin, "w_min of the baseline method");
  cmd_mc->add_option("--threads", mc_threads, "worker threads (default: SODA_THREADS or all cores)");
  cmd_mc->add_flag("--no-timing", mc_no_timing, "leave runtime_ms empty (byte-stable output)");
  mc_params.add_to(cmd_mc);

  // bench ------------------------------------------------------------------
  std::vector<std::size_t> bench_sizes = {2000, 8000, 32000};
  std::uint64_t bench_seed = 0;
  std::size_t bench_reclusters = 10;
  int bench_repeats = 3;
  std::string bench_out;
  std::vector<std::string> bench_methods = {"soda-citron", "dbstream-baseline"};
  auto* cmd_bench = app.add_subcommand("bench", "time update + periodic recluster over growing streams");
  cmd_bench->add_option("--sizes", bench_sizes, "ascending stream sizes")->delimiter(',');
  cmd_bench->add_option("--seed", bench_seed, "random seed");
  cmd_bench->add_option("--reclusters", bench_reclusters, "evenly spaced reclusters per stream (plus the final one)");
  cmd_bench->add_option("--repeats", bench_repeats, "timing repeats (minimum is reported)");
  cmd_bench->add_option("--method", bench_methods, "methods to time")->delimiter(',');
  cmd_bench->add_option("--out", bench_out, "output directory (default: print CSV to stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (*cmd_sim) {
    return guarded([&] {
      const auto spec = load_scenario(sim_scenario);
      const auto suite = load_suite(sim_sensors);
      const auto truth = sim::generate(spec, sim_seed);
      sim::SimOptions opts;
      opts.allow_zero_count = sim_zero;
      const auto dets = sim::simulate(truth, suite, sim_seed, opts);
      ensure_dir(sim_out);
      io::write_json_file(join(sim_out, "truth.json"), io::truth_to_json(truth));
      std::ostringstream os;
      io::write_detections(os, dets);
      io::write_text_file(join(sim_out, "detections.jsonl"), os.str());
      std::cout << "scenario " << spec.name << ", seed " << sim_seed << ": " << truth.objects.size()
                << " objects, " << dets.size() << " detections -> " << sim_out << "\n";
    });
  }

  if (*cmd_run) {
    return guarded([&] {
      pipeline::RunConfig cfg;
      cfg.method = pipeline::parse_method(run_method);
      cfg.params = run_params.apply(pipeline::default_params(cfg.method));
      cfg.checkpoint_interval = run_interval;
      if (cfg.checkpoint_interval == 0) throw InvalidInput("--checkpoint-interval must be positive");
      cfg.scenario = run_scenario;
      cfg.seed = run_seed;
      cfg.record_timing = !run_no_timing;
      const auto suite = load_suite(run_sensors);
      const auto truth = io::truth_from_json(io::read_json_file(run_truth));
      const auto dets = io::read_detections_file(run_dets);
      const auto res = pipeline::run_stream(dets, truth, suite, cfg);
      ensure_dir(run_out);
      io::write_text_file(join(run_out, "metrics.csv"), pipeline::format_csv(res.rows));
      io::write_json_file(join(run_out, "estimates.json"), io::estimates_to_json(res.final_estimates));
      if (run_export) {
        io::write_json_file(join(run_out, "engine_state.json"), io::engine_state_to_json(res.engine.state()));
      }
      std::cout << run_method << ": " << dets.size() << " detections, "
                << res.final_estimates.size() << " estimates";
      if (!res.rows.empty()) std::cout << ", final F1 " << io::format_double(res.rows.back().f1);
      std::cout << " -> " << run_out << "\n";
    });
  }

  if (*cmd_eval) {
    return guarded([&] {
      const auto suite = load_suite(ev_sensors);
      const auto truth = io::truth_from_json(io::read_json_file(ev_truth));
      const auto est = io::estimates_from_json(io::read_json_file(ev_est));
      auto row = pipeline::score(est, truth, suite);
      row.method = "external";
      row.scenario = "-";
      const auto csv = pipeline::format_csv({row});
      if (ev_out.empty()) {
        std::cout << csv;
      } else {
        ensure_dir(ev_out);
        io::write_text_file(join(ev_out, "metrics.csv"), csv);
      }
    });
  }

  if (*cmd_mc) {
    return guarded([&] {
      pipeline::MonteCarloConfig cfg;
      cfg.scenario = load_scenario(mc_scenario);
      cfg.suite = load_suite(mc_sensors);
      cfg.runs = mc_runs;
      cfg.checkpoint_interval = mc_interval;
      if (cfg.checkpoint_interval == 0) throw InvalidInput("--checkpoint-interval must be positive");
      cfg.threads = mc_threads;
      cfg.record_timing = !mc_no_timing;
      for (const auto& name : mc_methods) {
        const auto m = pipeline::parse_method(name);
        auto p = mc_params.apply(pipeline::default_params(m));
        if (m == pipeline::Method::DbstreamBaseline) {
          p.w_min = mc_baseline_wmin;
          p.validate();
        }
        cfg.methods.push_back({m, p});
      }
      const auto res = pipeline::run_montecarlo(cfg);
      ensure_dir(mc_out);
      io::write_text_file(join(mc_out, "montecarlo.csv"), pipeline::format_csv(res.all_rows()));
      const auto report = pipeline::format_report(res, cfg.methods);
      io::write_text_file(join(mc_out, "report.txt"), report);
      std::cout << report;
    });
  }

  if (*cmd_bench) {
    return guarded([&] {
      pipeline::BenchConfig cfg;
      cfg.sizes = bench_sizes;
      cfg.seed = bench_seed;
      cfg.reclusters = bench_reclusters;
      cfg.repeats = bench_repeats;
      for (const auto& name : bench_methods) {
        const auto m = pipeline::parse_method(name);
        cfg.methods.push_back({m, pipeline::default_params(m)});
      }
      const auto res = pipeline::run_bench(cfg);
      const auto csv = pipeline::format_bench_csv(res);
      if (bench_out.empty()) {
        std::cout << csv;
      } else {
        ensure_dir(bench_out);
        io::write_text_file(join(bench_out, "bench.csv"), csv);
      }
      for (const auto& [method, slope] : res.exponents) {
        std::cout << "# " << method << " growth exponent " << io::format_double(slope) << "\n";
      }
    });
  }
  return 1;
}
