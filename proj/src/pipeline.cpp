#include "soda/pipeline.hpp"

#include "soda/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace soda::pipeline {

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

std::string to_string(Method m) {
  return m == Method::SodaCitron ? "soda-citron" : "dbstream-baseline";
}

Method parse_method(const std::string& s) {
  if (s == "soda-citron") return Method::SodaCitron;
  if (s == "dbstream-baseline") return Method::DbstreamBaseline;
  throw InvalidInput("unknown method '" + s + "' (expected soda-citron or dbstream-baseline)");
}

EngineParams default_params(Method m) {
  return m == Method::SodaCitron ? EngineParams{} : baseline_defaults();
}

EngineMode engine_mode(Method m) {
  return m == Method::SodaCitron ? EngineMode::SodaCitron : EngineMode::BaselineDbstream;
}

bool reports_tracking(Method m) { return m == Method::SodaCitron; }

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string opt(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

}  // namespace

std::string format_row(const MetricsRow& r) {
  std::ostringstream os;
  os << r.run_seed << ',' << r.method << ',' << r.scenario << ',' << r.checkpoint << ','
     << r.n_detections << ',' << r.tp << ',' << r.fp << ',' << r.fn << ','
     << (r.idsw ? std::to_string(*r.idsw) : std::string()) << ',' << io::format_double(r.f1) << ','
     << io::format_double(r.precision) << ',' << io::format_double(r.recall) << ','
     << opt(r.rmse_normal) << ',' << opt(r.rmse_strict) << ',' << opt(r.motp) << ','
     << opt(r.mota) << ',' << opt(r.runtime_ms);
  return os.str();
}

std::string format_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// single run

MetricsRow score(const std::vector<EstimatedObject>& estimates, const sim::ScenarioTruth& truth,
                 const sim::SensorSuite& suite) {
  MetricsRow row;
  const auto normal = eval::match(estimates, truth, suite.types, eval::RadiusMode::Normal);
  const auto strict = eval::match(estimates, truth, suite.types, eval::RadiusMode::Strict);
  row.tp = normal.tp();
  row.fp = normal.fp();
  row.fn = normal.fn();
  row.f1 = (normal.tp() + normal.fp() + normal.fn()) == 0 ? 0.0 : eval::f1(normal);
  row.precision = eval::precision(normal);
  row.recall = eval::recall(normal);
  row.rmse_normal = eval::rmse(normal);
  row.rmse_strict = eval::rmse(strict);
  return row;
}

RunResult run_stream(const std::vector<Detection>& detections, const sim::ScenarioTruth& truth,
                     const sim::SensorSuite& suite, const RunConfig& cfg) {
  if (cfg.checkpoint_interval == 0) throw InvalidInput("checkpoint interval must be positive");
  RunResult res{{}, {}, Engine(cfg.params, engine_mode(cfg.method)), 0.0};
  Engine& engine = res.engine;
  std::optional<eval::ClearMot> mot;
  if (reports_tracking(cfg.method)) mot.emplace(truth, suite.types, eval::RadiusMode::Normal);

  double elapsed_ms = 0.0;
  std::size_t checkpoint = 0;
  auto record = [&](std::size_t consumed) {
    Engine snapshot = engine;
    const auto t0 = Clock::now();
    const auto estimates = snapshot.recluster();
    elapsed_ms += ms_since(t0);

    MetricsRow row = score(estimates, truth, suite);
    row.run_seed = cfg.seed;
    row.method = to_string(cfg.method);
    row.scenario = cfg.scenario;
    row.checkpoint = checkpoint++;
    row.n_detections = consumed;
    if (mot) {
      const auto f = mot->add_frame(consumed, estimates);
      row.idsw = f.idsw;
      row.motp = f.motp;
      row.mota = f.mota;
    }
    if (cfg.record_timing) row.runtime_ms = elapsed_ms;
    res.rows.push_back(std::move(row));
  };

  for (std::size_t n = 0; n < detections.size(); ++n) {
    const auto t0 = Clock::now();
    engine.update(detections[n]);
    elapsed_ms += ms_since(t0);
    const std::size_t consumed = n + 1;
    if (consumed % cfg.checkpoint_interval == 0 || consumed == detections.size()) record(consumed);
  }

  const auto t0 = Clock::now();
  res.final_estimates = engine.recluster();
  res.runtime_ms = elapsed_ms + ms_since(t0);
  return res;
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::vector<MetricsRow> MonteCarloResult::all_rows() const {
  std::vector<MetricsRow> out;
  for (const auto& r : runs) out.insert(out.end(), r.rows.begin(), r.rows.end());
  return out;
}

int default_threads() {
  if (const char* env = std::getenv("SODA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {

void check_config(const MonteCarloConfig& cfg) {
  if (cfg.runs < 2) throw InvalidInput("Monte Carlo needs at least 2 runs");
  if (cfg.methods.empty()) throw InvalidInput("Monte Carlo needs at least one method");
  for (const auto& m : cfg.methods) m.params.validate();
  cfg.suite.validate();
}

/// Everything for one seed: scenario draw, stream, every method.
std::vector<RunSummary> one_seed(const MonteCarloConfig& cfg, std::uint64_t seed) {
  const auto truth = sim::generate(cfg.scenario, seed);
  const auto dets = sim::simulate(truth, cfg.suite, seed);
  std::vector<RunSummary> out;
  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    RunConfig rc;
    rc.method = cfg.methods[mi].method;
    rc.params = cfg.methods[mi].params;
    rc.checkpoint_interval = cfg.checkpoint_interval;
    rc.scenario = cfg.scenario.name;
    rc.seed = seed;
    rc.record_timing = cfg.record_timing;
    auto run = run_stream(dets, truth, cfg.suite, rc);
    RunSummary s;
    s.seed = seed;
    s.method_index = mi;
    s.n_detections = dets.size();
    if (!run.rows.empty()) {
      s.f1 = run.rows.back().f1;
      s.rmse_normal = run.rows.back().rmse_normal;
      s.mota = run.rows.back().mota;
    }
    s.rows = std::move(run.rows);
    out.push_back(std::move(s));
  }
  return out;
}

MonteCarloResult assemble(std::vector<std::vector<RunSummary>> per_seed,
                          const MonteCarloConfig& cfg) {
  MonteCarloResult r;
  for (auto& v : per_seed) {
    for (auto& s : v) r.runs.push_back(std::move(s));
  }
  r.comparisons = compare_methods(r.runs, cfg.methods);
  return r;
}

}  // namespace

MonteCarloResult run_montecarlo_serial(const MonteCarloConfig& cfg) {
  check_config(cfg);
  std::vector<std::vector<RunSummary>> per_seed(cfg.runs);
  for (std::size_t k = 0; k < cfg.runs; ++k) per_seed[k] = one_seed(cfg, k);
  return assemble(std::move(per_seed), cfg);
}

MonteCarloResult run_montecarlo(const MonteCarloConfig& cfg) {
  check_config(cfg);
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads();
  const auto n = static_cast<std::int64_t>(cfg.runs);
  std::vector<std::vector<RunSummary>> per_seed(cfg.runs);
  std::vector<std::string> errors(cfg.runs);

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      per_seed[idx] = one_seed(cfg, static_cast<std::uint64_t>(k));
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }

  for (std::size_t k = 0; k < cfg.runs; ++k) {
    if (!errors[k].empty()) throw InternalError("run " + std::to_string(k) + " failed: " + errors[k]);
  }
  return assemble(std::move(per_seed), cfg);
}

std::vector<Comparison> compare_methods(const std::vector<RunSummary>& runs,
                                        const std::vector<MethodSpec>& methods) {
  std::vector<Comparison> out;
  if (methods.size() < 2) return out;
  // seed -> summary per method
  std::map<std::uint64_t, std::vector<const RunSummary*>> by_seed;
  for (const auto& r : runs) {
    auto& slot = by_seed[r.seed];
    slot.resize(methods.size(), nullptr);
    slot[r.method_index] = &r;
  }
  for (std::size_t mb = 1; mb < methods.size(); ++mb) {
    for (const std::string metric : {"f1", "rmse_normal"}) {
      Comparison c;
      c.method_a = to_string(methods[0].method);
      c.method_b = to_string(methods[mb].method);
      c.metric = metric;
      std::vector<double> a;
      std::vector<double> b;
      for (const auto& [seed, slot] : by_seed) {
        const RunSummary* ra = slot[0];
        const RunSummary* rb = slot[mb];
        if (ra == nullptr || rb == nullptr) continue;
        if (metric == "f1") {
          a.push_back(ra->f1);
          b.push_back(rb->f1);
        } else if (ra->rmse_normal && rb->rmse_normal) {
          a.push_back(*ra->rmse_normal);
          b.push_back(*rb->rmse_normal);
        }
      }
      c.n_pairs = a.size();
      if (!a.empty()) {
        c.median_a = median(a);
        c.median_b = median(b);
      }
      try {
        c.test = eval::wilcoxon_signed_rank(a, b);
      } catch (const eval::InsufficientSample& e) {
        c.note = e.what();
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::string format_report(const MonteCarloResult& r, const std::vector<MethodSpec>& methods) {
  std::ostringstream os;
  std::size_t seeds = 0;
  for (const auto& s : r.runs) seeds = std::max<std::size_t>(seeds, s.seed + 1);
  os << "runs: " << seeds << "\n";
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    std::vector<double> f1s;
    std::vector<double> rmses;
    for (const auto& s : r.runs) {
      if (s.method_index != mi) continue;
      f1s.push_back(s.f1);
      if (s.rmse_normal) rmses.push_back(*s.rmse_normal);
    }
    os << to_string(methods[mi].method) << ": median F1 = "
       << (f1s.empty() ? std::string("n/a") : io::format_double(median(f1s)))
       << ", median RMSE = "
       << (rmses.empty() ? std::string("n/a") : io::format_double(median(rmses))) << "\n";
  }
  for (const auto& c : r.comparisons) {
    os << c.method_a << " vs " << c.method_b << " [" << c.metric << "]: n = " << c.n_pairs
       << ", medians " << io::format_double(c.median_a) << " / " << io::format_double(c.median_b);
    if (c.test) {
      os << ", W = " << io::format_double(c.test->statistic)
         << ", p = " << io::format_double(c.test->p_value);
    } else {
      os << ", no test (" << c.note << ")";
    }
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// benchmark

std::vector<Detection> synth_stream(std::size_t n, std::uint64_t seed) {
  if (n == 0) return {};
  const auto suite = sim::table1();
  const auto base = sim::gen_scenario_a(seed);
  const double per_base = sim::expected_detections(base, suite);
  const double scale = static_cast<double>(n) / per_base;

  sim::UniformLayout layout;
  const double side = 150.0 * std::sqrt(scale);
  layout.roi = {0.0, 0.0, side, side};
  for (const auto t : sim::kAllTypes) {
    layout.per_type[t] = std::max(1, static_cast<int>(std::lround(25.0 * scale)));
  }
  const sim::ScenarioSpec spec{"synthetic", layout};

  std::vector<Detection> out;
  for (std::uint64_t round = 0; out.size() < n; ++round) {
    const auto truth = sim::generate(spec, seed + round);
    auto dets = sim::simulate(truth, suite, seed + round);
    out.insert(out.end(), dets.begin(), dets.end());
  }
  out.resize(n);
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope fit needs >= 2 paired points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw InvalidInput("slope fit needs distinct x values");
  return sxy / sxx;
}

BenchResult run_bench(const BenchConfig& cfg) {
  if (cfg.sizes.empty()) throw InvalidInput("bench needs at least one stream size");
  for (std::size_t k = 1; k < cfg.sizes.size(); ++k) {
    if (cfg.sizes[k] <= cfg.sizes[k - 1]) throw InvalidInput("bench sizes must be strictly ascending");
  }
  if (cfg.sizes.front() == 0) throw InvalidInput("bench sizes must be positive");
  if (cfg.repeats < 1) throw InvalidInput("bench repeats must be >= 1");

  BenchResult res;
  std::vector<std::vector<Detection>> streams;
  for (const auto n : cfg.sizes) streams.push_back(synth_stream(n, cfg.seed));

  for (const auto& m : cfg.methods) {
    std::vector<double> xs;
    std::vector<double> ts;
    for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
      double best = std::numeric_limits<double>::infinity();
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        Engine engine(m.params, engine_mode(m.method));
        const std::size_t every = std::max<std::size_t>(1, cfg.sizes[si] / (cfg.reclusters + 1));
        const auto t0 = Clock::now();
        std::size_t consumed = 0;
        for (const auto& d : streams[si]) {
          engine.update(d);
          if (cfg.reclusters > 0 && ++consumed % every == 0) (void)engine.recluster();
        }
        (void)engine.recluster();
        best = std::min(best, ms_since(t0) / 1000.0);
      }
      best = std::max(best, 1e-9);
      res.points.push_back({to_string(m.method), cfg.sizes[si], best,
                            static_cast<double>(cfg.sizes[si]) / best});
      xs.push_back(static_cast<double>(cfg.sizes[si]));
      ts.push_back(best);
    }
    if (xs.size() >= 2) res.exponents.emplace_back(to_string(m.method), loglog_slope(xs, ts));
  }
  return res;
}

std::string format_bench_csv(const BenchResult& r) {
  std::string out = "method,n_detections,seconds,detections_per_second\n";
  for (const auto& p : r.points) {
    out += p.method + "," + std::to_string(p.n_detections) + "," + io::format_double(p.seconds) +
           "," + io::format_double(p.detections_per_second) + "\n";
  }
  return out;
}

}  // namespace soda::pipeline
