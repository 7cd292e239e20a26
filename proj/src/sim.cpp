#include "soda/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace soda::sim {

std::string to_string(ObjectType t) {
  switch (t) {
    case ObjectType::A: return "A";
    case ObjectType::B: return "B";
    case ObjectType::C: return "C";
    case ObjectType::D: return "D";
  }
  return "?";
}

ObjectType parse_object_type(const std::string& s) {
  if (s == "A") return ObjectType::A;
  if (s == "B") return ObjectType::B;
  if (s == "C") return ObjectType::C;
  if (s == "D") return ObjectType::D;
  throw InvalidInput("unknown object type '" + s + "'");
}

void SensorSpec::validate() const {
  for (const auto& [t, p] : pd) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput(name + ": detection probability outside [0,1]");
    if (!count.contains(t)) throw InvalidInput(name + ": missing count model for type " + to_string(t));
  }
  for (const auto& [t, c] : count) {
    if (c.kind == CountModel::Kind::Fixed && c.fixed < 0) throw InvalidInput(name + ": negative count");
    if (c.kind == CountModel::Kind::DiscreteNormal && !(c.sd >= 0.0)) {
      throw InvalidInput(name + ": negative count sd");
    }
  }
  if (!(sigma2 > 0.0)) throw InvalidInput(name + ": sigma2 must be > 0");
  if (!(clutter_rate >= 0.0)) throw InvalidInput(name + ": clutter rate must be >= 0");
  for (const auto* m : {&conf_det, &conf_clutter}) {
    if (m->kind == ConfidenceModel::Kind::Beta && !(m->a > 0.0 && m->b > 0.0)) {
      throw InvalidInput(name + ": beta parameters must be > 0");
    }
  }
}

const ObjectTypeSpec& SensorSuite::type_spec(ObjectType t) const {
  for (const auto& s : types) {
    if (s.type == t) return s;
  }
  throw InvalidInput("no radius specification for object type " + to_string(t));
}

void SensorSuite::validate() const {
  for (const auto& t : types) {
    if (!(t.radius_strict > 0.0 && t.radius_strict < t.radius_normal)) {
      throw InvalidInput("type " + to_string(t.type) + ": need 0 < radius_strict < radius_normal");
    }
  }
  for (const auto& s : sensors) s.validate();
}

SensorSuite table1() {
  using T = ObjectType;
  const CountModel one{CountModel::Kind::Fixed, 1, 0.0, 0.0};
  const CountModel n31{CountModel::Kind::DiscreteNormal, 0, 3.0, 1.0};
  const CountModel n21{CountModel::Kind::DiscreteNormal, 0, 2.0, 1.0};
  const ConfidenceModel pmf{ConfidenceModel::Kind::PmfS1, 0.0, 0.0};
  const ConfidenceModel det{ConfidenceModel::Kind::Beta, 8.0, 2.5};
  const ConfidenceModel clut{ConfidenceModel::Kind::Beta, 8.0, 8.0};

  SensorSuite suite;
  suite.types = {{T::A, 0.8, 0.3}, {T::B, 0.7, 0.2}, {T::C, 0.75, 0.25}, {T::D, 0.95, 0.45}};
  suite.sensors = {
      {"S1", {{T::A, 0.4}, {T::B, 0.7}, {T::C, 0.9}, {T::D, 0.8}},
       {{T::A, one}, {T::B, one}, {T::C, one}, {T::D, one}}, 0.015, pmf, pmf, 0.0005},
      {"S2", {{T::A, 0.8}, {T::C, 0.4}, {T::D, 0.4}},
       {{T::A, n31}, {T::C, n31}, {T::D, n31}}, 0.167, det, clut, 0.02},
      {"S3", {{T::B, 0.85}, {T::C, 0.4}, {T::D, 0.4}},
       {{T::B, one}, {T::C, one}, {T::D, one}}, 0.082, det, clut, 0.01},
      {"S4", {{T::A, 0.6}, {T::B, 0.6}, {T::C, 0.6}, {T::D, 0.6}},
       {{T::A, one}, {T::B, one}, {T::C, one}, {T::D, one}}, 0.082, det, clut, 0.01},
      {"S5", {{T::A, 0.8}, {T::B, 0.3}, {T::C, 0.7}, {T::D, 0.7}},
       {{T::A, n21}, {T::B, n21}, {T::C, n21}, {T::D, n21}}, 0.376, det, clut, 0.02},
  };
  return suite;
}

ScenarioSpec scenario_a_spec() {
  UniformLayout u;
  for (const auto t : kAllTypes) u.per_type[t] = 25;
  return {"A", u};
}

ScenarioSpec scenario_b_spec() { return {"B", RowLayout{}}; }

namespace {

ScenarioTruth generate_uniform(const UniformLayout& u, Rng rng) {
  ScenarioTruth truth;
  truth.roi = u.roi;
  std::uint64_t id = 0;
  for (const auto& [type, n] : u.per_type) {
    for (int k = 0; k < n; ++k) {
      const double x = rng.uniform(u.roi.x_min, u.roi.x_max);
      const double y = rng.uniform(u.roi.y_min, u.roi.y_max);
      truth.objects.push_back({id++, type, Vec2(x, y)});
    }
  }
  return truth;
}

ScenarioTruth generate_rows(const RowLayout& L, Rng rng) {
  if (!(L.pair_r_min >= 0.0 && L.pair_r_min <= L.pair_r_max)) {
    throw InvalidInput("pair annulus radii must satisfy 0 <= min <= max");
  }
  ScenarioTruth truth;
  truth.roi = L.roi;
  const auto n = static_cast<std::uint64_t>(L.rows) * static_cast<std::uint64_t>(L.per_row);
  std::vector<Vec2> anchors;
  for (int row = 0; row < L.rows; ++row) {
    for (int k = 0; k < L.per_row; ++k) {
      Vec2 p(L.x0 + L.spacing * k + rng.normal(0.0, L.jitter_sd),
             L.row_y0 + L.row_spacing * row + rng.normal(0.0, L.jitter_sd));
      p.x() = std::clamp(p.x(), L.roi.x_min, L.roi.x_max);
      p.y() = std::clamp(p.y(), L.roi.y_min, L.roi.y_max);
      truth.objects.push_back({anchors.size(), L.row_type, p});
      anchors.push_back(p);
    }
  }
  const double r0sq = L.pair_r_min * L.pair_r_min;
  const double r1sq = L.pair_r_max * L.pair_r_max;
  for (std::uint64_t k = 0; k < n; ++k) {
    // Area-uniform sample in the annulus, redrawn until it lies in the ROI.
    Vec2 p;
    do {
      const double rad = std::sqrt(rng.uniform(r0sq, r1sq));
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      p = anchors[k] + rad * Vec2(std::cos(phi), std::sin(phi));
    } while (!L.roi.contains(p));
    truth.objects.push_back({n + k, L.pair_type, p});
  }
  return truth;
}

}  // namespace

ScenarioTruth generate(const ScenarioSpec& spec, std::uint64_t seed) {
  const Rng rng = Rng(seed).split("scenario");
  return std::visit(
      [&](const auto& layout) -> ScenarioTruth {
        if (!(layout.roi.x_max > layout.roi.x_min && layout.roi.y_max > layout.roi.y_min)) {
          throw InvalidInput("scenario ROI is empty");
        }
        if constexpr (std::is_same_v<std::decay_t<decltype(layout)>, UniformLayout>) {
          return generate_uniform(layout, rng);
        } else {
          return generate_rows(layout, rng);
        }
      },
      spec.layout);
}

double sample_pi_s1(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.25) return 0.5;
  if (u < 0.5) return 0.75;
  return 1.0;
}

double sample_beta(double a, double b, Rng& rng) { return rng.beta(a, b); }

double sample_confidence(const ConfidenceModel& m, Rng& rng) {
  return m.kind == ConfidenceModel::Kind::PmfS1 ? sample_pi_s1(rng) : sample_beta(m.a, m.b, rng);
}

int sample_count(const CountModel& m, Rng& rng, bool allow_zero) {
  if (m.kind == CountModel::Kind::Fixed) return m.fixed;
  const auto n = static_cast<int>(std::lround(rng.normal(m.mean, m.sd)));
  return std::max(n, allow_zero ? 0 : 1);
}

std::vector<Detection> simulate(const ScenarioTruth& truth, const SensorSuite& suite,
                                std::uint64_t seed, const SimOptions& opts) {
  suite.validate();
  const Rng root = Rng(seed).split("detections");
  std::vector<Detection> out;
  for (std::size_t si = 0; si < suite.sensors.size(); ++si) {
    const auto& s = suite.sensors[si];
    Rng rng = root.split(si);
    const double sd = std::sqrt(s.sigma2);
    const Mat2 R = s.sigma2 * Mat2::Identity();
    for (const auto& obj : truth.objects) {
      const auto pd = s.pd.find(obj.type);
      if (pd == s.pd.end() || !rng.bernoulli(pd->second)) continue;
      const int n = sample_count(s.count.at(obj.type), rng, opts.allow_zero_count);
      for (int k = 0; k < n; ++k) {
        Detection d;
        d.sensor = s.name;
        d.z = obj.position + Vec2(rng.normal(0.0, sd), rng.normal(0.0, sd));
        d.pi = sample_confidence(s.conf_det, rng);
        d.R = R;
        d.truth = ObjectTruth{obj.id};
        out.push_back(std::move(d));
      }
    }
    const auto n_clutter = rng.poisson(s.clutter_rate * truth.roi.area());
    for (std::uint64_t k = 0; k < n_clutter; ++k) {
      Detection d;
      d.sensor = s.name;
      d.z = Vec2(rng.uniform(truth.roi.x_min, truth.roi.x_max),
                 rng.uniform(truth.roi.y_min, truth.roi.y_max));
      d.pi = sample_confidence(s.conf_clutter, rng);
      d.R = R;
      d.truth = ClutterTruth{};
      out.push_back(std::move(d));
    }
  }
  Rng shuffle = root.split("shuffle");
  std::shuffle(out.begin(), out.end(), shuffle.engine());
  return out;
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double expected_count(const CountModel& m) {
  if (m.kind == CountModel::Kind::Fixed) return m.fixed;
  if (m.sd == 0.0) return std::max(1.0, std::round(m.mean));
  // E[max(1, round(X))], X ~ N(mean, sd)
  double e = 0.0;
  const auto lo = static_cast<long>(std::floor(m.mean - 12.0 * m.sd));
  const auto hi = static_cast<long>(std::ceil(m.mean + 12.0 * m.sd));
  for (long k = lo; k <= hi; ++k) {
    const double p = normal_cdf((k + 0.5 - m.mean) / m.sd) - normal_cdf((k - 0.5 - m.mean) / m.sd);
    e += p * static_cast<double>(std::max(1L, k));
  }
  return e;
}

}  // namespace

double expected_detections(const ScenarioTruth& truth, const SensorSuite& suite) {
  double total = 0.0;
  for (const auto& s : suite.sensors) {
    for (const auto& obj : truth.objects) {
      const auto pd = s.pd.find(obj.type);
      if (pd != s.pd.end()) total += pd->second * expected_count(s.count.at(obj.type));
    }
    total += s.clutter_rate * truth.roi.area();
  }
  return total;
}

}  // namespace soda::sim
