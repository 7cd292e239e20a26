#include "soda/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace soda::io {

namespace {

template <typename T>
T required(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw DataError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(where + ": field '" + key + "' has the wrong type");
  }
}

std::string line_ref(std::size_t line_no) {
  return line_no == 0 ? std::string("detection") : "line " + std::to_string(line_no);
}

ordered_json mat_to_json(const Mat2& M) {
  return ordered_json::array({ordered_json::array({M(0, 0), M(0, 1)}),
                              ordered_json::array({M(1, 0), M(1, 1)})});
}

Mat2 mat_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 ||
      j[1].size() != 2) {
    throw DataError(where + ": expected a 2x2 matrix");
  }
  Mat2 M;
  try {
    M << j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(), j[1][1].get<double>();
  } catch (const json::exception&) {
    throw DataError(where + ": matrix entries must be numbers");
  }
  return M;
}

Vec2 vec_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw DataError(where + ": expected a 2-vector");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// detection stream

Detection parse_detection(const std::string& line, std::size_t line_no) {
  const std::string where = line_ref(line_no);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(where + ": invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw DataError(where + ": expected a JSON object");
  Detection d;
  d.sensor = required<std::string>(j, "sensor", where);
  d.z = Vec2(required<double>(j, "x", where), required<double>(j, "y", where));
  d.pi = required<double>(j, "pi", where);
  const double rxx = required<double>(j, "rxx", where);
  const double rxy = required<double>(j, "rxy", where);
  const double ryy = required<double>(j, "ryy", where);
  d.R << rxx, rxy, rxy, ryy;
  if (const auto t = j.find("truth"); t != j.end() && !t->is_null()) {
    if (!t->is_object()) throw DataError(where + ": 'truth' must be an object");
    const auto kind = required<std::string>(*t, "kind", where);
    if (kind == "object") {
      d.truth = ObjectTruth{required<std::uint64_t>(*t, "id", where)};
    } else if (kind == "clutter") {
      d.truth = ClutterTruth{};
    } else {
      throw DataError(where + ": unknown truth kind '" + kind + "'");
    }
  }
  try {
    validate(d);
  } catch (const InvalidInput& e) {
    throw DataError(where + ": " + e.what());
  }
  return d;
}

std::string format_detection(const Detection& d) {
  ordered_json j;
  j["sensor"] = d.sensor;
  j["x"] = d.z.x();
  j["y"] = d.z.y();
  j["pi"] = d.pi;
  j["rxx"] = d.R(0, 0);
  j["rxy"] = d.R(0, 1);
  j["ryy"] = d.R(1, 1);
  if (d.truth) {
    if (const auto* o = std::get_if<ObjectTruth>(&*d.truth)) {
      j["truth"] = ordered_json{{"kind", "object"}, {"id", o->object_id}};
    } else {
      j["truth"] = ordered_json{{"kind", "clutter"}};
    }
  }
  return j.dump();
}

std::vector<Detection> read_detections(std::istream& in) {
  std::vector<Detection> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_detection(line, line_no));
  }
  return out;
}

std::vector<Detection> read_detections_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open detection stream '" + path + "'");
  return read_detections(in);
}

void write_detections(std::ostream& out, const std::vector<Detection>& dets) {
  for (const auto& d : dets) out << format_detection(d) << '\n';
}

// ---------------------------------------------------------------------------
// truth / suite / scenario

namespace {

ordered_json roi_to_json(const sim::Roi& r) {
  return ordered_json{{"x_min", r.x_min}, {"y_min", r.y_min}, {"x_max", r.x_max}, {"y_max", r.y_max}};
}

sim::Roi roi_from_json(const json& j, const std::string& where) {
  sim::Roi r;
  r.x_min = required<double>(j, "x_min", where);
  r.y_min = required<double>(j, "y_min", where);
  r.x_max = required<double>(j, "x_max", where);
  r.y_max = required<double>(j, "y_max", where);
  return r;
}

sim::ObjectType type_from(const std::string& s, const std::string& where) {
  try {
    return sim::parse_object_type(s);
  } catch (const InvalidInput& e) {
    throw DataError(where + ": " + e.what());
  }
}

ordered_json confidence_to_json(const sim::ConfidenceModel& m) {
  if (m.kind == sim::ConfidenceModel::Kind::PmfS1) return ordered_json{{"kind", "pmf_s1"}};
  return ordered_json{{"kind", "beta"}, {"a", m.a}, {"b", m.b}};
}

sim::ConfidenceModel confidence_from_json(const json& j, const std::string& where) {
  const auto kind = required<std::string>(j, "kind", where);
  if (kind == "pmf_s1") return {sim::ConfidenceModel::Kind::PmfS1, 0.0, 0.0};
  if (kind == "beta") {
    return {sim::ConfidenceModel::Kind::Beta, required<double>(j, "a", where), required<double>(j, "b", where)};
  }
  throw DataError(where + ": unknown confidence model '" + kind + "'");
}

ordered_json count_to_json(const sim::CountModel& c) {
  if (c.kind == sim::CountModel::Kind::Fixed) return ordered_json{{"kind", "fixed"}, {"n", c.fixed}};
  return ordered_json{{"kind", "discrete_normal"}, {"mean", c.mean}, {"sd", c.sd}};
}

sim::CountModel count_from_json(const json& j, const std::string& where) {
  const auto kind = required<std::string>(j, "kind", where);
  if (kind == "fixed") return {sim::CountModel::Kind::Fixed, required<int>(j, "n", where), 0.0, 0.0};
  if (kind == "discrete_normal") {
    return {sim::CountModel::Kind::DiscreteNormal, 0, required<double>(j, "mean", where),
            required<double>(j, "sd", where)};
  }
  throw DataError(where + ": unknown count model '" + kind + "'");
}

}  // namespace

ordered_json truth_to_json(const sim::ScenarioTruth& t) {
  ordered_json objs = ordered_json::array();
  for (const auto& o : t.objects) {
    objs.push_back(ordered_json{{"id", o.id},
                                {"type", sim::to_string(o.type)},
                                {"x", o.position.x()},
                                {"y", o.position.y()}});
  }
  return ordered_json{{"roi", roi_to_json(t.roi)}, {"objects", objs}};
}

sim::ScenarioTruth truth_from_json(const json& j) {
  sim::ScenarioTruth t;
  if (const auto r = j.find("roi"); r != j.end()) t.roi = roi_from_json(*r, "truth.roi");
  const auto objs = j.find("objects");
  if (objs == j.end() || !objs->is_array()) throw DataError("truth: missing 'objects' array");
  for (std::size_t k = 0; k < objs->size(); ++k) {
    const auto& o = (*objs)[k];
    const std::string where = "truth.objects[" + std::to_string(k) + "]";
    t.objects.push_back({required<std::uint64_t>(o, "id", where),
                         type_from(required<std::string>(o, "type", where), where),
                         Vec2(required<double>(o, "x", where), required<double>(o, "y", where))});
  }
  return t;
}

ordered_json suite_to_json(const sim::SensorSuite& s) {
  ordered_json types = ordered_json::array();
  for (const auto& t : s.types) {
    types.push_back(ordered_json{{"type", sim::to_string(t.type)},
                                 {"radius_normal", t.radius_normal},
                                 {"radius_strict", t.radius_strict}});
  }
  ordered_json sensors = ordered_json::array();
  for (const auto& sn : s.sensors) {
    ordered_json pd = ordered_json::object();
    for (const auto& [t, p] : sn.pd) pd[sim::to_string(t)] = p;
    ordered_json count = ordered_json::object();
    for (const auto& [t, c] : sn.count) count[sim::to_string(t)] = count_to_json(c);
    sensors.push_back(ordered_json{{"name", sn.name},
                                   {"pd", pd},
                                   {"count", count},
                                   {"sigma2", sn.sigma2},
                                   {"conf_det", confidence_to_json(sn.conf_det)},
                                   {"conf_clutter", confidence_to_json(sn.conf_clutter)},
                                   {"clutter_rate", sn.clutter_rate}});
  }
  return ordered_json{{"object_types", types}, {"sensors", sensors}};
}

sim::SensorSuite suite_from_json(const json& j) {
  sim::SensorSuite s;
  const auto types = j.find("object_types");
  const auto sensors = j.find("sensors");
  if (types == j.end() || !types->is_array()) throw DataError("sensor suite: missing 'object_types'");
  if (sensors == j.end() || !sensors->is_array()) throw DataError("sensor suite: missing 'sensors'");
  for (std::size_t k = 0; k < types->size(); ++k) {
    const auto& t = (*types)[k];
    const std::string where = "object_types[" + std::to_string(k) + "]";
    s.types.push_back({type_from(required<std::string>(t, "type", where), where),
                       required<double>(t, "radius_normal", where),
                       required<double>(t, "radius_strict", where)});
  }
  for (std::size_t k = 0; k < sensors->size(); ++k) {
    const auto& sj = (*sensors)[k];
    const std::string where = "sensors[" + std::to_string(k) + "]";
    sim::SensorSpec sn;
    sn.name = required<std::string>(sj, "name", where);
    if (const auto pd = sj.find("pd"); pd != sj.end()) {
      for (const auto& [key, val] : pd->items()) sn.pd[type_from(key, where)] = val.get<double>();
    }
    if (const auto c = sj.find("count"); c != sj.end()) {
      for (const auto& [key, val] : c->items()) sn.count[type_from(key, where)] = count_from_json(val, where);
    }
    sn.sigma2 = required<double>(sj, "sigma2", where);
    sn.conf_det = confidence_from_json(required<json>(sj, "conf_det", where), where);
    sn.conf_clutter = confidence_from_json(required<json>(sj, "conf_clutter", where), where);
    sn.clutter_rate = required<double>(sj, "clutter_rate", where);
    s.sensors.push_back(std::move(sn));
  }
  try {
    s.validate();
  } catch (const InvalidInput& e) {
    throw DataError(std::string("sensor suite: ") + e.what());
  }
  return s;
}

ordered_json scenario_to_json(const sim::ScenarioSpec& s) {
  ordered_json j;
  j["name"] = s.name;
  if (const auto* u = std::get_if<sim::UniformLayout>(&s.layout)) {
    j["layout"] = "uniform";
    j["roi"] = roi_to_json(u->roi);
    ordered_json per = ordered_json::object();
    for (const auto& [t, n] : u->per_type) per[sim::to_string(t)] = n;
    j["objects_per_type"] = per;
  } else {
    const auto& r = std::get<sim::RowLayout>(s.layout);
    j["layout"] = "rows";
    j["roi"] = roi_to_json(r.roi);
    j["rows"] = r.rows;
    j["per_row"] = r.per_row;
    j["row_y0"] = r.row_y0;
    j["row_spacing"] = r.row_spacing;
    j["x0"] = r.x0;
    j["spacing"] = r.spacing;
    j["jitter_sd"] = r.jitter_sd;
    j["row_type"] = sim::to_string(r.row_type);
    j["pair_type"] = sim::to_string(r.pair_type);
    j["pair_r_min"] = r.pair_r_min;
    j["pair_r_max"] = r.pair_r_max;
  }
  return j;
}

sim::ScenarioSpec scenario_from_json(const json& j) {
  const std::string where = "scenario";
  sim::ScenarioSpec s;
  s.name = optional_field<std::string>(j, "name", "custom", where);
  const auto layout = required<std::string>(j, "layout", where);
  const auto roi = roi_from_json(required<json>(j, "roi", where), where + ".roi");
  if (layout == "uniform") {
    sim::UniformLayout u;
    u.roi = roi;
    const auto per = required<json>(j, "objects_per_type", where);
    for (const auto& [key, val] : per.items()) {
      if (!val.is_number_integer()) throw DataError(where + ": count for type '" + key + "' must be an integer");
      u.per_type[type_from(key, where)] = val.get<int>();
    }
    s.layout = u;
  } else if (layout == "rows") {
    sim::RowLayout r;
    r.roi = roi;
    r.rows = optional_field(j, "rows", r.rows, where);
    r.per_row = optional_field(j, "per_row", r.per_row, where);
    r.row_y0 = optional_field(j, "row_y0", r.row_y0, where);
    r.row_spacing = optional_field(j, "row_spacing", r.row_spacing, where);
    r.x0 = optional_field(j, "x0", r.x0, where);
    r.spacing = optional_field(j, "spacing", r.spacing, where);
    r.jitter_sd = optional_field(j, "jitter_sd", r.jitter_sd, where);
    r.row_type = type_from(optional_field<std::string>(j, "row_type", "A", where), where);
    r.pair_type = type_from(optional_field<std::string>(j, "pair_type", "B", where), where);
    r.pair_r_min = optional_field(j, "pair_r_min", r.pair_r_min, where);
    r.pair_r_max = optional_field(j, "pair_r_max", r.pair_r_max, where);
    s.layout = r;
  } else {
    throw DataError(where + ": unknown layout '" + layout + "'");
  }
  return s;
}

// ---------------------------------------------------------------------------
// engine state / estimates

namespace {

std::string mode_name(EngineMode m) {
  return m == EngineMode::SodaCitron ? "soda-citron" : "dbstream-baseline";
}

std::string survivor_name(SurvivorPolicy p) {
  return p == SurvivorPolicy::OldestId ? "oldest" : "newest";
}

}  // namespace

ordered_json engine_state_to_json(const EngineState& s) {
  ordered_json j;
  j["params"] = ordered_json{{"radius", s.params.radius}, {"beta", s.params.beta},
                             {"w_max", s.params.w_max},   {"w_min", s.params.w_min},
                             {"alpha", s.params.alpha},   {"eps_odds", s.params.eps_odds}};
  j["mode"] = mode_name(s.mode);
  j["survivor"] = survivor_name(s.survivor);
  j["next_id"] = s.next_id;
  ordered_json pots = ordered_json::array();
  for (const auto& p : s.potentials) {
    pots.push_back(ordered_json{{"id", p.id},
                                {"y", ordered_json::array({p.y_info.x(), p.y_info.y()})},
                                {"Y", mat_to_json(p.Y_info)},
                                {"w", p.w},
                                {"l", p.log_odds}});
  }
  j["potentials"] = pots;
  ordered_json dens = ordered_json::array();
  for (const auto& d : s.density) dens.push_back(ordered_json{{"i", d.a}, {"j", d.b}, {"d", d.d}});
  j["density"] = dens;
  return j;
}

EngineState engine_state_from_json(const json& j) {
  const std::string where = "engine state";
  EngineState s;
  const auto p = required<json>(j, "params", where);
  s.params.radius = required<double>(p, "radius", where);
  s.params.beta = required<double>(p, "beta", where);
  s.params.w_max = required<double>(p, "w_max", where);
  s.params.w_min = required<double>(p, "w_min", where);
  s.params.alpha = required<double>(p, "alpha", where);
  s.params.eps_odds = optional_field(p, "eps_odds", s.params.eps_odds, where);
  const auto mode = required<std::string>(j, "mode", where);
  if (mode == "soda-citron") {
    s.mode = EngineMode::SodaCitron;
  } else if (mode == "dbstream-baseline") {
    s.mode = EngineMode::BaselineDbstream;
  } else {
    throw DataError(where + ": unknown mode '" + mode + "'");
  }
  s.survivor = optional_field<std::string>(j, "survivor", "oldest", where) == "newest"
                   ? SurvivorPolicy::NewestId
                   : SurvivorPolicy::OldestId;
  s.next_id = required<ObjectId>(j, "next_id", where);
  for (const auto& pj : required<json>(j, "potentials", where)) {
    PotentialObject po;
    po.id = required<ObjectId>(pj, "id", where);
    po.y_info = vec_from_json(required<json>(pj, "y", where), where);
    po.Y_info = mat_from_json(required<json>(pj, "Y", where), where);
    po.w = required<double>(pj, "w", where);
    po.log_odds = optional_field(pj, "l", 0.0, where);
    s.potentials.push_back(po);
  }
  for (const auto& dj : required<json>(j, "density", where)) {
    s.density.push_back({required<ObjectId>(dj, "i", where), required<ObjectId>(dj, "j", where),
                         required<double>(dj, "d", where)});
  }
  return s;
}

ordered_json estimates_to_json(const std::vector<EstimatedObject>& est) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : est) {
    arr.push_back(ordered_json{{"id", e.id},
                               {"x", e.x_hat.x()},
                               {"y", e.x_hat.y()},
                               {"P", mat_to_json(e.P_cov)},
                               {"w", e.w}});
  }
  return ordered_json{{"estimates", arr}};
}

std::vector<EstimatedObject> estimates_from_json(const json& j) {
  const json& arr = j.is_array() ? j : required<json>(j, "estimates", "estimates");
  std::vector<EstimatedObject> out;
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const auto& e = arr[k];
    const std::string where = "estimates[" + std::to_string(k) + "]";
    EstimatedObject o;
    o.id = required<ObjectId>(e, "id", where);
    o.x_hat = Vec2(required<double>(e, "x", where), required<double>(e, "y", where));
    if (const auto P = e.find("P"); P != e.end()) o.P_cov = mat_from_json(*P, where);
    o.w = optional_field(e, "w", 0.0, where);
    out.push_back(o);
  }
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("'" + path + "': invalid JSON (" + e.what() + ")");
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidInput("write to '" + path + "' failed");
}

void write_json_file(const std::string& path, const ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace soda::io
