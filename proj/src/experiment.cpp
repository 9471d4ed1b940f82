// Copyright the Enclosure authors.
// SPDX-License-Identifier: Apache-2.0

#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"
#include "mesh.hpp"
#include "parallel.hpp"

namespace enclosure {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::config, "config: " + msg); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(where + " must be a table");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) config_error("unknown key '" + k + "' in " + where);
  }
}

double get_number(const json& j, const char* key, double def, const std::string& where) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number()) config_error(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_error(where + "." + key + " must be finite");
  return x;
}

int get_int(const json& j, const char* key, int def, const std::string& where) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) config_error(where + "." + key + " must be an integer");
  return v.get<int>();
}

bool get_bool(const json& j, const char* key, bool def, const std::string& where) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) config_error(where + "." + key + " must be true or false");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& def, const std::string& where) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) config_error(where + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

Vec3 get_vec3(const json& j, const char* key, const Vec3& def, const std::string& where) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3) config_error(where + "." + key + " must be a list of three numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) config_error(where + "." + key + " must be a list of three numbers");
    out(i) = v[i].get<double>();
  }
  if (!out.allFinite()) config_error(where + "." + key + " must be finite");
  return out;
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  return root.contains(key) ? root.at(key) : empty;
}

// Admittance table: {"type": "constant", "value" | "relative": x} or
// {"type": "per_component", "values" | "relative_values": [...]}.
std::pair<Admittance, json> parse_admittance(const json& j, const MediumParams& medium, std::size_t components) {
  const std::string where = "obstacle.admittance";
  check_keys(j, where, {"type", "value", "relative", "values", "relative_values"});
  const std::string type = get_string(j, "type", "constant", where);
  if (type == "constant") {
    if (j.contains("value") == j.contains("relative")) config_error(where + " needs exactly one of value, relative");
    const double v = j.contains("value") ? get_number(j, "value", 0, where)
                                         : get_number(j, "relative", 0, where) * medium.lambda0();
    if (!(v > 0.0)) config_error(where + " must be positive");
    return {Admittance::constant(v), json{{"type", "constant"}, {"value", v}}};
  }
  if (type == "per_component") {
    if (j.contains("values") == j.contains("relative_values")) {
      config_error(where + " needs exactly one of values, relative_values");
    }
    const bool rel = j.contains("relative_values");
    const auto& arr = j.at(rel ? "relative_values" : "values");
    if (!arr.is_array() || arr.size() != components) {
      config_error(where + " needs one value per obstacle component (" + std::to_string(components) + ")");
    }
    std::vector<double> vals;
    for (const auto& x : arr) {
      if (!x.is_number()) config_error(where + " values must be numbers");
      const double v = x.get<double>() * (rel ? medium.lambda0() : 1.0);
      if (!(v > 0.0) || !std::isfinite(v)) config_error(where + " values must be positive");
      vals.push_back(v);
    }
    return {Admittance::per_component(vals), json{{"type", "per_component"}, {"values", vals}}};
  }
  config_error(where + ".type must be constant or per_component");
}

std::pair<Obstacle, json> parse_obstacle(const json& j, const MediumParams& medium) {
  const std::string where = "obstacle";
  if (!j.is_object()) config_error("obstacle table is required");
  const std::string type = get_string(j, "type", "sphere", where);
  const std::string id = get_string(j, "id", type, where);
  const json adm = j.contains("admittance") ? j.at("admittance") : json{{"type", "constant"}, {"value", 1.0}};
  json out{{"type", type}, {"id", id}};

  if (type == "sphere") {
    check_keys(j, where, {"type", "id", "center", "radius", "admittance"});
    Sphere s{get_vec3(j, "center", Vec3::Zero(), where), get_number(j, "radius", 1.0, where)};
    if (!(s.radius > 0.0)) config_error("obstacle.radius must be positive");
    auto [lam, lj] = parse_admittance(adm, medium, 1);
    out["center"] = vec_json(s.center);
    out["radius"] = s.radius;
    out["admittance"] = lj;
    return {Obstacle::sphere(s, lam, id), out};
  }
  if (type == "spheres") {
    check_keys(j, where, {"type", "id", "spheres", "admittance"});
    if (!j.contains("spheres") || !j.at("spheres").is_array() || j.at("spheres").empty()) {
      config_error("obstacle.spheres must be a non-empty list");
    }
    std::vector<Sphere> spheres;
    json sj = json::array();
    for (const auto& e : j.at("spheres")) {
      check_keys(e, "obstacle.spheres[]", {"center", "radius"});
      Sphere s{get_vec3(e, "center", Vec3::Zero(), "obstacle.spheres[]"), get_number(e, "radius", 1.0, "obstacle.spheres[]")};
      if (!(s.radius > 0.0)) config_error("obstacle.spheres[].radius must be positive");
      spheres.push_back(s);
      sj.push_back(json{{"center", vec_json(s.center)}, {"radius", s.radius}});
    }
    auto [lam, lj] = parse_admittance(adm, medium, spheres.size());
    out["spheres"] = sj;
    out["admittance"] = lj;
    return {Obstacle::sphere_set(spheres, lam, id), out};
  }
  if (type == "ellipsoid_mesh") {
    check_keys(j, where, {"type", "id", "center", "semi_axes", "resolution", "admittance"});
    const Vec3 c = get_vec3(j, "center", Vec3::Zero(), where);
    const Vec3 ax = get_vec3(j, "semi_axes", Vec3(1, 1, 1), where);
    const int n = get_int(j, "resolution", 80, where);
    if (!(ax.minCoeff() > 0.0)) config_error("obstacle.semi_axes must be positive");
    if (n < 2 || n > 400) config_error("obstacle.resolution must lie in [2, 400]");
    auto [lam, lj] = parse_admittance(adm, medium, 1);
    out["center"] = vec_json(c);
    out["semi_axes"] = vec_json(ax);
    out["resolution"] = n;
    out["admittance"] = lj;
    return {Obstacle::from_mesh(ellipsoid_mesh(c, ax, n), lam, id), out};
  }
  if (type == "mesh_file") {
    check_keys(j, where, {"type", "id", "path", "admittance"});
    const std::string path = get_string(j, "path", "", where);
    if (path.empty()) config_error("obstacle.path is required for mesh_file");
    auto [lam, lj] = parse_admittance(adm, medium, 1);
    out["path"] = path;
    out["admittance"] = lj;
    return {Obstacle::from_mesh(read_mesh_file(path), lam, id), out};
  }
  config_error("obstacle.type must be sphere, spheres, ellipsoid_mesh or mesh_file");
}

std::pair<TauGrid, json> parse_tau(const json& j, double def_lo, double def_hi) {
  const std::string where = "tau";
  check_keys(j, where, {"spacing", "lo", "hi", "ratio", "count", "values"});
  const std::string spacing = get_string(j, "spacing", j.contains("values") ? "explicit" : "geometric", where);
  TauGrid g;
  json out{{"spacing", spacing}};
  try {
    if (spacing == "geometric") {
      const double lo = get_number(j, "lo", def_lo, where), hi = get_number(j, "hi", def_hi, where);
      const double ratio = get_number(j, "ratio", 1.25, where);
      g = TauGrid::geometric(lo, hi, ratio);
      out.update(json{{"lo", lo}, {"hi", hi}, {"ratio", ratio}});
    } else if (spacing == "linear") {
      const double lo = get_number(j, "lo", def_lo, where), hi = get_number(j, "hi", def_hi, where);
      const int count = get_int(j, "count", 16, where);
      g = TauGrid::linear(lo, hi, count);
      out.update(json{{"lo", lo}, {"hi", hi}, {"count", count}});
    } else if (spacing == "explicit") {
      if (!j.contains("values") || !j.at("values").is_array()) config_error("tau.values must be a list");
      g.values = j.at("values").get<std::vector<double>>();
      out["values"] = g.values;
    } else {
      config_error("tau.spacing must be geometric, linear or explicit");
    }
    g.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    config_error(std::string("tau: ") + e.what());
  }
  return {g, out};
}

PulseKind pulse_from_string(const std::string& s) {
  if (s == "linear_ramp") return PulseKind::linear_ramp;
  if (s == "quadratic_ramp") return PulseKind::quadratic_ramp;
  config_error("probe.pulse must be linear_ramp or quadratic_ramp");
}

const char* to_string(PulseKind k) { return k == PulseKind::linear_ramp ? "linear_ramp" : "quadratic_ramp"; }

}  // namespace

const char* to_string(Mode m) {
  switch (m) {
    case Mode::predict: return "predict";
    case Mode::indicator: return "indicator";
    case Mode::extract: return "extract";
    case Mode::reconstruct: return "reconstruct";
    case Mode::validate_solver: return "validate-solver";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::predict, Mode::indicator, Mode::extract, Mode::reconstruct, Mode::validate_solver}) {
    if (s == to_string(m)) return m;
  }
  config_error("unknown mode '" + s + "'");
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Experiment load_experiment(const std::string& json_text, std::optional<Mode> mode,
                           std::optional<unsigned long long> seed) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    config_error(std::string("parse error: ") + e.what());
  }
  check_keys(root, "config", {"fixture_id", "mode", "medium", "obstacle", "probe", "probe_line", "tau", "source",
                              "quadrature", "extraction", "noise"});
  Experiment exp;
  exp.mode = mode ? *mode : mode_from_string(get_string(root, "mode", "indicator", "config"));
  exp.fixture_id = get_string(root, "fixture_id", "fixture", "config");
  json res{{"fixture_id", exp.fixture_id}, {"mode", to_string(exp.mode)}};

  const auto& mj = section(root, "medium");
  check_keys(mj, "medium", {"epsilon", "mu"});
  const double eps = get_number(mj, "epsilon", 1.0, "medium"), mu = get_number(mj, "mu", 1.0, "medium");
  if (!(eps > 0.0) || !(mu > 0.0)) config_error("medium.epsilon and medium.mu must be positive");
  exp.medium = MediumParams(eps, mu);
  res["medium"] = {{"epsilon", eps}, {"mu", mu}};

  auto [obstacle, oj] = parse_obstacle(section(root, "obstacle"), exp.medium);
  exp.obstacle = std::move(obstacle);
  res["obstacle"] = oj;

  const auto& pj = section(root, "probe");
  check_keys(pj, "probe", {"p", "eta", "a", "pulse", "T"});
  exp.probe.p = get_vec3(pj, "p", Vec3(0, 0, 2), "probe");
  exp.probe.eta = get_number(pj, "eta", 0.1, "probe");
  exp.probe.a = get_vec3(pj, "a", Vec3::UnitX(), "probe");
  exp.probe.profile.kind = pulse_from_string(get_string(pj, "pulse", "linear_ramp", "probe"));
  exp.probe.profile.T = get_number(pj, "T", 10.0, "probe");
  exp.probe.medium = exp.medium;
  try {
    exp.probe.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  res["probe"] = {{"p", vec_json(exp.probe.p)}, {"eta", exp.probe.eta}, {"a", vec_json(exp.probe.a)},
                  {"pulse", to_string(exp.probe.profile.kind)}, {"T", exp.probe.profile.T}};

  const bool recon = exp.mode == Mode::reconstruct;
  auto [grid, tj] = parse_tau(section(root, "tau"), recon ? 20.0 : 5.0, recon ? 200.0 : 50.0);
  exp.grid = grid;
  res["tau"] = tj;

  const std::string src = get_string(root, "source", exp.obstacle.is_single_sphere() ? "exact" : "model", "config");
  if (src == "exact") {
    exp.source = DataSource::exact;
  } else if (src == "model") {
    exp.source = DataSource::model;
  } else {
    config_error("source must be exact or model");
  }
  res["source"] = src;

  const auto& qj = section(root, "quadrature");
  check_keys(qj, "quadrature", {"rtol", "max_level", "fixed_level"});
  exp.quadrature.rtol = get_number(qj, "rtol", 1e-8, "quadrature");
  exp.quadrature.max_level = get_int(qj, "max_level", 4, "quadrature");
  exp.quadrature.fixed_level = get_int(qj, "fixed_level", -1, "quadrature");
  if (!(exp.quadrature.rtol > 0.0) || exp.quadrature.max_level < 0) config_error("quadrature settings out of range");
  res["quadrature"] = {{"rtol", exp.quadrature.rtol}, {"max_level", exp.quadrature.max_level},
                       {"fixed_level", exp.quadrature.fixed_level}};

  auto& rc = exp.reconstruction;
  const auto& ej = section(root, "extraction");
  check_keys(ej, "extraction", {"distance_fit", "r2_gate", "min_samples", "distance_order", "order", "tail_fraction",
                                "normalize_source", "divergence_tol", "constant", "dist_perturbation"});
  const std::string dfit = get_string(ej, "distance_fit", "source_normalized", "extraction");
  if (dfit == "basic") {
    rc.distance.mode = DistanceFit::basic;
  } else if (dfit == "source_normalized") {
    rc.distance.mode = DistanceFit::source_normalized;
  } else {
    config_error("extraction.distance_fit must be basic or source_normalized");
  }
  rc.distance.r2_gate = get_number(ej, "r2_gate", 1.0 - 1e-6, "extraction");
  rc.distance.min_samples = get_int(ej, "min_samples", 8, "extraction");
  rc.distance.order = get_int(ej, "distance_order", 2, "extraction");
  rc.coefficient.order = get_int(ej, "order", 2, "extraction");
  rc.coefficient.tail_fraction = get_number(ej, "tail_fraction", 0.6, "extraction");
  rc.coefficient.normalize_source = get_bool(ej, "normalize_source", true, "extraction");
  rc.coefficient.divergence_tol = get_number(ej, "divergence_tol", 5e-4, "extraction");
  const std::string constant = get_string(ej, "constant", "standard", "extraction");
  if (constant == "standard") {
    rc.constant = LimitConstant::standard;
  } else if (constant == "alternative") {
    rc.constant = LimitConstant::alternative;
  } else {
    config_error("extraction.constant must be standard or alternative");
  }
  rc.dist_perturbation = get_number(ej, "dist_perturbation", 0.0, "extraction");
  if (rc.distance.min_samples < 3 || rc.distance.order < 0 || rc.coefficient.order < 0 ||
      !(rc.coefficient.tail_fraction > 0.0 && rc.coefficient.tail_fraction <= 1.0) ||
      !(rc.coefficient.divergence_tol > 0.0) || !(rc.dist_perturbation > -1.0)) {
    config_error("extraction settings out of range");
  }
  res["extraction"] = {{"distance_fit", dfit},
                       {"r2_gate", rc.distance.r2_gate},
                       {"min_samples", rc.distance.min_samples},
                       {"distance_order", rc.distance.order},
                       {"order", rc.coefficient.order},
                       {"tail_fraction", rc.coefficient.tail_fraction},
                       {"normalize_source", rc.coefficient.normalize_source},
                       {"divergence_tol", rc.coefficient.divergence_tol},
                       {"constant", constant},
                       {"dist_perturbation", rc.dist_perturbation}};

  const auto& nj = section(root, "noise");
  check_keys(nj, "noise", {"relative", "seed"});
  rc.noise = get_number(nj, "relative", 0.0, "noise");
  if (!(rc.noise >= 0.0)) config_error("noise.relative must be >= 0");
  if (nj.contains("seed") && !nj.at("seed").is_number_unsigned()) config_error("noise.seed must be a non-negative integer");
  rc.seed = seed ? *seed : nj.contains("seed") ? nj.at("seed").get<unsigned long long>() : 1ull;
  res["noise"] = {{"relative", rc.noise}, {"seed", rc.seed}};

  const auto& lj = section(root, "probe_line");
  check_keys(lj, "probe_line", {"p0", "s_ratios", "a"});
  rc.p0 = get_vec3(lj, "p0", exp.probe.p, "probe_line");
  if (lj.contains("s_ratios")) {
    const auto& sr = lj.at("s_ratios");
    if (!sr.is_array() || sr.size() != 3) config_error("probe_line.s_ratios must list three numbers");
    for (int i = 0; i < 3; ++i) {
      if (!sr[i].is_number()) config_error("probe_line.s_ratios must list three numbers");
      rc.s_ratios[i] = sr[i].get<double>();
    }
  }
  json line{{"p0", vec_json(rc.p0)}, {"s_ratios", rc.s_ratios}};
  if (lj.contains("a")) {
    rc.a = get_vec3(lj, "a", Vec3::UnitX(), "probe_line");
    line["a"] = vec_json(*rc.a);
  }
  res["probe_line"] = line;
  rc.eta = exp.probe.eta;
  rc.profile = exp.probe.profile;
  rc.medium = exp.medium;
  rc.source = exp.source;
  rc.grid = exp.grid;
  rc.quadrature = exp.quadrature;

  // Geometric disjointness is checked before any run.
  if (exp.mode != Mode::reconstruct) {
    exp.probe.check_disjoint(exp.obstacle);
  } else if (exp.obstacle.contains(rc.p0)) {
    throw Error(ErrorKind::geometry, "probe_line.p0 lies inside the obstacle");
  }

  exp.resolved = res;
  exp.hash = fnv1a_hex(res.dump());
  return exp;
}

Experiment load_experiment_file(const std::string& path, std::optional<Mode> mode,
                                std::optional<unsigned long long> seed) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_experiment(ss.str(), mode, seed);
}

std::string remediation_hint(const Error& e) {
  const std::string what = e.what();
  if (e.stage() == "gate") return "increase the observation time T or move the probes closer to the obstacle";
  if (e.stage() == "distance") return "increase tau_max or widen the tau grid to at least one decade";
  if (e.stage() == "coefficient") {
    if (what.find("polarization") != std::string::npos) return "choose a polarization tangent at the nearest point";
    return "increase tau_max, or check the distance used for scaling";
  }
  if (e.stage() == "curvature") return "probes too clustered or data inconsistent; spread the s ratios";
  if (e.stage() == "admittance") return "data admit no positive admittance; increase tau_max";
  if (e.kind() == ErrorKind::geometry) return "move the probe so the source ball clears the obstacle";
  if (e.kind() == ErrorKind::hypothesis) return "move the probe toward a single nondegenerate nearest point";
  return {};
}

namespace {

json diagnostics_json(const Diagnostics& d) {
  json out = json::array();
  for (const auto& x : d) out.push_back({{"code", x.code}, {"message", x.message}});
  return out;
}

std::string csv_header(const Experiment& exp) {
  return "# config_hash=" + exp.hash + " fixture_id=" + exp.fixture_id + "\n";
}

std::string samples_csv(const Experiment& exp, const std::vector<IndicatorSample>& samples, bool probe_column) {
  std::string out = csv_header(exp);
  out += probe_column ? "probe_id,tau,kind,log_value,sign,mantissa,exponent,fixture_id\n"
                      : "tau,kind,log_value,sign,mantissa,exponent,fixture_id\n";
  for (const auto& s : samples) {
    if (probe_column) out += s.probe_id + ",";
    out += format_double(s.tau) + "," + to_string(s.kind) + "," + format_double(s.value.log_abs()) + "," +
           std::to_string(s.value.sign()) + "," + format_double(s.value.mantissa()) + "," +
           format_double(s.value.exponent()) + "," + exp.fixture_id + "\n";
  }
  return out;
}

IndicatorKind total_kind(DataSource s) {
  return s == DataSource::exact ? IndicatorKind::I_exact : IndicatorKind::I_asymptotic_model;
}

SeriesOptions series_options(const Experiment& exp, const RunOptions& opts) {
  SeriesOptions so;
  so.source = exp.source;
  so.quadrature = exp.quadrature;
  so.threads = opts.threads;
  so.probe_id = "probe";
  return so;
}

RunResult run_predict(const Experiment& exp) {
  const auto pl = predicted_limits(exp.obstacle, exp.probe);
  RunResult r;
  std::string csv = csv_header(exp) + "formula,value,q_x,q_y,q_z,k_q,lambda,r,nu_cross_a_sq,contribution\n";
  json limits = json::object();
  for (const auto& l : pl.limits) {
    limits[to_string(l.formula)] = l.value;
    for (const auto& c : l.per_q) {
      csv += std::string(to_string(l.formula)) + "," + format_double(l.value) + "," + format_double(c.q(0)) + "," +
             format_double(c.q(1)) + "," + format_double(c.q(2)) + "," + format_double(c.k_q) + "," +
             format_double(c.lambda) + "," + format_double(c.r) + "," + format_double(c.nu_cross_a_sq) + "," +
             format_double(c.contribution) + "\n";
    }
  }
  r.files.push_back({"predict.csv", csv});
  const json rep{{"config_hash", exp.hash},
                 {"d", pl.d},
                 {"dist", pl.dist},
                 {"admittance_class", to_string(exp.obstacle.classify(exp.medium))},
                 {"limits", limits},
                 {"diagnostics", diagnostics_json(pl.diagnostics)}};
  r.report = rep.dump(2);
  std::ostringstream s;
  s << "d(p) = " << format_double(pl.d) << ", dist = " << format_double(pl.dist) << "\n";
  for (const auto& l : pl.limits) s << "  " << to_string(l.formula) << " = " << format_double(l.value) << "\n";
  for (const auto& d : pl.diagnostics) s << "warning [" << d.code << "]: " << d.message << "\n";
  r.summary = s.str();
  return r;
}

RunResult run_indicator(const Experiment& exp, const RunOptions& opts) {
  const auto samples = indicator_series(exp.obstacle, exp.probe, exp.grid, series_options(exp, opts));
  RunResult r;
  r.files.push_back({"indicator.csv", samples_csv(exp, samples, false)});
  json kinds = json::array();
  for (const auto& s : samples) {
    if (std::find(kinds.begin(), kinds.end(), to_string(s.kind)) == kinds.end()) kinds.push_back(to_string(s.kind));
  }
  bool nonneg = true;
  for (const auto& s : samples) {
    if (s.kind == IndicatorKind::E_energy && s.value.sign() < 0) nonneg = false;
  }
  const json rep{{"config_hash", exp.hash}, {"samples", samples.size()}, {"kinds", kinds}, {"E_energy_nonnegative", nonneg}};
  r.report = rep.dump(2);
  r.summary = std::to_string(samples.size()) + " samples over " + std::to_string(exp.grid.values.size()) +
              " tau values\n";
  return r;
}

RunResult run_extract(const Experiment& exp, const RunOptions& opts) {
  const auto& rc = exp.reconstruction;
  const auto all = indicator_series(exp.obstacle, exp.probe, exp.grid, series_options(exp, opts));
  const auto I = select_kind(all, total_kind(exp.source));
  DistanceResult dr;
  try {
    dr = extract_distance(I, exp.probe, rc.distance);
  } catch (const Error& e) {
    throw Error(e.kind(), e.what(), "distance");
  }
  const double dist = dr.d_hat * (1.0 + rc.dist_perturbation);
  const auto gate = observation_time_gate(exp.probe.profile.T, dist, exp.medium);
  const auto near = nearest_points(exp.obstacle, exp.probe.p);

  json rep{{"config_hash", exp.hash},
           {"d_hat", dr.d_hat},
           {"d_geometry", near.d - exp.probe.eta},
           {"fit", {{"mode", dr.mode == DistanceFit::basic ? "basic" : "source_normalized"},
                    {"slope", dr.slope},
                    {"r2", dr.r2},
                    {"window", {exp.grid.values[dr.window_begin], exp.grid.values[dr.window_end - 1]}}}},
           {"gate", {{"T", exp.probe.profile.T}, {"margin", gate.margin}, {"signal_free", gate.signal_free}}}};
  std::ostringstream s;
  s << "d_hat = " << format_double(dr.d_hat) << " (geometry " << format_double(near.d - exp.probe.eta) << ")\n";
  RunResult r;
  std::string csv = csv_header(exp) + "tau,log_abs_I,sign\n";
  for (const auto& x : I) csv += format_double(x.tau) + "," + format_double(x.value.log_abs()) + "," + std::to_string(x.value.sign()) + "\n";
  r.files.push_back({"extract_samples.csv", csv});
  if (gate.signal_free) {
    s << "observation time too short: T = " << format_double(exp.probe.profile.T)
      << " <= 2 sqrt(mu eps) dist; e^{tau T} I tends to 0 (signal-free)\n";
    rep["diagnostics"] = json::array({{{"code", "observation_time_too_short"},
                                       {"message", "T <= 2 sqrt(mu eps) dist; e^{tau T} I tends to 0"}}});
    r.report = rep.dump(2);
    r.summary = s.str();
    return r;
  }
  CoefficientResult cr;
  try {
    cr = extract_coefficient(I, dist, exp.probe, rc.coefficient);
  } catch (const Error& e) {
    throw Error(e.kind(), e.what(), "coefficient");
  }
  std::string ycsv = csv_header(exp) + "tau,y,y_fit\n";
  for (std::size_t i = 0; i < cr.tau.size(); ++i) {
    double fit = 0.0;
    for (int k = 0; k <= cr.order; ++k) fit += cr.fit.coef(k) * std::pow(cr.tau[i], -k);
    ycsv += format_double(cr.tau[i]) + "," + format_double(cr.y[i]) + "," + format_double(fit) + "\n";
  }
  r.files.push_back({"extract_coefficient.csv", ycsv});
  rep["coefficient_hat"] = cr.L;
  rep["extrapolation_order"] = cr.order;
  rep["growth_ratio"] = cr.growth_ratio;
  rep["tail_window"] = {cr.tau.front(), cr.tau.back()};
  s << "coefficient_hat = " << format_double(cr.L);
  try {
    const auto pl = predicted_limits(exp.obstacle, exp.probe);
    const double pred = pl.get(LimitFormula::indicator_limit).value;
    rep["predicted"] = pred;
    rep["diagnostics"] = diagnostics_json(pl.diagnostics);
    s << " (predicted " << format_double(pred) << ")";
  } catch (const Error& e) {
    rep["diagnostics"] = json::array({{{"code", "prediction_unavailable"}, {"message", e.what()}}});
  }
  s << "\n";
  r.report = rep.dump(2);
  r.summary = s.str();
  return r;
}

RunResult run_reconstruct(const Experiment& exp, const RunOptions& opts) {
  auto rc = exp.reconstruction;
  rc.threads = opts.threads;
  const auto rep = run_reconstruction(exp.obstacle, rc);
  RunResult r;
  std::vector<IndicatorSample> all;
  json probes = json::array();
  for (const auto& p : rep.probes) {
    all.insert(all.end(), p.samples.begin(), p.samples.end());
    probes.push_back({{"p", vec_json(p.p)},
                      {"s", p.s},
                      {"d_true", p.d_true},
                      {"dist_hat", p.distance.d_hat},
                      {"distance_r2", p.distance.r2},
                      {"coefficient_hat", p.coefficient.L},
                      {"growth_ratio", p.coefficient.growth_ratio},
                      {"F", p.F}});
  }
  r.files.push_back({"reconstruct_samples.csv", samples_csv(exp, all, true)});
  const json j{{"config_hash", exp.hash},
               {"q", vec_json(rep.q)},
               {"nu", vec_json(rep.nu)},
               {"s", rep.s},
               {"d_hat", rep.d_hat},
               {"F", rep.F},
               {"H_hat", rep.H_hat},
               {"Kg_hat", rep.Kg_hat},
               {"r_hat", rep.r_hat},
               {"lambda_hat", rep.lambda_hat},
               {"condition", rep.condition},
               {"probes", probes},
               {"diagnostics", diagnostics_json(rep.diagnostics)}};
  r.report = j.dump(2);
  std::ostringstream s;
  s << "nearest point q = (" << format_double(rep.q(0)) << ", " << format_double(rep.q(1)) << ", "
    << format_double(rep.q(2)) << ")\n"
    << "d_hat = " << format_double(rep.d_hat) << "\n"
    << "F = " << format_double(rep.F[0]) << ", " << format_double(rep.F[1]) << ", " << format_double(rep.F[2]) << "\n"
    << "H_hat = " << format_double(rep.H_hat) << ", Kg_hat = " << format_double(rep.Kg_hat)
    << " (condition " << format_double(rep.condition) << ")\n"
    << "r_hat = " << format_double(rep.r_hat) << ", lambda_hat = " << format_double(rep.lambda_hat) << "\n";
  for (const auto& d : rep.diagnostics) s << "warning [" << d.code << "]: " << d.message << "\n";
  r.summary = s.str();
  return r;
}

RunResult run_validate(const Experiment& exp, const RunOptions& opts) {
  if (!exp.obstacle.is_single_sphere()) {
    throw Error(ErrorKind::config, "validate-solver needs a single sphere obstacle");
  }
  const auto& taus = exp.grid.values;
  const std::size_t n = taus.size();
  std::vector<ExactIndicator> base(n), more(n);
  ExactOptions eo;
  eo.quadrature = exp.quadrature;
  parallel_for(n, opts.threads, [&](std::size_t i) {
    base[i] = indicator_exact(exp.obstacle, exp.probe, taus[i], eo);
    ExactOptions e2 = eo;
    e2.n_max = base[i].n_max + 10;
    e2.quadrature.fixed_level = base[i].level;
    more[i] = indicator_exact(exp.obstacle, exp.probe, taus[i], e2);
  });
  const double R = exp.obstacle.spheres().front().radius;
  std::string csv = csv_header(exp) +
                    "tau,kappa_R,E_over_Jstar,bc_residual,bc_residual_global,truncation_tail,expansion_error,"
                    "truncation_delta,pairing_rel,E_sign,n_max\n";
  json violations = json::array();
  auto breach = [&](double tau, const std::string& what, double value, double bound) {
    violations.push_back({{"tau", tau}, {"check", what}, {"value", value}, {"bound", bound}});
  };
  std::vector<double> ratio(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = base[i];
    ratio[i] = b.J_star.is_zero() ? std::nan("") : ::enclosure::ratio(b.E, b.J_star);
    const double delta = std::abs(::enclosure::ratio(more[i].E - b.E, b.E));
    const double pair = std::abs(::enclosure::ratio(b.I_pairing - b.I, b.I));
    csv += format_double(taus[i]) + "," + format_double(exp.medium.kappa(taus[i]) * R) + "," + format_double(ratio[i]) +
           "," + format_double(b.bc_residual) + "," + format_double(b.bc_residual_global) + "," +
           format_double(b.tail) + "," + format_double(b.expansion_error) + "," + format_double(delta) + "," +
           format_double(pair) + "," + std::to_string(b.E.sign()) + "," + std::to_string(b.n_max) + "\n";
    if (!(b.expansion_error < 1e-8)) breach(taus[i], "incident_expansion_error", b.expansion_error, 1e-8);
    if (!(b.bc_residual < 1e-7)) breach(taus[i], "bc_residual", b.bc_residual, 1e-7);
    if (!(delta < 1e-8)) breach(taus[i], "truncation_delta", delta, 1e-8);
    if (b.E.sign() < 0) breach(taus[i], "E_nonnegative", b.E.to_double(), 0.0);
  }
  // E/J* should approach 1 monotonically over the last decade of tau.
  bool monotone = true;
  for (std::size_t i = 1; i < n; ++i) {
    if (taus[i - 1] < taus.back() / 10.0) continue;
    if (std::abs(ratio[i] - 1.0) > std::abs(ratio[i - 1] - 1.0)) monotone = false;
  }
  RunResult r;
  r.files.push_back({"validate.csv", csv});
  const json rep{{"config_hash", exp.hash},
                 {"E_over_Jstar_last", ratio.back()},
                 {"E_over_Jstar_monotone", monotone},
                 {"violations", violations}};
  r.report = rep.dump(2);
  r.violations = !violations.empty();
  std::ostringstream s;
  s << "E/J* at tau = " << format_double(taus.back()) << ": " << format_double(ratio.back())
    << (monotone ? " (monotone approach to 1)\n" : " (approach to 1 is not monotone)\n");
  for (const auto& v : violations) s << "violation: " << v.dump() << "\n";
  if (violations.empty()) s << "all solver checks within bounds\n";
  r.summary = s.str();
  return r;
}

}  // namespace

RunResult run_experiment(Experiment exp, Mode mode, const RunOptions& opts) {
  if (mode != exp.mode) {
    throw Error(ErrorKind::config, "experiment was resolved for mode " + std::string(to_string(exp.mode)));
  }
  if (opts.threads < 1) throw Error(ErrorKind::invalid_argument, "threads must be >= 1");
  RunResult r;
  switch (mode) {
    case Mode::predict: r = run_predict(exp); break;
    case Mode::indicator: r = run_indicator(exp, opts); break;
    case Mode::extract: r = run_extract(exp, opts); break;
    case Mode::reconstruct: r = run_reconstruct(exp, opts); break;
    case Mode::validate_solver: r = run_validate(exp, opts); break;
  }
  r.files.push_back({"config.resolved.json", exp.resolved.dump(2) + "\n"});
  return r;
}

}  // namespace enclosure
