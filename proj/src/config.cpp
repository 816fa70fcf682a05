#include "sshtraj/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sshtraj/error.hpp"

namespace sshtraj {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + where + "." + k + "'");
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + where + "." + key + "' has the wrong type");
  }
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
  return obj.at(key).get<double>();
}

int get_int(const json& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer())
    throw ConfigError("'" + where + "." + key + "' must be an integer");
  return obj.at(key).get<int>();
}

DeePartition::Interval interval(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ConfigError("'" + where + "' must be [first, last] (1-based)");
  return {j[0].get<int>(), j[1].get<int>()};
}

HamiltonianMode mode_from_string(const std::string& s) {
  if (s == "UNQUENCHED_TOPOLOGICAL") return HamiltonianMode::UnquenchedTopological;
  if (s == "QUENCHED_TO_TRIVIAL") return HamiltonianMode::QuenchedToTrivial;
  if (s == "CUSTOM") return HamiltonianMode::Custom;
  throw ConfigError("unknown hamiltonian mode '" + s + "'");
}

std::string fmt_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

std::string to_string(HamiltonianMode mode) {
  switch (mode) {
    case HamiltonianMode::UnquenchedTopological: return "UNQUENCHED_TOPOLOGICAL";
    case HamiltonianMode::QuenchedToTrivial: return "QUENCHED_TO_TRIVIAL";
    case HamiltonianMode::Custom: return "CUSTOM";
  }
  return "?";
}

std::string HistogramRequest::tag() const {
  std::string s = fmt_number(t0) + "-" + fmt_number(tf) + "_";
  if (last_site) return s + "siteL";
  if (site) return s + "site" + std::to_string(*site);
  return s + "all";
}

ModelSpec RunConfig::model_for(int l) const {
  ModelSpec m;
  if (l % 2 != 0) throw ConfigError("L must be even, got " + std::to_string(l));
  m.n_cells = l / 2;
  m.v = v_evol;
  m.w = w_evol;
  m.gamma = gamma;
  m.alpha = alpha;
  m.kind = kind;
  m.validate();
  return m;
}

Eigen::MatrixXd RunConfig::init_hamiltonian(int l) const {
  ModelSpec m = model_for(l);
  m.v = v_init;
  m.w = w_init;
  m.validate();
  return build_hamiltonian(m);
}

Eigen::MatrixXd RunConfig::evol_hamiltonian(int l) const {
  return build_hamiltonian(model_for(l));
}

DeePartition RunConfig::partition_for(int l) const {
  if (!part_a) return default_partition(l);
  auto zero = [](DeePartition::Interval i) { return DeePartition::Interval{i.first - 1, i.last - 1}; };
  return DeePartition(l, zero(*part_a), zero(*part_b_left), zero(*part_b_right));
}

RunConfig parse_config(const json& j) {
  only_keys(j, "config", {"model", "hamiltonian", "numerics", "ensemble", "tc", "outputs",
                          "partition", "schedule"});
  RunConfig c;

  const json model = j.value("model", json::object());
  only_keys(model, "model", {"sites", "gamma", "alpha", "dissipator"});
  c.sites = get_int(model, "sites", "model", c.sites);
  c.gamma = get_number(model, "gamma", "model", c.gamma);
  c.alpha = get_number(model, "alpha", "model", c.alpha);
  c.kind = dissipator_from_string(get<std::string>(model, "dissipator", "model", "SPD"));

  const json ham = j.value("hamiltonian", json::object());
  if (!ham.is_object()) throw ConfigError("'hamiltonian' must be an object");
  c.mode = mode_from_string(get<std::string>(ham, "mode", "hamiltonian", "UNQUENCHED_TOPOLOGICAL"));
  switch (c.mode) {
    case HamiltonianMode::UnquenchedTopological: {
      only_keys(ham, "hamiltonian", {"mode", "w", "v_over_w"});
      const double w = get_number(ham, "w", "hamiltonian", 20.0);
      const double r = get_number(ham, "v_over_w", "hamiltonian", 0.1);
      c.w_init = c.w_evol = w;
      c.v_init = c.v_evol = r * w;
      break;
    }
    case HamiltonianMode::QuenchedToTrivial: {
      only_keys(ham, "hamiltonian", {"mode", "w", "v_over_w_init", "v_over_w_evol"});
      const double w = get_number(ham, "w", "hamiltonian", 20.0);
      c.w_init = c.w_evol = w;
      c.v_init = get_number(ham, "v_over_w_init", "hamiltonian", 0.1) * w;
      c.v_evol = get_number(ham, "v_over_w_evol", "hamiltonian", 1.5) * w;
      break;
    }
    case HamiltonianMode::Custom: {
      only_keys(ham, "hamiltonian", {"mode", "v_init", "w_init", "v_evol", "w_evol"});
      for (const char* k : {"v_init", "w_init", "v_evol", "w_evol"})
        if (!ham.contains(k)) throw ConfigError(std::string("CUSTOM hamiltonian needs '") + k + "'");
      c.v_init = get_number(ham, "v_init", "hamiltonian", 0.0);
      c.w_init = get_number(ham, "w_init", "hamiltonian", 0.0);
      c.v_evol = get_number(ham, "v_evol", "hamiltonian", 0.0);
      c.w_evol = get_number(ham, "w_evol", "hamiltonian", 0.0);
      break;
    }
  }

  const json num = j.value("numerics", json::object());
  only_keys(num, "numerics", {"dt", "sample_dt", "t_final"});
  c.dt = get_number(num, "dt", "numerics", c.dt);
  c.sample_dt = get_number(num, "sample_dt", "numerics", c.sample_dt);
  c.t_final = get_number(num, "t_final", "numerics", c.t_final);
  TimeGrid::make(c.t_final, c.dt, c.sample_dt);

  const json ens = j.value("ensemble", json::object());
  only_keys(ens, "ensemble", {"n_traj", "base_seed", "workers", "sizes"});
  c.n_traj = get_int(ens, "n_traj", "ensemble", c.n_traj);
  c.base_seed = get<std::uint64_t>(ens, "base_seed", "ensemble", c.base_seed);
  c.workers = get_int(ens, "workers", "ensemble", c.workers);
  c.sizes = get<std::vector<int>>(ens, "sizes", "ensemble", {c.sites});
  if (c.n_traj < 1) throw ConfigError("ensemble.n_traj must be >= 1");
  if (c.workers < 0) throw ConfigError("ensemble.workers must be >= 0");
  if (c.sizes.empty()) throw ConfigError("ensemble.sizes must not be empty");

  const json tc = j.value("tc", json::object());
  only_keys(tc, "tc", {"threshold", "per_trajectory", "stop_at_tc"});
  c.tc.threshold = get_number(tc, "threshold", "tc", c.tc.threshold);
  c.tc.per_trajectory = get<bool>(tc, "per_trajectory", "tc", true);
  c.stop_at_tc = get<bool>(tc, "stop_at_tc", "tc", false);
  if (!(c.tc.threshold > 0.0)) throw ConfigError("tc.threshold must be positive");

  const json out = j.value("outputs", json::object());
  only_keys(out, "outputs", {"directory", "events", "snapshots", "histograms"});
  c.out_dir = get<std::string>(out, "directory", "outputs", c.out_dir);
  c.write_events = get<bool>(out, "events", "outputs", true);
  c.write_snapshots = get<bool>(out, "snapshots", "outputs", false);
  if (out.contains("histograms")) {
    if (!out["histograms"].is_array()) throw ConfigError("'outputs.histograms' must be an array");
    for (const auto& h : out["histograms"]) {
      only_keys(h, "outputs.histograms[]", {"window", "site"});
      HistogramRequest r;
      if (!h.contains("window") || !h["window"].is_array() || h["window"].size() != 2)
        throw ConfigError("histogram needs 'window': [t0, tf]");
      r.t0 = h["window"][0].get<double>();
      r.tf = h["window"][1].get<double>();
      if (!(r.tf > r.t0)) throw ConfigError("histogram window must have tf > t0");
      if (h.contains("site")) {
        if (h["site"].is_string() && h["site"] == "L")
          r.last_site = true;
        else if (h["site"].is_number_integer() && h["site"].get<int>() >= 1)
          r.site = h["site"].get<int>();
        else
          throw ConfigError("histogram 'site' must be a 1-based index or \"L\"");
      }
      c.histograms.push_back(r);
    }
  }

  if (j.contains("partition")) {
    const json& p = j["partition"];
    if (p.is_string()) {
      if (p != "default") throw ConfigError("partition must be \"default\" or explicit intervals");
    } else {
      only_keys(p, "partition", {"a", "b_left", "b_right"});
      if (!p.contains("a") || !p.contains("b_left") || !p.contains("b_right"))
        throw ConfigError("explicit partition needs a, b_left and b_right");
      if (c.sizes.size() != 1) throw ConfigError("explicit partition needs a single size");
      c.part_a = interval(p["a"], "partition.a");
      c.part_b_left = interval(p["b_left"], "partition.b_left");
      c.part_b_right = interval(p["b_right"], "partition.b_right");
    }
  }

  if (j.contains("schedule")) {
    if (!j["schedule"].is_array()) throw ConfigError("'schedule' must be an array");
    for (const auto& s : j["schedule"]) {
      only_keys(s, "schedule[]", {"time", "channel"});
      if (!s.contains("time") || !s.contains("channel"))
        throw ConfigError("schedule entries need 'time' and 'channel'");
      c.schedule.jumps.push_back({s["time"].get<double>(), s["channel"].get<int>()});
    }
  }

  // validate every size up front
  for (int l : c.sizes) {
    c.model_for(l);
    c.init_hamiltonian(l);
    c.partition_for(l);
  }
  c.sites = c.sizes.front();

  json n;
  n["model"] = {{"sites", c.sites}, {"gamma", c.gamma}, {"alpha", c.alpha},
                {"dissipator", to_string(c.kind)}};
  // written as CUSTOM so the normalized file parses back to the same run
  n["hamiltonian"] = {{"mode", "CUSTOM"}, {"v_init", c.v_init}, {"w_init", c.w_init},
                      {"v_evol", c.v_evol}, {"w_evol", c.w_evol}};
  n["numerics"] = {{"dt", c.dt}, {"sample_dt", c.sample_dt}, {"t_final", c.t_final}};
  n["ensemble"] = {{"n_traj", c.n_traj}, {"base_seed", c.base_seed}, {"workers", c.workers},
                   {"sizes", c.sizes}};
  n["tc"] = {{"threshold", c.tc.threshold}, {"per_trajectory", c.tc.per_trajectory},
             {"stop_at_tc", c.stop_at_tc}};
  json hs = json::array();
  for (const auto& h : c.histograms) {
    json e = {{"window", {h.t0, h.tf}}};
    if (h.last_site) e["site"] = "L";
    if (h.site) e["site"] = *h.site;
    hs.push_back(e);
  }
  n["outputs"] = {{"directory", c.out_dir}, {"events", c.write_events},
                  {"snapshots", c.write_snapshots}, {"histograms", hs}};
  if (c.part_a)
    n["partition"] = {{"a", {c.part_a->first, c.part_a->last}},
                      {"b_left", {c.part_b_left->first, c.part_b_left->last}},
                      {"b_right", {c.part_b_right->first, c.part_b_right->last}}};
  else
    n["partition"] = "default";
  json sch = json::array();
  for (const auto& s : c.schedule.jumps) sch.push_back({{"time", s.time}, {"channel", s.channel_id}});
  n["schedule"] = sch;
  c.normalized = n;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

std::string preset_path(const std::string& name, const std::string& presets_dir) {
  namespace fs = std::filesystem;
  fs::path p = fs::path(presets_dir) / (name + ".json");
  if (!fs::exists(p)) throw ConfigError("unknown preset '" + name + "' (looked for " + p.string() + ")");
  return p.string();
}

}  // namespace sshtraj
