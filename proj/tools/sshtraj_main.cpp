#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sshtraj/config.hpp"
#include "sshtraj/ensemble.hpp"
#include "sshtraj/error.hpp"
#include "sshtraj/gaussian.hpp"
#include "sshtraj/io.hpp"
#include "sshtraj/kernels.hpp"
#include "sshtraj/oracle.hpp"
#include "sshtraj/symmetry.hpp"
#include "sshtraj/trajectory.hpp"

#ifndef SSHTRAJ_PRESETS_DIR
#define SSHTRAJ_PRESETS_DIR "presets"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sshtraj;

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string presets_dir = SSHTRAJ_PRESETS_DIR;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration");
  sub->add_option("--preset", c.preset, "named preset (fig3 ... fig11)");
  sub->add_option("--presets-dir", c.presets_dir, "directory holding the presets");
  sub->add_option("--out", c.out, "output directory (overrides outputs.directory)");
  sub->add_option("--seed", c.seed, "base seed (overrides ensemble.base_seed)");
  sub->add_option("--workers", c.workers, "worker threads, 0 = all cores");
}

RunConfig resolve(const Common& c) {
  if (!c.config.empty() && !c.preset.empty())
    throw ConfigError("--config and --preset are mutually exclusive");
  RunConfig cfg = !c.config.empty()   ? load_config(c.config)
                  : !c.preset.empty() ? load_config(preset_path(c.preset, c.presets_dir))
                                      : parse_config(json::object());
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.seed) cfg.base_seed = *c.seed;
  if (c.workers) {
    if (*c.workers < 0) throw ConfigError("--workers must be >= 0");
    cfg.workers = *c.workers;
  }
  cfg.normalized["outputs"]["directory"] = cfg.out_dir;
  cfg.normalized["ensemble"]["base_seed"] = cfg.base_seed;
  cfg.normalized["ensemble"]["workers"] = cfg.workers;
  return cfg;
}

json manifest(const RunConfig& cfg, const std::string& command, double wall) {
  json m;
  m["command"] = command;
  m["config"] = cfg.normalized;
  m["hamiltonian_mode"] = to_string(cfg.mode);
  m["base_seed"] = cfg.base_seed;
  m["seeds"] = {{"first", cfg.base_seed}, {"last", cfg.base_seed + cfg.n_traj - 1}};
  m["version"] = io::version();
  m["kernels"] = kernels::active().name;
  m["wall_time_s"] = wall;
  return m;
}

json report_json(const SymmetryReport& r) {
  auto rel = [](const Relation& x) { return json{{"residual", x.residual}, {"preserved", x.preserved}}; };
  return {{"TRS", rel(r.trs)}, {"PHS", rel(r.phs)}, {"PAH", rel(r.pah)}, {"class", r.label},
          {"min_rapidity_re", r.min_rapidity_re}};
}

fs::path size_dir(const RunConfig& cfg, int l) {
  fs::path d(cfg.out_dir);
  if (cfg.sizes.size() > 1) d /= "L" + std::to_string(l);
  return d;
}

int cmd_ground_state(const RunConfig& cfg) {
  json sizes = json::array();
  for (int l : cfg.sizes) {
    const Eigen::MatrixXd h = cfg.init_hamiltonian(l);
    const CovarianceState gs = ground_state(h);
    const DeeTerms t = dee_terms(gs.g, cfg.partition_for(l));
    const Eigen::VectorXd e = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
    json entry = {{"L", l}, {"v", cfg.v_init}, {"w", cfg.w_init}, {"sdee", t.value()},
                  {"s_a", t.s_a}, {"s_b", t.s_b}, {"s_union", t.s_union},
                  {"s_intersect", t.s_intersect}, {"gap", e(l / 2) - e(l / 2 - 1)},
                  {"bulk_gap", l >= 4 ? e(l / 2 + 1) - e(l / 2 - 2) : 0.0},
                  {"edge_correlator", gs.g(0, l - 1).real()}};
    try {
      entry["xi"] = fit_edge_xi(h);
    } catch (const ConfigError&) {
      entry["xi"] = nullptr;
    }
    const fs::path d = size_dir(cfg, l);
    io::write_covariance_bin(d / "ground_state_G.bin", gs.g);
    if (l <= 16) io::write_covariance_csv(d / "ground_state_G.csv", gs.g);
    sizes.push_back(entry);
    std::printf("L=%d  S^D=%.9f  gap=%.6g  xi=%s\n", l, t.value(), entry["gap"].get<double>(),
                entry["xi"].is_null() ? "none" : io::num(entry["xi"].get<double>()).c_str());
  }
  json out = {{"sizes", sizes}, {"version", io::version()}, {"config", cfg.normalized}};
  io::write_json(fs::path(cfg.out_dir) / "ground_state.json", out);
  return 0;
}

int cmd_trajectory(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const int l = cfg.sites;
  const Dynamics dyn = Dynamics::build(cfg.model_for(l), cfg.evol_hamiltonian(l));
  const CovarianceState init = ground_state(cfg.init_hamiltonian(l));
  TrajectoryOptions opts;
  opts.t_final = cfg.t_final;
  opts.dt = cfg.dt;
  opts.sample_dt = cfg.sample_dt;
  opts.seed = cfg.base_seed;
  const TrajectoryRecord rec = run_trajectory(dyn, init, cfg.partition_for(l), opts);
  const fs::path d(cfg.out_dir);
  io::write_trajectory(d / "trajectory.csv", rec);
  std::vector<TaggedEvent> ev;
  for (const auto& e : rec.events) ev.push_back({0, e});
  io::write_events(d / "events.csv", ev);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json m = manifest(cfg, "trajectory", wall);
  m["seeds"] = {{"first", cfg.base_seed}, {"last", cfg.base_seed}};
  m["jumps"] = rec.events.size();
  m["max_purity_error"] = rec.max_purity_error;
  io::write_json(d / "run_manifest.json", m);
  std::printf("L=%d seed=%llu jumps=%zu final S^D=%.6f\n", l,
              static_cast<unsigned long long>(cfg.base_seed), rec.events.size(), rec.sdee.back());
  return 0;
}

int cmd_ensemble(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root(cfg.out_dir);
  fs::create_directories(root);
  io::CsvWriter tcw(root / "tc_scaling.csv", {"L", "tc", "stderr", "censored_count"});
  json per_size = json::array();
  for (std::size_t k = 0; k < cfg.sizes.size(); ++k) {
    const int l = cfg.sizes[k];
    const Dynamics dyn = Dynamics::build(cfg.model_for(l), cfg.evol_hamiltonian(l));
    const CovarianceState init = ground_state(cfg.init_hamiltonian(l));
    EnsembleOptions eo;
    eo.n_traj = cfg.n_traj;
    eo.t_final = cfg.t_final;
    eo.dt = cfg.dt;
    eo.sample_dt = cfg.sample_dt;
    eo.base_seed = cfg.base_seed;
    eo.workers = cfg.workers;
    eo.tc = cfg.tc;
    eo.stop_at_tc = cfg.stop_at_tc;
    eo.record_jump_dee = !cfg.histograms.empty() || cfg.write_events;
    const EnsembleResult res = run_ensemble(dyn, init, cfg.partition_for(l), eo);

    io::write_series(root / "sdee_mean.csv", l, res.grid, res.sdee_mean, res.sdee_stderr, k > 0);
    io::write_series(root / "correlator.csv", l, res.grid, res.corr_mean, res.corr_stderr, k > 0);
    const TcEstimate& tc = cfg.tc.per_trajectory ? res.tc : res.tc_of_mean;
    tcw.row({double(l), tc.mean, tc.stderr_, double(tc.censored)});

    const fs::path d = size_dir(cfg, l);
    for (const auto& hr : cfg.histograms) {
      std::optional<int> site;
      if (hr.last_site) site = l - 1;
      if (hr.site) site = *hr.site - 1;
      const Histogram h = histogram_dsd(res.events, hr.t0, hr.tf, site);
      io::write_histogram(d / ("dsd_hist_" + hr.tag() + ".csv"), h);
    }
    if (cfg.write_events) io::write_events(d / "events.csv", res.events);
    per_size.push_back({{"L", l}, {"tc", tc.mean}, {"tc_stderr", tc.stderr_},
                        {"tc_censored", tc.censored}, {"events", res.events.size()},
                        {"max_purity_error", res.max_purity_error}});
    std::printf("L=%d  n_traj=%d  t_c=%.4f +- %.4f (censored %d)  jumps=%zu\n", l, res.n_traj,
                tc.mean, tc.stderr_, tc.censored, res.events.size());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json m = manifest(cfg, "ensemble", wall);
  m["sizes"] = per_size;
  io::write_json(root / "run_manifest.json", m);
  return 0;
}

int cmd_symmetry(const RunConfig& cfg) {
  const int l = cfg.sites;
  const ModelSpec spec = cfg.model_for(l);
  const Eigen::MatrixXd h = cfg.evol_hamiltonian(l);
  const auto channels = build_channels(spec);
  const MajoranaRep rep = majorana_rep(h, channels);
  const MajoranaRep closed = majorana_rep(h, {});
  json out = {{"L", l}, {"dissipator", to_string(spec.kind)}, {"gamma", spec.gamma},
              {"alpha", spec.alpha}, {"report", report_json(check_symmetries(rep.x))},
              {"closed_chain", report_json(check_symmetries(closed.x))}};
  io::write_json(fs::path(cfg.out_dir) / "symmetry.json", out);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  const int l = cfg.sites;
  if (l > oracle::kMaxTrajectorySites)
    throw ConfigError("oracle-compare needs L <= " + std::to_string(oracle::kMaxTrajectorySites));
  const ModelSpec spec = cfg.model_for(l);
  const Eigen::MatrixXd h0 = cfg.init_hamiltonian(l);
  const Dynamics dyn = Dynamics::build(spec, cfg.evol_hamiltonian(l));
  const DeePartition part = cfg.partition_for(l);
  const CovarianceState gs = ground_state(h0);
  const oracle::DenseState dgs = oracle::dense_ground_state(h0);

  JumpSchedule schedule = cfg.schedule;
  std::string source = "config";
  if (schedule.jumps.empty()) {
    TrajectoryOptions o;
    o.t_final = cfg.t_final;
    o.dt = cfg.dt;
    o.sample_dt = cfg.sample_dt;
    o.seed = cfg.base_seed;
    for (const auto& e : run_trajectory(dyn, gs, part, o).events)
      schedule.jumps.push_back({e.time, e.channel_id});
    source = "gaussian seed " + std::to_string(cfg.base_seed);
  }
  const auto gauss = run_scheduled(dyn, gs, part, schedule, cfg.t_final, cfg.dt, cfg.sample_dt);
  const auto dense = oracle::dense_trajectory(dyn.h, dyn.channels, dgs, part, schedule,
                                              cfg.t_final, cfg.dt, cfg.sample_dt);
  double dg = 0.0, ds = 0.0, fmax = 0.0;
  for (std::size_t k = 0; k < gauss.size(); ++k) {
    dg = std::max(dg, (gauss[k].g - dense.snapshots[k].g).cwiseAbs().maxCoeff());
    ds = std::max(ds, std::abs(gauss[k].sdee - dense.snapshots[k].sdee));
    fmax = std::max(fmax, dense.snapshots[k].anomalous_max);
  }
  json out = {{"L", l},
              {"schedule_source", source},
              {"jumps", schedule.jumps.size()},
              {"ground_state_max_abs_dG", (gs.g - oracle::covariance(dgs)).cwiseAbs().maxCoeff()},
              {"max_abs_dG", dg},
              {"max_abs_dSD", ds},
              {"max_abs_anomalous", fmax},
              {"pass", dg <= 1e-6 && ds <= 1e-5}};
  io::write_json(fs::path(cfg.out_dir) / "oracle_compare.json", out);
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-jump trajectories of the dissipative SSH chain"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::version());
  Common common;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Sub subs[] = {
      {"ground-state", "ground-state DEE, localization length and gap", cmd_ground_state},
      {"trajectory", "single trajectory time series and jump record", cmd_trajectory},
      {"ensemble", "trajectory ensemble averages, t_c and jump histograms", cmd_ensemble},
      {"symmetry-check", "generalized TRS/PHS/PAH relations of the dissipator", cmd_symmetry},
      {"oracle-compare", "Gaussian engine versus dense exact reference", cmd_oracle},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const auto& s : subs) registered.emplace_back(app.add_subcommand(s.name, s.help), &s);
  for (auto& [sub, s] : registered) add_common(sub, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    for (auto& [sub, s] : registered)
      if (sub->parsed()) return s->run(resolve(common));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
