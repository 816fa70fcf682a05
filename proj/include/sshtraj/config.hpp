#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sshtraj/ensemble.hpp"
#include "sshtraj/gaussian.hpp"
#include "sshtraj/model.hpp"
#include "sshtraj/trajectory.hpp"

namespace sshtraj {

enum class HamiltonianMode { UnquenchedTopological, QuenchedToTrivial, Custom };

std::string to_string(HamiltonianMode mode);

struct HistogramRequest {
  double t0 = 0.0;
  double tf = 0.0;
  std::optional<int> site;  // 1-based; "L" in the file resolves to the last site
  bool last_site = false;

  std::string tag() const;  // e.g. "0-4_all", "0-4_site1"
};

struct RunConfig {
  // model; model.v and model.w hold the evolution hoppings of the first size
  int sites = 16;
  double gamma = 1.0;
  double alpha = 1.0;
  DissipatorKind kind = DissipatorKind::SPD;

  HamiltonianMode mode = HamiltonianMode::UnquenchedTopological;
  double v_init = 2.0, w_init = 20.0;
  double v_evol = 2.0, w_evol = 20.0;

  double dt = 1e-3;
  double sample_dt = 1e-2;
  double t_final = 10.0;

  int n_traj = 200;
  std::uint64_t base_seed = 1;
  int workers = 0;
  std::vector<int> sizes;  // L values; defaults to {sites}

  TcSpec tc;
  bool stop_at_tc = false;

  std::string out_dir = "out";
  bool write_events = true;
  bool write_snapshots = false;
  std::vector<HistogramRequest> histograms;

  // explicit partition in 1-based inclusive intervals; default quartering if
  // absent
  std::optional<DeePartition::Interval> part_a, part_b_left, part_b_right;

  // oracle-compare: jumps to replay (empty: replay the Gaussian trajectory's
  // own jumps for `base_seed`)
  JumpSchedule schedule;

  // normalized copy with every default filled in, for manifests
  nlohmann::json normalized;

  ModelSpec model_for(int sites) const;  // evolution hoppings
  Eigen::MatrixXd init_hamiltonian(int sites) const;
  Eigen::MatrixXd evol_hamiltonian(int sites) const;
  DeePartition partition_for(int sites) const;
};

// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
// Built-in figure presets, by name ("fig3" ... "fig11"), read from the
// presets directory.
std::string preset_path(const std::string& name, const std::string& presets_dir);

}  // namespace sshtraj
