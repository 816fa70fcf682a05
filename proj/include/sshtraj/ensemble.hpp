#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sshtraj/gaussian.hpp"
#include "sshtraj/trajectory.hpp"

namespace sshtraj {

struct TcSpec {
  double threshold = 2.0 / 100.0;  // (2 log2 2) / 100 bits
  bool per_trajectory = true;
};

struct TcEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  int used = 0;      // uncensored trajectories entering the mean
  int censored = 0;  // never crossed before t_final
};

// First sample time with |s(t) - s(0)| > threshold, nullopt if none.
std::optional<double> first_deviation_time(std::span<const double> times,
                                           std::span<const double> series,
                                           double threshold);

// Mean and standard error over uncensored entries; censored ones are counted
// separately. With zero uncensored entries, mean = t_final.
TcEstimate summarize_tc(std::span<const std::optional<double>> per_traj,
                        double t_final);

// A jump event tagged with the trajectory it came from.
struct TaggedEvent {
  int trajectory = 0;
  JumpEvent event;
};

struct HistogramSpec {
  double lo = -2.2;
  double hi = 1.0;
  int bins = 81;
};

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<long> counts;
  std::vector<double> density;  // integrates to 1 over the binned events
  long n_events = 0;            // events passing the window/site filter
  long n_outside = 0;           // ... of which outside [lo, hi)
  bool empty = true;

  // index of the bin containing x, or -1
  int bin_of(double x) const;
};

// Events with t in [t0, tf] whose support contains `site` (0-based) when
// given.
Histogram histogram_dsd(std::span<const TaggedEvent> events, double t0, double tf,
                        std::optional<int> site, const HistogramSpec& spec = {});

// Bins that are local maxima (>= left neighbour, > right neighbour, zero
// outside the range) and rise above the lowest bin between them and the
// global maximum by more than z Poisson standard deviations. The global
// maximum is always the first entry; empty histograms give no modes.
std::vector<int> significant_modes(const Histogram& h, double z = 3.0);

struct EnsembleOptions {
  int n_traj = 1;
  double t_final = 10.0;
  double dt = 1e-3;
  double sample_dt = 1e-2;
  std::uint64_t base_seed = 1;
  int workers = 0;  // 0: hardware concurrency
  TcSpec tc;
  // stop each trajectory once its t_c is known; truncated series are padded
  // with their last value for the averages
  bool stop_at_tc = false;
  bool record_jump_dee = true;
  bool keep_records = false;
  bool keep_covariance = false;  // stored in the records
};

struct EnsembleResult {
  std::vector<double> grid;
  std::vector<double> sdee_mean, sdee_stderr;
  std::vector<double> corr_mean, corr_stderr;  // |G_{1,L}|
  TcEstimate tc;          // per-trajectory mean
  TcEstimate tc_of_mean;  // from the averaged curve (stderr 0)
  std::vector<std::optional<double>> tc_per_traj;
  std::vector<TaggedEvent> events;
  double max_purity_error = 0.0;
  int n_traj = 0;
  std::vector<TrajectoryRecord> records;  // only with keep_records
};

// Trajectory k uses seed base_seed + k. Results do not depend on the number
// of workers: trajectories are reduced in index order after all finish.
EnsembleResult run_ensemble(const Dynamics& dyn, const CovarianceState& init,
                            const DeePartition& partition, const EnsembleOptions& opts);

// Trajectory-averaged |G_{1,L}|(t) of stored records.
std::vector<double> edge_correlator_series(std::span<const TrajectoryRecord> records);

// Localization length (sites) of the even-sector mid-gap mode: least-squares
// fit of log |phi_j|^2 against j on A-sublattice sites of the left half.
// Throws ConfigError when there is no mid-gap mode (trivial phase).
double fit_edge_xi(const Eigen::MatrixXd& h);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace sshtraj
