#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sshtraj/gaussian.hpp"
#include "sshtraj/model.hpp"

namespace sshtraj {

// 64-bit Mersenne twister with a portable [0, 1) conversion, so a seed gives
// the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // (0, 1], used as the norm threshold so that r = 0 never occurs
  double threshold() { return 1.0 - uniform(); }

 private:
  std::mt19937_64 engine_;
};

// Column-sparse view of a banded matrix: for column j the (row, value) pairs
// of its nonzeros.
// Compressed sparse columns.
struct SparseColumns {
  std::vector<int> col_ptr;  // n + 1 entries
  std::vector<int> rows;
  std::vector<std::complex<double>> vals;
  static SparseColumns from_dense(const Eigen::MatrixXcd& m);
};

// Everything the integrator needs, built once per run.
struct Dynamics {
  Eigen::MatrixXd h;                  // evolution Hamiltonian
  std::vector<JumpChannel> channels;
  // dG/dt = i(GH - HG) - (KG + GK)/2 + GKG, K = sum_loss conj(l) l^T - sum_gain l l^dag
  Eigen::MatrixXcd k;
  SparseColumns k_cols;
  SparseColumns drift_cols;  // iH - K/2
  bool dissipative = false;

  static Dynamics build(const Eigen::MatrixXd& h, std::vector<JumpChannel> channels);
  static Dynamics build(const ModelSpec& spec, const Eigen::MatrixXd& h);
};

struct Rates {
  double lambda = 0.0;             // <Lambda> = sum(per_channel) / 2
  std::vector<double> per_channel;
};

// Per-channel jump rates <L^dag L>. Small negative rates above -1e-10 are
// clipped to zero; anything lower or a NaN throws NumericalError.
Rates lambda_expect(const CovarianceState& state,
                    std::span<const JumpChannel> channels);

// Reusable scratch space for drift_step; one per trajectory.
class DriftWorkspace {
 public:
  explicit DriftWorkspace(int sites);

 private:
  friend void drift_step(CovarianceState&, const Dynamics&, double, DriftWorkspace&);
  Eigen::MatrixXcd stage_, k1_, k2_, k3_, k4_, f_, t_;
};

// One classical RK4 step of the normalized no-jump evolution of G, with the
// log-norm advanced by -2 Lambda dt (Lambda taken at the RK4 stages).
// Throws NumericalError on NaN or a diagonal entry outside [-1e-6, 1 + 1e-6].
void drift_step(CovarianceState& state, const Dynamics& dyn, double dt,
                DriftWorkspace& ws);
CovarianceState drift_step(const CovarianceState& state, const Dynamics& dyn,
                           double dt);

// True once the no-jump norm exp(log_norm) has dropped to the threshold r.
inline bool norm_crossed(double log_norm, double r) {
  return log_norm <= std::log(r);
}

// Draws r and drifts `state` on the dt grid until exp(log_norm) <= r.
// Returns the crossing time, or nullopt if t_max is reached first.
std::optional<double> sample_jump_time(CovarianceState& state,
                                       const Dynamics& dyn, Rng& rng,
                                       double dt, double t_max);

// Categorical draw with weights `rates`. Throws NumericalError if all zero.
int select_channel(std::span<const double> rates, Rng& rng);

// Projects G onto the post-jump state (rank-1 update) and resets log_norm.
// Throws NumericalError if the jump probability is below 1e-12.
void apply_jump(CovarianceState& state, const JumpChannel& channel);

struct JumpEvent {
  double time = 0.0;
  int channel_id = 0;
  std::vector<int> support;  // 0-based
  double dsd = 0.0;          // S^D after minus before
  double sdee_before = 0.0;
  double sdee_after = 0.0;
  double rate_at_jump = 0.0;  // rate of the selected channel
  double total_rate = 0.0;    // 2 Lambda at the jump
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> sdee;
  std::vector<std::complex<double>> edge_correlator;  // G_{1,L}
  std::vector<JumpEvent> events;
  std::uint64_t seed = 0;
  double max_purity_error = 0.0;  // max over samples of ||G^2 - G||_max
  bool stopped_early = false;
  std::vector<Eigen::MatrixXcd> covariances;  // per sample, with keep_covariance
};

struct TrajectoryOptions {
  double t_final = 10.0;
  double dt = 1e-3;
  double sample_dt = 1e-2;
  std::uint64_t seed = 0;
  // stop (and truncate the record) at the first sample where
  // |S^D(t) - S^D(0)| exceeds this value
  std::optional<double> stop_after_deviation;
  // jumps and samples are still computed, but no DEE is evaluated at jumps
  bool record_jump_dee = true;
  bool keep_covariance = false;
};

// Validated time grid. Throws ConfigError unless t_final and sample_dt are
// integer multiples of dt.
struct TimeGrid {
  long steps = 0;
  long sample_every = 1;
  double dt = 0.0;
  static TimeGrid make(double t_final, double dt, double sample_dt);
  double time(long step) const { return static_cast<double>(step) * dt; }
};

// Waiting-time quantum-jump trajectory. Deterministic for fixed
// (dynamics, initial state, options).
TrajectoryRecord run_trajectory(const Dynamics& dyn, const CovarianceState& init,
                                const DeePartition& partition,
                                const TrajectoryOptions& opts);

struct ScheduledJump {
  double time = 0.0;
  int channel_id = 0;
};

// Strictly increasing (time, channel) list for replaying a fixed jump record.
struct JumpSchedule {
  std::vector<ScheduledJump> jumps;
  void validate(std::size_t n_channels) const;  // throws ConfigError
};

struct Snapshot {
  double time = 0.0;
  Eigen::MatrixXcd g;
  double sdee = 0.0;
};

// Drifts between prescribed jumps; samples every sample_dt. A jump scheduled
// at grid time t is applied after the drift reaching t and before sampling t.
std::vector<Snapshot> run_scheduled(const Dynamics& dyn, const CovarianceState& init,
                                    const DeePartition& partition,
                                    const JumpSchedule& schedule, double t_final,
                                    double dt, double sample_dt);

// max_ij |(G^2 - G)_ij|
double purity_error(const Eigen::MatrixXcd& g);

}  // namespace sshtraj
