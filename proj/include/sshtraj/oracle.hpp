#pragma once

// Dense exact reference at small sizes. Fock basis states are bit strings
// with site 0 the least significant bit; |n> = prod_{j ascending} (c^dag_j)^{n_j} |0>
// with the lowest site leftmost, so c_j carries the sign (-1)^{sum_{k<j} n_k}.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sshtraj/gaussian.hpp"
#include "sshtraj/model.hpp"
#include "sshtraj/trajectory.hpp"

namespace sshtraj::oracle {

inline constexpr int kMaxSites = 12;
inline constexpr int kMaxTrajectorySites = 8;
inline constexpr int kMaxLindbladSites = 6;

struct DenseState {
  int sites = 0;
  Eigen::VectorXcd psi;  // 2^sites amplitudes
};

// c_j |psi> and c^dag_j |psi>
Eigen::VectorXcd annihilate(const Eigen::VectorXcd& psi, int sites, int j);
Eigen::VectorXcd create(const Eigen::VectorXcd& psi, int sites, int j);

// Dense 2^L operators.
Eigen::MatrixXcd annihilation_matrix(int sites, int j);
Eigen::MatrixXcd many_body_hamiltonian(const Eigen::MatrixXd& h);
Eigen::MatrixXcd jump_matrix(const JumpChannel& channel, int sites);

// Many-body ground state in the `filling`-particle sector. A twofold
// degenerate ground space is resolved with the reflection eigenvector that
// has Re <c^dag_L c_1> > 0 (the even edge superposition occupied).
DenseState dense_ground_state(const Eigen::MatrixXd& h, int filling);
DenseState dense_ground_state(const Eigen::MatrixXd& h);

// G(i, j) = <c^dag_j c_i>
Eigen::MatrixXcd covariance(const DenseState& s);
// F(i, j) = <c_i c_j>
Eigen::MatrixXcd anomalous(const DenseState& s);

// Von Neumann entropy (bits) of the reduced density matrix of `subset`
// (0-based sites), obtained by a signed mode permutation and a partial trace.
double subset_entropy(const DenseState& s, std::span<const int> subset);
DeeTerms dee_dense(const DenseState& s, const DeePartition& partition);

struct DenseSnapshot {
  double time = 0.0;
  Eigen::MatrixXcd g;
  double sdee = 0.0;
  double anomalous_max = 0.0;
  double energy = 0.0;  // <H> of the normalized state
};

struct DenseTrajectory {
  std::vector<DenseSnapshot> snapshots;
  std::vector<ScheduledJump> jumps;  // jumps that occurred
};

// Exact no-jump propagation with exp(-i H_eff dt) between jumps. Seeded mode
// uses the waiting-time rule on the dt grid; schedule mode applies exactly
// the prescribed jumps. Requires L <= 8.
DenseTrajectory dense_trajectory(const Eigen::MatrixXd& h,
                                 std::span<const JumpChannel> channels,
                                 const DenseState& init, const DeePartition& partition,
                                 double t_final, double dt, double sample_dt,
                                 std::uint64_t seed);
DenseTrajectory dense_trajectory(const Eigen::MatrixXd& h,
                                 std::span<const JumpChannel> channels,
                                 const DenseState& init, const DeePartition& partition,
                                 const JumpSchedule& schedule, double t_final, double dt,
                                 double sample_dt);

struct LindbladSample {
  double time = 0.0;
  Eigen::MatrixXcd g;
  double trace = 1.0;
};

// RK4 on the full density matrix, starting from |init><init|. Requires
// L <= 6; throws NumericalError if the trace drifts by more than 1e-8.
std::vector<LindbladSample> dense_lindblad(const Eigen::MatrixXd& h,
                                           std::span<const JumpChannel> channels,
                                           const DenseState& init, double t_final,
                                           double dt, double sample_dt);

}  // namespace sshtraj::oracle
