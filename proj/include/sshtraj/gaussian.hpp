#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sshtraj {

// Pure fermionic Gaussian state through its two-point function
// g(i, j) = <c^dag_j c_i>. Anomalous correlations are identically zero for
// the number-conserving dynamics simulated here.
struct CovarianceState {
  Eigen::MatrixXcd g;
  double time = 0.0;
  // log of the squared norm of the unnormalized no-jump state, reset to 0
  // after every jump
  double log_norm = 0.0;

  int sites() const { return static_cast<int>(g.rows()); }
};

// Single-particle mode with definite site-reversal parity (+1 even, -1 odd).
struct ParityMode {
  double energy = 0.0;
  int parity = +1;
  Eigen::VectorXd vector;  // site basis, unit norm
};

// Diagonalizes H separately in the even and odd sectors of the site-reversal
// operator and returns the modes in filling order: ascending energy, with the
// two mid-gap modes treated as degenerate (and the even one first) when they
// are split by less than 1e-12 times the largest hopping.
// Throws ConfigError if H is not symmetric or does not commute with the
// reversal.
std::vector<ParityMode> parity_resolved_modes(const Eigen::MatrixXd& h);

// Slater determinant filling the lowest `filling` modes of
// parity_resolved_modes(h); filling defaults to half filling.
CovarianceState ground_state(const Eigen::MatrixXd& h, int filling);
CovarianceState ground_state(const Eigen::MatrixXd& h);

// Principal submatrix on `subset` (0-based sites, order preserved).
Eigen::MatrixXcd reduced(const Eigen::MatrixXcd& g, std::span<const int> subset);

// Binary entropy sum over the eigenvalues of a reduced covariance matrix, in
// bits. Throws NumericalError if an eigenvalue leaves [-1e-6, 1 + 1e-6].
double entropy_bits(const Eigen::MatrixXcd& g_reduced);
double entropy_bits_from_spectrum(std::span<const double> occupations);

// Connected set A and two-component set B; all sites 0-based and sorted.
class DeePartition {
 public:
  struct Interval {
    int first = 0;  // inclusive
    int last = 0;   // inclusive
  };

  // Throws ConfigError unless the intervals are non-empty, B's components are
  // disjoint and non-adjacent, and all sites lie in [0, sites).
  DeePartition(int sites, Interval a, Interval b_left, Interval b_right);

  const std::vector<int>& a() const { return a_; }
  const std::vector<int>& b() const { return b_; }
  const std::vector<int>& a_union_b() const { return union_; }
  const std::vector<int>& a_intersect_b() const { return intersect_; }
  Interval interval_a() const { return ia_; }
  Interval interval_b_left() const { return ib0_; }
  Interval interval_b_right() const { return ib1_; }
  int sites() const { return sites_; }

 private:
  int sites_;
  Interval ia_, ib0_, ib1_;
  std::vector<int> a_, b_, union_, intersect_;
};

// A = [1, L/2], B = [L/4+1, L/2] u [3L/4+1, L] in 1-based sites. Requires
// L divisible by 4.
DeePartition default_partition(int sites);

struct DeeTerms {
  double s_a = 0.0;
  double s_b = 0.0;
  double s_union = 0.0;
  double s_intersect = 0.0;

  double value() const { return s_a + s_b - s_union - s_intersect; }
};

DeeTerms dee_terms(const Eigen::MatrixXcd& g, const DeePartition& partition);
inline double dee(const Eigen::MatrixXcd& g, const DeePartition& partition) {
  return dee_terms(g, partition).value();
}
inline double dee(const CovarianceState& s, const DeePartition& partition) {
  return dee(s.g, partition);
}

}  // namespace sshtraj
