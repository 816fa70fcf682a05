#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sshtraj {

enum class DissipatorKind { SPD, SBD, None };

std::string to_string(DissipatorKind kind);
DissipatorKind dissipator_from_string(const std::string& name);

// Open SSH chain with L = 2N sites. Site j (0-based) belongs to the A
// sublattice when j is even, i.e. 1-based odd sites are A.
struct ModelSpec {
  int n_cells = 8;
  double v = 2.0;   // intra-cell hopping
  double w = 20.0;  // inter-cell hopping
  double gamma = 1.0;
  double alpha = 1.0;
  DissipatorKind kind = DissipatorKind::SPD;

  int sites() const { return 2 * n_cells; }

  // Throws ConfigError. Requires N >= 2, v, w >= 0 with v + w > 0,
  // gamma >= 0 and alpha in [0, 1].
  void validate() const;
};

enum class ChannelKind { Loss, Gain };

// L = sum_k amplitude[k] * c_{support[k]}      for Loss
// L = sum_k amplitude[k] * c^dag_{support[k]}  for Gain
// Sites are 0-based. Amplitudes carry sqrt(rate).
struct JumpChannel {
  int id = 0;
  ChannelKind kind = ChannelKind::Loss;
  std::vector<int> support;
  std::vector<std::complex<double>> amplitude;

  double weight() const;  // sum |amplitude|^2
};

// Tridiagonal hopping matrix, -v on intra-cell bonds and -w on inter-cell
// bonds, open boundaries. Accepts a single dimer (n_cells = 1).
Eigen::MatrixXd build_hamiltonian(int n_cells, double v, double w);
Eigen::MatrixXd build_hamiltonian(const ModelSpec& spec);

// Number of untouched sites at each edge, n = floor((1 - alpha) L / 2).
int protected_edge_sites(const ModelSpec& spec);

// gamma_j = gamma on sites n..L-n-1 (0-based), zero elsewhere.
std::vector<double> gamma_profile(const ModelSpec& spec);

// One channel per dissipated site (SPD: loss on A, gain on B) or per active
// link (SBD: loss on c_a + c_b with rate min(gamma_a, gamma_b)).
std::vector<JumpChannel> build_channels(const ModelSpec& spec,
                                        std::span<const double> profile);
inline std::vector<JumpChannel> build_channels(const ModelSpec& spec) {
  const auto profile = gamma_profile(spec);
  return build_channels(spec, profile);
}

}  // namespace sshtraj
