#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sshtraj/model.hpp"

namespace sshtraj {

// Majorana operators g_{1j} = c_j + c_j^dag, g_{2j} = -i(c_j - c_j^dag),
// ordered (g_{1,0..L-1}, g_{2,0..L-1}).
struct MajoranaRep {
  Eigen::MatrixXcd h_m;  // H = g^T h_m g, purely imaginary antisymmetric
  Eigen::MatrixXcd m;    // M_{jj'} = sum_mu l_{mu j} conj(l_{mu j'})
  Eigen::MatrixXd m_r;
  Eigen::MatrixXd m_i;
  Eigen::MatrixXd x;     // -2i h_m + 2 m_r
};

// h_m = (i/2) [[0, A], [-A, 0]] with A = H/2. Throws ConfigError if H is
// not symmetric.
Eigen::MatrixXcd to_majorana(const Eigen::MatrixXd& h);
// Inverse of to_majorana: H = -4i h_m(top-right block).
Eigen::MatrixXd from_majorana(const Eigen::MatrixXcd& h_m);

// Majorana coefficient rows l_mu (length 2L) of each channel.
Eigen::MatrixXcd majorana_rows(std::span<const JumpChannel> channels, int sites);

struct BathMatrix {
  Eigen::MatrixXcd m;
  Eigen::MatrixXd m_r;
  Eigen::MatrixXd m_i;
};
BathMatrix bath_matrix(std::span<const JumpChannel> channels, int sites);

// Throws NumericalError if -2i h_m + 2 m_r has an imaginary part above 1e-12.
Eigen::MatrixXd shape_matrix(const Eigen::MatrixXcd& h_m, const Eigen::MatrixXd& m_r);

MajoranaRep majorana_rep(const Eigen::MatrixXd& h, std::span<const JumpChannel> channels);

// Sigma_z used for U_T and U_S. Sublattice is the operator the checker uses:
// diag((-1)^j) on sites, identical on both Majorana species. Species is
// diag(1_L, -1_L) and is kept for comparison only.
enum class SigmaZ { Sublattice, Species };

Eigen::MatrixXd sigma_z(int sites, SigmaZ kind = SigmaZ::Sublattice);

struct Relation {
  double residual = 0.0;  // max-norm of X - U X^(op) U^dag
  bool preserved = false;
};

struct SymmetryReport {
  Relation trs, phs, pah;
  std::string label;
  double min_rapidity_re = 0.0;  // min Re of the eigenvalues of X
};

inline constexpr double kSymmetryTol = 1e-10;

SymmetryReport check_symmetries(const Eigen::MatrixXd& x, SigmaZ kind = SigmaZ::Sublattice);

}  // namespace sshtraj
