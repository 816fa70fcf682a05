#include "sshtraj/symmetry.hpp"

#include <algorithm>
#include <complex>

#include "sshtraj/error.hpp"

namespace sshtraj {

using cd = std::complex<double>;

Eigen::MatrixXcd to_majorana(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw ConfigError("Hamiltonian must be square");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw ConfigError("Hamiltonian must be real symmetric");
  const Eigen::Index l = h.rows();
  const Eigen::MatrixXd a = 0.5 * h;
  Eigen::MatrixXcd hm = Eigen::MatrixXcd::Zero(2 * l, 2 * l);
  hm.topRightCorner(l, l) = cd(0.0, 0.5) * a.cast<cd>();
  hm.bottomLeftCorner(l, l) = cd(0.0, -0.5) * a.cast<cd>();
  return hm;
}

Eigen::MatrixXd from_majorana(const Eigen::MatrixXcd& h_m) {
  const Eigen::Index l = h_m.rows() / 2;
  return (cd(0.0, -4.0) * h_m.topRightCorner(l, l)).real();
}

Eigen::MatrixXcd majorana_rows(std::span<const JumpChannel> channels, int sites) {
  // c = (g1 + i g2)/2, c^dag = (g1 - i g2)/2
  Eigen::MatrixXcd rows = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(channels.size()), 2 * sites);
  for (std::size_t mu = 0; mu < channels.size(); ++mu) {
    const auto& ch = channels[mu];
    const cd sgn = ch.kind == ChannelKind::Loss ? cd(0.0, 0.5) : cd(0.0, -0.5);
    for (std::size_t k = 0; k < ch.support.size(); ++k) {
      const int j = ch.support[k];
      if (j < 0 || j >= sites) throw ConfigError("channel support outside the chain");
      rows(mu, j) += 0.5 * ch.amplitude[k];
      rows(mu, sites + j) += sgn * ch.amplitude[k];
    }
  }
  return rows;
}

BathMatrix bath_matrix(std::span<const JumpChannel> channels, int sites) {
  const Eigen::MatrixXcd rows = majorana_rows(channels, sites);
  BathMatrix b;
  // M_{jj'} = sum_mu l_{mu j} conj(l_{mu j'})
  b.m = rows.transpose() * rows.conjugate();
  b.m_r = b.m.real();
  b.m_i = b.m.imag();
  return b;
}

Eigen::MatrixXd shape_matrix(const Eigen::MatrixXcd& h_m, const Eigen::MatrixXd& m_r) {
  if (h_m.rows() != m_r.rows() || h_m.cols() != m_r.cols())
    throw ConfigError("h_m and m_r must have the same shape");
  const Eigen::MatrixXcd x = cd(0.0, -2.0) * h_m + 2.0 * m_r.cast<cd>();
  if (x.imag().cwiseAbs().maxCoeff() > 1e-12)
    throw NumericalError("shape matrix is not real: inconsistent h_m and m_r");
  return x.real();
}

MajoranaRep majorana_rep(const Eigen::MatrixXd& h, std::span<const JumpChannel> channels) {
  MajoranaRep rep;
  rep.h_m = to_majorana(h);
  BathMatrix b = bath_matrix(channels, static_cast<int>(h.rows()));
  rep.m = std::move(b.m);
  rep.m_r = std::move(b.m_r);
  rep.m_i = std::move(b.m_i);
  rep.x = shape_matrix(rep.h_m, rep.m_r);
  return rep;
}

Eigen::MatrixXd sigma_z(int sites, SigmaZ kind) {
  Eigen::VectorXd d(2 * sites);
  for (int j = 0; j < sites; ++j) {
    if (kind == SigmaZ::Sublattice) {
      d(j) = d(sites + j) = (j % 2 == 0) ? 1.0 : -1.0;
    } else {
      d(j) = 1.0;
      d(sites + j) = -1.0;
    }
  }
  return d.asDiagonal();
}

SymmetryReport check_symmetries(const Eigen::MatrixXd& x, SigmaZ kind) {
  if (x.rows() != x.cols() || x.rows() % 2 != 0)
    throw ConfigError("shape matrix must be 2L x 2L");
  const int sites = static_cast<int>(x.rows() / 2);
  const Eigen::MatrixXd u = sigma_z(sites, kind);
  auto make = [](double r) { return Relation{r, r < kSymmetryTol}; };

  SymmetryReport rep;
  // X is real, so X^* = X and X^dag = X^T; the relations are still evaluated
  // as written.
  const Eigen::MatrixXcd xc = x.cast<cd>();
  const Eigen::MatrixXcd uc = u.cast<cd>();
  rep.trs = make((xc - uc * xc.transpose() * uc.adjoint()).cwiseAbs().maxCoeff());
  rep.phs = make((xc - xc.conjugate()).cwiseAbs().maxCoeff());
  rep.pah = make((xc - uc * xc.adjoint() * uc.adjoint()).cwiseAbs().maxCoeff());

  std::vector<std::string> broken;
  if (!rep.trs.preserved) broken.emplace_back("TRS");
  if (!rep.phs.preserved) broken.emplace_back("PHS");
  if (!rep.pah.preserved) broken.emplace_back("PAH");
  if (broken.empty()) {
    rep.label = "BDI-like (all preserved)";
  } else {
    rep.label = "broken: {";
    for (std::size_t i = 0; i < broken.size(); ++i)
      rep.label += (i ? ", " : "") + broken[i];
    rep.label += "}";
  }
  const Eigen::VectorXcd beta = Eigen::EigenSolver<Eigen::MatrixXd>(x, false).eigenvalues();
  rep.min_rapidity_re = beta.real().minCoeff();
  return rep;
}

}  // namespace sshtraj
