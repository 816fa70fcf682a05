#include <doctest.h>

#include "sshtraj/error.hpp"
#include "sshtraj/symmetry.hpp"

using namespace sshtraj;
using cd = std::complex<double>;

namespace {

std::vector<JumpChannel> channels(int n, DissipatorKind k, double gamma, double alpha = 1.0) {
  ModelSpec s;
  s.n_cells = n;
  s.kind = k;
  s.gamma = gamma;
  s.alpha = alpha;
  return build_channels(s);
}

}  // namespace

TEST_CASE("Majorana form of a single dimer") {
  const Eigen::MatrixXd h = build_hamiltonian(1, 1.0, 1.0);
  const Eigen::MatrixXcd hm = to_majorana(h);
  REQUIRE(hm.rows() == 4);
  CHECK(hm.topLeftCorner(2, 2).isZero());
  CHECK(hm.bottomRightCorner(2, 2).isZero());
  CHECK(hm(0, 3) == cd(0.0, -0.25));  // (i/2)(H/2)_{01}
  CHECK(hm(3, 0) == cd(0.0, 0.25));
}

TEST_CASE("Majorana Hamiltonian properties and round trip") {
  const Eigen::MatrixXd h = build_hamiltonian(5, 0.4, 1.3);
  const Eigen::MatrixXcd hm = to_majorana(h);
  CHECK((hm.transpose() + hm).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(hm.real().cwiseAbs().maxCoeff() == 0.0);
  CHECK((from_majorana(hm) - h).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(hm).eigenvalues();
  for (int k = 0; k < ev.size(); ++k) CHECK(ev(k) == doctest::Approx(-ev(ev.size() - 1 - k)).epsilon(1e-12));
  Eigen::MatrixXd bad = h;
  bad(0, 1) += 0.1;
  CHECK_THROWS_AS(to_majorana(bad), ConfigError);
}

TEST_CASE("Majorana reconstruction of the many-body quadratic form") {
  // c = (g1 + i g2)/2 and c^dag = (g1 - i g2)/2: with the coefficient rows of
  // c_j and c^dag_j, sum_{ab} H_ab row(c^dag_a)^T h row(c_b) relation is
  // checked through W W^dag = 2
  const int l = 3;
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(2 * l, 2 * l);
  for (int j = 0; j < l; ++j) {
    w(j, j) = 1.0;
    w(j, l + j) = cd(0.0, 1.0);
    w(l + j, j) = 1.0;
    w(l + j, l + j) = cd(0.0, -1.0);
  }
  CHECK((w * w.adjoint() - 2.0 * Eigen::MatrixXcd::Identity(2 * l, 2 * l)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("SPD bath matrix closed form") {
  const int n = 4, l = 8;
  const double gamma = 0.6;
  const BathMatrix b = bath_matrix(channels(n, DissipatorKind::SPD, gamma), l);
  Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(2 * l, 2 * l);
  for (int j = 0; j < l; ++j) {
    const double s = (j % 2 == 0) ? 1.0 : -1.0;  // 1_o - 1_e on 1-based sites
    expect(j, j) = expect(l + j, l + j) = gamma / 4;
    expect(j, l + j) = cd(0.0, -s * gamma / 4);
    expect(l + j, j) = cd(0.0, s * gamma / 4);
  }
  CHECK((b.m - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.m_r - b.m_r.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((b.m_i + b.m_i.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("SBD bath matrix") {
  const int n = 4, l = 8;
  const double gamma = 1.4;
  const BathMatrix b = bath_matrix(channels(n, DissipatorKind::SBD, gamma), l);
  Eigen::MatrixXd ma = Eigen::MatrixXd::Zero(l, l);
  for (int j = 0; j < l; ++j) ma(j, j) = (j == 0 || j == l - 1) ? 1.0 : 2.0;
  for (int j = 0; j + 1 < l; ++j) ma(j, j + 1) = ma(j + 1, j) = 1.0;
  CHECK((b.m_r.topLeftCorner(l, l) - gamma / 4 * ma).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.m_r.bottomRightCorner(l, l) - gamma / 4 * ma).cwiseAbs().maxCoeff() < 1e-12);
  const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b.m_r).eigenvalues().minCoeff();
  CHECK(min_eig >= -1e-10);
}

TEST_CASE("no channels give a zero bath") {
  const BathMatrix b = bath_matrix({}, 6);
  CHECK(b.m.rows() == 12);
  CHECK(b.m.isZero());
}

TEST_CASE("shape matrix") {
  const Eigen::MatrixXd h = build_hamiltonian(4, 2.0, 20.0);
  const MajoranaRep closed = majorana_rep(h, {});
  CHECK((closed.x.cast<cd>() - cd(0.0, -2.0) * closed.h_m).cwiseAbs().maxCoeff() < 1e-14);

  const double gamma = 0.9;
  const MajoranaRep rep = majorana_rep(h, channels(4, DissipatorKind::SPD, gamma));
  Eigen::MatrixXd expect(16, 16);
  const Eigen::MatrixXd a = h / 2;
  expect << gamma / 2 * Eigen::MatrixXd::Identity(8, 8), a, -a, gamma / 2 * Eigen::MatrixXd::Identity(8, 8);
  CHECK((rep.x - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rep.x + rep.x.transpose() - 4 * rep.m_r).cwiseAbs().maxCoeff() < 1e-14);
  for (auto k : {DissipatorKind::SPD, DissipatorKind::SBD}) {
    const MajoranaRep r = majorana_rep(h, channels(4, k, 1.0, 0.5));
    CHECK(check_symmetries(r.x).min_rapidity_re >= -1e-10);
  }
  const Eigen::MatrixXd m_bad = Eigen::MatrixXd::Identity(10, 10);
  CHECK_THROWS(shape_matrix(to_majorana(h), m_bad));
}

TEST_CASE("SPD preserves all relations, SBD breaks some") {
  const Eigen::MatrixXd h = build_hamiltonian(8, 2.0, 20.0);
  for (double gamma : {0.1, 1.0, 7.5}) {
    for (double alpha : {1.0, 0.8}) {
      const SymmetryReport spd =
          check_symmetries(majorana_rep(h, channels(8, DissipatorKind::SPD, gamma, alpha)).x);
      CHECK(spd.trs.preserved);
      CHECK(spd.phs.preserved);
      CHECK(spd.pah.preserved);
      CHECK(spd.label == "BDI-like (all preserved)");

      const SymmetryReport sbd =
          check_symmetries(majorana_rep(h, channels(8, DissipatorKind::SBD, gamma, alpha)).x);
      CHECK(std::max({sbd.trs.residual, sbd.phs.residual, sbd.pah.residual}) > 1e-3);
      CHECK(sbd.label.rfind("broken", 0) == 0);
      CHECK(sbd.trs.residual == doctest::Approx(gamma));
    }
  }
  const SymmetryReport closed = check_symmetries(majorana_rep(h, {}).x);
  CHECK(closed.trs.preserved);
  CHECK(closed.phs.preserved);
  CHECK(closed.pah.preserved);
}

TEST_CASE("species-block sigma_z cannot tell SPD from SBD") {
  const Eigen::MatrixXd h = build_hamiltonian(4, 2.0, 20.0);
  const auto spd = check_symmetries(majorana_rep(h, channels(4, DissipatorKind::SPD, 1.0)).x, SigmaZ::Species);
  const auto sbd = check_symmetries(majorana_rep(h, channels(4, DissipatorKind::SBD, 1.0)).x, SigmaZ::Species);
  CHECK(spd.trs.preserved == sbd.trs.preserved);
  CHECK(spd.pah.preserved == sbd.pah.preserved);
  CHECK(sbd.trs.preserved);
}
