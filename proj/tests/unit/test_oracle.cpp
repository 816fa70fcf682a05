#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "sshtraj/error.hpp"
#include "sshtraj/oracle.hpp"

using namespace sshtraj;
using cd = std::complex<double>;

namespace {

ModelSpec spec(int n, double v, double w, DissipatorKind k = DissipatorKind::SPD, double gamma = 1.0) {
  ModelSpec s;
  s.n_cells = n;
  s.v = v;
  s.w = w;
  s.kind = k;
  s.gamma = gamma;
  return s;
}

}  // namespace

TEST_CASE("fermion operators anticommute") {
  const int l = 4;
  std::vector<Eigen::MatrixXcd> c;
  for (int j = 0; j < l; ++j) c.push_back(oracle::annihilation_matrix(l, j));
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(16, 16);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) {
      CHECK((c[i] * c[j] + c[j] * c[i]).isZero());
      const Eigen::MatrixXcd ac = c[i] * c[j].adjoint() + c[j].adjoint() * c[i];
      CHECK((ac - (i == j ? id : Eigen::MatrixXcd::Zero(16, 16))).isZero());
    }
}

TEST_CASE("dimerized L=4 ground state") {
  const auto gs = oracle::dense_ground_state(build_hamiltonian(2, 0.0, 1.0));
  Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(16);
  vac(0) = 1.0;
  const Eigen::VectorXcd inner = oracle::create(vac, 4, 1) + oracle::create(vac, 4, 2);
  const Eigen::VectorXcd expect = 0.5 * (oracle::create(inner, 4, 0) + oracle::create(inner, 4, 3));
  CHECK(std::abs(std::abs(expect.dot(gs.psi)) - 1.0) < 1e-12);
}

TEST_CASE("dense and Gaussian ground states agree") {
  for (int n : {2, 3, 4}) {
    for (double v : {0.0, 0.1, 0.5, 1.5}) {
      const Eigen::MatrixXd h = build_hamiltonian(n, v, 1.0);
      const auto dgs = oracle::dense_ground_state(h);
      CHECK((oracle::covariance(dgs) - ground_state(h).g).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(oracle::anomalous(dgs).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  const auto triv = oracle::covariance(oracle::dense_ground_state(build_hamiltonian(3, 1.0, 0.0)));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) CHECK(std::abs(triv(i, j) - ((i / 2 == j / 2) ? 0.5 : 0.0)) < 1e-12);
}

TEST_CASE("dense entropies equal covariance entropies") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd h = build_hamiltonian(3, 0.6, 1.0);
  const auto dgs = oracle::dense_ground_state(h);
  // a generic state: evolve the ground state under a different H for a while
  oracle::DenseState s = dgs;
  const Eigen::MatrixXcd u =
      (cd(0.0, -0.7) * oracle::many_body_hamiltonian(build_hamiltonian(3, 1.0, 0.3))).exp();
  s.psi = u * s.psi;
  const Eigen::MatrixXcd g = oracle::covariance(s);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> sub;
    for (int j = 0; j < 6; ++j)
      if (rng() & 1) sub.push_back(j);
    CHECK(std::abs(oracle::subset_entropy(s, sub) - entropy_bits(reduced(g, sub))) < 1e-8);
  }
}

TEST_CASE("closed dense evolution conserves energy") {
  const Eigen::MatrixXd h = build_hamiltonian(3, 0.5, 1.0);
  const auto init = oracle::dense_ground_state(build_hamiltonian(3, 1.0, 0.5));
  const auto tr = oracle::dense_trajectory(h, {}, init, DeePartition(6, {0, 2}, {1, 1}, {4, 5}), 2.0, 1e-2,
                                           1e-1, 1);
  for (const auto& s : tr.snapshots) CHECK(std::abs(s.energy - tr.snapshots[0].energy) < 1e-10);
  CHECK(tr.jumps.empty());
}

TEST_CASE("scripted edge loss in the dense engine") {
  const Eigen::MatrixXd h = build_hamiltonian(2, 0.0, 1.0);
  const auto ch = build_channels(spec(2, 0.0, 1.0));
  const JumpSchedule sch{{{0.1, 0}}};
  const auto tr = oracle::dense_trajectory(h, ch, oracle::dense_ground_state(h), default_partition(4), sch, 0.2,
                                           1e-3, 1e-1);
  REQUIRE(tr.snapshots.size() == 3);
  CHECK(std::abs(tr.snapshots[0].sdee - 2.0) < 1e-9);
  CHECK(std::abs(tr.snapshots[1].sdee) < 1e-9);
}

TEST_CASE("seeded dense trajectories stay number conserving") {
  const Eigen::MatrixXd h = build_hamiltonian(2, 2.0, 20.0);
  const auto ch = build_channels(spec(2, 2.0, 20.0));
  const auto tr = oracle::dense_trajectory(h, ch, oracle::dense_ground_state(h), default_partition(4), 3.0, 1e-3,
                                           1e-2, 8);
  CHECK(!tr.jumps.empty());
  for (const auto& s : tr.snapshots) CHECK(s.anomalous_max < 1e-10);
}

TEST_CASE("scripted schedules agree with the Gaussian engine") {
  std::mt19937_64 rng(12);
  int compared = 0;
  for (int n : {2, 3}) {
    for (auto kind : {DissipatorKind::SPD, DissipatorKind::SBD}) {
      const Eigen::MatrixXd h = build_hamiltonian(n, 2.0, 20.0);
      const Dynamics dyn = Dynamics::build(spec(n, 2.0, 20.0, kind), h);
      const int l = 2 * n;
      const DeePartition part = l % 4 == 0 ? default_partition(l) : DeePartition(l, {0, 2}, {1, 1}, {4, 5});
      // random schedule that never asks for an impossible jump: SPD
      // alternates loss and gain, SBD removes at most two particles
      JumpSchedule sch;
      double t = 0.0;
      const int n_jumps = kind == DissipatorKind::SPD ? 4 : 2;
      for (int k = 0; k < n_jumps; ++k) {
        t += 0.1 + 0.001 * static_cast<double>(rng() % 300);
        int id = static_cast<int>(rng() % dyn.channels.size());
        if (kind == DissipatorKind::SPD) id = 2 * (id / 2) + (k % 2);
        sch.jumps.push_back({std::round(t * 1000) / 1000, id});
      }
      std::vector<Snapshot> gauss;
      oracle::DenseTrajectory dense;
      try {
        gauss = run_scheduled(dyn, ground_state(h), part, sch, 2.0, 1e-3, 1e-2);
        dense = oracle::dense_trajectory(h, dyn.channels, oracle::dense_ground_state(h), part, sch, 2.0, 1e-3,
                                         1e-2);
      } catch (const NumericalError& e) {
        FAIL(std::string(e.what()));
      }
      REQUIRE(gauss.size() == dense.snapshots.size());
      for (std::size_t k = 0; k < gauss.size(); ++k) {
        CHECK((gauss[k].g - dense.snapshots[k].g).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK(std::abs(gauss[k].sdee - dense.snapshots[k].sdee) <= 1e-5);
      }
      ++compared;
    }
  }
  CHECK(compared >= 2);
}

TEST_CASE("zero-probability scheduled jump") {
  const Eigen::MatrixXd h = build_hamiltonian(2, 0.0, 1.0);
  const auto ch = build_channels(spec(2, 0.0, 1.0));
  const JumpSchedule sch{{{0.01, 0}, {0.02, 0}}};
  CHECK_THROWS_AS(oracle::dense_trajectory(h, ch, oracle::dense_ground_state(h), default_partition(4), sch, 0.1,
                                           1e-3, 1e-2),
                  NumericalError);
}

TEST_CASE("Lindblad evolution") {
  const Eigen::MatrixXd h = build_hamiltonian(2, 0.5, 1.0);
  const auto init = oracle::dense_ground_state(h);
  SUBCASE("closed system matches the unitary evolution") {
    const Eigen::MatrixXd h2 = build_hamiltonian(2, 1.0, 0.3);
    const auto lb = oracle::dense_lindblad(h2, {}, init, 1.0, 1e-3, 0.5);
    const auto tr = oracle::dense_trajectory(h2, {}, init, default_partition(4), 1.0, 1e-3, 0.5, 1);
    for (std::size_t k = 0; k < lb.size(); ++k)
      CHECK((lb[k].g - tr.snapshots[k].g).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("SBD empties the chain") {
    const auto ch = build_channels(spec(2, 0.5, 1.0, DissipatorKind::SBD));
    const auto lb = oracle::dense_lindblad(h, ch, init, 20.0, 2e-3, 0.1);
    double last = lb[0].g.trace().real();
    for (const auto& s : lb) {
      CHECK(s.g.trace().real() <= last + 1e-12);
      last = s.g.trace().real();
      CHECK(std::abs(s.trace - 1.0) < 1e-8);
    }
    CHECK(last < 0.05);
  }
}

TEST_CASE("size caps") {
  CHECK_THROWS_AS(oracle::dense_lindblad(build_hamiltonian(4, 1, 1), {}, oracle::dense_ground_state(build_hamiltonian(4, 1, 1)),
                                         0.1, 1e-2, 1e-2),
                  ConfigError);
  CHECK_THROWS_AS(oracle::dense_ground_state(build_hamiltonian(7, 1, 1)), ConfigError);
}
