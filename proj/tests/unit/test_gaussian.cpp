#include <doctest.h>

#include <cmath>
#include <random>

#include "sshtraj/error.hpp"
#include "sshtraj/gaussian.hpp"
#include "sshtraj/model.hpp"

using namespace sshtraj;
using cd = std::complex<double>;

namespace {

Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = {nd(rng), nd(rng)};
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

Eigen::MatrixXcd random_slater(int l, int n, std::mt19937_64& rng) {
  const Eigen::MatrixXcd u = random_unitary(l, rng);
  return u.leftCols(n) * u.leftCols(n).adjoint();
}

}  // namespace

TEST_CASE("dimerized topological ground state") {
  const CovarianceState s = ground_state(build_hamiltonian(4, 0.0, 1.0));
  const auto& g = s.g;
  const int L = 8;
  CHECK(std::abs(g(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(g(L - 1, L - 1) - 0.5) < 1e-14);
  CHECK(std::abs(g(0, L - 1) - 0.5) < 1e-14);
  CHECK(std::abs(g(L - 1, 0) - 0.5) < 1e-14);
  for (int j = 1; j < L - 1; j += 2) {
    CHECK(std::abs(g(j, j) - 0.5) < 1e-14);
    CHECK(std::abs(g(j, j + 1) - 0.5) < 1e-14);
    CHECK(std::abs(g(j + 1, j) - 0.5) < 1e-14);
  }
  CHECK((g * g - g).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(g.trace().real() == doctest::Approx(4.0));
}

TEST_CASE("dimerized trivial ground state") {
  const auto g = ground_state(build_hamiltonian(4, 1.0, 0.0)).g;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const double expect = (i / 2 == j / 2) ? 0.5 : 0.0;
      CHECK(std::abs(g(i, j) - expect) < 1e-14);
    }
}

TEST_CASE("near-degenerate edge pair at L=32") {
  const Eigen::MatrixXd h = build_hamiltonian(16, 2.0, 20.0);
  const auto modes = parity_resolved_modes(h);
  CHECK(std::abs(modes[15].energy - modes[16].energy) < 1e-12 * 20.0);
  CHECK(modes[15].parity == +1);
  const auto g = ground_state(h).g;
  CHECK(std::abs(std::abs(g(0, 31)) - 0.5) < 1e-2);
  CHECK(g(0, 31).real() > 0.0);
}

TEST_CASE("ground state errors") {
  Eigen::MatrixXd h = build_hamiltonian(3, 0.5, 1.0);
  CHECK_THROWS_AS(ground_state(h, 7), ConfigError);
  CHECK_THROWS_AS(ground_state(h, -1), ConfigError);
  h(0, 1) = h(1, 0) = -0.6;  // breaks reflection symmetry
  CHECK_THROWS_AS(ground_state(h), ConfigError);
  h = build_hamiltonian(3, 0.5, 1.0);
  h(0, 2) = 0.1;
  CHECK_THROWS_AS(ground_state(h), ConfigError);
}

TEST_CASE("reduced covariance") {
  const auto g = ground_state(build_hamiltonian(4, 0.0, 1.0)).g;
  std::vector<int> all(8);
  for (int j = 0; j < 8; ++j) all[j] = j;
  CHECK(reduced(g, all) == g);
  const std::vector<int> one{0};
  CHECK(std::abs(reduced(g, one)(0, 0) - 0.5) < 1e-14);
  const std::vector<int> pair{1, 2};
  CHECK((reduced(g, pair) - Eigen::MatrixXcd::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(reduced(g, std::vector<int>{}).size() == 0);
  CHECK(entropy_bits(reduced(g, std::vector<int>{})) == 0.0);
}

TEST_CASE("entropy from spectra") {
  const double half[] = {0.5};
  CHECK(entropy_bits_from_spectrum(half) == doctest::Approx(1.0));
  const double product[] = {0.0, 1.0, 1.0, 0.0};
  CHECK(entropy_bits_from_spectrum(product) == 0.0);
  const double f[] = {0.75, 0.0, 1.0};
  CHECK(entropy_bits_from_spectrum(f) == doctest::Approx(2.0 - 0.75 * std::log2(3.0)).epsilon(1e-14));
  const double bad[] = {1.1};
  CHECK_THROWS_AS(entropy_bits_from_spectrum(bad), NumericalError);
  const double tiny[] = {-1e-9, 1.0 + 1e-9};
  CHECK(entropy_bits_from_spectrum(tiny) == 0.0);
}

TEST_CASE("entropy is unitarily invariant") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXcd g = random_slater(10, 5, rng);
    const std::vector<int> sub{0, 1, 2, 3};
    const Eigen::MatrixXcd r = reduced(g, sub);
    const Eigen::MatrixXcd u = random_unitary(4, rng);
    CHECK(entropy_bits(u * r * u.adjoint()) == doctest::Approx(entropy_bits(r)).epsilon(1e-10));
  }
}

TEST_CASE("complementary entropies agree for pure states") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int L = 12;
    const Eigen::MatrixXcd g = random_slater(L, 1 + trial % 11, rng);
    std::vector<int> x, xbar;
    for (int j = 0; j < L; ++j) ((rng() & 1) ? x : xbar).push_back(j);
    CHECK(std::abs(entropy_bits(reduced(g, x)) - entropy_bits(reduced(g, xbar))) < 1e-8);
  }
}

TEST_CASE("default partition") {
  const DeePartition p = default_partition(8);
  CHECK(p.a() == std::vector<int>{0, 1, 2, 3});
  CHECK(p.b() == std::vector<int>{2, 3, 6, 7});
  CHECK(p.a_union_b() == std::vector<int>{0, 1, 2, 3, 6, 7});
  CHECK(p.a_intersect_b() == std::vector<int>{2, 3});
  CHECK_THROWS_AS(default_partition(6), ConfigError);
  CHECK_THROWS_AS(DeePartition(8, {0, 3}, {2, 4}, {5, 7}), ConfigError);   // B components touch
  CHECK_THROWS_AS(DeePartition(8, {0, 3}, {2, 3}, {6, 8}), ConfigError);   // outside chain
  CHECK_THROWS_AS(DeePartition(8, {3, 0}, {2, 3}, {6, 7}), ConfigError);   // empty
  for (int L : {8, 16, 32}) {
    const DeePartition q = default_partition(L);
    auto has = [](const std::vector<int>& v, int s) { return std::find(v.begin(), v.end(), s) != v.end(); };
    CHECK(has(q.a(), 0));
    CHECK(!has(q.a(), L - 1));
    CHECK(has(q.b(), L - 1));
    CHECK(!has(q.b(), 0));
    CHECK(!has(q.a_intersect_b(), 0));
    CHECK(!has(q.a_intersect_b(), L - 1));
  }
}

TEST_CASE("DEE plateaus") {
  for (int n : {2, 4, 8, 16}) {
    const int L = 2 * n;
    if (L % 4) continue;
    const DeePartition p = default_partition(L);
    CHECK(std::abs(dee(ground_state(build_hamiltonian(n, 0.0, 1.0)), p) - 2.0) < 1e-9);
    CHECK(std::abs(dee(ground_state(build_hamiltonian(n, 1.0, 0.0)), p)) < 1e-9);
  }
  for (int L : {16, 32}) {
    const DeePartition p = default_partition(L);
    CHECK(std::abs(dee(ground_state(build_hamiltonian(L / 2, 2.0, 20.0)), p) - 2.0) < 1e-3);
    CHECK(std::abs(dee(ground_state(build_hamiltonian(L / 2, 200.0, 20.0)), p)) < 1e-3);
  }
}

TEST_CASE("DEE of a product over the partition boundaries vanishes") {
  // occupy single sites: a product state
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(8, 8);
  g(0, 0) = g(3, 3) = g(6, 6) = 1.0;
  CHECK(dee(g, default_partition(8)) == 0.0);
}
