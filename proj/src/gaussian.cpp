#include "sshtraj/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sshtraj/error.hpp"

namespace sshtraj {
namespace {

constexpr double kDegeneracyRel = 1e-12;
constexpr double kCommuteTol = 1e-12;
constexpr double kSpectrumTol = 1e-6;
constexpr double kClamp = 1e-12;

// Columns are the even (symmetric) or odd (antisymmetric) combinations
// (e_k +- e_{L-1-k}) / sqrt(2), k < L/2. For odd L the middle site joins the
// even sector.
Eigen::MatrixXd reversal_basis(int L, int parity) {
  const int half = L / 2;
  const bool middle = (L % 2 == 1) && parity > 0;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(L, half + (middle ? 1 : 0));
  const double r = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < half; ++k) {
    v(k, k) = r;
    v(L - 1 - k, k) = parity > 0 ? r : -r;
  }
  if (middle) v(half, half) = 1.0;
  return v;
}

}  // namespace

std::vector<ParityMode> parity_resolved_modes(const Eigen::MatrixXd& h) {
  const int L = static_cast<int>(h.rows());
  if (L == 0 || h.cols() != L) throw ConfigError("H must be square and non-empty");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > kCommuteTol * scale)
    throw ConfigError("H is not symmetric");
  const Eigen::MatrixXd hp = h.colwise().reverse();  // P H
  const Eigen::MatrixXd ph = h.rowwise().reverse();  // H P
  if ((hp - ph).cwiseAbs().maxCoeff() > kCommuteTol * scale)
    throw ConfigError("H does not commute with the site reversal");

  std::vector<ParityMode> modes;
  modes.reserve(L);
  int zero_even = -1;
  int zero_odd = -1;
  for (int parity : {+1, -1}) {
    const Eigen::MatrixXd v = reversal_basis(L, parity);
    if (v.cols() == 0) continue;
    const Eigen::MatrixXd block = v.transpose() * h * v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    int best = -1;
    for (int k = 0; k < v.cols(); ++k) {
      ParityMode m;
      m.energy = es.eigenvalues()(k);
      m.parity = parity;
      m.vector = v * es.eigenvectors().col(k);
      modes.push_back(std::move(m));
      const int idx = static_cast<int>(modes.size()) - 1;
      if (best < 0 || std::abs(modes[idx].energy) < std::abs(modes[best].energy))
        best = idx;
    }
    (parity > 0 ? zero_even : zero_odd) = best;
  }

  // sort keys; a degenerate mid-gap pair shares its key and the even mode
  // goes first
  std::vector<double> key(modes.size());
  for (std::size_t k = 0; k < modes.size(); ++k) key[k] = modes[k].energy;
  const double w_scale = h.cwiseAbs().maxCoeff();
  if (zero_even >= 0 && zero_odd >= 0 &&
      std::abs(modes[zero_even].energy - modes[zero_odd].energy) <
          kDegeneracyRel * w_scale) {
    const double mid = 0.5 * (modes[zero_even].energy + modes[zero_odd].energy);
    key[zero_even] = mid;
    key[zero_odd] = mid;
  }
  std::vector<int> order(modes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (key[x] != key[y]) return key[x] < key[y];
    return modes[x].parity > modes[y].parity;
  });
  std::vector<ParityMode> sorted;
  sorted.reserve(modes.size());
  for (int k : order) sorted.push_back(std::move(modes[k]));
  return sorted;
}

CovarianceState ground_state(const Eigen::MatrixXd& h, int filling) {
  const int L = static_cast<int>(h.rows());
  if (filling < 0 || filling > L)
    throw ConfigError("filling " + std::to_string(filling) + " outside [0, " +
                      std::to_string(L) + "]");
  const auto modes = parity_resolved_modes(h);
  CovarianceState s;
  s.g = Eigen::MatrixXcd::Zero(L, L);
  for (int k = 0; k < filling; ++k) {
    const Eigen::VectorXd& phi = modes[k].vector;
    s.g.real() += phi * phi.transpose();
  }
  return s;
}

CovarianceState ground_state(const Eigen::MatrixXd& h) {
  return ground_state(h, static_cast<int>(h.rows()) / 2);
}

Eigen::MatrixXcd reduced(const Eigen::MatrixXcd& g, std::span<const int> subset) {
  const int n = static_cast<int>(subset.size());
  Eigen::MatrixXcd out(n, n);
  for (int j = 0; j < n; ++j) {
    if (subset[j] < 0 || subset[j] >= g.rows())
      throw ConfigError("subset site " + std::to_string(subset[j]) +
                        " out of range");
    for (int i = 0; i < n; ++i) out(i, j) = g(subset[i], subset[j]);
  }
  return out;
}

double entropy_bits_from_spectrum(std::span<const double> occupations) {
  double s = 0.0;
  for (double z : occupations) {
    if (!(z >= -kSpectrumTol && z <= 1.0 + kSpectrumTol))
      throw NumericalError("covariance eigenvalue " + std::to_string(z) +
                           " outside [0, 1]");
    if (z <= kClamp || z >= 1.0 - kClamp) continue;
    s -= z * std::log2(z) + (1.0 - z) * std::log2(1.0 - z);
  }
  return s;
}

double entropy_bits(const Eigen::MatrixXcd& g_reduced) {
  if (g_reduced.rows() == 0) return 0.0;
  if (!g_reduced.allFinite()) throw NumericalError("non-finite covariance entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g_reduced,
                                                     Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigensolver failed on reduced covariance");
  const Eigen::VectorXd& ev = es.eigenvalues();
  return entropy_bits_from_spectrum(std::span<const double>(ev.data(), ev.size()));
}

DeePartition::DeePartition(int sites, Interval a, Interval b_left,
                           Interval b_right)
    : sites_(sites), ia_(a), ib0_(b_left), ib1_(b_right) {
  auto check = [&](Interval iv, const char* name) {
    if (iv.first > iv.last || iv.first < 0 || iv.last >= sites)
      throw ConfigError(std::string("partition interval ") + name +
                        " is empty or out of range");
  };
  check(ia_, "A");
  check(ib0_, "B[0]");
  check(ib1_, "B[1]");
  if (ib0_.first > ib1_.first) std::swap(ib0_, ib1_);
  if (ib0_.last + 1 >= ib1_.first)
    throw ConfigError("the two components of B must be disjoint and separated");

  std::vector<char> in_a(sites, 0), in_b(sites, 0);
  for (int j = ia_.first; j <= ia_.last; ++j) in_a[j] = 1;
  for (Interval iv : {ib0_, ib1_})
    for (int j = iv.first; j <= iv.last; ++j) in_b[j] = 1;
  for (int j = 0; j < sites; ++j) {
    if (in_a[j]) a_.push_back(j);
    if (in_b[j]) b_.push_back(j);
    if (in_a[j] || in_b[j]) union_.push_back(j);
    if (in_a[j] && in_b[j]) intersect_.push_back(j);
  }
}

DeePartition default_partition(int sites) {
  if (sites < 4 || sites % 4 != 0)
    throw ConfigError("default partition needs L divisible by 4, got L = " +
                      std::to_string(sites));
  const int q = sites / 4;
  return DeePartition(sites, {0, 2 * q - 1}, {q, 2 * q - 1}, {3 * q, sites - 1});
}

DeeTerms dee_terms(const Eigen::MatrixXcd& g, const DeePartition& p) {
  if (p.sites() != g.rows())
    throw ConfigError("partition built for L = " + std::to_string(p.sites()) +
                      " applied to L = " + std::to_string(g.rows()));
  DeeTerms t;
  t.s_a = entropy_bits(reduced(g, p.a()));
  t.s_b = entropy_bits(reduced(g, p.b()));
  t.s_union = entropy_bits(reduced(g, p.a_union_b()));
  t.s_intersect = entropy_bits(reduced(g, p.a_intersect_b()));
  return t;
}

}  // namespace sshtraj
