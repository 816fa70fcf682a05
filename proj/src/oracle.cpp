#include "sshtraj/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "sshtraj/error.hpp"

namespace sshtraj::oracle {
namespace {

using cd = std::complex<double>;
using Index = Eigen::Index;

int jw_sign(std::uint32_t n, int j) {
  return (std::popcount(n & ((1u << j) - 1u)) & 1) ? -1 : 1;
}

void check_sites(int sites, int cap, const char* what) {
  if (sites < 1 || sites > cap)
    throw ConfigError(std::string(what) + " supports 1 <= L <= " + std::to_string(cap) +
                      ", got L = " + std::to_string(sites));
}

std::uint32_t reverse_bits(std::uint32_t n, int sites) {
  std::uint32_t r = 0;
  for (int j = 0; j < sites; ++j)
    if (n & (1u << j)) r |= 1u << (sites - 1 - j);
  return r;
}

double entropy_of_density(const Eigen::MatrixXcd& rho) {
  const Eigen::VectorXd p = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(
                                rho, Eigen::EigenvaluesOnly)
                                .eigenvalues();
  double s = 0.0;
  for (Index k = 0; k < p.size(); ++k)
    if (p(k) > 1e-15) s -= p(k) * std::log2(p(k));
  return s;
}

double max_abs_h(const Eigen::MatrixXd& h) {
  return std::max(1.0, h.cwiseAbs().maxCoeff());
}

}  // namespace

Eigen::VectorXcd annihilate(const Eigen::VectorXcd& psi, int sites, int j) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  const std::uint32_t bit = 1u << j;
  for (std::uint32_t n = 0; n < (1u << sites); ++n)
    if (n & bit) out(n ^ bit) += static_cast<double>(jw_sign(n, j)) * psi(n);
  return out;
}

Eigen::VectorXcd create(const Eigen::VectorXcd& psi, int sites, int j) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  const std::uint32_t bit = 1u << j;
  for (std::uint32_t n = 0; n < (1u << sites); ++n)
    if (!(n & bit)) out(n | bit) += static_cast<double>(jw_sign(n, j)) * psi(n);
  return out;
}

Eigen::MatrixXcd annihilation_matrix(int sites, int j) {
  check_sites(sites, kMaxSites, "dense operators");
  const Index dim = Index(1) << sites;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);
  const std::uint32_t bit = 1u << j;
  for (std::uint32_t n = 0; n < dim; ++n)
    if (n & bit) c(n ^ bit, n) = static_cast<double>(jw_sign(n, j));
  return c;
}

Eigen::MatrixXcd many_body_hamiltonian(const Eigen::MatrixXd& h) {
  const int sites = static_cast<int>(h.rows());
  check_sites(sites, kMaxTrajectorySites, "dense Hamiltonian");
  const Index dim = Index(1) << sites;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < sites; ++i)
    for (int j = 0; j < sites; ++j) {
      if (h(i, j) == 0.0) continue;
      // c^dag_i c_j
      for (std::uint32_t n = 0; n < dim; ++n) {
        if (!(n & (1u << j))) continue;
        const std::uint32_t m = n ^ (1u << j);
        if (m & (1u << i)) continue;
        out(m | (1u << i), n) += h(i, j) * jw_sign(n, j) * jw_sign(m, i);
      }
    }
  return out;
}

Eigen::MatrixXcd jump_matrix(const JumpChannel& channel, int sites) {
  const Index dim = Index(1) << sites;
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t k = 0; k < channel.support.size(); ++k) {
    const Eigen::MatrixXcd c = annihilation_matrix(sites, channel.support[k]);
    if (channel.kind == ChannelKind::Loss)
      l += channel.amplitude[k] * c;
    else
      l += channel.amplitude[k] * c.adjoint();
  }
  return l;
}

DenseState dense_ground_state(const Eigen::MatrixXd& h, int filling) {
  const int sites = static_cast<int>(h.rows());
  check_sites(sites, kMaxSites, "dense ground state");
  if (filling < 0 || filling > sites) throw ConfigError("filling out of range");

  std::vector<std::uint32_t> basis;
  for (std::uint32_t n = 0; n < (1u << sites); ++n)
    if (std::popcount(n) == filling) basis.push_back(n);
  std::vector<int> index(std::size_t(1) << sites, -1);
  for (std::size_t k = 0; k < basis.size(); ++k) index[basis[k]] = static_cast<int>(k);

  const Index d = static_cast<Index>(basis.size());
  Eigen::MatrixXd hs = Eigen::MatrixXd::Zero(d, d);
  for (Index col = 0; col < d; ++col) {
    const std::uint32_t n = basis[col];
    for (int i = 0; i < sites; ++i)
      for (int j = 0; j < sites; ++j) {
        if (h(i, j) == 0.0 || !(n & (1u << j))) continue;
        const std::uint32_t m = n ^ (1u << j);
        if (m & (1u << i)) continue;
        hs(index[m | (1u << i)], col) += h(i, j) * jw_sign(n, j) * jw_sign(m, i);
      }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hs);
  const Eigen::VectorXd& e = es.eigenvalues();
  const double tol = 1e-10 * max_abs_h(h) * std::max(1, sites);
  Index deg = 1;
  while (deg < d && e(deg) - e(0) < tol) ++deg;

  DenseState out;
  out.sites = sites;
  out.psi = Eigen::VectorXcd::Zero(Index(1) << sites);
  auto embed = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Index(1) << sites);
    for (Index k = 0; k < d; ++k) psi(basis[k]) = v(k);
    return psi;
  };
  if (deg == 1) {
    out.psi = embed(es.eigenvectors().col(0));
    return out;
  }
  if (deg > 2)
    throw NumericalError("ground space is " + std::to_string(deg) +
                         "-fold degenerate; cannot select the even edge state");

  // reflection within the ground space; the sign of reversing `filling`
  // creation operators is common to the whole sector
  const double rsign = ((filling * (filling - 1) / 2) % 2) ? -1.0 : 1.0;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d, d);
  for (Index k = 0; k < d; ++k) r(index[reverse_bits(basis[k], sites)], k) = rsign;
  const Eigen::MatrixXd v = es.eigenvectors().leftCols(2);
  const Eigen::Matrix2d rr = v.transpose() * r * v;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> rs(0.5 * (rr + rr.transpose()));
  for (int k = 0; k < 2; ++k) {
    DenseState cand{sites, embed(v * rs.eigenvectors().col(k))};
    const double corr = covariance(cand)(0, sites - 1).real();
    if (corr > 1e-12) return cand;
  }
  throw NumericalError("no reflection eigenstate with positive edge correlation");
}

DenseState dense_ground_state(const Eigen::MatrixXd& h) {
  return dense_ground_state(h, static_cast<int>(h.rows()) / 2);
}

Eigen::MatrixXcd covariance(const DenseState& s) {
  std::vector<Eigen::VectorXcd> ci;
  ci.reserve(s.sites);
  for (int i = 0; i < s.sites; ++i) ci.push_back(annihilate(s.psi, s.sites, i));
  Eigen::MatrixXcd g(s.sites, s.sites);
  for (int i = 0; i < s.sites; ++i)
    for (int j = 0; j < s.sites; ++j) g(i, j) = ci[j].dot(ci[i]);  // <c_j psi|c_i psi>
  return g;
}

Eigen::MatrixXcd anomalous(const DenseState& s) {
  Eigen::MatrixXcd f(s.sites, s.sites);
  for (int j = 0; j < s.sites; ++j) {
    const Eigen::VectorXcd cj = annihilate(s.psi, s.sites, j);
    for (int i = 0; i < s.sites; ++i) f(i, j) = s.psi.dot(annihilate(cj, s.sites, i));
  }
  return f;
}

double subset_entropy(const DenseState& s, std::span<const int> subset) {
  const int sites = s.sites;
  if (subset.empty()) return 0.0;
  std::vector<int> order(subset.begin(), subset.end());
  std::vector<char> in(sites, 0);
  for (int j : order) {
    if (j < 0 || j >= sites || in[j]) throw ConfigError("invalid subset");
    in[j] = 1;
  }
  for (int j = 0; j < sites; ++j)
    if (!in[j]) order.push_back(j);
  std::vector<int> pos(sites);
  for (int p = 0; p < sites; ++p) pos[order[p]] = p;

  // reorder modes so the subset sits at the start of the Jordan-Wigner string
  const Index dim = Index(1) << sites;
  Eigen::VectorXcd moved = Eigen::VectorXcd::Zero(dim);
  for (std::uint32_t n = 0; n < dim; ++n) {
    if (s.psi(n) == cd(0.0, 0.0)) continue;
    std::uint32_t m = 0;
    int inversions = 0;
    for (int a = 0; a < sites; ++a) {
      if (!(n & (1u << a))) continue;
      m |= 1u << pos[a];
      for (int b = 0; b < a; ++b)
        if ((n & (1u << b)) && pos[b] > pos[a]) ++inversions;
    }
    moved(m) = (inversions & 1) ? -s.psi(n) : s.psi(n);
  }
  const Index da = Index(1) << subset.size();
  const Eigen::Map<const Eigen::MatrixXcd> mat(moved.data(), da, dim / da);
  const Eigen::MatrixXcd rho = mat * mat.adjoint();
  return entropy_of_density(rho / rho.trace().real());
}

DeeTerms dee_dense(const DenseState& s, const DeePartition& p) {
  DeeTerms t;
  t.s_a = subset_entropy(s, p.a());
  t.s_b = subset_entropy(s, p.b());
  t.s_union = subset_entropy(s, p.a_union_b());
  t.s_intersect = subset_entropy(s, p.a_intersect_b());
  return t;
}

namespace {

struct DenseDynamics {
  Eigen::MatrixXcd h;
  Eigen::MatrixXcd propagator;  // exp(-i H_eff dt)
  std::vector<Eigen::MatrixXcd> jumps;
};

DenseDynamics prepare(const Eigen::MatrixXd& h, std::span<const JumpChannel> channels,
                      double dt) {
  const int sites = static_cast<int>(h.rows());
  check_sites(sites, kMaxTrajectorySites, "dense trajectory");
  DenseDynamics d;
  d.h = many_body_hamiltonian(h);
  Eigen::MatrixXcd heff = d.h;
  for (const auto& ch : channels) {
    d.jumps.push_back(jump_matrix(ch, sites));
    heff -= cd(0.0, 0.5) * d.jumps.back().adjoint() * d.jumps.back();
  }
  d.propagator = (cd(0.0, -dt) * heff).exp();
  return d;
}

DenseSnapshot snapshot(const DenseDynamics& d, const DenseState& s, const DeePartition& p,
                       double t) {
  DenseSnapshot out;
  out.time = t;
  out.g = covariance(s);
  out.sdee = dee_dense(s, p).value();
  out.anomalous_max = anomalous(s).cwiseAbs().maxCoeff();
  out.energy = s.psi.dot(d.h * s.psi).real();
  return out;
}

void apply_dense_jump(const DenseDynamics& d, DenseState& s, int id) {
  Eigen::VectorXcd next = d.jumps[id] * s.psi;
  const double nrm = next.norm();
  if (!(nrm * nrm >= 1e-12))
    throw NumericalError("jump on channel " + std::to_string(id) +
                         " has zero amplitude on the state");
  s.psi = next / nrm;
}

}  // namespace

DenseTrajectory dense_trajectory(const Eigen::MatrixXd& h,
                                 std::span<const JumpChannel> channels,
                                 const DenseState& init, const DeePartition& partition,
                                 double t_final, double dt, double sample_dt,
                                 std::uint64_t seed) {
  const TimeGrid grid = TimeGrid::make(t_final, dt, sample_dt);
  const DenseDynamics d = prepare(h, channels, dt);
  DenseState s = init;
  s.psi.normalize();
  DenseTrajectory out;
  out.snapshots.push_back(snapshot(d, s, partition, 0.0));
  Rng rng(seed);
  double log_r = std::log(rng.threshold());
  double log_norm = 0.0;
  for (long step = 1; step <= grid.steps; ++step) {
    s.psi = d.propagator * s.psi;
    const double nrm = s.psi.norm();
    log_norm += 2.0 * std::log(nrm);
    s.psi /= nrm;
    if (!channels.empty() && log_norm <= log_r) {
      std::vector<double> rates;
      for (const auto& l : d.jumps) rates.push_back((l * s.psi).squaredNorm());
      const int id = select_channel(rates, rng);
      apply_dense_jump(d, s, id);
      out.jumps.push_back({grid.time(step), id});
      log_norm = 0.0;
      log_r = std::log(rng.threshold());
    }
    if (step % grid.sample_every == 0)
      out.snapshots.push_back(snapshot(d, s, partition, grid.time(step)));
  }
  return out;
}

DenseTrajectory dense_trajectory(const Eigen::MatrixXd& h,
                                 std::span<const JumpChannel> channels,
                                 const DenseState& init, const DeePartition& partition,
                                 const JumpSchedule& schedule, double t_final, double dt,
                                 double sample_dt) {
  schedule.validate(channels.size());
  const TimeGrid grid = TimeGrid::make(t_final, dt, sample_dt);
  const DenseDynamics d = prepare(h, channels, dt);
  DenseState s = init;
  s.psi.normalize();
  DenseTrajectory out;
  out.snapshots.push_back(snapshot(d, s, partition, 0.0));
  std::size_t next = 0;
  for (long step = 1; step <= grid.steps; ++step) {
    s.psi = d.propagator * s.psi;
    s.psi.normalize();
    while (next < schedule.jumps.size() &&
           std::lround(schedule.jumps[next].time / dt) == step) {
      apply_dense_jump(d, s, schedule.jumps[next].channel_id);
      out.jumps.push_back(schedule.jumps[next]);
      ++next;
    }
    if (step % grid.sample_every == 0)
      out.snapshots.push_back(snapshot(d, s, partition, grid.time(step)));
  }
  return out;
}

std::vector<LindbladSample> dense_lindblad(const Eigen::MatrixXd& h,
                                           std::span<const JumpChannel> channels,
                                           const DenseState& init, double t_final,
                                           double dt, double sample_dt) {
  const int sites = static_cast<int>(h.rows());
  check_sites(sites, kMaxLindbladSites, "dense Lindblad");
  const TimeGrid grid = TimeGrid::make(t_final, dt, sample_dt);
  const Eigen::MatrixXcd hm = many_body_hamiltonian(h);
  std::vector<Eigen::MatrixXcd> ls;
  Eigen::MatrixXcd heff = hm;
  for (const auto& ch : channels) {
    ls.push_back(jump_matrix(ch, sites));
    heff -= cd(0.0, 0.5) * ls.back().adjoint() * ls.back();
  }
  std::vector<Eigen::MatrixXcd> c;
  for (int j = 0; j < sites; ++j) c.push_back(annihilation_matrix(sites, j));

  auto rhs = [&](const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd a = heff * rho;
    Eigen::MatrixXcd out = cd(0.0, -1.0) * a + cd(0.0, 1.0) * a.adjoint();
    for (const auto& l : ls) out += l * rho * l.adjoint();
    return out;
  };
  auto sample = [&](const Eigen::MatrixXcd& rho, double t) {
    LindbladSample smp;
    smp.time = t;
    smp.trace = rho.trace().real();
    if (std::abs(smp.trace - 1.0) > 1e-8)
      throw NumericalError("Lindblad trace drifted to " + std::to_string(smp.trace));
    smp.g.resize(sites, sites);
    for (int i = 0; i < sites; ++i) {
      const Eigen::MatrixXcd crho = c[i] * rho;
      for (int j = 0; j < sites; ++j)
        smp.g(i, j) = (crho * c[j].adjoint()).trace();  // Tr(rho c^dag_j c_i)
    }
    return smp;
  };

  const Eigen::VectorXcd psi = init.psi.normalized();
  Eigen::MatrixXcd rho = psi * psi.adjoint();
  std::vector<LindbladSample> out{sample(rho, 0.0)};
  for (long step = 1; step <= grid.steps; ++step) {
    const Eigen::MatrixXcd k1 = rhs(rho);
    const Eigen::MatrixXcd k2 = rhs(rho + 0.5 * dt * k1);
    const Eigen::MatrixXcd k3 = rhs(rho + 0.5 * dt * k2);
    const Eigen::MatrixXcd k4 = rhs(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    if (step % grid.sample_every == 0) out.push_back(sample(rho, grid.time(step)));
  }
  return out;
}

}  // namespace sshtraj::oracle
