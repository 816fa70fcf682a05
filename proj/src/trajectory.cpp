#include "sshtraj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sshtraj/error.hpp"
#include "sshtraj/kernels.hpp"

namespace sshtraj {
namespace {

using cplx = std::complex<double>;

constexpr double kRateClip = 1e-10;
constexpr double kJumpDenominator = 1e-12;
constexpr double kDiagTol = 1e-6;
constexpr double kVacuumTrace = 1e-12;

// <Lambda> without clipping; smooth in G, used at the RK4 stages.
double lambda_raw(const Eigen::MatrixXcd& g, std::span<const JumpChannel> channels) {
  double total = 0.0;
  for (const auto& ch : channels) {
    const auto n = ch.support.size();
    double r = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const cplx c = std::conj(ch.amplitude[a]) * ch.amplitude[b];
        if (ch.kind == ChannelKind::Loss)
          r += (c * g(ch.support[b], ch.support[a])).real();
        else
          r += (c * ((a == b ? 1.0 : 0.0) - g(ch.support[a], ch.support[b]))).real();
      }
    total += r;
  }
  return 0.5 * total;
}

// out = M * S for a column-sparse S
void right_multiply(const kernels::KernelTable& kt, const Eigen::MatrixXcd& m,
                    const SparseColumns& s, Eigen::MatrixXcd& out) {
  kt.spmm(static_cast<int>(m.rows()), m.data(), s.col_ptr.data(), s.rows.data(),
          s.vals.data(), out.data());
}

// out = i(GH - HG) - (KG + GK)/2 + GKG, using GH - HG = E - E^dag with
// E = GH and KG = (GK)^dag.
void drift_rhs(const kernels::KernelTable& kt, const Dynamics& dyn,
               const Eigen::MatrixXcd& g, Eigen::MatrixXcd& f, Eigen::MatrixXcd& t,
               Eigen::MatrixXcd& out) {
  const int n = static_cast<int>(g.rows());
  right_multiply(kt, g, dyn.drift_cols, t);  // iGH - GK/2
  if (dyn.dissipative) {
    right_multiply(kt, g, dyn.k_cols, f);  // GK
    kt.gemm_upper(n, f.data(), g.data(), out.data());
  } else {
    out.setZero();
  }
  kt.herm_add(n, t.data(), out.data());
}

void hermitize(Eigen::MatrixXcd& g) {
  const int n = static_cast<int>(g.rows());
  for (int j = 0; j < n; ++j) {
    g(j, j) = cplx(g(j, j).real(), 0.0);
    for (int i = j + 1; i < n; ++i) {
      const cplx avg = 0.5 * (g(i, j) + std::conj(g(j, i)));
      g(i, j) = avg;
      g(j, i) = std::conj(avg);
    }
  }
}

void check_diagonal(const Eigen::MatrixXcd& g, double time) {
  for (int j = 0; j < g.rows(); ++j) {
    const double d = g(j, j).real();
    if (!std::isfinite(d) || d < -kDiagTol || d > 1.0 + kDiagTol)
      throw NumericalError("integrator left the physical region at t = " +
                           std::to_string(time) + ": G(" + std::to_string(j + 1) +
                           "," + std::to_string(j + 1) + ") = " + std::to_string(d));
  }
}

}  // namespace

SparseColumns SparseColumns::from_dense(const Eigen::MatrixXcd& m) {
  SparseColumns s;
  s.col_ptr.push_back(0);
  for (int j = 0; j < m.cols(); ++j) {
    for (int i = 0; i < m.rows(); ++i)
      if (m(i, j) != cplx(0.0, 0.0)) {
        s.rows.push_back(i);
        s.vals.push_back(m(i, j));
      }
    s.col_ptr.push_back(static_cast<int>(s.rows.size()));
  }
  return s;
}

Dynamics Dynamics::build(const Eigen::MatrixXd& h, std::vector<JumpChannel> channels) {
  const int L = static_cast<int>(h.rows());
  Dynamics d;
  d.h = h;
  d.channels = std::move(channels);
  d.k = Eigen::MatrixXcd::Zero(L, L);
  for (const auto& ch : d.channels) {
    if (ch.support.size() != ch.amplitude.size() || ch.support.empty())
      throw ConfigError("channel " + std::to_string(ch.id) + " is malformed");
    for (std::size_t a = 0; a < ch.support.size(); ++a)
      for (std::size_t b = 0; b < ch.support.size(); ++b) {
        const int sa = ch.support[a];
        const int sb = ch.support[b];
        if (sa < 0 || sa >= L || sb < 0 || sb >= L)
          throw ConfigError("channel support outside the chain");
        if (ch.kind == ChannelKind::Loss)
          d.k(sa, sb) += std::conj(ch.amplitude[a]) * ch.amplitude[b];
        else
          d.k(sa, sb) -= ch.amplitude[a] * std::conj(ch.amplitude[b]);
      }
  }
  d.k_cols = SparseColumns::from_dense(d.k);
  d.drift_cols = SparseColumns::from_dense(cplx(0.0, 1.0) * h.cast<cplx>() - 0.5 * d.k);
  d.dissipative = !d.channels.empty();
  for (std::size_t i = 0; i < d.channels.size(); ++i)
    if (d.channels[i].id != static_cast<int>(i))
      throw ConfigError("channel ids must be 0..M-1 in order");
  return d;
}

Dynamics Dynamics::build(const ModelSpec& spec, const Eigen::MatrixXd& h) {
  if (h.rows() != spec.sites())
    throw ConfigError("evolution Hamiltonian size does not match the model");
  return build(h, build_channels(spec));
}

Rates lambda_expect(const CovarianceState& state,
                    std::span<const JumpChannel> channels) {
  Rates out;
  out.per_channel.reserve(channels.size());
  const auto& g = state.g;
  double total = 0.0;
  for (const auto& ch : channels) {
    double r = 0.0;
    const auto n = ch.support.size();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const cplx c = std::conj(ch.amplitude[a]) * ch.amplitude[b];
        const cplx gv = (ch.kind == ChannelKind::Loss)
                            ? g(ch.support[b], ch.support[a])
                            : (a == b ? 1.0 : 0.0) - g(ch.support[a], ch.support[b]);
        r += (c * gv).real();
      }
    if (std::isnan(r)) throw NumericalError("NaN jump rate");
    if (r < -kRateClip)
      throw NumericalError("negative jump rate " + std::to_string(r) +
                           " on channel " + std::to_string(ch.id));
    r = std::max(r, 0.0);
    out.per_channel.push_back(r);
    total += r;
  }
  out.lambda = 0.5 * total;
  return out;
}

DriftWorkspace::DriftWorkspace(int sites)
    : stage_(sites, sites),
      k1_(sites, sites),
      k2_(sites, sites),
      k3_(sites, sites),
      k4_(sites, sites),
      f_(sites, sites),
      t_(sites, sites) {}

void drift_step(CovarianceState& state, const Dynamics& dyn, double dt,
                DriftWorkspace& ws) {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const auto& kt = kernels::active();
  const int n = state.sites();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  auto& g = state.g;

  const double lam1 = lambda_raw(g, dyn.channels);
  drift_rhs(kt, dyn, g, ws.f_, ws.t_, ws.k1_);

  ws.stage_ = g;
  kt.axpy(nn, 0.5 * dt, ws.k1_.data(), ws.stage_.data());
  const double lam2 = lambda_raw(ws.stage_, dyn.channels);
  drift_rhs(kt, dyn, ws.stage_, ws.f_, ws.t_, ws.k2_);

  ws.stage_ = g;
  kt.axpy(nn, 0.5 * dt, ws.k2_.data(), ws.stage_.data());
  const double lam3 = lambda_raw(ws.stage_, dyn.channels);
  drift_rhs(kt, dyn, ws.stage_, ws.f_, ws.t_, ws.k3_);

  ws.stage_ = g;
  kt.axpy(nn, dt, ws.k3_.data(), ws.stage_.data());
  const double lam4 = lambda_raw(ws.stage_, dyn.channels);
  drift_rhs(kt, dyn, ws.stage_, ws.f_, ws.t_, ws.k4_);

  const double h6 = dt / 6.0;
  kt.axpy(nn, h6, ws.k1_.data(), g.data());
  kt.axpy(nn, 2.0 * h6, ws.k2_.data(), g.data());
  kt.axpy(nn, 2.0 * h6, ws.k3_.data(), g.data());
  kt.axpy(nn, h6, ws.k4_.data(), g.data());
  hermitize(g);

  state.log_norm -= 2.0 * h6 * (lam1 + 2.0 * lam2 + 2.0 * lam3 + lam4);
  state.time += dt;
  check_diagonal(g, state.time);
}

CovarianceState drift_step(const CovarianceState& state, const Dynamics& dyn,
                           double dt) {
  CovarianceState out = state;
  DriftWorkspace ws(state.sites());
  drift_step(out, dyn, dt, ws);
  return out;
}

std::optional<double> sample_jump_time(CovarianceState& state, const Dynamics& dyn,
                                       Rng& rng, double dt, double t_max) {
  const double r = rng.threshold();
  if (dyn.channels.empty()) return std::nullopt;
  DriftWorkspace ws(state.sites());
  const double t0 = state.time;
  const long steps = std::lround((t_max - t0) / dt);
  for (long s = 1; s <= steps; ++s) {
    drift_step(state, dyn, dt, ws);
    state.time = t0 + static_cast<double>(s) * dt;
    if (norm_crossed(state.log_norm, r)) return state.time;
  }
  return std::nullopt;
}

int select_channel(std::span<const double> rates, Rng& rng) {
  double total = 0.0;
  for (double r : rates) total += r;
  if (!(total > 0.0))
    throw NumericalError("jump scheduled but every channel rate is zero");
  const double x = rng.uniform() * total;
  double acc = 0.0;
  int last_nonzero = -1;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] <= 0.0) continue;
    last_nonzero = static_cast<int>(i);
    acc += rates[i];
    if (x < acc) return static_cast<int>(i);
  }
  return last_nonzero;  // x landed on the rounding tail of the sum
}

void apply_jump(CovarianceState& state, const JumpChannel& channel) {
  auto& g = state.g;
  const int n = state.sites();
  const auto m = channel.support.size();
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
  double norm = 0.0;
  if (channel.kind == ChannelKind::Loss) {
    // annihilates the orbital conj(l): u = G conj(l), norm = conj(l)^dag G conj(l)
    for (std::size_t a = 0; a < m; ++a)
      u += std::conj(channel.amplitude[a]) * g.col(channel.support[a]);
    cplx acc = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      acc += channel.amplitude[a] * u(channel.support[a]);
    norm = acc.real();
  } else {
    // creates the orbital l: u = (1 - G) l, norm = l^dag (1 - G) l
    for (std::size_t a = 0; a < m; ++a) {
      u(channel.support[a]) += channel.amplitude[a];
      u -= channel.amplitude[a] * g.col(channel.support[a]);
    }
    cplx acc = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      acc += std::conj(channel.amplitude[a]) * u(channel.support[a]);
    norm = acc.real();
  }
  if (!(norm >= kJumpDenominator))
    throw NumericalError("jump on channel " + std::to_string(channel.id) +
                         " has vanishing probability (" + std::to_string(norm) + ")");
  const double s = (channel.kind == ChannelKind::Loss ? -1.0 : 1.0) / norm;
  kernels::active().rank1(n, s, u.data(), g.data());
  hermitize(g);
  state.log_norm = 0.0;
}

double purity_error(const Eigen::MatrixXcd& g) {
  const int n = static_cast<int>(g.rows());
  Eigen::MatrixXcd sq(n, n);
  kernels::active().gemm(n, g.data(), g.data(), sq.data());
  return (sq - g).cwiseAbs().maxCoeff();
}

TimeGrid TimeGrid::make(double t_final, double dt, double sample_dt) {
  if (!(dt > 0.0) || !(t_final >= 0.0) || !(sample_dt > 0.0))
    throw ConfigError("dt, sample_dt must be positive and t_final non-negative");
  TimeGrid grid;
  grid.dt = dt;
  const double steps = t_final / dt;
  const double every = sample_dt / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6)
    throw ConfigError("t_final must be a multiple of dt");
  if (std::abs(every - std::round(every)) > 1e-6 || std::round(every) < 1)
    throw ConfigError("sample_dt must be a positive multiple of dt");
  grid.steps = std::lround(steps);
  grid.sample_every = std::lround(every);
  return grid;
}

TrajectoryRecord run_trajectory(const Dynamics& dyn, const CovarianceState& init,
                                const DeePartition& partition,
                                const TrajectoryOptions& opts) {
  const TimeGrid grid = TimeGrid::make(opts.t_final, opts.dt, opts.sample_dt);
  const int L = init.sites();
  if (dyn.h.rows() != L) throw ConfigError("initial state and dynamics disagree on L");

  TrajectoryRecord rec;
  rec.seed = opts.seed;
  const std::size_t n_samples = static_cast<std::size_t>(grid.steps / grid.sample_every) + 1;
  rec.times.reserve(n_samples);
  rec.sdee.reserve(n_samples);
  rec.edge_correlator.reserve(n_samples);

  CovarianceState state = init;
  state.time = 0.0;
  state.log_norm = 0.0;
  DriftWorkspace ws(L);
  Rng rng(opts.seed);
  double r = rng.threshold();

  double s0 = 0.0;
  auto sample = [&](double t) {
    const double s = dee(state.g, partition);
    rec.times.push_back(t);
    rec.sdee.push_back(s);
    rec.edge_correlator.push_back(state.g(0, L - 1));
    rec.max_purity_error = std::max(rec.max_purity_error, purity_error(state.g));
    if (opts.keep_covariance) rec.covariances.push_back(state.g);
    return s;
  };
  s0 = sample(0.0);

  // With loss channels only, the empty chain is stationary and has no jumps.
  const bool loss_only =
      std::all_of(dyn.channels.begin(), dyn.channels.end(),
                  [](const JumpChannel& ch) { return ch.kind == ChannelKind::Loss; });
  bool vacuum = false;

  for (long step = 1; step <= grid.steps; ++step) {
    if (!vacuum) drift_step(state, dyn, grid.dt, ws);
    state.time = grid.time(step);
    if (dyn.dissipative && !vacuum && norm_crossed(state.log_norm, r)) {
      const Rates rates = lambda_expect(state, dyn.channels);
      JumpEvent ev;
      ev.time = state.time;
      ev.total_rate = 2.0 * rates.lambda;
      ev.sdee_before = opts.record_jump_dee ? dee(state.g, partition)
                                            : std::numeric_limits<double>::quiet_NaN();
      const int id = select_channel(rates.per_channel, rng);
      apply_jump(state, dyn.channels[id]);
      ev.channel_id = id;
      ev.support = dyn.channels[id].support;
      ev.rate_at_jump = rates.per_channel[id];
      ev.sdee_after = opts.record_jump_dee ? dee(state.g, partition)
                                           : std::numeric_limits<double>::quiet_NaN();
      ev.dsd = ev.sdee_after - ev.sdee_before;
      rec.events.push_back(std::move(ev));
      r = rng.threshold();
      if (loss_only && state.g.trace().real() < kVacuumTrace) {
        state.g.setZero();
        vacuum = true;
      }
    }
    if (step % grid.sample_every == 0) {
      const double s = sample(state.time);
      if (opts.stop_after_deviation && std::abs(s - s0) > *opts.stop_after_deviation) {
        rec.stopped_early = true;
        break;
      }
    }
  }
  return rec;
}

void JumpSchedule::validate(std::size_t n_channels) const {
  double last = 0.0;
  for (const auto& j : jumps) {
    if (!(j.time > last))
      throw ConfigError("schedule times must be positive and strictly increasing");
    if (j.channel_id < 0 || static_cast<std::size_t>(j.channel_id) >= n_channels)
      throw ConfigError("schedule references unknown channel " +
                        std::to_string(j.channel_id));
    last = j.time;
  }
}

std::vector<Snapshot> run_scheduled(const Dynamics& dyn, const CovarianceState& init,
                                    const DeePartition& partition,
                                    const JumpSchedule& schedule, double t_final,
                                    double dt, double sample_dt) {
  schedule.validate(dyn.channels.size());
  const TimeGrid grid = TimeGrid::make(t_final, dt, sample_dt);
  std::vector<long> jump_steps;
  for (const auto& j : schedule.jumps) {
    const double s = j.time / dt;
    if (std::abs(s - std::round(s)) > 1e-6)
      throw ConfigError("scheduled jump time is not on the dt grid");
    jump_steps.push_back(std::lround(s));
  }

  CovarianceState state = init;
  state.time = 0.0;
  state.log_norm = 0.0;
  DriftWorkspace ws(init.sites());
  std::vector<Snapshot> out;
  out.push_back({0.0, state.g, dee(state.g, partition)});
  std::size_t next = 0;
  for (long step = 1; step <= grid.steps; ++step) {
    drift_step(state, dyn, dt, ws);
    state.time = grid.time(step);
    while (next < jump_steps.size() && jump_steps[next] == step) {
      apply_jump(state, dyn.channels[schedule.jumps[next].channel_id]);
      ++next;
    }
    if (step % grid.sample_every == 0)
      out.push_back({state.time, state.g, dee(state.g, partition)});
  }
  return out;
}

}  // namespace sshtraj
