#include "sshtraj/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "sshtraj/error.hpp"

namespace sshtraj {
namespace {

// Welford accumulator; fed in trajectory order so the result is independent
// of scheduling.
struct RunningStats {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stderr_() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

}  // namespace

std::optional<double> first_deviation_time(std::span<const double> times,
                                           std::span<const double> series,
                                           double threshold) {
  if (series.empty()) return std::nullopt;
  const double s0 = series[0];
  for (std::size_t k = 0; k < series.size() && k < times.size(); ++k)
    if (std::abs(series[k] - s0) > threshold) return times[k];
  return std::nullopt;
}

TcEstimate summarize_tc(std::span<const std::optional<double>> per_traj,
                        double t_final) {
  RunningStats st;
  TcEstimate out;
  for (const auto& t : per_traj) {
    if (t)
      st.push(*t);
    else
      ++out.censored;
  }
  out.used = static_cast<int>(st.n);
  out.mean = st.n > 0 ? st.mean : t_final;
  out.stderr_ = st.stderr_();
  return out;
}

int Histogram::bin_of(double x) const {
  if (edges.size() < 2 || x < edges.front() || x >= edges.back()) return -1;
  const double width = (edges.back() - edges.front()) / static_cast<double>(counts.size());
  int b = static_cast<int>((x - edges.front()) / width);
  return std::clamp(b, 0, static_cast<int>(counts.size()) - 1);
}

Histogram histogram_dsd(std::span<const TaggedEvent> events, double t0, double tf,
                        std::optional<int> site, const HistogramSpec& spec) {
  if (spec.bins < 1 || !(spec.hi > spec.lo))
    throw ConfigError("histogram needs bins >= 1 and hi > lo");
  Histogram h;
  h.counts.assign(spec.bins, 0);
  h.density.assign(spec.bins, 0.0);
  const double width = (spec.hi - spec.lo) / spec.bins;
  for (int b = 0; b <= spec.bins; ++b) h.edges.push_back(spec.lo + b * width);
  long binned = 0;
  for (const auto& te : events) {
    const auto& e = te.event;
    if (e.time < t0 || e.time > tf || std::isnan(e.dsd)) continue;
    if (site && std::find(e.support.begin(), e.support.end(), *site) == e.support.end())
      continue;
    ++h.n_events;
    const int b = h.bin_of(e.dsd);
    if (b < 0) {
      ++h.n_outside;
      continue;
    }
    ++h.counts[b];
    ++binned;
  }
  h.empty = binned == 0;
  if (!h.empty)
    for (int b = 0; b < spec.bins; ++b)
      h.density[b] = static_cast<double>(h.counts[b]) / (static_cast<double>(binned) * width);
  return h;
}

std::vector<int> significant_modes(const Histogram& h, double z) {
  const auto& c = h.counts;
  const int n = static_cast<int>(c.size());
  if (n == 0) return {};
  const int top = static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
  if (c[top] == 0) return {};
  std::vector<int> modes{top};
  for (int k = 0; k < n; ++k) {
    if (k == top) continue;
    const long left = k > 0 ? c[k - 1] : 0;
    const long right = k + 1 < n ? c[k + 1] : 0;
    if (c[k] < left || c[k] <= right) continue;
    long dip = c[k];
    for (int q = std::min(k, top); q <= std::max(k, top); ++q) dip = std::min(dip, c[q]);
    const double rise = static_cast<double>(c[k] - dip);
    if (rise > z * std::sqrt(static_cast<double>(c[k] + dip))) modes.push_back(k);
  }
  return modes;
}

EnsembleResult run_ensemble(const Dynamics& dyn, const CovarianceState& init,
                            const DeePartition& partition, const EnsembleOptions& opts) {
  if (opts.n_traj < 1) throw ConfigError("n_traj must be >= 1");
  const TimeGrid grid = TimeGrid::make(opts.t_final, opts.dt, opts.sample_dt);
  const std::size_t n_samples = static_cast<std::size_t>(grid.steps / grid.sample_every) + 1;

  int workers = opts.workers > 0 ? opts.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, opts.n_traj);

  std::vector<TrajectoryRecord> records(opts.n_traj);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&] {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= opts.n_traj || failed.load()) return;
      TrajectoryOptions to;
      to.t_final = opts.t_final;
      to.dt = opts.dt;
      to.sample_dt = opts.sample_dt;
      to.seed = opts.base_seed + static_cast<std::uint64_t>(k);
      to.record_jump_dee = opts.record_jump_dee;
      to.keep_covariance = opts.keep_covariance;
      if (opts.stop_at_tc) to.stop_after_deviation = opts.tc.threshold;
      try {
        records[k] = run_trajectory(dyn, init, partition, to);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  EnsembleResult res;
  res.n_traj = opts.n_traj;
  res.grid.resize(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s)
    res.grid[s] = grid.time(static_cast<long>(s) * grid.sample_every);

  std::vector<RunningStats> sdee(n_samples), corr(n_samples);
  for (int k = 0; k < opts.n_traj; ++k) {
    const auto& rec = records[k];
    for (std::size_t s = 0; s < n_samples; ++s) {
      // truncated (stop_at_tc) records hold their last value
      const std::size_t idx = std::min(s, rec.sdee.size() - 1);
      sdee[s].push(rec.sdee[idx]);
      corr[s].push(std::abs(rec.edge_correlator[idx]));
    }
    res.tc_per_traj.push_back(
        first_deviation_time(rec.times, rec.sdee, opts.tc.threshold));
    for (const auto& e : rec.events) res.events.push_back({k, e});
    res.max_purity_error = std::max(res.max_purity_error, rec.max_purity_error);
  }
  for (std::size_t s = 0; s < n_samples; ++s) {
    res.sdee_mean.push_back(sdee[s].mean);
    res.sdee_stderr.push_back(sdee[s].stderr_());
    res.corr_mean.push_back(corr[s].mean);
    res.corr_stderr.push_back(corr[s].stderr_());
  }
  res.tc = summarize_tc(res.tc_per_traj, opts.t_final);
  const auto tm = first_deviation_time(res.grid, res.sdee_mean, opts.tc.threshold);
  res.tc_of_mean.mean = tm.value_or(opts.t_final);
  res.tc_of_mean.used = tm ? 1 : 0;
  res.tc_of_mean.censored = tm ? 0 : 1;
  if (opts.keep_records) res.records = std::move(records);
  return res;
}

std::vector<double> edge_correlator_series(std::span<const TrajectoryRecord> records) {
  if (records.empty()) return {};
  std::size_t n = records.front().edge_correlator.size();
  for (const auto& r : records) n = std::min(n, r.edge_correlator.size());
  std::vector<double> out(n, 0.0);
  for (const auto& r : records)
    for (std::size_t s = 0; s < n; ++s) out[s] += std::abs(r.edge_correlator[s]);
  for (double& x : out) x /= static_cast<double>(records.size());
  return out;
}

double fit_edge_xi(const Eigen::MatrixXd& h) {
  const int L = static_cast<int>(h.rows());
  const auto modes = parity_resolved_modes(h);
  // mid-gap even mode: smallest |energy| in the even sector, well inside the
  // bulk gap
  const ParityMode* zero = nullptr;
  double smallest_other = std::numeric_limits<double>::infinity();
  for (const auto& m : modes)
    if (m.parity > 0 && (!zero || std::abs(m.energy) < std::abs(zero->energy))) zero = &m;
  for (const auto& m : modes)
    if (&m != zero && m.parity > 0) smallest_other = std::min(smallest_other, std::abs(m.energy));
  if (!zero || !(std::abs(zero->energy) < 0.1 * smallest_other))
    throw ConfigError("no mid-gap edge mode: the chain is in the trivial phase");

  const double peak = zero->vector.cwiseAbs2().maxCoeff();
  std::vector<double> x, y;
  for (int j = 0; j < L / 2; j += 2) {  // A sites in the left half
    const double p = zero->vector(j) * zero->vector(j);
    if (p < 1e-24 * peak) break;
    x.push_back(static_cast<double>(j));
    y.push_back(std::log(p));
  }
  if (x.size() < 2) throw ConfigError("edge mode too localized to fit on this chain");
  const LinearFit fit = linear_fit(x, y);
  return -1.0 / fit.slope;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw ConfigError("linear fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace sshtraj
