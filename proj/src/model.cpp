#include "sshtraj/model.hpp"

#include <algorithm>
#include <cmath>

#include "sshtraj/error.hpp"

namespace sshtraj {

std::string to_string(DissipatorKind kind) {
  switch (kind) {
    case DissipatorKind::SPD:
      return "SPD";
    case DissipatorKind::SBD:
      return "SBD";
    case DissipatorKind::None:
      return "NONE";
  }
  return "NONE";
}

DissipatorKind dissipator_from_string(const std::string& name) {
  if (name == "SPD" || name == "spd") return DissipatorKind::SPD;
  if (name == "SBD" || name == "sbd") return DissipatorKind::SBD;
  if (name == "NONE" || name == "none") return DissipatorKind::None;
  throw ConfigError("unknown dissipator kind '" + name + "'");
}

void ModelSpec::validate() const {
  if (n_cells < 2)
    throw ConfigError("n_cells must be >= 2 (L >= 4), got " +
                      std::to_string(n_cells));
  if (!(v >= 0.0) || !(w >= 0.0) || v + w <= 0.0)
    throw ConfigError("hoppings must satisfy v, w >= 0 and v + w > 0");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ConfigError("alpha must lie in [0, 1]");
}

double JumpChannel::weight() const {
  double s = 0.0;
  for (const auto& a : amplitude) s += std::norm(a);
  return s;
}

Eigen::MatrixXd build_hamiltonian(int n_cells, double v, double w) {
  if (n_cells < 1) throw ConfigError("n_cells must be positive");
  const int L = 2 * n_cells;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
  for (int j = 0; j + 1 < L; ++j) {
    // bond (j, j+1) is intra-cell when j is an A site
    const double t = (j % 2 == 0) ? v : w;
    h(j, j + 1) = -t;
    h(j + 1, j) = -t;
  }
  return h;
}

Eigen::MatrixXd build_hamiltonian(const ModelSpec& spec) {
  spec.validate();
  return build_hamiltonian(spec.n_cells, spec.v, spec.w);
}

int protected_edge_sites(const ModelSpec& spec) {
  const int L = spec.sites();
  // small guard so that e.g. alpha = 0.8, L = 10 gives exactly 1
  return static_cast<int>(std::floor((1.0 - spec.alpha) * L / 2.0 + 1e-9));
}

std::vector<double> gamma_profile(const ModelSpec& spec) {
  spec.validate();
  const int L = spec.sites();
  const int n = protected_edge_sites(spec);
  std::vector<double> profile(L, 0.0);
  if (spec.kind == DissipatorKind::None) return profile;
  for (int j = n; j < L - n; ++j) profile[j] = spec.gamma;
  return profile;
}

std::vector<JumpChannel> build_channels(const ModelSpec& spec,
                                        std::span<const double> profile) {
  spec.validate();
  const int L = spec.sites();
  if (static_cast<int>(profile.size()) != L)
    throw ConfigError("rate profile length " + std::to_string(profile.size()) +
                      " does not match L = " + std::to_string(L));

  std::vector<JumpChannel> out;
  switch (spec.kind) {
    case DissipatorKind::None:
      break;
    case DissipatorKind::SPD:
      for (int j = 0; j < L; ++j) {
        if (profile[j] <= 0.0) continue;
        JumpChannel ch;
        ch.id = static_cast<int>(out.size());
        ch.kind = (j % 2 == 0) ? ChannelKind::Loss : ChannelKind::Gain;
        ch.support = {j};
        ch.amplitude = {std::sqrt(profile[j])};
        out.push_back(std::move(ch));
      }
      break;
    case DissipatorKind::SBD:
      // links (2j-1, 2j) for every cell and (2j, 2j+1) up to the last cell
      for (int a = 0; a + 1 < L; ++a) {
        const int b = a + 1;
        if (b >= L) throw ConfigError("SBD link references a site beyond L");
        const double rate = std::min(profile[a], profile[b]);
        if (rate <= 0.0) continue;
        const double amp = std::sqrt(rate);
        JumpChannel ch;
        ch.id = static_cast<int>(out.size());
        ch.kind = ChannelKind::Loss;
        ch.support = {a, b};
        ch.amplitude = {amp, amp};
        out.push_back(std::move(ch));
      }
      break;
  }
  return out;
}

}  // namespace sshtraj
