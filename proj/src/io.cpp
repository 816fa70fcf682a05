#include "sshtraj/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "sshtraj/error.hpp"

#ifndef SSHTRAJ_VERSION
#define SSHTRAJ_VERSION "0.0.0+unknown"
#endif

namespace sshtraj::io {

namespace fs = std::filesystem;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  stream_ = std::make_shared<std::ofstream>(path);
  if (!*stream_) throw ConfigError("cannot write '" + path.string() + "'");
  row(header);
}

std::ofstream* CsvWriter::out() { return stream_.get(); }

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> f;
  f.reserve(values.size());
  for (double v : values) f.push_back(num(v));
  row(f);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw ConfigError("CSV row width mismatch in " + path_.string());
  auto& o = *out();
  for (std::size_t i = 0; i < fields.size(); ++i) o << (i ? "," : "") << fields[i];
  o << '\n';
}

void write_series(const fs::path& path, int sites, const std::vector<double>& t,
                  const std::vector<double>& mean, const std::vector<double>& stderr_,
                  bool append) {
  if (!append || !fs::exists(path)) {
    CsvWriter w(path, {"L", "t", "mean", "stderr"});
  }
  std::ofstream o(path, std::ios::app);
  for (std::size_t k = 0; k < t.size(); ++k)
    o << sites << ',' << num(t[k]) << ',' << num(mean[k]) << ',' << num(stderr_[k]) << '\n';
}

void write_histogram(const fs::path& path, const Histogram& h) {
  CsvWriter w(path, {"bin_left", "bin_right", "density"});
  for (std::size_t b = 0; b < h.counts.size(); ++b) w.row({h.edges[b], h.edges[b + 1], h.density[b]});
}

void write_events(const fs::path& path, const std::vector<TaggedEvent>& events) {
  CsvWriter w(path, {"trajectory", "t", "channel", "sites", "dsd", "sdee_before",
                     "sdee_after", "rate", "total_rate"});
  for (const auto& te : events) {
    const auto& e = te.event;
    std::string sites;
    for (std::size_t k = 0; k < e.support.size(); ++k)
      sites += (k ? ";" : "") + std::to_string(e.support[k] + 1);
    w.row({std::to_string(te.trajectory), num(e.time), std::to_string(e.channel_id), sites,
           num(e.dsd), num(e.sdee_before), num(e.sdee_after), num(e.rate_at_jump),
           num(e.total_rate)});
  }
}

void write_trajectory(const fs::path& path, const TrajectoryRecord& rec) {
  CsvWriter w(path, {"t", "sdee", "g1L_re", "g1L_im"});
  for (std::size_t k = 0; k < rec.times.size(); ++k)
    w.row({rec.times[k], rec.sdee[k], rec.edge_correlator[k].real(), rec.edge_correlator[k].imag()});
}

namespace {

void put_le(std::ofstream& o, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char b[8];
  std::memcpy(b, &bits, 8);
  o.write(b, 8);
}

double get_le(std::ifstream& in) {
  char b[8];
  if (!in.read(b, 8)) throw ConfigError("truncated covariance file");
  std::uint64_t bits;
  std::memcpy(&bits, b, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  double x;
  std::memcpy(&x, &bits, sizeof x);
  return x;
}

}  // namespace

void write_covariance_bin(const fs::path& path, const Eigen::MatrixXcd& g) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream o(path, std::ios::binary);
  if (!o) throw ConfigError("cannot write '" + path.string() + "'");
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      put_le(o, g(i, j).real());
      put_le(o, g(i, j).imag());
    }
}

Eigen::MatrixXcd read_covariance_bin(const fs::path& path, int sites) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  Eigen::MatrixXcd g(sites, sites);
  for (int i = 0; i < sites; ++i)
    for (int j = 0; j < sites; ++j) {
      const double re = get_le(in);
      g(i, j) = {re, get_le(in)};
    }
  return g;
}

void write_covariance_csv(const fs::path& path, const Eigen::MatrixXcd& g) {
  CsvWriter w(path, {"i", "j", "re", "im"});
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      w.row({double(i + 1), double(j + 1), g(i, j).real(), g(i, j).imag()});
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream o(path);
  if (!o) throw ConfigError("cannot write '" + path.string() + "'");
  o << j.dump(2) << '\n';
}

std::string version() { return SSHTRAJ_VERSION; }

}  // namespace sshtraj::io
