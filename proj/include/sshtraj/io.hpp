#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sshtraj/ensemble.hpp"
#include "sshtraj/trajectory.hpp"

namespace sshtraj::io {

// 12 significant digits
std::string num(double x);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream* out();
  std::filesystem::path path_;
  std::shared_ptr<std::ofstream> stream_;
  std::size_t columns_;
};

// Series files append one block per size.
void write_series(const std::filesystem::path& path, int sites, const std::vector<double>& t,
                  const std::vector<double>& mean, const std::vector<double>& stderr_,
                  bool append);
void write_histogram(const std::filesystem::path& path, const Histogram& h);
void write_events(const std::filesystem::path& path, const std::vector<TaggedEvent>& events);
void write_trajectory(const std::filesystem::path& path, const TrajectoryRecord& rec);

// Row-major little-endian float64 (re, im) pairs, no header.
void write_covariance_bin(const std::filesystem::path& path, const Eigen::MatrixXcd& g);
Eigen::MatrixXcd read_covariance_bin(const std::filesystem::path& path, int sites);
void write_covariance_csv(const std::filesystem::path& path, const Eigen::MatrixXcd& g);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

std::string version();

}  // namespace sshtraj::io
