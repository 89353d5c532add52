#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "podwind/cpsd.hpp"
#include "podwind/record_set.hpp"

namespace podwind::testing {

// Hand-rolled generators for the property tests. Each case draws its own
// engine from the case index so failures replay in isolation.
inline std::mt19937_64 engine(std::uint64_t test_seed, std::uint64_t case_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(test_seed), static_cast<std::uint32_t>(test_seed >> 32),
                    static_cast<std::uint32_t>(case_index), static_cast<std::uint32_t>(case_index >> 32)};
  return std::mt19937_64(seq);
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline std::size_t uniform_size(std::mt19937_64& g, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(g);
}

inline Eigen::MatrixXcd random_complex(std::mt19937_64& g, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXcd a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = {n01(g), n01(g)};
  return a;
}

// Hermitian PSD line of the given rank with entries spread over a few decades.
inline Eigen::MatrixXcd random_psd(std::mt19937_64& g, Eigen::Index n, Eigen::Index rank) {
  Eigen::MatrixXcd a = random_complex(g, n, rank);
  for (Eigen::Index c = 0; c < rank; ++c) a.col(c) *= std::pow(10.0, uniform(g, -3.0, 1.0));
  Eigen::MatrixXcd s = a * a.adjoint();
  return 0.5 * (s + s.adjoint());
}

// A random Hermitian PSD CPSD; roughly a quarter of the lines are rank
// deficient and the DC line is all zero.
inline CpsdMatrix random_cpsd(std::mt19937_64& g, std::size_t n, std::size_t lines, double delta_omega = 0.5) {
  CpsdMatrix s(n, lines, delta_omega);
  for (std::size_t k = 1; k < lines; ++k) {
    const auto full = static_cast<Eigen::Index>(n);
    const Eigen::Index rank = uniform(g, 0.0, 1.0) < 0.25 ? static_cast<Eigen::Index>(uniform_size(g, 1, n)) : full;
    s.line(k) = random_psd(g, full, rank);
  }
  return s;
}

inline Eigen::MatrixXd white_noise(std::mt19937_64& g, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = n01(g);
  return x;
}

// Correlated Gaussian noise with covariance L L^T.
inline RecordSet correlated_record(std::mt19937_64& g, std::size_t n_samples, std::size_t n, double fs) {
  Eigen::MatrixXd l = white_noise(g, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  RecordSet rs;
  rs.components = white_noise(g, static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(n)) * l.transpose();
  rs.labels = generic_labels(n);
  rs.sample_rate = fs;
  separate_mean(rs);
  return rs;
}

inline double relative_frobenius(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const double scale = b.norm();
  return scale == 0.0 ? a.norm() : (a - b).norm() / scale;
}

// Fresh scratch directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("podwind-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace podwind::testing
