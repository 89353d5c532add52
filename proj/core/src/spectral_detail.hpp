#pragma once

#include <cstddef>
#include <memory>

#include <Eigen/Dense>

#include "podwind/cpsd.hpp"

namespace podwind::detail {

class RealFft;

// Reusable buffers for raw rectangular periodograms of a fixed length.
class PeriodogramWorkspace {
 public:
  PeriodogramWorkspace(std::size_t n_samples, std::size_t n_components, std::size_t n_lines);
  ~PeriodogramWorkspace();

  // Overwrites `out` (which must have the workspace's shape).
  void compute(const Eigen::Ref<const Eigen::MatrixXd>& x, double sample_rate, CpsdMatrix& out);

 private:
  std::size_t n_samples_;
  std::unique_ptr<RealFft> fft_;
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic> scratch_;
};

}  // namespace podwind::detail
