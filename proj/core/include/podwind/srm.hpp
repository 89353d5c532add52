#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "podwind/cpsd.hpp"
#include "podwind/error_metrics.hpp"
#include "podwind/pod.hpp"
#include "podwind/record_set.hpp"

namespace podwind {

// Everything needed to draw realizations of
//   P(t) = Pbar + sum_{i < N_m} sum_k 2 |Psi_i(w_k)| sqrt(Lambda_i(w_k) dw)
//                                 cos(w_k t + arg Psi_i(w_k) + theta_ik)
// with theta_ik ~ U[0, 2 pi) addressed by (seed, realization, i, k).
// The DC line is skipped; the mean is carried by `means`.
struct SimulationPlan {
  std::shared_ptr<const SpectralModes> modes;
  std::size_t n_modes = 0;      // 0 selects all modes
  double duration_s = 0.0;      // 0 selects one full period 2 pi / dw
  double dt_s = 0.0;
  std::size_t n_realizations = 1;
  std::uint64_t seed = 0;
  Eigen::VectorXd means;        // empty: zero mean
  Eigen::VectorXd scale;        // empty: output stays in model units

  std::size_t mode_count() const;
  double period() const;
  std::size_t n_steps() const;
  void validate() const;
};

// One zero-mean subprocess by direct cosine summation; `phases` holds
// theta_ik for every line k. Returns [n_steps x N].
Eigen::MatrixXd simulate_subprocess(const SpectralModes& modes, std::size_t mode,
                                    std::span<const double> phases, double dt,
                                    std::size_t n_steps);

// Reusable synthesis workspace for one plan. Uses an inverse real FFT when
// the time grid spans exactly whole FFT periods of the frequency grid,
// otherwise the direct cosine sum. Not thread-safe; make one per thread.
class Synthesizer {
 public:
  explicit Synthesizer(const SimulationPlan& plan);
  ~Synthesizer();
  Synthesizer(const Synthesizer&) = delete;
  Synthesizer& operator=(const Synthesizer&) = delete;

  // Fluctuating part in model units (before de-standardization), [n_steps x N].
  Eigen::MatrixXd fluctuation(std::uint64_t realization, std::size_t n_modes) const;
  Eigen::MatrixXd fluctuation(std::uint64_t realization) const;
  // Same, forcing the direct cosine sum.
  Eigen::MatrixXd fluctuation_direct(std::uint64_t realization, std::size_t n_modes) const;

  bool uses_fft() const noexcept { return fft_length_ != 0; }

 private:
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic> coefficients(std::uint64_t realization,
                                                                  std::size_t n_modes) const;
  struct Fft;
  SimulationPlan plan_;
  std::size_t steps_ = 0;
  std::size_t fft_length_ = 0;
  std::vector<double> amplitude_;  // 2 sqrt(Lambda dw), [lines x N]
  std::unique_ptr<Fft> fft_;
};

// Realization r as a RecordSet: components are the de-standardized
// fluctuations, means are the plan means.
RecordSet simulate_realization(const SimulationPlan& plan, std::uint64_t realization);

// Single-pass ensemble statistics of realizations: summed periodograms on the
// realization grid (first `n_lines` lines), time-domain first and second
// moments, and, when a target is supplied, sums of per-realization error
// measures. Merging is exact addition, so any fixed merge order gives a
// reproducible result.
class EnsembleAccumulator {
 public:
  struct Target {
    SpectralMoments moments;
    double cutoff_hz = 0.0;
  };

  EnsembleAccumulator(std::size_t n_components, std::size_t n_lines, double delta_omega,
                      std::vector<std::string> labels, std::optional<Target> target = {});

  // `x` is one realization's fluctuation in model units.
  void add(const Eigen::Ref<const Eigen::MatrixXd>& x, double sample_rate);
  // Same, with the realization's periodogram already computed on this grid.
  void add(const Eigen::Ref<const Eigen::MatrixXd>& x, const CpsdMatrix& periodogram);
  void merge(const EnsembleAccumulator& other);

  std::size_t count() const noexcept { return count_; }
  std::size_t n_components() const noexcept { return n_; }

  CpsdMatrix mean_spectra() const;
  Eigen::VectorXd sample_mean() const;
  Eigen::MatrixXd sample_covariance() const;  // pooled over all samples, 1/n

  bool tracks_errors() const noexcept { return target_.has_value(); }
  // Mean and standard deviation (n-1) of per-realization epsilon and phi.
  Eigen::VectorXd mean_epsilon() const;
  Eigen::VectorXd std_epsilon() const;
  Eigen::MatrixXd mean_phi() const;
  Eigen::MatrixXd std_phi() const;
  Eigen::VectorXd min_epsilon() const { return eps_min_; }
  Eigen::VectorXd max_epsilon() const { return eps_max_; }
  Eigen::MatrixXd min_phi() const { return phi_min_; }
  Eigen::MatrixXd max_phi() const { return phi_max_; }
  // Correlation of per-realization epsilon between components.
  Eigen::MatrixXd epsilon_correlation() const;
  const std::optional<Target>& target() const noexcept { return target_; }

 private:
  std::size_t n_;
  CpsdMatrix spectra_sum_;
  std::optional<Target> target_;
  std::size_t count_ = 0;
  double sample_count_ = 0.0;
  Eigen::VectorXd x_sum_;
  Eigen::MatrixXd xx_sum_;
  Eigen::VectorXd eps_sum_, eps_sq_;
  Eigen::MatrixXd phi_sum_, phi_sq_;
  Eigen::MatrixXd eps_cross_;
  Eigen::VectorXd eps_min_, eps_max_;
  Eigen::MatrixXd phi_min_, phi_max_;
};

// Report of an ensemble against its target. mu_eps and mu_phi are the errors
// of the ensemble-averaged spectra; the dispersion and extremes are over the
// individual realizations.
ErrorReport ensemble_report(const EnsembleAccumulator& acc, ReportMetadata meta);

struct BatchOptions {
  std::size_t threads = 1;
  std::size_t block_size = 64;  // realizations per reduction leaf
  std::size_t n_lines = 0;      // ensemble-spectrum lines kept (0: all)
  std::optional<EnsembleAccumulator::Target> target;
  // Optional per-realization sink, called in realization order.
  std::function<void(std::uint64_t, const RecordSet&)> sink;
  // Realization indices start here; lets ladders draw disjoint streams.
  std::uint64_t first_realization = 0;
};

// Generates plan.n_realizations realizations and folds them into one
// accumulator. Blocks of `block_size` realizations are combined by pairwise
// summation in index order, so the result does not depend on `threads`.
EnsembleAccumulator simulate_batch(const SimulationPlan& plan, const BatchOptions& options = {});

}  // namespace podwind
