#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace podwind {

// Wind-tunnel test configuration: single model or model with proximity models.
enum class Configuration { SM, PM };

std::string_view to_string(Configuration c) noexcept;
Configuration parse_configuration(std::string_view text);

// Multi-channel, uniformly sampled force-coefficient series.
//
// `components` holds the fluctuating (zero-mean) part, one column per
// component; the removed means live in `means`. Columns are ordered as the
// x-force block, the y-force block, then the torsion block, floor 1 first in
// each block. `scale` is empty unless the record has been standardized, in
// which case physical = components * scale (column-wise).
struct RecordSet {
  Eigen::MatrixXd components;
  std::vector<std::string> labels;
  double sample_rate = 0.0;
  double direction_deg = 0.0;
  Configuration configuration = Configuration::SM;
  Eigen::VectorXd means;
  Eigen::VectorXd scale;

  std::size_t n_samples() const noexcept { return static_cast<std::size_t>(components.rows()); }
  std::size_t n_components() const noexcept { return static_cast<std::size_t>(components.cols()); }
  double duration() const noexcept { return sample_rate > 0 ? n_samples() / sample_rate : 0.0; }
  bool standardized() const noexcept { return scale.size() != 0; }

  // Throws Error(shape/data_quality) on inconsistent sizes or non-finite data.
  void validate() const;
};

// CFx_01.., CFy_01.., CTz_01.. for the given number of floors.
std::vector<std::string> force_labels(std::size_t n_floors);

// Generic labels comp_001..comp_N.
std::vector<std::string> generic_labels(std::size_t n_components);

// Moves the column means of `rs.components` into `rs.means`.
void separate_mean(RecordSet& rs);

// Copy of samples [begin, begin + count) with the mean re-separated over that
// slice alone.
RecordSet slice(const RecordSet& rs, std::size_t begin, std::size_t count);

// Non-overlapping segments of `seconds` each; a trailing partial segment is
// dropped.
std::vector<RecordSet> chop(const RecordSet& rs, double seconds);

// Converts a duration to a whole number of samples, rejecting durations that
// are not (to within 1e-9 samples) a multiple of the sample period.
std::size_t samples_for(double seconds, double sample_rate);

}  // namespace podwind
