#include "podwind/record_set.hpp"

#include <cmath>
#include <cstdio>

#include "podwind/errors.hpp"

namespace podwind {

std::string_view to_string(Configuration c) noexcept {
  return c == Configuration::SM ? "SM" : "PM";
}

Configuration parse_configuration(std::string_view text) {
  if (text == "SM" || text == "sm") return Configuration::SM;
  if (text == "PM" || text == "pm") return Configuration::PM;
  throw Error(Errc::configuration, "unknown configuration '" + std::string(text) + "'");
}

void RecordSet::validate() const {
  if (sample_rate <= 0.0 || !std::isfinite(sample_rate))
    throw Error(Errc::configuration, "sample rate must be positive");
  if (components.cols() == 0) throw Error(Errc::shape, "record set has no components");
  if (labels.size() != n_components())
    throw Error(Errc::shape, "label count does not match component count");
  if (means.size() != components.cols())
    throw Error(Errc::shape, "means vector does not match component count");
  if (scale.size() != 0 && scale.size() != components.cols())
    throw Error(Errc::shape, "scale vector does not match component count");
  for (Eigen::Index j = 0; j < components.cols(); ++j)
    for (Eigen::Index i = 0; i < components.rows(); ++i)
      if (!std::isfinite(components(i, j)))
        throw Error(Errc::data_quality, "non-finite sample in component " + labels[j] +
                                            " at index " + std::to_string(i));
}

std::vector<std::string> force_labels(std::size_t n_floors) {
  std::vector<std::string> out;
  out.reserve(3 * n_floors);
  for (const char* prefix : {"CFx_", "CFy_", "CTz_"}) {
    for (std::size_t n = 1; n <= n_floors; ++n) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s%02zu", prefix, n);
      out.emplace_back(buf);
    }
  }
  return out;
}

std::vector<std::string> generic_labels(std::size_t n_components) {
  std::vector<std::string> out;
  out.reserve(n_components);
  for (std::size_t i = 1; i <= n_components; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "comp_%03zu", i);
    out.emplace_back(buf);
  }
  return out;
}

void separate_mean(RecordSet& rs) {
  if (rs.means.size() != rs.components.cols()) rs.means = Eigen::VectorXd::Zero(rs.components.cols());
  if (rs.components.rows() == 0) return;
  const Eigen::VectorXd m = rs.components.colwise().mean().transpose();
  rs.components.rowwise() -= m.transpose();
  rs.means += rs.standardized() ? Eigen::VectorXd(m.cwiseProduct(rs.scale)) : m;
}

RecordSet slice(const RecordSet& rs, std::size_t begin, std::size_t count) {
  if (begin + count > rs.n_samples())
    throw Error(Errc::shape, "slice exceeds record length");
  RecordSet out;
  out.components = rs.components.middleRows(static_cast<Eigen::Index>(begin),
                                            static_cast<Eigen::Index>(count));
  out.labels = rs.labels;
  out.sample_rate = rs.sample_rate;
  out.direction_deg = rs.direction_deg;
  out.configuration = rs.configuration;
  out.means = rs.means;
  out.scale = rs.scale;
  separate_mean(out);
  return out;
}

std::size_t samples_for(double seconds, double sample_rate) {
  const double exact = seconds * sample_rate;
  const double rounded = std::round(exact);
  if (seconds < 0.0 || std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact))
    throw Error(Errc::configuration,
                "duration " + std::to_string(seconds) + " s is not a whole number of samples at " +
                    std::to_string(sample_rate) + " Hz");
  return static_cast<std::size_t>(rounded);
}

std::vector<RecordSet> chop(const RecordSet& rs, double seconds) {
  const std::size_t len = samples_for(seconds, rs.sample_rate);
  if (len == 0) throw Error(Errc::configuration, "segment length must be positive");
  std::vector<RecordSet> out;
  for (std::size_t begin = 0; begin + len <= rs.n_samples(); begin += len)
    out.push_back(slice(rs, begin, len));
  return out;
}

}  // namespace podwind
