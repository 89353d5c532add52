#include "podwind/ingest.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "podwind/errors.hpp"
#include "podwind/log.hpp"

namespace podwind {

void BuildingGeometry::validate() const {
  if (n_floors < 1) throw Error(Errc::geometry, "building must have at least one floor");
  if (!(height_m > 0.0)) throw Error(Errc::geometry, "building height must be positive");
  if (!(bx_m > 0.0) || !(by_m > 0.0))
    throw Error(Errc::geometry, "plan dimensions Bx and By must be positive");
  if (!floor_elevations_m.empty()) {
    if (floor_elevations_m.size() != n_floors)
      throw Error(Errc::geometry, "floor elevation count does not match n_floors");
    for (std::size_t n = 1; n < floor_elevations_m.size(); ++n)
      if (!(floor_elevations_m[n] > floor_elevations_m[n - 1]))
        throw Error(Errc::geometry, "floor elevations must be strictly increasing");
  }
}

Eigen::MatrixXd pressure_coefficients(const TapRecord& raw) {
  const double q = raw.dynamic_pressure();
  if (!(q > 0.0) || !std::isfinite(q))
    throw Error(Errc::invalid_reference, "dynamic pressure q = 0.5*rho*U_H^2 must be positive");
  if (static_cast<std::size_t>(raw.pressures.cols()) != raw.taps.size())
    throw Error(Errc::shape, "pressure matrix has " + std::to_string(raw.pressures.cols()) +
                                 " columns for " + std::to_string(raw.taps.size()) + " taps");
  Eigen::MatrixXd cp(raw.pressures.rows(), raw.pressures.cols());
  for (Eigen::Index j = 0; j < raw.pressures.cols(); ++j) {
    for (Eigen::Index i = 0; i < raw.pressures.rows(); ++i) {
      const double p = raw.pressures(i, j);
      if (std::isnan(p))
        throw Error(Errc::data_quality, "NaN pressure at tap " + raw.taps[j].id + ", sample " +
                                            std::to_string(i));
      cp(i, j) = (p - raw.p0_pa) / q;
    }
  }
  return cp;
}

FloorForces integrate_floor_forces(const Eigen::MatrixXd& cp, double q, const BuildingGeometry& geom,
                                   std::span<const Tap> taps) {
  geom.validate();
  if (static_cast<std::size_t>(cp.cols()) != taps.size())
    throw Error(Errc::shape, "pressure-coefficient matrix does not match tap count");

  // Influence matrices map tap pressures onto (Fx, Fy, Tz) per floor.
  const auto n_taps = static_cast<Eigen::Index>(taps.size());
  const auto n_floors = static_cast<Eigen::Index>(geom.n_floors);
  Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(n_taps, n_floors);
  Eigen::MatrixXd gy = gx;
  Eigen::MatrixXd gz = gx;
  std::vector<std::size_t> taps_per_floor(geom.n_floors, 0);
  for (Eigen::Index t = 0; t < n_taps; ++t) {
    const Tap& tap = taps[t];
    if (tap.floor < 1 || static_cast<std::size_t>(tap.floor) > geom.n_floors)
      throw Error(Errc::configuration, "tap " + tap.id + " maps to floor " +
                                           std::to_string(tap.floor) + " outside 1.." +
                                           std::to_string(geom.n_floors));
    const Eigen::Index f = tap.floor - 1;
    if (tap.influence) {
      gx(t, f) = (*tap.influence)[0];
      gy(t, f) = (*tap.influence)[1];
      gz(t, f) = (*tap.influence)[2];
    } else {
      if (!(tap.area_m2 > 0.0))
        throw Error(Errc::configuration, "tap " + tap.id + " has no positive tributary area");
      gx(t, f) = tap.area_m2 * tap.nx;
      gy(t, f) = tap.area_m2 * tap.ny;
      gz(t, f) = tap.area_m2 * tap.lever_arm_m;
    }
    ++taps_per_floor[f];
  }
  for (std::size_t f = 0; f < geom.n_floors; ++f)
    if (taps_per_floor[f] == 0)
      throw Error(Errc::configuration, "floor " + std::to_string(f + 1) + " has no taps");

  FloorForces out;
  const Eigen::MatrixXd pressure = q * cp;
  out.fx = pressure * gx;
  out.fy = pressure * gy;
  out.tz = pressure * gz;
  return out;
}

RecordSet force_coefficients(const FloorForces& forces, const BuildingGeometry& geom, double q) {
  geom.validate();
  if (!(q > 0.0)) throw Error(Errc::invalid_reference, "dynamic pressure must be positive");
  const auto n_floors = static_cast<Eigen::Index>(geom.n_floors);
  const Eigen::Index n = forces.fx.rows();
  if (forces.fx.cols() != n_floors || forces.fy.cols() != n_floors ||
      forces.tz.cols() != n_floors || forces.fy.rows() != n || forces.tz.rows() != n)
    throw Error(Errc::shape, "floor force matrices do not match the geometry");

  RecordSet rs;
  rs.components.resize(n, 3 * n_floors);
  rs.components.leftCols(n_floors) = forces.fx / (q * geom.bx_m * geom.height_m);
  rs.components.middleCols(n_floors, n_floors) = forces.fy / (q * geom.by_m * geom.height_m);
  rs.components.rightCols(n_floors) =
      forces.tz / (q * geom.height_m * geom.b_max() * geom.b_max() / 2.0);
  rs.labels = force_labels(geom.n_floors);
  rs.sample_rate = forces.sample_rate;
  rs.direction_deg = forces.direction_deg;
  rs.configuration = forces.configuration;
  rs.means = Eigen::VectorXd::Zero(3 * n_floors);
  separate_mean(rs);
  return rs;
}

RecordSet standardize(const RecordSet& rs, double reduced_variate) {
  if (rs.standardized()) throw Error(Errc::configuration, "record set is already standardized");
  if (!(reduced_variate > 0.0)) throw Error(Errc::argument, "reduced variate must be positive");
  RecordSet out = rs;
  out.scale.resize(rs.components.cols());
  for (Eigen::Index j = 0; j < rs.components.cols(); ++j) {
    auto col = out.components.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sigma = std::sqrt(col.squaredNorm() / static_cast<double>(col.size()));
    const double magnitude = std::abs(rs.means.size() ? rs.means[j] : 0.0) +
                             rs.components.col(j).cwiseAbs().maxCoeff();
    if (!(sigma > 64.0 * std::numeric_limits<double>::epsilon() * magnitude) || sigma == 0.0)
      throw Error(Errc::degenerate_channel,
                  "component " + rs.labels[static_cast<std::size_t>(j)] + " has zero variance");
    out.means[j] += mean;
    out.scale[j] = sigma * reduced_variate;
    col /= out.scale[j];
  }
  return out;
}

RecordSet destandardize(const RecordSet& rs) {
  if (!rs.standardized()) return rs;
  RecordSet out = rs;
  for (Eigen::Index j = 0; j < rs.components.cols(); ++j) out.components.col(j) *= rs.scale[j];
  out.scale.resize(0);
  return out;
}

RecordSplit split_records(const RecordSet& rs, double target_s, double record_s) {
  if (!(target_s > 0.0) || !(record_s > 0.0))
    throw Error(Errc::argument, "target and record durations must be positive");
  const std::size_t n_target = samples_for(target_s, rs.sample_rate);
  const std::size_t n_record = samples_for(record_s, rs.sample_rate);
  if (rs.n_samples() < n_target)
    throw Error(Errc::split, "need " + std::to_string(target_s) + " s for the target set but only " +
                                 std::to_string(rs.duration()) + " s are available");

  RecordSplit out;
  out.target = slice(rs, 0, n_target);
  std::size_t begin = n_target;
  for (; begin + n_record <= rs.n_samples(); begin += n_record)
    out.testing.push_back(slice(rs, begin, n_record));
  out.discarded_samples = rs.n_samples() - begin;
  if (out.testing.empty())
    warn("split_records: " + std::to_string((rs.n_samples() - n_target) / rs.sample_rate) +
         " s remain after the target set, less than one " + std::to_string(record_s) +
         " s record; no testing records produced");
  return out;
}

}  // namespace podwind
