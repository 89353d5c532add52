#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podwind/record_set.hpp"

namespace podwind {

// One pressure tap. `floor` is 1-based. (nx, ny) is the outward surface normal
// in plan; `lever_arm_m` is the signed torsional lever arm about the floor
// centroid. When `influence` is present it replaces area*nx, area*ny and
// area*lever_arm as the tap's contribution to (Fx, Fy, Tz).
struct Tap {
  std::string id;
  int floor = 0;
  double area_m2 = 0.0;
  double nx = 0.0;
  double ny = 0.0;
  double lever_arm_m = 0.0;
  std::optional<std::array<double, 3>> influence;
};

struct BuildingGeometry {
  std::size_t n_floors = 0;
  double height_m = 0.0;
  double bx_m = 0.0;
  double by_m = 0.0;
  std::vector<double> floor_elevations_m;

  double b_max() const noexcept { return bx_m > by_m ? bx_m : by_m; }
  void validate() const;
};

// Raw pressure-tap measurements for one run.
struct TapRecord {
  std::vector<Tap> taps;
  Eigen::MatrixXd pressures;  // [n_samples x n_taps], Pa
  double sample_rate = 0.0;   // Hz
  double p0_pa = 0.0;
  double air_density = 0.0;   // kg/m^3
  double wind_speed = 0.0;    // U_H, m/s
  double direction_deg = 0.0;
  Configuration configuration = Configuration::SM;

  double dynamic_pressure() const noexcept { return 0.5 * air_density * wind_speed * wind_speed; }
};

// Per-floor resultant loads, [n_samples x n_floors] each.
struct FloorForces {
  Eigen::MatrixXd fx;
  Eigen::MatrixXd fy;
  Eigen::MatrixXd tz;
  double sample_rate = 0.0;
  double direction_deg = 0.0;
  Configuration configuration = Configuration::SM;
};

// External pressure coefficients (p - p0) / q, one column per tap.
Eigen::MatrixXd pressure_coefficients(const TapRecord& raw);

// Piecewise-constant integration of tap pressures (q * cp) over tributary
// areas. Linear in the input pressures.
FloorForces integrate_floor_forces(const Eigen::MatrixXd& cp, double q, const BuildingGeometry& geom,
                                   std::span<const Tap> taps);

// CFx = Fx/(q Bx H), CFy = Fy/(q By H), CTz = Tz/(q H Bmax^2/2). The column
// means are split off into RecordSet::means.
RecordSet force_coefficients(const FloorForces& forces, const BuildingGeometry& geom, double q);

inline constexpr double kReducedVariate = 3.5;

// Divides every zero-mean component by sigma * gamma_r; the scale vector
// (sigma * gamma_r) is stored on the result so the transform can be undone.
RecordSet standardize(const RecordSet& rs, double reduced_variate = kReducedVariate);
RecordSet destandardize(const RecordSet& rs);

struct RecordSplit {
  RecordSet target;
  std::vector<RecordSet> testing;
  std::size_t discarded_samples = 0;
};

inline constexpr double kTargetSeconds = 600.0;
inline constexpr double kRecordSeconds = 32.0;

// Reserves the first `target_s` seconds of one repetition for target
// estimation and chops the remainder into independent `record_s` records.
// Means are re-separated per piece.
RecordSplit split_records(const RecordSet& rs, double target_s = kTargetSeconds,
                          double record_s = kRecordSeconds);

}  // namespace podwind
