#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podwind/cpsd.hpp"
#include "podwind/error_metrics.hpp"
#include "podwind/ingest.hpp"
#include "podwind/key_value.hpp"
#include "podwind/pod.hpp"
#include "podwind/record_set.hpp"

namespace podwind {

namespace fs = std::filesystem;

// Delimited files are comma-separated with one header row. Numbers are
// written in shortest round-trip form, so text archives are also exact.
// A data file `x.csv` has its key=value metadata in `x.meta`.
fs::path sidecar_path(const fs::path& data_file);

// tap_id,floor,area_m2,nx,ny,lever_arm_m[,influence_fx,influence_fy,influence_tz]
std::vector<Tap> read_tap_layout(const fs::path& path);
void write_tap_layout(const fs::path& path, std::span<const Tap> taps);

// key=value: n_floors, height_m, bx_m, by_m, floor_elevations_m (list).
BuildingGeometry read_geometry(const fs::path& path);
void write_geometry(const fs::path& path, const BuildingGeometry& g);

// `time,<tap ids>` in Pa; sidecar keys sample_rate_hz, p0_pa, rho_kg_m3,
// uh_m_s, direction_deg, configuration. Columns are matched to `taps` by id.
TapRecord read_pressure_record(const fs::path& csv, std::vector<Tap> taps);
void write_pressure_record(const fs::path& csv, const TapRecord& rec);

// `time,<labels>` holding the fluctuating part; sidecar keys sample_rate_hz,
// direction_deg, configuration, labels, means, scale.
RecordSet read_record_set(const fs::path& csv);
void write_record_set(const fs::path& csv, const RecordSet& rs);

// Binary archives: a text header (magic line, key=value lines, `end_header`)
// followed by little-endian float64 data. CPSD values are interleaved
// (Re, Im), frequency-major then row-major. Reading re-checks the CPSD
// invariants.
void write_cpsd(const fs::path& path, const CpsdMatrix& s);
CpsdMatrix read_cpsd(const fs::path& path);

// Eigenvalues frequency-major, then eigenvectors frequency-major, mode-major,
// component-minor, interleaved (Re, Im).
void write_modes(const fs::path& path, const SpectralModes& m);
SpectralModes read_modes(const fs::path& path);

// Grid with a header row and a leading label column.
void write_matrix(const fs::path& path, const Eigen::MatrixXd& m,
                  const std::vector<std::string>& row_labels,
                  const std::vector<std::string>& col_labels);

// summary.csv (one row per component and per pair i < j with mu, sigma, min,
// max), epsilon_records.csv, mu_phi.csv, sigma_phi.csv, rho_eps.csv and the
// scalar expectations in stats.meta, all under `dir` with `prefix`.
void write_error_report(const fs::path& dir, const std::string& prefix, const ErrorReport& r);
KeyValues report_statistics(const ErrorReport& r);

}  // namespace podwind
