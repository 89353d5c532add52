#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "podwind/error_metrics.hpp"
#include "podwind/ingest.hpp"
#include "podwind/key_value.hpp"
#include "podwind/record_set.hpp"
#include "podwind/spectral.hpp"
#include "podwind/synthetic.hpp"

namespace podwind {

enum class StudyKind { variability, model_error, truncation };
enum class SourceKind { synthetic, archive };
enum class TargetKind { analytic, estimated };

std::string_view to_string(StudyKind k) noexcept;
StudyKind parse_study_kind(std::string_view text);

// One (direction, configuration) case.
struct JobKey {
  double direction_deg = 0.0;
  Configuration configuration = Configuration::SM;
  // e.g. "SM_000" for 0 degrees; fractional directions keep their decimals.
  std::string tag() const;
};

// Study settings, read from a key=value file.
//
//   study              variability | model-error | truncation
//   source             synthetic | archive
//   synthetic.<key>    SyntheticSpec keys (source = synthetic)
//   records.<TAG>      comma-separated RecordSet archives, one per repetition
//                      (source = archive), e.g. records.SM_000=a.csv,b.csv
//   directions, configurations
//   window, overlap, segment_seconds      Welch settings of testing records
//   cutoff_hz, filter, filter_order, filter_cutoff_hz
//   target, target_seconds, target_segment_seconds, record_seconds
//   sample_sizes, replicates, mode_counts (N means all), truncation_samples
//   drop_outliers, outlier_sigma, seed, threads, out_dir
struct StudyConfig {
  StudyKind study = StudyKind::variability;
  SourceKind source = SourceKind::synthetic;
  SyntheticSpec synthetic;
  std::map<std::string, std::vector<std::filesystem::path>> records;
  std::vector<double> directions{0.0};
  std::vector<Configuration> configurations{Configuration::SM};

  Window window = Window::hanning;
  double overlap = 0.5;
  double segment_seconds = 4.0;
  double cutoff_hz = 50.0;
  bool filter = false;
  FilterSpec filter_spec;

  TargetKind target = TargetKind::analytic;
  double target_seconds = kTargetSeconds;
  double target_segment_seconds = 4.0;
  double record_seconds = kRecordSeconds;

  std::vector<std::size_t> sample_sizes{1000, 5000, 20000};
  std::size_t replicates = 1;
  std::vector<std::size_t> mode_counts;  // empty: 1..N
  std::size_t truncation_samples = 5000;

  bool drop_outliers = false;
  double outlier_sigma = 5.0;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::filesystem::path out_dir = "podwind-out";

  // Relative paths in `records.*` resolve against `base_dir`.
  static StudyConfig from(const KeyValues& kv, const std::filesystem::path& base_dir = {});
  // Canonical settings that determine the results (no thread count, no
  // output directory).
  KeyValues to_key_values() const;
  // Ladders strictly increasing, referenced files present, settings in range.
  void validate() const;
  std::vector<JobKey> jobs() const;
};

// Indices of records whose variance in any component lies more than
// `n_sigma` standard deviations from the mean of the remaining records.
std::vector<std::size_t> flag_outliers(std::span<const RecordSet> records, double n_sigma = 5.0);

struct VariabilityResult {
  JobKey job;
  ErrorReport report;
  Eigen::MatrixXd target_correlation;
  std::vector<std::size_t> flagged;
  bool dropped = false;
};

struct LadderRow {
  std::size_t value = 0;  // sample size or mode count
  std::size_t replicate = 0;
  std::size_t samples = 0;
  double captured_energy = 1.0;
  double rms_mu_eps = 0.0;  // over components
  ErrorReport report;
};

struct LadderResult {
  JobKey job;
  std::vector<LadderRow> rows;
};

struct StudyOutcome {
  std::vector<VariabilityResult> variability;
  std::vector<LadderResult> ladders;
  std::vector<std::string> warnings;
  KeyValues manifest;
  std::string manifest_sha256;
};

std::vector<VariabilityResult> run_variability(const StudyConfig& cfg, std::vector<std::string>* warnings = nullptr);
std::vector<LadderResult> run_model_error(const StudyConfig& cfg, std::vector<std::string>* warnings = nullptr);
std::vector<LadderResult> run_truncation(const StudyConfig& cfg, std::vector<std::string>* warnings = nullptr);

// Runs the configured study, writes every table, map and the manifest under
// cfg.out_dir, and returns the results.
StudyOutcome run_study(const StudyConfig& cfg);

}  // namespace podwind
