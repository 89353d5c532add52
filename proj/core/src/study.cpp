#include "podwind/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>

#include "podwind/archive.hpp"
#include "podwind/errors.hpp"
#include "podwind/hashing.hpp"
#include "podwind/ingest.hpp"
#include "podwind/log.hpp"
#include "podwind/pod.hpp"
#include "podwind/rng.hpp"
#include "podwind/srm.hpp"

namespace podwind {
namespace {

constexpr const char* kVersion = "0.1.0";

void note(std::vector<std::string>* warnings, const std::string& msg) {
  warn(msg);
  if (warnings) warnings->push_back(msg);
}

template <class T>
void require_increasing(const std::vector<T>& v, const std::string& what) {
  if (v.empty()) throw Error(Errc::configuration, what + " must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < T{1}) throw Error(Errc::configuration, what + " entries must be positive");
    if (i > 0 && !(v[i] > v[i - 1])) throw Error(Errc::configuration, what + " must be strictly increasing");
  }
}

Window parse_window(const std::string& s) {
  if (s == "rect" || s == "rectangular") return Window::rectangular;
  if (s == "hann" || s == "hanning") return Window::hanning;
  throw Error(Errc::configuration, "unknown window '" + s + "' (expected rect or hann)");
}

// Seeds are keyed by the case itself, so adding a direction leaves the other
// cases unchanged.
std::uint64_t job_seed(std::uint64_t seed, const JobKey& job) {
  const auto millideg = static_cast<std::uint64_t>(std::llround(job.direction_deg * 1000.0));
  const std::uint64_t conf = job.configuration == Configuration::PM ? 1 : 0;
  return derive_seed(seed, (conf << 40) ^ millideg);
}

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> tasks;
  for (std::size_t t = 0; t < threads; ++t)
    tasks.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    }));
  for (auto& f : tasks) f.get();
}

// Repetitions of one case, streamed one at a time.
class RepetitionSource {
 public:
  RepetitionSource(const StudyConfig& cfg, const JobKey& job) : cfg_(cfg), job_(job) {
    if (cfg.source == SourceKind::synthetic) {
      synth_.emplace(cfg.synthetic, job_seed(cfg.seed, job));
      count_ = cfg.synthetic.n_repetitions;
    } else {
      const auto it = cfg.records.find(job.tag());
      if (it != cfg.records.end()) {
        paths_ = it->second;
        count_ = paths_.size();
      }
    }
  }

  std::size_t count() const noexcept { return count_; }

  RecordSet get(std::size_t r) const {
    RecordSet rs = synth_ ? synth_->record(r) : read_record_set(paths_.at(r));
    rs.direction_deg = job_.direction_deg;
    rs.configuration = job_.configuration;
    if (cfg_.filter) rs = lowpass(rs, cfg_.filter_spec);
    return rs;
  }

 private:
  const StudyConfig& cfg_;
  JobKey job_;
  std::optional<SyntheticSource> synth_;
  std::vector<std::filesystem::path> paths_;
  std::size_t count_ = 0;
};

struct Prepared {
  CpsdMatrix target;  // truncated to the cutoff
  std::vector<RecordSet> testing;
  std::size_t target_segments = 0;
  double sample_rate = 0.0;
};

// Splits every repetition, averaging the target periodograms repetition by
// repetition so that only the testing records are held in memory.
Prepared prepare(const StudyConfig& cfg, const RepetitionSource& src, bool keep_testing) {
  Prepared p;
  for (std::size_t r = 0; r < src.count(); ++r) {
    const RecordSet rep = src.get(r);
    if (r == 0) p.sample_rate = rep.sample_rate;
    if (rep.sample_rate != p.sample_rate)
      throw Error(Errc::shape, "repetitions have different sample rates");
    RecordSplit split = split_records(rep, cfg.target_seconds, cfg.record_seconds);
    const std::vector<RecordSet> segs = chop(split.target, cfg.target_segment_seconds);
    const CpsdMatrix part = truncate_to_cutoff(target_cpsd(segs), cfg.cutoff_hz);
    if (p.target_segments == 0) {
      p.target = part;
      for (auto& v : p.target.values()) v *= static_cast<double>(segs.size());
    } else {
      auto dst = p.target.values();
      const auto src_v = part.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src_v[i] * static_cast<double>(segs.size());
    }
    p.target_segments += segs.size();
    if (keep_testing)
      for (auto& t : split.testing) p.testing.push_back(std::move(t));
  }
  if (p.target_segments == 0) throw Error(Errc::split, "no target segments");
  for (auto& v : p.target.values()) v /= static_cast<double>(p.target_segments);
  return p;
}

struct Calibration {
  CpsdMatrix target;
  double sample_rate = 0.0;
};

Calibration calibration_target(const StudyConfig& cfg, const JobKey& job) {
  if (cfg.target == TargetKind::analytic) {
    CpsdMatrix s = truncate_to_cutoff(analytic_cpsd(cfg.synthetic, cfg.target_segment_seconds), cfg.cutoff_hz);
    return {std::move(s), cfg.synthetic.sample_rate};
  }
  const RepetitionSource src(cfg, job);
  if (src.count() == 0) throw Error(Errc::configuration, "no records for " + job.tag());
  Prepared p = prepare(cfg, src, false);
  return {std::move(p.target), p.sample_rate};
}

LadderRow make_row(std::size_t value, std::size_t replicate, const EnsembleAccumulator& acc,
                   const ReportMetadata& meta) {
  LadderRow row;
  row.value = value;
  row.replicate = replicate;
  row.samples = acc.count();
  row.report = ensemble_report(acc, meta);
  row.rms_mu_eps = std::sqrt(row.report.mu_eps.squaredNorm() / static_cast<double>(row.report.mu_eps.size()));
  return row;
}

bool has_records(const StudyConfig& cfg, const JobKey& job, std::vector<std::string>* warnings) {
  if (cfg.source == SourceKind::synthetic || cfg.records.count(job.tag())) return true;
  note(warnings, "no records for " + job.tag() + "; case skipped");
  return false;
}

std::vector<std::size_t> resolved_modes(const StudyConfig& cfg, std::size_t n) {
  std::vector<std::size_t> out;
  if (cfg.mode_counts.empty()) {
    for (std::size_t m = 1; m <= n; ++m) out.push_back(m);
    return out;
  }
  for (std::size_t m : cfg.mode_counts) {
    const std::size_t v = m == 0 ? n : m;
    if (v > n) throw Error(Errc::configuration, "mode count " + std::to_string(v) + " exceeds " + std::to_string(n));
    out.push_back(v);
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) throw Error(Errc::configuration, "mode_counts must be strictly increasing");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::configuration, "cannot write " + path.string());
  out << text;
}

std::string ladder_table(const LadderResult& r, bool modes) {
  std::string out = std::string(modes ? "n_modes" : "samples") +
                    ",replicate,realizations,captured_energy,E_mu_eps_pct,min_mu_eps_pct,max_mu_eps_pct,"
                    "rms_mu_eps_pct,E_sigma_eps_pct,E_mu_phi,min_mu_phi,max_mu_phi,E_sigma_phi,max_sigma_phi\n";
  for (const auto& row : r.rows) {
    const auto& e = row.report;
    out += std::to_string(row.value) + "," + std::to_string(row.replicate) + "," + std::to_string(row.samples);
    for (double v : {row.captured_energy, e.e_mu_eps, e.min_mu_eps, e.max_mu_eps, row.rms_mu_eps, e.e_sigma_eps,
                     e.e_mu_phi, e.min_mu_phi, e.max_mu_phi, e.e_sigma_phi, e.max_sigma_phi})
      out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

}  // namespace

std::string_view to_string(StudyKind k) noexcept {
  switch (k) {
    case StudyKind::variability: return "variability";
    case StudyKind::model_error: return "model-error";
    case StudyKind::truncation: return "truncation";
  }
  return "?";
}

StudyKind parse_study_kind(std::string_view text) {
  if (text == "variability") return StudyKind::variability;
  if (text == "model-error" || text == "model_error") return StudyKind::model_error;
  if (text == "truncation") return StudyKind::truncation;
  throw Error(Errc::configuration, "unknown study '" + std::string(text) + "'");
}

std::string JobKey::tag() const {
  char buf[64];
  if (direction_deg == std::floor(direction_deg))
    std::snprintf(buf, sizeof buf, "%s_%03.0f", std::string(to_string(configuration)).c_str(), direction_deg);
  else
    std::snprintf(buf, sizeof buf, "%s_%s", std::string(to_string(configuration)).c_str(),
                  format_double(direction_deg).c_str());
  return buf;
}

// StudyConfig -----------------------------------------------------------------

StudyConfig StudyConfig::from(const KeyValues& kv, const std::filesystem::path& base_dir) {
  StudyConfig c;
  c.study = parse_study_kind(kv.get("study", "variability"));
  const std::string source = kv.get("source", "synthetic");
  if (source == "synthetic") c.source = SourceKind::synthetic;
  else if (source == "archive") c.source = SourceKind::archive;
  else throw Error(Errc::configuration, "unknown source '" + source + "'");

  KeyValues syn;
  if (kv.has("synthetic_file")) {
    std::filesystem::path p = kv.at("synthetic_file");
    if (p.is_relative()) p = base_dir / p;
    syn = KeyValues::load(p);
  }
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind("synthetic.", 0) == 0) syn.set(k.substr(10), v);
    if (k.rfind("records.", 0) == 0) {
      std::vector<std::filesystem::path> paths;
      for (const auto& s : split(v, ',')) {
        std::filesystem::path p = s;
        if (p.is_relative()) p = base_dir / p;
        paths.push_back(p);
      }
      c.records[k.substr(8)] = paths;
    }
  }
  c.synthetic = SyntheticSpec::from(syn);

  if (kv.has("directions")) c.directions = kv.get_doubles("directions");
  if (kv.has("configurations")) {
    c.configurations.clear();
    for (const auto& s : kv.get_strings("configurations")) c.configurations.push_back(parse_configuration(s));
  }
  c.window = parse_window(kv.get("window", "hann"));
  c.overlap = kv.get_double("overlap", c.overlap);
  c.segment_seconds = kv.get_double("segment_seconds", c.segment_seconds);
  c.cutoff_hz = kv.get_double("cutoff_hz", c.cutoff_hz);
  c.filter = kv.get_bool("filter", c.filter);
  c.filter_spec.order = static_cast<int>(kv.get_size("filter_order", 2));
  c.filter_spec.cutoff_hz = kv.get_double("filter_cutoff_hz", c.cutoff_hz);

  const std::string target = kv.get("target", c.source == SourceKind::synthetic ? "analytic" : "estimated");
  if (target == "analytic") c.target = TargetKind::analytic;
  else if (target == "estimated") c.target = TargetKind::estimated;
  else throw Error(Errc::configuration, "unknown target '" + target + "'");
  c.target_seconds = kv.get_double("target_seconds", c.target_seconds);
  c.target_segment_seconds = kv.get_double("target_segment_seconds", c.target_segment_seconds);
  c.record_seconds = kv.get_double("record_seconds", c.record_seconds);

  if (kv.has("sample_sizes")) c.sample_sizes = kv.get_sizes("sample_sizes");
  c.replicates = kv.get_size("replicates", c.replicates);
  if (kv.has("mode_counts")) {
    c.mode_counts.clear();
    for (const auto& s : kv.get_strings("mode_counts"))
      c.mode_counts.push_back(s == "N" ? 0 : static_cast<std::size_t>(parse_double(s)));
  }
  c.truncation_samples = kv.get_size("truncation_samples", c.truncation_samples);
  c.drop_outliers = kv.get_bool("drop_outliers", c.drop_outliers);
  c.outlier_sigma = kv.get_double("outlier_sigma", c.outlier_sigma);
  c.seed = kv.get_u64("seed", c.seed);
  c.threads = kv.get_size("threads", c.threads);
  if (kv.has("out_dir")) c.out_dir = kv.at("out_dir");
  c.validate();
  return c;
}

KeyValues StudyConfig::to_key_values() const {
  KeyValues kv;
  kv.set("study", std::string(to_string(study)));
  kv.set("source", std::string(source == SourceKind::synthetic ? "synthetic" : "archive"));
  if (source == SourceKind::synthetic || target == TargetKind::analytic) {
    const KeyValues syn = synthetic.to_key_values();
    for (const auto& [k, v] : syn.entries()) kv.set("synthetic." + k, v);
  }
  for (const auto& [tag, paths] : records) {
    std::string s;
    for (std::size_t i = 0; i < paths.size(); ++i) s += (i ? "," : "") + paths[i].filename().string();
    kv.set("records." + tag, s);
  }
  kv.set("directions", directions);
  std::string confs;
  for (std::size_t i = 0; i < configurations.size(); ++i)
    confs += (i ? "," : "") + std::string(to_string(configurations[i]));
  kv.set("configurations", confs);
  kv.set("window", std::string(window == Window::hanning ? "hann" : "rect"));
  kv.set("overlap", overlap);
  kv.set("segment_seconds", segment_seconds);
  kv.set("cutoff_hz", cutoff_hz);
  kv.set("filter", std::string(filter ? "true" : "false"));
  kv.set("filter_order", static_cast<std::size_t>(filter_spec.order));
  kv.set("filter_cutoff_hz", filter_spec.cutoff_hz);
  kv.set("target", std::string(target == TargetKind::analytic ? "analytic" : "estimated"));
  kv.set("target_seconds", target_seconds);
  kv.set("target_segment_seconds", target_segment_seconds);
  kv.set("record_seconds", record_seconds);
  std::vector<double> sizes(sample_sizes.begin(), sample_sizes.end());
  kv.set("sample_sizes", sizes);
  kv.set("replicates", replicates);
  std::string modes;
  for (std::size_t i = 0; i < mode_counts.size(); ++i)
    modes += (i ? "," : "") + (mode_counts[i] == 0 ? std::string("N") : std::to_string(mode_counts[i]));
  kv.set("mode_counts", modes);
  kv.set("truncation_samples", truncation_samples);
  kv.set("drop_outliers", std::string(drop_outliers ? "true" : "false"));
  kv.set("outlier_sigma", outlier_sigma);
  kv.set_u64("seed", seed);
  return kv;
}

void StudyConfig::validate() const {
  synthetic.validate();
  if (directions.empty() || configurations.empty())
    throw Error(Errc::configuration, "directions and configurations must not be empty");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(Errc::configuration, "overlap must lie in [0, 1)");
  if (!(segment_seconds > 0.0) || !(target_segment_seconds > 0.0) || !(record_seconds > 0.0) ||
      !(target_seconds > 0.0))
    throw Error(Errc::configuration, "durations must be positive");
  if (!(cutoff_hz > 0.0)) throw Error(Errc::configuration, "cutoff must be positive");
  if (segment_seconds > record_seconds)
    throw Error(Errc::configuration, "Welch segment longer than a testing record");
  require_increasing(sample_sizes, "sample_sizes");
  if (replicates < 1) throw Error(Errc::configuration, "replicates must be at least 1");
  if (truncation_samples < 1) throw Error(Errc::configuration, "truncation_samples must be positive");
  for (std::size_t i = 1; i < mode_counts.size(); ++i)
    if (mode_counts[i] != 0 && mode_counts[i] <= mode_counts[i - 1])
      throw Error(Errc::configuration, "mode_counts must be strictly increasing");
  if (!(outlier_sigma > 0.0)) throw Error(Errc::configuration, "outlier_sigma must be positive");
  if (source == SourceKind::archive && target == TargetKind::analytic)
    throw Error(Errc::configuration, "an analytic target requires the synthetic source");
  for (const auto& [tag, paths] : records)
    for (const auto& p : paths)
      if (!std::filesystem::exists(p))
        throw Error(Errc::configuration, "records." + tag + ": file " + p.string() + " does not exist");
}

std::vector<JobKey> StudyConfig::jobs() const {
  std::vector<JobKey> out;
  for (Configuration c : configurations)
    for (double d : directions) out.push_back({d, c});
  return out;
}

// Outliers --------------------------------------------------------------------

std::vector<std::size_t> flag_outliers(std::span<const RecordSet> records, double n_sigma) {
  std::vector<std::size_t> out;
  if (records.size() < 3) return out;
  const auto n = records.front().components.cols();
  Eigen::MatrixXd var(static_cast<Eigen::Index>(records.size()), n);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& x = records[r].components;
    if (x.cols() != n) throw Error(Errc::shape, "records have different component counts");
    const Eigen::RowVectorXd mu = x.colwise().mean();
    var.row(static_cast<Eigen::Index>(r)) = (x.rowwise() - mu).colwise().squaredNorm() / static_cast<double>(x.rows());
  }
  // Leave-one-out: record r against the mean and spread of the others.
  const auto rows = var.rows();
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index j = 0; j < n; ++j) {
      double mean = 0.0, ss = 0.0;
      for (Eigen::Index q = 0; q < rows; ++q)
        if (q != r) mean += var(q, j);
      mean /= static_cast<double>(rows - 1);
      for (Eigen::Index q = 0; q < rows; ++q)
        if (q != r) ss += (var(q, j) - mean) * (var(q, j) - mean);
      const double sd = std::sqrt(ss / static_cast<double>(rows - 2));
      if (sd > 0.0 && std::abs(var(r, j) - mean) > n_sigma * sd) {
        out.push_back(static_cast<std::size_t>(r));
        break;
      }
    }
  return out;
}

// Studies ---------------------------------------------------------------------

std::vector<VariabilityResult> run_variability(const StudyConfig& cfg, std::vector<std::string>* warnings) {
  cfg.validate();
  std::vector<VariabilityResult> results;
  for (const JobKey& job : cfg.jobs()) {
    if (!has_records(cfg, job, warnings)) continue;
    const RepetitionSource src(cfg, job);
    Prepared p = prepare(cfg, src, true);
    const SpectralMoments target = moments(p.target, cfg.cutoff_hz);

    VariabilityResult res;
    res.job = job;
    res.flagged = flag_outliers(p.testing, cfg.outlier_sigma);
    for (std::size_t r : res.flagged)
      note(warnings, job.tag() + ": testing record " + std::to_string(r) + " variance deviates more than " +
                         format_double(cfg.outlier_sigma) + " sigma" + (cfg.drop_outliers ? " (dropped)" : ""));
    if (cfg.drop_outliers && !res.flagged.empty()) {
      std::vector<RecordSet> kept;
      for (std::size_t r = 0; r < p.testing.size(); ++r)
        if (!std::binary_search(res.flagged.begin(), res.flagged.end(), r)) kept.push_back(std::move(p.testing[r]));
      p.testing = std::move(kept);
      res.dropped = true;
    }
    if (p.testing.empty()) throw Error(Errc::split, job.tag() + ": no testing records");

    const WelchConfig welch = WelchConfig::from_seconds(p.sample_rate, cfg.segment_seconds, cfg.overlap, cfg.window);
    std::vector<RecordErrors> errors(p.testing.size());
    parallel_for(p.testing.size(), cfg.threads, [&](std::size_t r) {
      errors[r] = compare(moments(welch_cpsd(p.testing[r], welch), cfg.cutoff_hz), target);
    });
    res.report = aggregate(errors, {p.testing.front().labels, job.direction_deg, job.configuration});
    res.target_correlation = target.correlations();
    results.push_back(std::move(res));
  }
  return results;
}

namespace {

SimulationPlan calibration_plan(const Calibration& cal) {
  SimulationPlan plan;
  plan.modes = std::make_shared<SpectralModes>(decompose(cal.target));
  plan.dt_s = 1.0 / cal.sample_rate;
  return plan;
}

EnsembleAccumulator::Target accumulator_target(const StudyConfig& cfg, const CpsdMatrix& target) {
  return {moments(target, cfg.cutoff_hz), cfg.cutoff_hz};
}

}  // namespace

std::vector<LadderResult> run_model_error(const StudyConfig& cfg, std::vector<std::string>* warnings) {
  cfg.validate();
  std::vector<LadderResult> results;
  for (const JobKey& job : cfg.jobs()) {
    if (cfg.target == TargetKind::estimated && !has_records(cfg, job, warnings)) continue;
    const Calibration cal = calibration_target(cfg, job);
    SimulationPlan plan = calibration_plan(cal);
    BatchOptions opt;
    opt.threads = cfg.threads;
    opt.n_lines = cal.target.n_lines();
    opt.target = accumulator_target(cfg, cal.target);
    const ReportMetadata meta{cal.target.labels(), job.direction_deg, job.configuration};

    LadderResult res;
    res.job = job;
    for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
      plan.seed = derive_seed(job_seed(cfg.seed, job), rep);
      std::optional<EnsembleAccumulator> acc;
      std::size_t done = 0;
      for (std::size_t n : cfg.sample_sizes) {
        plan.n_realizations = n - done;
        opt.first_realization = done;
        EnsembleAccumulator part = simulate_batch(plan, opt);
        if (acc) acc->merge(part);
        else acc.emplace(std::move(part));
        done = n;
        res.rows.push_back(make_row(n, rep, *acc, meta));
      }
    }
    results.push_back(std::move(res));
  }
  return results;
}

std::vector<LadderResult> run_truncation(const StudyConfig& cfg, std::vector<std::string>* warnings) {
  cfg.validate();
  std::vector<LadderResult> results;
  for (const JobKey& job : cfg.jobs()) {
    if (cfg.target == TargetKind::estimated && !has_records(cfg, job, warnings)) continue;
    const Calibration cal = calibration_target(cfg, job);
    SimulationPlan plan = calibration_plan(cal);
    plan.n_realizations = cfg.truncation_samples;
    BatchOptions opt;
    opt.threads = cfg.threads;
    opt.n_lines = cal.target.n_lines();
    opt.target = accumulator_target(cfg, cal.target);
    const ReportMetadata meta{cal.target.labels(), job.direction_deg, job.configuration};

    LadderResult res;
    res.job = job;
    for (std::size_t m : resolved_modes(cfg, cal.target.n_components())) {
      plan.n_modes = m;
      const double captured = captured_energy(*plan.modes, m).total;
      for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
        // Every mode count reuses the same phases.
        plan.seed = derive_seed(job_seed(cfg.seed, job), rep);
        LadderRow row = make_row(m, rep, simulate_batch(plan, opt), meta);
        row.captured_energy = captured;
        res.rows.push_back(std::move(row));
      }
    }
    results.push_back(std::move(res));
  }
  return results;
}

// Orchestration ---------------------------------------------------------------

StudyOutcome run_study(const StudyConfig& cfg) {
  cfg.validate();
  StudyOutcome out;
  const std::filesystem::path root = cfg.out_dir / std::string(to_string(cfg.study));
  std::vector<std::filesystem::path> written;
  auto track = [&](const std::filesystem::path& p) { written.push_back(p); };

  if (cfg.study == StudyKind::variability) {
    out.variability = run_variability(cfg, &out.warnings);
    for (const auto& res : out.variability) {
      const auto dir = root / res.job.tag();
      write_error_report(dir, "", res.report);
      for (const char* f : {"summary.csv", "epsilon_records.csv", "mu_phi.csv", "sigma_phi.csv", "rho_eps.csv",
                            "stats.meta"})
        if (std::filesystem::exists(dir / f)) track(dir / f);
      const auto& labels = res.report.meta.labels;
      write_matrix(dir / "rho_target.csv", res.target_correlation, labels, labels);
      track(dir / "rho_target.csv");
      std::string pairs = "label_i,label_j,abs_rho_target,mu_phi,sigma_phi\n";
      for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
          const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
          pairs += labels[i] + "," + labels[j] + "," + format_double(std::abs(res.target_correlation(a, b))) + "," +
                   format_double(res.report.mu_phi(a, b)) + "," + format_double(res.report.sigma_phi(a, b)) + "\n";
        }
      write_text(dir / "pairs.csv", pairs);
      track(dir / "pairs.csv");
    }
  } else {
    const bool modes = cfg.study == StudyKind::truncation;
    out.ladders = modes ? run_truncation(cfg, &out.warnings) : run_model_error(cfg, &out.warnings);
    for (const auto& res : out.ladders) {
      const auto dir = root / res.job.tag();
      write_text(dir / (modes ? "truncation.csv" : "convergence.csv"), ladder_table(res, modes));
      track(dir / (modes ? "truncation.csv" : "convergence.csv"));
      for (const auto& row : res.rows) {
        if (row.replicate != 0) continue;
        const std::string prefix = (modes ? "m" : "n") + std::to_string(row.value) + "_";
        write_error_report(dir, prefix, row.report);
        for (const char* f : {"summary.csv", "mu_phi.csv", "sigma_phi.csv", "rho_eps.csv", "stats.meta"})
          if (std::filesystem::exists(dir / (prefix + f))) track(dir / (prefix + f));
      }
    }
  }

  KeyValues& m = out.manifest;
  m.set("tool", std::string("podwind"));
  m.set("version", std::string(kVersion));
  const KeyValues canonical = cfg.to_key_values();
  for (const auto& [k, v] : canonical.entries()) m.set("config." + k, v);
  m.set("config_sha256", sha256_hex(canonical.str()));
  for (const JobKey& job : cfg.jobs()) m.set_u64("seed." + job.tag(), job_seed(cfg.seed, job));
  for (const auto& [tag, paths] : cfg.records)
    for (std::size_t i = 0; i < paths.size(); ++i)
      m.set("input." + tag + "." + std::to_string(i) + ".sha256", sha256_file(paths[i]));
  for (const auto& p : written)
    m.set("output." + std::filesystem::relative(p, cfg.out_dir).generic_string() + ".sha256", sha256_file(p));
  for (const auto& res : out.variability)
    if (!res.flagged.empty()) {
      std::string s;
      for (std::size_t i = 0; i < res.flagged.size(); ++i) s += (i ? "," : "") + std::to_string(res.flagged[i]);
      m.set("flagged." + res.job.tag(), s);
    }
  for (std::size_t i = 0; i < out.warnings.size(); ++i) {
    char key[32];
    std::snprintf(key, sizeof key, "warning.%03zu", i + 1);
    m.set(key, out.warnings[i]);
  }
  out.manifest_sha256 = sha256_hex(m.str());
  KeyValues file = m;
  file.set("manifest_sha256", out.manifest_sha256);
  std::filesystem::create_directories(cfg.out_dir);
  file.save(cfg.out_dir / ("manifest_" + std::string(to_string(cfg.study)) + ".meta"));
  return out;
}

}  // namespace podwind
