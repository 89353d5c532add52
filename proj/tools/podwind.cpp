// podwind command-line front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "podwind/archive.hpp"
#include "podwind/errors.hpp"
#include "podwind/ingest.hpp"
#include "podwind/key_value.hpp"
#include "podwind/pod.hpp"
#include "podwind/spectral.hpp"
#include "podwind/srm.hpp"
#include "podwind/study.hpp"
#include "podwind/synthetic.hpp"

namespace fs = std::filesystem;
using namespace podwind;

namespace {

struct Shared {
  std::string config;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::size_t threads = 1;
};

void add_shared(CLI::App* sub, Shared& s, bool config_is_defaults = true) {
  if (config_is_defaults)
    sub->set_config("--config", "", "key=value file with defaults for this command's options");
  else
    sub->add_option("--config", s.config, "study configuration (key=value)")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", s.seed, "random seed");
  sub->add_option("--out-dir", s.out_dir, "output directory");
  sub->add_option("--threads", s.threads, "worker threads")->check(CLI::PositiveNumber);
}

Window parse_window(const std::string& s) {
  if (s == "rect" || s == "rectangular") return Window::rectangular;
  if (s == "hann" || s == "hanning") return Window::hanning;
  throw Error(Errc::configuration, "unknown window '" + s + "'");
}

void say(const std::string& s) { std::cout << s << '\n'; }

fs::path out_path(const Shared& s, const std::string& name) {
  fs::create_directories(s.out_dir);
  return fs::path(s.out_dir) / name;
}

// ingest ----------------------------------------------------------------------

struct IngestArgs {
  std::string taps, geometry, synthetic;
  std::vector<std::string> pressure;
  double filter_hz = 0.0;
  bool standardize = false;
  std::size_t repetitions = 0;
};

void run_ingest(const Shared& s, const IngestArgs& a) {
  if (!a.synthetic.empty()) {
    const SyntheticSpec spec = SyntheticSpec::from(KeyValues::load(a.synthetic));
    const SyntheticSource src(spec, s.seed);
    const std::size_t n = a.repetitions ? a.repetitions : spec.n_repetitions;
    for (std::size_t r = 0; r < n; ++r) {
      char name[32];
      std::snprintf(name, sizeof name, "rep_%03zu.csv", r);
      RecordSet rs = src.record(r);
      if (a.filter_hz > 0.0) rs = lowpass(rs, {2, a.filter_hz});
      if (a.standardize) rs = standardize(rs);
      write_record_set(out_path(s, name), rs);
      say("wrote " + out_path(s, name).string());
    }
    return;
  }
  if (a.taps.empty() || a.geometry.empty() || a.pressure.empty())
    throw Error(Errc::configuration, "ingest needs --taps, --geometry and --pressure (or --synthetic)");
  const std::vector<Tap> taps = read_tap_layout(a.taps);
  const BuildingGeometry geom = read_geometry(a.geometry);
  for (const auto& file : a.pressure) {
    const TapRecord rec = read_pressure_record(file, taps);
    const double q = rec.dynamic_pressure();
    FloorForces forces = integrate_floor_forces(pressure_coefficients(rec), q, geom, rec.taps);
    forces.sample_rate = rec.sample_rate;
    forces.direction_deg = rec.direction_deg;
    forces.configuration = rec.configuration;
    RecordSet rs = force_coefficients(forces, geom, q);
    if (a.filter_hz > 0.0) rs = lowpass(rs, {2, a.filter_hz});
    if (a.standardize) rs = standardize(rs);
    const fs::path out = out_path(s, fs::path(file).stem().string() + "_forces.csv");
    write_record_set(out, rs);
    say("wrote " + out.string());
  }
}

// spectra / target ------------------------------------------------------------

struct SpectraArgs {
  std::vector<std::string> input;
  std::string window = "hann";
  double overlap = 0.5;
  double segment_seconds = 4.0;
  double cutoff_hz = 50.0;
  double filter_hz = 0.0;
};

void run_spectra(const Shared& s, const SpectraArgs& a) {
  for (const auto& file : a.input) {
    RecordSet rs = read_record_set(file);
    if (a.filter_hz > 0.0) rs = lowpass(rs, {2, a.filter_hz});
    const WelchConfig cfg = WelchConfig::from_seconds(rs.sample_rate, a.segment_seconds, a.overlap, parse_window(a.window));
    const CpsdMatrix spec = truncate_to_cutoff(welch_cpsd(rs, cfg), a.cutoff_hz);
    const fs::path out = out_path(s, fs::path(file).stem().string() + ".cpsd");
    write_cpsd(out, spec);
    say("wrote " + out.string() + " (" + std::to_string(cfg.segment_count(rs.n_samples())) + " segments, " +
        std::to_string(spec.n_lines()) + " lines)");
  }
}

struct TargetArgs {
  std::vector<std::string> input;
  std::string synthetic;
  double target_seconds = 600.0;
  double segment_seconds = 4.0;
  double pad_seconds = 0.0;
  double cutoff_hz = 50.0;
  std::string name = "target.cpsd";
};

void run_target(const Shared& s, const TargetArgs& a) {
  CpsdMatrix target;
  if (!a.synthetic.empty()) {
    const SyntheticSpec spec = SyntheticSpec::from(KeyValues::load(a.synthetic));
    target = truncate_to_cutoff(analytic_cpsd(spec, a.pad_seconds > 0 ? a.pad_seconds : a.segment_seconds), a.cutoff_hz);
  } else {
    if (a.input.empty()) throw Error(Errc::configuration, "target needs --input or --synthetic");
    std::vector<RecordSet> segments;
    for (const auto& file : a.input) {
      RecordSet rs = read_record_set(file);
      if (a.target_seconds > 0.0) rs = slice(rs, 0, std::min(rs.n_samples(), samples_for(a.target_seconds, rs.sample_rate)));
      for (auto& seg : chop(rs, a.segment_seconds)) segments.push_back(std::move(seg));
    }
    const std::size_t nfft =
        a.pad_seconds > 0.0 ? samples_for(a.pad_seconds, segments.front().sample_rate) : 0;
    target = truncate_to_cutoff(target_cpsd(segments, nfft), a.cutoff_hz);
    say("averaged " + std::to_string(segments.size()) + " segments");
  }
  const fs::path out = out_path(s, a.name);
  write_cpsd(out, target);
  say("wrote " + out.string() + " (" + std::to_string(target.n_lines()) + " lines)");
}

// decompose -------------------------------------------------------------------

void run_decompose(const Shared& s, const std::string& input, const std::string& name) {
  const SpectralModes m = decompose(read_cpsd(input));
  const fs::path out = out_path(s, name);
  write_modes(out, m);
  std::string table = "n_modes,captured_energy\n";
  for (std::size_t k = 1; k <= m.n_components(); ++k)
    table += std::to_string(k) + "," + format_double(captured_energy(m, k).total) + "\n";
  std::ofstream(out_path(s, "captured_energy.csv")) << table;
  std::cout << table;
  say("wrote " + out.string());
}

// simulate --------------------------------------------------------------------

struct SimulateArgs {
  std::string modes_file, target;
  std::size_t n_modes = 0;
  std::size_t samples = 1;
  double duration_s = 0.0;
  double dt_s = 1.0 / 625.0;
  double cutoff_hz = 50.0;
  bool summary_only = false;
};

void run_simulate(const Shared& s, const SimulateArgs& a) {
  SimulationPlan plan;
  plan.modes = std::make_shared<SpectralModes>(read_modes(a.modes_file));
  plan.n_modes = a.n_modes;
  plan.n_realizations = a.samples;
  plan.seed = s.seed;
  plan.duration_s = a.duration_s;
  plan.dt_s = a.dt_s;
  plan.validate();

  BatchOptions opt;
  opt.threads = s.threads;
  std::optional<CpsdMatrix> target;
  if (!a.target.empty()) {
    target = read_cpsd(a.target);
    opt.target = EnsembleAccumulator::Target{moments(*target, a.cutoff_hz), a.cutoff_hz};
  }
  if (!a.summary_only) {
    fs::create_directories(s.out_dir);
    opt.sink = [&](std::uint64_t r, const RecordSet& rs) {
      char name[40];
      std::snprintf(name, sizeof name, "realization_%05llu.csv", static_cast<unsigned long long>(r));
      write_record_set(fs::path(s.out_dir) / name, rs);
    };
  }
  const EnsembleAccumulator acc = simulate_batch(plan, opt);
  const fs::path out = out_path(s, "ensemble.cpsd");
  write_cpsd(out, acc.mean_spectra());
  say("simulated " + std::to_string(acc.count()) + " realizations of " + std::to_string(plan.n_steps()) +
      " steps with " + std::to_string(plan.mode_count()) + " modes");
  say("wrote " + out.string());
  if (acc.tracks_errors()) {
    const ErrorReport rep = ensemble_report(acc, {plan.modes->labels(), 0.0, Configuration::SM});
    write_error_report(s.out_dir, "ensemble_", rep);
    std::cout << report_statistics(rep).str();
  }
}

// errors ----------------------------------------------------------------------

struct ErrorsArgs {
  std::string target;
  std::vector<std::string> test;
  double cutoff_hz = 50.0;
  double direction_deg = 0.0;
  std::string configuration = "SM";
};

void run_errors(const Shared& s, const ErrorsArgs& a) {
  const CpsdMatrix target = read_cpsd(a.target);
  const SpectralMoments tm = moments(target, a.cutoff_hz);
  std::vector<RecordErrors> errs;
  for (const auto& file : a.test) errs.push_back(compare(moments(read_cpsd(file), a.cutoff_hz), tm));
  const ErrorReport rep =
      aggregate(errs, {target.labels(), a.direction_deg, parse_configuration(a.configuration)});
  write_error_report(s.out_dir, "", rep);
  std::cout << report_statistics(rep).str();
}

// study -----------------------------------------------------------------------

void run_study_cmd(const Shared& s, CLI::App* sub) {
  KeyValues kv = KeyValues::load(s.config);
  if (sub->count("--seed")) kv.set_u64("seed", s.seed);
  if (sub->count("--threads")) kv.set("threads", s.threads);
  if (sub->count("--out-dir")) kv.set("out_dir", s.out_dir);
  const StudyConfig cfg = StudyConfig::from(kv, fs::path(s.config).parent_path());
  const StudyOutcome out = run_study(cfg);
  for (const auto& r : out.variability)
    say(r.job.tag() + ": records=" + std::to_string(r.report.n_records) + " E[mu_eps]=" +
        format_double(r.report.e_mu_eps) + "% E[sigma_eps]=" + format_double(r.report.e_sigma_eps) +
        "% E[sigma_phi]=" + format_double(r.report.e_sigma_phi));
  for (const auto& l : out.ladders)
    for (const auto& row : l.rows)
      say(l.job.tag() + ": " + (cfg.study == StudyKind::truncation ? "modes=" : "samples=") +
          std::to_string(row.value) + " replicate=" + std::to_string(row.replicate) +
          " E[mu_eps]=" + format_double(row.report.e_mu_eps) + "% E[mu_phi]=" + format_double(row.report.e_mu_phi));
  say("manifest sha256 " + out.manifest_sha256);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"POD-based spectral representation of stochastic wind loads"};
  app.require_subcommand(1);
  Shared shared;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "tap pressures to floor force-coefficient records");
  add_shared(c_ingest, shared);
  c_ingest->add_option("--taps", ingest.taps, "tap layout CSV");
  c_ingest->add_option("--geometry", ingest.geometry, "building geometry (key=value)");
  c_ingest->add_option("--pressure", ingest.pressure, "pressure CSV, one per repetition");
  c_ingest->add_option("--synthetic", ingest.synthetic, "draw repetitions from a synthetic spec instead");
  c_ingest->add_option("--repetitions", ingest.repetitions, "synthetic repetitions (default: spec value)");
  c_ingest->add_option("--filter-hz", ingest.filter_hz, "Butterworth low-pass cutoff (0: off)");
  c_ingest->add_flag("--standardize", ingest.standardize, "divide by sigma times the reduced variate");

  SpectraArgs spectra;
  auto* c_spectra = app.add_subcommand("spectra", "Welch CPSD of records");
  add_shared(c_spectra, shared);
  c_spectra->add_option("--input", spectra.input, "RecordSet archives")->required();
  c_spectra->add_option("--window", spectra.window, "rect or hann")->check(CLI::IsMember({"rect", "hann"}));
  c_spectra->add_option("--overlap", spectra.overlap, "fractional overlap");
  c_spectra->add_option("--segment-seconds", spectra.segment_seconds, "Welch segment length");
  c_spectra->add_option("--cutoff-hz", spectra.cutoff_hz, "highest frequency kept");
  c_spectra->add_option("--filter-hz", spectra.filter_hz, "Butterworth low-pass cutoff (0: off)");

  TargetArgs target;
  auto* c_target = app.add_subcommand("target", "ensemble-averaged target CPSD");
  add_shared(c_target, shared);
  c_target->add_option("--input", target.input, "RecordSet archives, one per repetition");
  c_target->add_option("--synthetic", target.synthetic, "write the analytic CPSD of a synthetic spec");
  c_target->add_option("--target-seconds", target.target_seconds, "leading seconds of each input used (0: all)");
  c_target->add_option("--segment-seconds", target.segment_seconds, "segment length");
  c_target->add_option("--pad-seconds", target.pad_seconds, "zero-pad segments to this length (0: none)");
  c_target->add_option("--cutoff-hz", target.cutoff_hz, "highest frequency kept");
  c_target->add_option("--name", target.name, "output file name");

  std::string decompose_input, decompose_name = "modes.bin";
  auto* c_decompose = app.add_subcommand("decompose", "per-frequency eigendecomposition");
  add_shared(c_decompose, shared);
  c_decompose->add_option("--input", decompose_input, "CPSD archive")->required()->check(CLI::ExistingFile);
  c_decompose->add_option("--name", decompose_name, "output file name");

  SimulateArgs simulate;
  auto* c_simulate = app.add_subcommand("simulate", "spectral representation realizations");
  add_shared(c_simulate, shared);
  c_simulate->add_option("--modes-file", simulate.modes_file, "modes archive")->required()->check(CLI::ExistingFile);
  c_simulate->add_option("--n-modes", simulate.n_modes, "contributing modes (0: all)");
  c_simulate->add_option("--samples", simulate.samples, "number of realizations")->check(CLI::PositiveNumber);
  c_simulate->add_option("--duration-s", simulate.duration_s, "realization length (0: one period)");
  c_simulate->add_option("--dt-s", simulate.dt_s, "time step");
  c_simulate->add_option("--target", simulate.target, "CPSD archive to score the ensemble against");
  c_simulate->add_option("--cutoff-hz", simulate.cutoff_hz, "integration limit for scoring");
  c_simulate->add_flag("--summary-only", simulate.summary_only, "write only the ensemble spectra");

  ErrorsArgs errors;
  auto* c_errors = app.add_subcommand("errors", "variance and correlation errors against a target");
  add_shared(c_errors, shared);
  c_errors->add_option("--target", errors.target, "target CPSD archive")->required()->check(CLI::ExistingFile);
  c_errors->add_option("--test", errors.test, "test CPSD archives")->required();
  c_errors->add_option("--cutoff-hz", errors.cutoff_hz, "integration limit");
  c_errors->add_option("--direction-deg", errors.direction_deg, "wind direction for the report");
  c_errors->add_option("--configuration", errors.configuration, "SM or PM");

  auto* c_study = app.add_subcommand("study", "variability, model-error or truncation study");
  add_shared(c_study, shared, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorKind::config);
  }

  try {
    if (*c_ingest) run_ingest(shared, ingest);
    else if (*c_spectra) run_spectra(shared, spectra);
    else if (*c_target) run_target(shared, target);
    else if (*c_decompose) run_decompose(shared, decompose_input, decompose_name);
    else if (*c_simulate) run_simulate(shared, simulate);
    else if (*c_errors) run_errors(shared, errors);
    else if (*c_study) run_study_cmd(shared, c_study);
  } catch (const Error& e) {
    std::cerr << "podwind: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "podwind: " << e.what() << '\n';
    return exit_code(ErrorKind::config);
  } catch (const std::exception& e) {
    std::cerr << "podwind: " << e.what() << '\n';
    return exit_code(ErrorKind::numerical);
  }
  return 0;
}
