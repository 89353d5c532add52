#include "podwind/archive.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "podwind/errors.hpp"

namespace podwind {
namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::configuration, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::configuration, "cannot write " + path.string());
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ',';
    s += items[i];
  }
  return s;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Numeric table after a header row. Empty lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<double> values;  // row-major
  std::size_t rows = 0;
};

Table read_table(const fs::path& path) {
  const std::string text = read_text(path);
  Table t;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!have_header) {
      t.header = split(line, ',');
      have_header = true;
      continue;
    }
    std::size_t cols = 0;
    const char* p = line.data();
    const char* const stop = line.data() + line.size();
    while (true) {
      while (p < stop && (*p == ' ' || *p == '\t')) ++p;
      double v = 0.0;
      const char* q = p;
      if (q < stop && *q == '+') ++q;
      auto res = std::from_chars(q, stop, v);
      if (res.ec != std::errc()) {
        const char* e = q;
        while (e < stop && *e != ',') ++e;
        try {
          v = parse_double(std::string_view(p, static_cast<std::size_t>(e - p)));
        } catch (const Error&) {
          throw Error(Errc::data_quality, path.filename().string() + " line " + std::to_string(line_no) +
                                              ": malformed number");
        }
        res.ptr = e;
      }
      t.values.push_back(v);
      ++cols;
      p = res.ptr;
      while (p < stop && (*p == ' ' || *p == '\t')) ++p;
      if (p == stop) break;
      if (*p != ',')
        throw Error(Errc::data_quality, path.filename().string() + " line " + std::to_string(line_no) +
                                            ": unexpected character");
      ++p;
    }
    if (cols != t.header.size())
      throw Error(Errc::shape, path.filename().string() + " line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(t.header.size()) + " fields, found " + std::to_string(cols));
    ++t.rows;
  }
  if (!have_header) throw Error(Errc::data_quality, path.string() + " is empty");
  return t;
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void write_series(const fs::path& path, const std::vector<std::string>& names, const Eigen::MatrixXd& x,
                  double sample_rate) {
  std::string out = "time," + join(names) + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(x.size()) * 24);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    append_number(out, static_cast<double>(r) / sample_rate);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out += ',';
      append_number(out, x(r, c));
    }
    out += '\n';
  }
  open_out(path) << out;
}

// The time column may start anywhere but must step by 1/fs.
Eigen::MatrixXd series_values(const Table& t, double sample_rate, const fs::path& path) {
  const auto rows = static_cast<Eigen::Index>(t.rows);
  const auto cols = static_cast<Eigen::Index>(t.header.size());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> all(
      t.values.data(), rows, cols);
  const double dt = 1.0 / sample_rate;
  for (Eigen::Index r = 1; r < rows; ++r) {
    const double expected = all(0, 0) + static_cast<double>(r) * dt;
    if (!(std::abs(all(r, 0) - expected) <= 1e-6 * dt + 1e-9 * std::abs(expected)))
      throw Error(Errc::data_quality, path.string() + ": non-uniform sampling at row " + std::to_string(r + 1));
  }
  return all.rightCols(cols - 1);
}

// Binary header ---------------------------------------------------------------

void write_header(std::ofstream& out, const std::string& magic, const KeyValues& kv) {
  out << magic << '\n' << kv.str() << "end_header\n";
}

KeyValues read_header(std::ifstream& in, const std::string& magic, const fs::path& path) {
  std::string line;
  if (!std::getline(in, line) || line != magic)
    throw Error(Errc::data_quality, path.string() + " is not a " + magic + " archive");
  std::string body;
  while (std::getline(in, line)) {
    if (line == "end_header") return KeyValues::parse(body);
    body += line + '\n';
  }
  throw Error(Errc::data_quality, path.string() + ": truncated header");
}

void write_doubles(std::ofstream& out, const double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      auto u = std::bit_cast<std::uint64_t>(p[i]);
      unsigned char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(u >> (8 * k));
      out.write(reinterpret_cast<const char*>(b), 8);
    }
  }
}

void read_doubles(std::ifstream& in, double* p, std::size_t n, const fs::path& path) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
    throw Error(Errc::data_quality, path.string() + ": truncated data block");
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < n; ++i) {
      unsigned char b[8];
      std::memcpy(b, p + i, 8);
      std::uint64_t u = 0;
      for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(b[k]) << (8 * k);
      p[i] = std::bit_cast<double>(u);
    }
  }
}

void expect_end(std::ifstream& in, const fs::path& path) {
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(Errc::data_quality, path.string() + ": trailing bytes after data block");
}

KeyValues grid_header(std::size_t n, std::size_t lines, double dw, const std::vector<std::string>& labels) {
  KeyValues kv;
  kv.set("N", n);
  kv.set("N_l", lines);
  kv.set("delta_omega_rad_s", dw);
  kv.set("sided", std::string("two"));
  kv.set("labels", join(labels));
  return kv;
}

struct GridInfo {
  std::size_t n, lines;
  double dw;
  std::vector<std::string> labels;
};

GridInfo parse_grid(const KeyValues& kv, const fs::path& path) {
  GridInfo g{kv.get_size("N", 0), kv.get_size("N_l", 0), kv.get_double("delta_omega_rad_s"),
             kv.get_strings("labels")};
  if (kv.get("sided", "two") != "two")
    throw Error(Errc::data_quality, path.string() + ": only two-sided archives are supported");
  if (g.n == 0 || g.lines == 0 || !(g.dw > 0.0) || !std::isfinite(g.dw))
    throw Error(Errc::data_quality, path.string() + ": invalid grid in header");
  if (!g.labels.empty() && g.labels.size() != g.n)
    throw Error(Errc::data_quality, path.string() + ": label count does not match N");
  return g;
}

}  // namespace

fs::path sidecar_path(const fs::path& data_file) {
  fs::path p = data_file;
  p.replace_extension(".meta");
  return p;
}

// Tap layout ------------------------------------------------------------------

std::vector<Tap> read_tap_layout(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<Tap> taps;
  bool header = true;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    if (trim(raw).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split(raw, ',');
    if (f.size() != 6 && f.size() != 9)
      throw Error(Errc::configuration, "tap layout line " + std::to_string(line_no) + ": expected 6 or 9 fields");
    Tap t;
    t.id = f[0];
    const double floor = parse_double(f[1]);
    if (floor != std::floor(floor))
      throw Error(Errc::geometry, "tap " + t.id + ": floor must be an integer");
    t.floor = static_cast<int>(floor);
    t.area_m2 = parse_double(f[2]);
    t.nx = parse_double(f[3]);
    t.ny = parse_double(f[4]);
    t.lever_arm_m = parse_double(f[5]);
    if (f.size() == 9) t.influence = {parse_double(f[6]), parse_double(f[7]), parse_double(f[8])};
    taps.push_back(std::move(t));
  }
  if (taps.empty()) throw Error(Errc::configuration, path.string() + " lists no taps");
  return taps;
}

void write_tap_layout(const fs::path& path, std::span<const Tap> taps) {
  bool infl = false;
  for (const Tap& t : taps) infl = infl || t.influence.has_value();
  std::string out = "tap_id,floor,area_m2,nx,ny,lever_arm_m";
  if (infl) out += ",influence_fx,influence_fy,influence_tz";
  out += '\n';
  for (const Tap& t : taps) {
    out += t.id + "," + std::to_string(t.floor) + "," + format_double(t.area_m2) + "," + format_double(t.nx) +
           "," + format_double(t.ny) + "," + format_double(t.lever_arm_m);
    if (infl) {
      const auto c = t.influence.value_or(std::array<double, 3>{t.area_m2 * t.nx, t.area_m2 * t.ny,
                                                                 t.area_m2 * t.lever_arm_m});
      for (double v : c) out += "," + format_double(v);
    }
    out += '\n';
  }
  open_out(path) << out;
}

// Geometry --------------------------------------------------------------------

BuildingGeometry read_geometry(const fs::path& path) {
  const KeyValues kv = KeyValues::load(path);
  BuildingGeometry g;
  g.n_floors = kv.get_size("n_floors", 0);
  g.height_m = kv.get_double("height_m");
  g.bx_m = kv.get_double("bx_m");
  g.by_m = kv.get_double("by_m");
  g.floor_elevations_m = kv.get_doubles("floor_elevations_m");
  g.validate();
  return g;
}

void write_geometry(const fs::path& path, const BuildingGeometry& g) {
  KeyValues kv;
  kv.set("n_floors", g.n_floors);
  kv.set("height_m", g.height_m);
  kv.set("bx_m", g.bx_m);
  kv.set("by_m", g.by_m);
  kv.set("floor_elevations_m", g.floor_elevations_m);
  kv.save(path);
}

// Pressure records ------------------------------------------------------------

TapRecord read_pressure_record(const fs::path& csv, std::vector<Tap> taps) {
  const Table t = read_table(csv);
  const KeyValues kv = KeyValues::load(sidecar_path(csv));
  TapRecord rec;
  rec.sample_rate = kv.get_double("sample_rate_hz");
  rec.p0_pa = kv.get_double("p0_pa");
  rec.air_density = kv.get_double("rho_kg_m3");
  rec.wind_speed = kv.get_double("uh_m_s");
  rec.direction_deg = kv.get_double("direction_deg", 0.0);
  rec.configuration = parse_configuration(kv.get("configuration", "SM"));
  if (!(rec.sample_rate > 0.0)) throw Error(Errc::configuration, "sample rate must be positive");

  const Eigen::MatrixXd all = series_values(t, rec.sample_rate, csv);
  rec.pressures.resize(all.rows(), static_cast<Eigen::Index>(taps.size()));
  for (std::size_t j = 0; j < taps.size(); ++j) {
    std::size_t col = 0;
    while (col + 1 < t.header.size() && t.header[col + 1] != taps[j].id) ++col;
    if (col + 1 >= t.header.size())
      throw Error(Errc::data_quality, "pressure file has no column for tap " + taps[j].id);
    rec.pressures.col(static_cast<Eigen::Index>(j)) = all.col(static_cast<Eigen::Index>(col));
  }
  rec.taps = std::move(taps);
  return rec;
}

void write_pressure_record(const fs::path& csv, const TapRecord& rec) {
  std::vector<std::string> ids;
  for (const Tap& t : rec.taps) ids.push_back(t.id);
  write_series(csv, ids, rec.pressures, rec.sample_rate);
  KeyValues kv;
  kv.set("sample_rate_hz", rec.sample_rate);
  kv.set("p0_pa", rec.p0_pa);
  kv.set("rho_kg_m3", rec.air_density);
  kv.set("uh_m_s", rec.wind_speed);
  kv.set("direction_deg", rec.direction_deg);
  kv.set("configuration", std::string(to_string(rec.configuration)));
  kv.save(sidecar_path(csv));
}

// RecordSet archives ----------------------------------------------------------

RecordSet read_record_set(const fs::path& csv) {
  const Table t = read_table(csv);
  const KeyValues kv = KeyValues::load(sidecar_path(csv));
  RecordSet rs;
  rs.sample_rate = kv.get_double("sample_rate_hz");
  if (!(rs.sample_rate > 0.0)) throw Error(Errc::configuration, "sample rate must be positive");
  rs.components = series_values(t, rs.sample_rate, csv);
  rs.direction_deg = kv.get_double("direction_deg", 0.0);
  rs.configuration = parse_configuration(kv.get("configuration", "SM"));
  rs.labels = kv.get_strings("labels");
  if (rs.labels.empty()) rs.labels.assign(t.header.begin() + 1, t.header.end());
  rs.means = to_eigen(kv.get_doubles("means"));
  if (rs.means.size() == 0) rs.means = Eigen::VectorXd::Zero(rs.components.cols());
  rs.scale = to_eigen(kv.get_doubles("scale"));
  rs.validate();
  return rs;
}

void write_record_set(const fs::path& csv, const RecordSet& rs) {
  rs.validate();
  write_series(csv, rs.labels, rs.components, rs.sample_rate);
  KeyValues kv;
  kv.set("sample_rate_hz", rs.sample_rate);
  kv.set("direction_deg", rs.direction_deg);
  kv.set("configuration", std::string(to_string(rs.configuration)));
  kv.set("labels", join(rs.labels));
  kv.set("means", to_vector(rs.means));
  kv.set("scale", to_vector(rs.scale));
  kv.set("n_samples", rs.n_samples());
  kv.save(sidecar_path(csv));
}

// Binary archives -------------------------------------------------------------

void write_cpsd(const fs::path& path, const CpsdMatrix& s) {
  auto out = open_out(path);
  write_header(out, "podwind-cpsd 1", grid_header(s.n_components(), s.n_lines(), s.delta_omega(), s.labels()));
  const auto v = s.values();
  write_doubles(out, reinterpret_cast<const double*>(v.data()), 2 * v.size());
  if (!out) throw Error(Errc::configuration, "write failed for " + path.string());
}

CpsdMatrix read_cpsd(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::configuration, "cannot open " + path.string());
  const GridInfo g = parse_grid(read_header(in, "podwind-cpsd 1", path), path);
  CpsdMatrix s(g.n, g.lines, g.dw, g.labels);
  auto v = s.values();
  read_doubles(in, reinterpret_cast<double*>(v.data()), 2 * v.size(), path);
  expect_end(in, path);
  check_invariants(s);
  return s;
}

void write_modes(const fs::path& path, const SpectralModes& m) {
  auto out = open_out(path);
  write_header(out, "podwind-modes 1", grid_header(m.n_components(), m.n_lines(), m.delta_omega(), m.labels()));
  const auto lam = m.eigenvalue_data();
  const auto psi = m.eigenvector_data();
  write_doubles(out, lam.data(), lam.size());
  write_doubles(out, reinterpret_cast<const double*>(psi.data()), 2 * psi.size());
  if (!out) throw Error(Errc::configuration, "write failed for " + path.string());
}

SpectralModes read_modes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::configuration, "cannot open " + path.string());
  const GridInfo g = parse_grid(read_header(in, "podwind-modes 1", path), path);
  SpectralModes m(g.n, g.lines, g.dw, g.labels);
  auto lam = m.eigenvalue_data();
  auto psi = m.eigenvector_data();
  read_doubles(in, lam.data(), lam.size(), path);
  read_doubles(in, reinterpret_cast<double*>(psi.data()), 2 * psi.size(), path);
  expect_end(in, path);
  for (std::size_t k = 0; k < g.lines; ++k)
    for (std::size_t i = 0; i < g.n; ++i) {
      const double v = m.eigenvalue(k, i);
      if (!std::isfinite(v)) throw Error(Errc::invalid_input, path.string() + ": non-finite eigenvalue");
      if (i > 0 && v > m.eigenvalue(k, i - 1))
        throw Error(Errc::invalid_input, path.string() + ": eigenvalues not sorted at line " + std::to_string(k));
    }
  for (const cplx& c : psi)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error(Errc::invalid_input, path.string() + ": non-finite eigenvector entry");
  return m;
}

// Reports ---------------------------------------------------------------------

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m, const std::vector<std::string>& row_labels,
                  const std::vector<std::string>& col_labels) {
  std::string out = "label," + join(col_labels) + "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out += row_labels.at(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  open_out(path) << out;
}

KeyValues report_statistics(const ErrorReport& r) {
  KeyValues kv;
  kv.set("n_records", r.n_records);
  kv.set("direction_deg", r.meta.direction_deg);
  kv.set("configuration", std::string(to_string(r.meta.configuration)));
  kv.set("E_mu_eps_pct", r.e_mu_eps);
  kv.set("E_sigma_eps_pct", r.e_sigma_eps);
  kv.set("E_mu_phi", r.e_mu_phi);
  kv.set("E_sigma_phi", r.e_sigma_phi);
  kv.set("min_mu_eps_pct", r.min_mu_eps);
  kv.set("max_mu_eps_pct", r.max_mu_eps);
  kv.set("min_sigma_eps_pct", r.min_sigma_eps);
  kv.set("max_sigma_eps_pct", r.max_sigma_eps);
  kv.set("min_mu_phi", r.min_mu_phi);
  kv.set("max_mu_phi", r.max_mu_phi);
  kv.set("min_sigma_phi", r.min_sigma_phi);
  kv.set("max_sigma_phi", r.max_sigma_phi);
  return kv;
}

void write_error_report(const fs::path& dir, const std::string& prefix, const ErrorReport& r) {
  fs::create_directories(dir);
  const auto& labels = r.meta.labels;
  const auto n = static_cast<Eigen::Index>(labels.size());
  std::string out = "quantity,label_i,label_j,mu,sigma,min,max\n";
  auto row = [&out](const std::string& q, const std::string& a, const std::string& b, double mu, double sd,
                    double lo, double hi) {
    out += q + "," + a + "," + b + "," + format_double(mu) + "," + format_double(sd) + "," + format_double(lo) +
           "," + format_double(hi) + "\n";
  };
  for (Eigen::Index i = 0; i < n; ++i)
    row("epsilon_pct", labels[i], "", r.mu_eps(i), r.sigma_eps(i), r.min_eps(i), r.max_eps(i));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      row("phi", labels[i], labels[j], r.mu_phi(i, j), r.sigma_phi(i, j), r.min_phi(i, j), r.max_phi(i, j));
  open_out(dir / (prefix + "summary.csv")) << out;

  if (r.epsilon.rows() > 0) {
    std::vector<std::string> rows;
    for (Eigen::Index k = 0; k < r.epsilon.rows(); ++k) rows.push_back(std::to_string(k));
    write_matrix(dir / (prefix + "epsilon_records.csv"), r.epsilon, rows, labels);
  }
  write_matrix(dir / (prefix + "mu_phi.csv"), r.mu_phi, labels, labels);
  write_matrix(dir / (prefix + "sigma_phi.csv"), r.sigma_phi, labels, labels);
  if (r.rho_eps.size() != 0) write_matrix(dir / (prefix + "rho_eps.csv"), r.rho_eps, labels, labels);
  report_statistics(r).save(dir / (prefix + "stats.meta"));
}

}  // namespace podwind
