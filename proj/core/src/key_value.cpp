#include "podwind/key_value.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "podwind/errors.hpp"

namespace podwind {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto pos = text.find(sep, begin);
    out.emplace_back(trim(text.substr(begin, pos == std::string_view::npos ? pos : pos - begin)));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "nan" || text == "NaN") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const char* begin = text.data();
  if (!text.empty() && text.front() == '+') ++begin;
  const auto res = std::from_chars(begin, text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(Errc::configuration, "cannot parse '" + std::string(text) + "' as a number");
  return v;
}

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::configuration, "line " + std::to_string(line_no) + ": expected key=value");
    kv.values_[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::configuration, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& KeyValues::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(Errc::configuration, "missing key '" + key + "'");
  return it->second;
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key) const { return parse_double(at(key)); }

double KeyValues::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::size_t KeyValues::get_size(const std::string& key, std::size_t fallback) const {
  return has(key) ? static_cast<std::size_t>(get_u64(key, 0)) : fallback;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& text = at(key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(Errc::configuration, "key '" + key + "' expects a non-negative integer");
  return v;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(Errc::configuration, "key '" + key + "' expects a boolean");
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
  std::vector<double> out;
  if (!has(key) || at(key).empty()) return out;
  for (const auto& item : split(at(key), ',')) out.push_back(parse_double(item));
  return out;
}

std::vector<std::size_t> KeyValues::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (double v : get_doubles(key)) {
    if (v < 0 || v != std::floor(v))
      throw Error(Errc::configuration, "key '" + key + "' expects non-negative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::string> KeyValues::get_strings(const std::string& key) const {
  if (!has(key) || at(key).empty()) return {};
  return split(at(key), ',');
}

void KeyValues::set(const std::string& key, double value) { values_[key] = format_double(value); }

void KeyValues::set(const std::string& key, std::size_t value) { values_[key] = std::to_string(value); }

void KeyValues::set_u64(const std::string& key, std::uint64_t value) {
  values_[key] = std::to_string(value);
}

void KeyValues::set(const std::string& key, const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_double(values[i]);
  }
  values_[key] = s;
}

std::string KeyValues::str() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

void KeyValues::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::configuration, "cannot write " + path.string());
  out << str();
}

}  // namespace podwind
