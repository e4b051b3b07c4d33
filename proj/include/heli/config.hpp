#pragma once

// Minimal `key = value` / `[section]` configuration reader shared by the
// parameter, gain and scenario files.

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace heli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

/// Ordered list of entries; repeated keys are kept (scenario files use them
/// for gust and segment lists).
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>") {
    Config cfg;
    cfg.origin_ = origin;
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = strip(raw.substr(0, raw.find('#')));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ConfigError(origin + ":" + std::to_string(line_no) +
                            ": malformed section header");
        }
        section = strip(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": expected `key = value`");
      }
      ConfigEntry e{section, strip(line.substr(0, eq)),
                    strip(line.substr(eq + 1)), line_no};
      if (e.key.empty()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
      }
      cfg.entries_.push_back(std::move(e));
    }
    return cfg;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in, path);
  }

  static Config from_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  const std::vector<ConfigEntry>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }

  std::string where(const ConfigEntry& e) const {
    return origin_ + ":" + std::to_string(e.line);
  }

 private:
  static std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::string origin_;
  std::vector<ConfigEntry> entries_;
};

inline double parse_double(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": not a number: '" + text + "'");
  }
  if (used != text.size()) {
    throw ConfigError(where + ": trailing characters in number: '" + text + "'");
  }
  return v;
}

inline std::vector<double> parse_doubles(const std::string& text,
                                         const std::string& where) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    if (tok.back() == ',') tok.pop_back();
    if (!tok.empty()) out.push_back(parse_double(tok, where));
  }
  return out;
}

inline Eigen::MatrixXd parse_matrix(const std::string& text, Eigen::Index rows,
                                    Eigen::Index cols, const std::string& where) {
  const auto v = parse_doubles(text, where);
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw ConfigError(where + ": expected " + std::to_string(rows * cols) +
                      " values (row-major " + std::to_string(rows) + "x" +
                      std::to_string(cols) + "), got " +
                      std::to_string(v.size()));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[i * cols + j];
  return m;
}

}  // namespace heli
