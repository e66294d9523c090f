#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bracketlab/errors.hpp"

namespace bracketlab {

inline constexpr int kReportSchemaVersion = 1;

inline std::string format_double17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct CheckEntry {
  std::string name;
  bool pass = false;
  double statistic = 0;
  double threshold = 0;
  double se = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["verdict"] = pass ? "pass" : "fail";
    j["statistic"] = statistic;
    j["threshold"] = threshold;
    j["se"] = se;
    return j;
  }
};

struct RunReport {
  nlohmann::json config;
  nlohmann::json seeds;
  std::vector<CheckEntry> checks;
  nlohmann::json extra;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["config"] = config;
    j["seeds"] = seeds;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back(c.to_json());
    if (!extra.is_null()) j["extra"] = extra;
    return j;
  }
};

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::IoError, "cannot open for writing: " + path);
  out << body;
  if (!out) raise(Errc::IoError, "write failed: " + path);
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  write_text_file(path, j.dump(2) + "\n");
}

// CSV with floats at 17 significant digits
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string body;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body += ',';
    body += header[i];
  }
  body += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) body += ',';
      body += format_double17(row[i]);
    }
    body += '\n';
  }
  write_text_file(path, body);
}

}  // namespace bracketlab
