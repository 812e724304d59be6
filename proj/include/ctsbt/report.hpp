#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace ctsbt {

// One gated quantity. Every metric is residual-shaped: it passes iff
// value <= tolerance, so a report never needs per-metric comparison logic.
struct Metric {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline Metric gate(std::string name, double value, double tolerance) {
  return {std::move(name), value, tolerance, value <= tolerance};
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Experiment report: gated metrics plus the swept grid behind them.
// JSON carries inputs/metrics/pass, CSV carries the grid rows.
struct Report {
  std::string experiment;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<Metric> metrics;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_metric(const std::string& name, double value, double tolerance) {
    metrics.push_back(gate(name, value, tolerance));
  }

  void add_row(std::initializer_list<std::string> cells) {
    rows.emplace_back(cells);
    if (rows.back().size() != columns.size())
      throw std::logic_error("report row does not match columns");
  }

  bool pass() const {
    for (const Metric& m : metrics)
      if (!m.pass) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["experiment"] = experiment;
    j["inputs"] = inputs;
    j["metrics"] = nlohmann::json::array();
    for (const Metric& m : metrics) {
      j["metrics"].push_back({{"name", m.name},
                              {"value", m.value},
                              {"tolerance", m.tolerance},
                              {"pass", m.pass}});
    }
    j["pass"] = pass();
    return j;
  }

  std::string to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c)
      out += (c ? "," : "") + columns[c];
    out += "\n";
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        out += (c ? "," : "") + row[c];
      out += "\n";
    }
    return out;
  }

  // Writes <dir>/<experiment>.json and <dir>/<experiment>.csv.
  void write_files(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    const auto base = std::filesystem::path(dir) / experiment;
    std::ofstream js(base.string() + ".json");
    js << to_json().dump(2) << "\n";
    std::ofstream cs(base.string() + ".csv");
    cs << to_csv();
    if (!js || !cs)
      throw std::runtime_error("failed to write report files under " + dir);
  }
};

}  // namespace ctsbt
