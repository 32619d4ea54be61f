#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "cli/artifacts.hpp"
#include "cli/run.hpp"
#include "crackfreq/errors.hpp"

namespace fs = std::filesystem;

namespace crackfreq::cli {

using nlohmann::ordered_json;

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const fs::path& path) {
  std::istringstream in(read_file(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  std::istringstream h(line);
  for (std::string cell; std::getline(h, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream r(line);
    for (std::string cell; std::getline(r, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) / scale;
}

ordered_json load_manifest(const std::string& dir) {
  const fs::path p = fs::path(dir) / "manifest.json";
  if (!fs::exists(p)) throw InvalidArgument("compare: no manifest in " + dir);
  return ordered_json::parse(read_file(p));
}

}  // namespace

ordered_json compare(const std::string& run_a, const std::string& run_b) {
  const ordered_json a = load_manifest(run_a);
  const ordered_json b = load_manifest(run_b);
  if (a.at("scenario") != b.at("scenario"))
    throw ScenarioMismatch("compare: scenarios differ (" + a.at("scenario").get<std::string>() + " vs " +
                           b.at("scenario").get<std::string>() + ")");
  ordered_json report;
  report["scenario"] = a.at("scenario");
  report["run_a"] = run_a;
  report["run_b"] = run_b;
  double worst = 0.0;

  ordered_json metrics = ordered_json::object();
  for (const auto& [key, va] : a.at("metrics").items()) {
    if (!b.at("metrics").contains(key)) continue;
    const auto& vb = b.at("metrics").at(key);
    if (va.is_number() && vb.is_number()) {
      const double d = rel_diff(va.get<double>(), vb.get<double>());
      metrics[key] = {{"a", va}, {"b", vb}, {"relative_difference", d}};
      worst = std::max(worst, d);
    } else if (va.is_array() && vb.is_array() && va.size() == vb.size()) {
      double d = 0.0;
      for (std::size_t i = 0; i < va.size(); ++i)
        if (va[i].is_number() && vb[i].is_number()) d = std::max(d, rel_diff(va[i].get<double>(), vb[i].get<double>()));
      metrics[key] = {{"a", va}, {"b", vb}, {"relative_difference", d}};
      worst = std::max(worst, d);
    }
  }
  report["metrics"] = metrics;

  ordered_json tables = ordered_json::object();
  for (const char* name : {"trace.csv", "spectrum.csv", "clusters.csv", "blowup.csv", "phi.csv"}) {
    const fs::path pa = fs::path(run_a) / name;
    const fs::path pb = fs::path(run_b) / name;
    if (!fs::exists(pa) || !fs::exists(pb)) continue;
    const Table ta = read_table(pa);
    const Table tb = read_table(pb);
    if (ta.header != tb.header || ta.rows.size() != tb.rows.size()) {
      tables[name] = "shape differs";
      continue;
    }
    ordered_json cols = ordered_json::object();
    for (std::size_t c = 0; c < ta.header.size(); ++c) {
      double d = 0.0;
      for (std::size_t r = 0; r < ta.rows.size(); ++r)
        if (c < ta.rows[r].size() && c < tb.rows[r].size())
          d = std::max(d, rel_diff(ta.rows[r][c], tb.rows[r][c]));
      cols[ta.header[c]] = d;
      worst = std::max(worst, d);
    }
    tables[name] = cols;
  }
  report["tables"] = tables;
  report["max_relative_difference"] = worst;
  return report;
}

}  // namespace crackfreq::cli
