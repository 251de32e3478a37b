#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mskit/error.hpp"
#include "mskit/msi.hpp"

namespace mskit {

/// Sample Pearson correlation coefficient.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail("pearson: vectors differ in length");
  if (x.size() < 3) fail("pearson: need at least 3 samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail("pearson: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

/// The four statistics compared against subjective scores.
struct CorrelationRow {
  double sigma_v = 0.0;
  double inv_sigma_v = 0.0;
  double sigma_a = 0.0;
  double msi = 0.0;
  std::size_t videos = 0;
};

/// Correlates each per-video statistic with the per-video score. Both maps
/// are keyed by video id and must cover the same ids.
inline CorrelationRow correlation_table(const std::map<std::string, RegionScore>& metrics,
                                        const std::map<std::string, double>& scores) {
  std::string missing;
  for (const auto& [id, _] : metrics)
    if (!scores.count(id)) missing += " " + id + "(no score)";
  for (const auto& [id, _] : scores)
    if (!metrics.count(id)) missing += " " + id + "(no metrics)";
  if (!missing.empty()) fail("video id mismatch:" + missing);
  if (metrics.size() < 3) fail(">= 3 videos required, got " + std::to_string(metrics.size()));

  std::vector<double> sv, isv, sa, m, s;
  for (const auto& [id, r] : metrics) {
    sv.push_back(r.sigma_v);
    isv.push_back(r.inv_sigma_v);
    sa.push_back(r.sigma_a);
    m.push_back(r.msi);
    s.push_back(scores.at(id));
  }
  CorrelationRow row;
  row.sigma_v = pearson(sv, s);
  row.inv_sigma_v = pearson(isv, s);
  row.sigma_a = pearson(sa, s);
  row.msi = pearson(m, s);
  row.videos = metrics.size();
  return row;
}

inline nlohmann::json to_json(const std::map<std::string, CorrelationRow>& table) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [region, r] : table)
    doc[region] = {{"sigma_v", r.sigma_v},
                   {"inv_sigma_v", r.inv_sigma_v},
                   {"sigma_a", r.sigma_a},
                   {"msi", r.msi},
                   {"videos", r.videos}};
  return doc;
}

/// Aligned text rendering, one row per region.
inline std::string format_correlation_table(const std::map<std::string, CorrelationRow>& table) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s %10s %10s %10s %7s\n", "region",
                "sigma(v)", "1/sigma(v)", "sigma(a)", "MSI", "videos");
  out += line;
  for (const auto& [region, r] : table) {
    std::snprintf(line, sizeof line, "%-10s %10.3f %10.3f %10.3f %10.3f %7zu\n",
                  region.c_str(), r.sigma_v, r.inv_sigma_v, r.sigma_a, r.msi, r.videos);
    out += line;
  }
  return out;
}

}  // namespace mskit
