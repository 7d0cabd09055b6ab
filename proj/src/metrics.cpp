#include "alertcast/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace alertcast {

const std::vector<double>& default_grid() {
  static const std::vector<double> grid = {5.0, 10.0, 30.0, 60.0, 120.0};
  return grid;
}

ToleranceReport evaluate(std::span<const PredPair> pairs, std::span<const double> grid) {
  if (pairs.empty()) {
    throw std::invalid_argument("evaluate: no prediction pairs");
  }
  for (double c : grid) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("evaluate: grid values must be > 0");
    }
  }

  ToleranceReport report;
  report.grid.assign(grid.begin(), grid.end());
  report.n = pairs.size();

  std::vector<std::size_t> hit(grid.size(), 0);
  std::vector<double> soft_sum(grid.size(), 0.0);
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t parsed = 0;

  for (const auto& p : pairs) {
    if (!p.pred) continue;
    ++parsed;
    double e = std::abs(*p.pred - p.truth);
    abs_sum += e;
    sq_sum += e * e;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (e <= grid[k]) ++hit[k];
      soft_sum[k] += std::max(1.0 - e / grid[k], 0.0);
    }
  }

  const double n = static_cast<double>(pairs.size());
  report.acc.resize(grid.size());
  report.soft.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    report.acc[k] = static_cast<double>(hit[k]) / n;
    report.soft[k] = soft_sum[k] / n;
  }
  report.coverage = static_cast<double>(parsed) / n;
  if (parsed > 0) {
    report.mae = abs_sum / static_cast<double>(parsed);
    report.mse = sq_sum / static_cast<double>(parsed);
  } else {
    report.mae = std::numeric_limits<double>::quiet_NaN();
    report.mse = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

ToleranceReport evaluate(std::span<const PredPair> pairs) {
  return evaluate(pairs, default_grid());
}

}  // namespace alertcast
