#pragma once

#include <optional>
#include <span>
#include <vector>

namespace alertcast {

// One (prediction, truth) pair; an empty prediction is a parse failure.
struct PredPair {
  std::optional<double> pred;
  double truth = 0.0;
};

// Tolerance sweep over a grid of bands plus MAE/MSE and coverage.
// Parse failures count against acc/soft (denominator includes them) and are
// excluded from MAE/MSE; mae/mse are NaN when nothing parsed.
struct ToleranceReport {
  std::vector<double> grid;
  std::vector<double> acc;   // parallel to grid
  std::vector<double> soft;  // parallel to grid
  double mae = 0.0;          // minutes
  double mse = 0.0;          // minutes^2
  double coverage = 0.0;
  std::size_t n = 0;
};

const std::vector<double>& default_grid();  // {5, 10, 30, 60, 120}

// acc_c counts |pred - truth| <= c (note <=); soft_c is the linear hinge
// max(1 - |pred - truth| / c, 0). Throws on empty pairs or a nonpositive
// grid value.
ToleranceReport evaluate(std::span<const PredPair> pairs, std::span<const double> grid);

ToleranceReport evaluate(std::span<const PredPair> pairs);

}  // namespace alertcast
