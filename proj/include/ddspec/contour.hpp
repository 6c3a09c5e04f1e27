#pragma once

// Gaussian-smoothed chi contours: for every tau column the first echo whose
// smoothed chi exceeds the level. Columns whose first valid echo is already
// above the level have no crossing and are omitted.

#include "ddspec/chi_grid.hpp"
#include "ddspec/parallel.hpp"

#include <vector>

namespace ddspec {

struct ContourPoint {
    double tau = 0.0;
    double t = 0.0;
    int n = 0;
};

struct ContourTrace {
    double level = 0.0;
    std::vector<ContourPoint> points;  // ascending tau, at most one per column
    bool empty() const { return points.empty(); }
};

struct ContourOptions {
    double smooth_sigma = 4e-6;  // s; 0 disables smoothing
    double truncate = 6.0;       // kernel support in sigmas
};

// chi_conv(N tau) = sum_k w_k chi((N + k) tau) / sum_k w_k over valid cells,
// w_k = exp(-(k tau)^2 / (2 sigma^2)). Invalid cells come back as NaN.
std::vector<double> smooth_column(const ChiGrid& grid, std::size_t column, double sigma, double truncate = 6.0);

ContourTrace trace_contour(const ChiGrid& grid, double level, const ContourOptions& opts = {});

std::vector<ContourTrace> trace_contours(const ChiGrid& grid, const std::vector<double>& levels,
                                         const ContourOptions& opts = {}, Exec exec = Exec::Parallel);

} // namespace ddspec
