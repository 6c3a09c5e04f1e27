#include "ddspec/contour.hpp"

#include "ddspec/error.hpp"

#include <cmath>

namespace ddspec {

std::vector<double> smooth_column(const ChiGrid& grid, std::size_t column, double sigma, double truncate) {
    const int len = grid.column_length(column);
    std::vector<double> out(static_cast<std::size_t>(len), std::nan(""));
    const double tau = grid.tau[column];
    const int half = sigma > 0.0 ? static_cast<int>(std::floor(truncate * sigma / tau)) : 0;
    std::vector<double> w(static_cast<std::size_t>(half) + 1);
    for (int k = 0; k <= half; ++k) {
        const double x = k == 0 ? 0.0 : k * tau / sigma;
        w[static_cast<std::size_t>(k)] = std::exp(-0.5 * x * x);
    }
    for (int n = 1; n <= len; ++n) {
        if (!grid.ok(column, n)) continue;
        double s = 0.0, ws = 0.0;
        for (int k = -half; k <= half; ++k) {
            const int m = n + k;
            if (m < 1 || m > len || !grid.ok(column, m)) continue;
            const double wk = w[static_cast<std::size_t>(std::abs(k))];
            s += wk * grid.at(column, m);
            ws += wk;
        }
        out[static_cast<std::size_t>(n - 1)] = s / ws;
    }
    return out;
}

ContourTrace trace_contour(const ChiGrid& grid, double level, const ContourOptions& opts) {
    if (!std::isfinite(level)) throw ValidationError("contour level must be finite");
    ContourTrace tr;
    tr.level = level;
    for (std::size_t i = 0; i < grid.columns(); ++i) {
        const auto c = smooth_column(grid, i, opts.smooth_sigma, opts.truncate);
        // a column that starts above the level never crosses it
        bool below = false;
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (c[k] <= level) below = true;
            if (below && c[k] > level) {  // NaN compares false
                const int n = static_cast<int>(k) + 1;
                tr.points.push_back({grid.tau[i], grid.t(i, n), n});
                break;
            }
        }
    }
    return tr;
}

std::vector<ContourTrace> trace_contours(const ChiGrid& grid, const std::vector<double>& levels,
                                         const ContourOptions& opts, Exec exec) {
    std::vector<ContourTrace> out(levels.size());
    parallel_for(levels.size(), exec, [&](std::size_t i) { out[i] = trace_contour(grid, levels[i], opts); });
    return out;
}

} // namespace ddspec
