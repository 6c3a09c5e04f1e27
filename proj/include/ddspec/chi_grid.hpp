#pragma once

// chi(tau, t) assembled from echo records. Cells are stored in their native
// (tau, N) coordinates so that t = N tau is exact; rasterize() produces the
// image-plot view on an arbitrary t axis by nearest match.

#include "ddspec/coherence_forward.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace ddspec {

struct ChiGrid {
    std::vector<double> tau;          // sorted ascending
    int n_max = 0;                    // echoes per column (padded with invalid cells)
    std::vector<double> chi;          // chi[i * n_max + (N - 1)]
    std::vector<std::uint8_t> valid;  // same layout

    std::size_t columns() const { return tau.size(); }
    std::size_t index(std::size_t i, int n) const { return i * static_cast<std::size_t>(n_max) + (n - 1); }
    double at(std::size_t i, int n) const { return chi[index(i, n)]; }
    bool ok(std::size_t i, int n) const { return n >= 1 && n <= n_max && valid[index(i, n)] != 0; }
    double t(std::size_t i, int n) const { return n * tau[i]; }
    // last N in column i that holds a record (valid or not)
    int column_length(std::size_t i) const { return lengths.empty() ? n_max : lengths[i]; }
    std::vector<int> lengths;
};

struct ChiGridOptions {
    bool normalize_to_max = true;  // divide amplitudes by the dataset maximum
    double chi_max = std::numeric_limits<double>::infinity();  // noise floor
};

// chi = -ln(L) - t/(2 T1). Non-positive amplitudes and cells above chi_max are
// marked invalid (chi stored as NaN for the former).
ChiGrid build_chi_grid(const std::vector<ExperimentRecord>& records, double t1, const ChiGridOptions& opts = {});

// Image view: value[k * tau.size() + i] for t_axis[k]; each (tau, t) takes the
// echo N = round(t / tau) when 1 <= N <= column length, otherwise invalid.
struct RasterGrid {
    std::vector<double> tau_axis, t_axis;
    std::vector<double> chi;
    std::vector<std::uint8_t> valid;
};
RasterGrid rasterize(const ChiGrid& grid, const std::vector<double>& t_axis);

// Grid from a model: noiseless chi for every tau, N tau <= t_max.
ChiGrid chi_grid_from_model(const SpectrumModel& model, const PulseTrain& train_template,
                            const std::vector<double>& tau_list, double t_max, const SynthesisOptions& opts = {},
                            double chi_max = std::numeric_limits<double>::infinity());

} // namespace ddspec
