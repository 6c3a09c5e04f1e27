#include "ddspec/chi_grid.hpp"

#include "ddspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ddspec {

ChiGrid build_chi_grid(const std::vector<ExperimentRecord>& records, double t1, const ChiGridOptions& opts) {
    if (records.empty()) throw ValidationError("build_chi_grid: no records");
    if (!(t1 > 0.0)) throw ValidationError("build_chi_grid: t1 must be > 0");
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return records[a].tau < records[b].tau; });

    double amax = 0.0;
    int n_max = 0;
    for (const auto& r : records) {
        if (!(r.tau > 0.0)) throw ValidationError("build_chi_grid: record tau must be > 0");
        n_max = std::max(n_max, static_cast<int>(r.echo_amplitudes.size()));
        for (double a : r.echo_amplitudes) {
            if (!std::isfinite(a)) throw ValidationError("build_chi_grid: non-finite amplitude");
            amax = std::max(amax, a);
        }
    }
    if (n_max == 0) throw ValidationError("build_chi_grid: records hold no echoes");
    const double norm = opts.normalize_to_max ? amax : 1.0;
    if (!(norm > 0.0)) throw ValidationError("build_chi_grid: no positive amplitudes");

    ChiGrid g;
    g.n_max = n_max;
    g.tau.reserve(records.size());
    g.chi.assign(records.size() * static_cast<std::size_t>(n_max), std::nan(""));
    g.valid.assign(g.chi.size(), 0);
    g.lengths.reserve(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& r = records[order[i]];
        if (i > 0 && r.tau == g.tau.back()) throw ValidationError("build_chi_grid: duplicate tau");
        g.tau.push_back(r.tau);
        g.lengths.push_back(static_cast<int>(r.echo_amplitudes.size()));
        const double relax = std::isinf(t1) ? 0.0 : 1.0 / (2.0 * t1);
        for (std::size_t k = 0; k < r.echo_amplitudes.size(); ++k) {
            const double a = r.echo_amplitudes[k] / norm;
            const int n = static_cast<int>(k) + 1;
            const std::size_t idx = g.index(i, n);
            if (!(a > 0.0)) continue;
            const double c = -std::log(a) - n * r.tau * relax;
            g.chi[idx] = c;
            g.valid[idx] = c <= opts.chi_max ? 1 : 0;
        }
    }
    return g;
}

RasterGrid rasterize(const ChiGrid& grid, const std::vector<double>& t_axis) {
    RasterGrid r;
    r.tau_axis = grid.tau;
    r.t_axis = t_axis;
    const std::size_t nt = t_axis.size(), nc = grid.columns();
    r.chi.assign(nt * nc, std::nan(""));
    r.valid.assign(nt * nc, 0);
    for (std::size_t k = 0; k < nt; ++k)
        for (std::size_t i = 0; i < nc; ++i) {
            const long n = std::lround(t_axis[k] / grid.tau[i]);
            if (n < 1 || n > grid.column_length(i)) continue;
            const int ni = static_cast<int>(n);
            r.chi[k * nc + i] = grid.at(i, ni);
            r.valid[k * nc + i] = grid.ok(i, ni) ? 1 : 0;
        }
    return r;
}

ChiGrid chi_grid_from_model(const SpectrumModel& model, const PulseTrain& train_template,
                            const std::vector<double>& tau_list, double t_max, const SynthesisOptions& opts,
                            double chi_max) {
    validate(model);
    if (tau_list.empty()) throw ValidationError("chi_grid_from_model: empty tau list");
    std::vector<double> tau = tau_list;
    std::sort(tau.begin(), tau.end());
    const auto block = prepare_block(model, train_template, tau, opts);
    ChiGrid g;
    g.tau = tau;
    g.lengths.resize(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        g.lengths[i] = static_cast<int>(std::floor(t_max / tau[i] * (1.0 + 1e-12)));
        if (g.lengths[i] < 1) throw ValidationError("chi_grid_from_model: t_max shorter than a tau");
    }
    g.n_max = *std::max_element(g.lengths.begin(), g.lengths.end());
    g.chi.assign(tau.size() * static_cast<std::size_t>(g.n_max), std::nan(""));
    g.valid.assign(g.chi.size(), 0);
    auto col = [&](std::size_t i) {
        SynthesisOptions inner = opts;
        inner.exec = Exec::Serial;
        const auto c = synthesize_chi(model, block, tau[i], g.lengths[i], inner);
        for (int n = 1; n <= g.lengths[i]; ++n) {
            g.chi[g.index(i, n)] = c[static_cast<std::size_t>(n - 1)];
            g.valid[g.index(i, n)] = c[static_cast<std::size_t>(n - 1)] <= chi_max ? 1 : 0;
        }
    };
    parallel_for(tau.size(), opts.exec, col, true);
    return g;
}

} // namespace ddspec
