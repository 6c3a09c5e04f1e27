// Serial reference vs OpenMP kernels. Arg 0 = Exec::Serial, 1 = Exec::Parallel.
#include "ddspec/bath_oracle.hpp"
#include "ddspec/block_filter.hpp"
#include "ddspec/chi_grid.hpp"
#include "ddspec/contour.hpp"
#include "ddspec/fitting.hpp"
#include "ddspec/harmonic_scan.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace ddspec;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kHz = 2 * pi * 1e3, MHz = 2 * pi * 1e6;

Exec exec_of(const benchmark::State& s) { return s.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

std::vector<double> taus(double lo, double hi, double step) {
    std::vector<double> t;
    for (int k = 0; lo + k * step <= hi * (1 + 1e-12); ++k) t.push_back(lo + k * step);
    return t;
}

PulseTrain finite_a() {
    PulseTrain t;
    t.shape = {ShapeKind::Gaussian, 64e-9, 13e-9};
    t.resonator = ResonatorModel{2 * pi * 2.5e9, 190.0};
    return t;
}

const SpectrumModel& composite() {
    static const SpectrumModel m = Composite{{PowerLaw{1e10, 1.0}, GaussianPeak{1e6, 2.04 * MHz, 10 * kHz}}};
    return m;
}

const ChiGrid& scan_grid() {
    static const ChiGrid g = chi_grid_from_model(composite(), PulseTrain{}, taus(1.4e-6, 4e-6, 8e-9), 1e-3);
    return g;
}

void BM_ChiGridIdeal(benchmark::State& s) {
    SynthesisOptions o;
    o.exec = exec_of(s);
    const auto t = taus(1.4e-6, 4e-6, 8e-9);
    for (auto _ : s) benchmark::DoNotOptimize(chi_grid_from_model(composite(), PulseTrain{}, t, 1e-3, o));
}

void BM_ChiGridFinite(benchmark::State& s) {
    SynthesisOptions o;
    o.exec = exec_of(s);
    const auto t = taus(0.4e-6, 1.6e-6, 20e-9);
    for (auto _ : s) benchmark::DoNotOptimize(chi_grid_from_model(PowerLaw{5e10, 1.0}, finite_a(), t, 1e-3, o));
}

void BM_BlockResponse(benchmark::State& s) {
    const auto t = finite_a();
    for (auto _ : s) benchmark::DoNotOptimize(BlockResponse(t.shape, t.resonator, pi, 2 * pi * 200e6, exec_of(s)));
}

void BM_Ensemble(benchmark::State& s) {
    PulseTrain t;
    t.tau = 1e-6;
    t.n_pulses = 8;
    const auto mod = modulation_from_phase(build_phase_profile(t, default_dt(t)));
    BathConfig b;
    b.ou_components.push_back({1e6, 1e-6});
    b.dt = 5e-8;
    b.n_trajectories = 500;
    b.seed = 1;
    for (auto _ : s) benchmark::DoNotOptimize(ensemble_coherence(b, mod, exec_of(s)));
}

void BM_Contours(benchmark::State& s) {
    const std::vector<double> levels{0.5, 1.0, 1.5, 2.0, 3.0, 4.0};
    const auto& g = scan_grid();  // built outside the timed loop
    for (auto _ : s) benchmark::DoNotOptimize(trace_contours(g, levels, {}, exec_of(s)));
}

void BM_HarmonicScan(benchmark::State& s) {
    std::vector<PowerLawFit> fits;
    for (const auto& tr : trace_contours(scan_grid(), {0.5, 1.0, 2.0, 4.0}))
        if (tr.points.size() >= 3) fits.push_back(fit_power_law(tr));
    HarmonicScanConfig c;
    c.window_w = 100 * kHz;
    c.tau_min = 1.4e-6;
    c.tau_max = 4e-6;
    c.t_max = 1e-3;
    c.omega_lo = 1.9 * MHz;
    c.omega_hi = 2.2 * MHz;
    for (auto _ : s)
        benchmark::DoNotOptimize(harmonic_scan(scan_grid(), fits, c, FiniteCorrection::identity(), exec_of(s)));
}

} // namespace

BENCHMARK(BM_ChiGridIdeal)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChiGridFinite)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BlockResponse)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Contours)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HarmonicScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
