#include "ddspec/coherence_forward.hpp"
#include "ddspec/error.hpp"
#include "ddspec/special.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace ddspec;
using doctest::Approx;

namespace {

constexpr double pi = oracle::pi;

PulseTrain ideal_train(double beta = pi) {
    PulseTrain t;
    t.beta = beta;
    return t;
}

FilterFunction ideal_filter(double tau, int n, int pad = 8) {
    PulseTrain t = ideal_train();
    t.tau = tau;
    t.n_pulses = n;
    return filter_from_modulation(modulation_from_phase(build_phase_profile(t, tau / 1024)), tau * n, pad);
}

} // namespace

TEST_CASE("overlap: zero and flat spectra") {
    const auto f = ideal_filter(2e-6, 16);
    const double t = 32e-6;
    CHECK(chi_overlap(Composite{}, f, t).chi == 0.0);
    // flat to far beyond the grid
    const double s0 = 2.0 * 1e4 * 1e4 * 1e-12;
    const auto r = chi_overlap(Lorentzian{1e4, 1e-12}, f, t);
    CHECK(r.chi == Approx(s0 * t / 2).epsilon(0.02));
}

TEST_CASE("overlap vs discrete sum for a power law (N = 32, tau = 4 us)") {
    const SpectrumModel m = PowerLaw{5e10, 1.0};
    const double tau = 4e-6;
    const auto f = ideal_filter(tau, 32);
    const auto r = chi_overlap(m, f, 32 * tau);
    const double ref = chi_discrete(m, tau, 32 * tau, 100001);
    CHECK(r.chi == Approx(ref).epsilon(0.02));
    CHECK_FALSE(r.truncation_warning);
}

TEST_CASE("truncation warning on a short grid") {
    auto f = ideal_filter(2e-6, 4, 1);
    f.omega.resize(40);
    f.total.resize(40);
    f.fx_vals.resize(40);
    f.fz_vals.resize(40);
    const auto r = chi_overlap(Lorentzian{1e5, 1e-9}, f, 8e-6);
    CHECK(r.truncation_warning);
}

TEST_CASE("discrete sum") {
    const double tau = 2e-6, t = 1e-4;
    // flat
    CHECK(chi_discrete(PowerLaw{3.0, 0.0}, tau, t, 1) == Approx(3.0 * t / 2).epsilon(1e-12));
    // power law converges to C' C t tau
    const double c1 = chi_discrete(PowerLaw{1.0, 1.0}, tau, t, 101);
    CHECK(c1 == Approx(oracle::chi_power_law_sum(1.0, 1.0, tau, t)).epsilon(1e-9));
    CHECK(c1 / (t * tau) == Approx(0.13568863).epsilon(1e-7));
    // a peak between harmonics contributes ~nothing
    const GaussianPeak between{1e6, 2.0 * pi / tau, 1e4};
    const GaussianPeak on{1e6, pi / tau, 1e4};
    CHECK(chi_discrete(between, tau, t, 1001) < 1e-3 * chi_discrete(on, tau, t, 1001));
    // cutoff inside a peak
    CHECK_THROWS_AS(chi_discrete(GaussianPeak{1e6, 11 * pi / tau, 1e5}, tau, t, 9), ResolutionError);
    CHECK_THROWS_AS(chi_discrete(PowerLaw{1.0, 1.0}, tau, t, 10), ValidationError);
}

TEST_CASE("closed form power law agrees with the discrete sum") {
    for (double a : {0.5, 0.7, 1.0, 2.0}) {
        const double tau = 3e-6, t = 2e-4;
        const double cf = chi_power_law(5e10, a, tau, t);
        CHECK(cf == Approx(chi_discrete(PowerLaw{5e10, a}, tau, t, 3)).epsilon(1e-6));
        CHECK(cf == Approx(oracle::chi_power_law_sum(5e10, a, tau, t)).epsilon(1e-6));
    }
    CHECK(chi_power_law(7.0, 0.0, 1e-6, 3.0) == Approx(0.5 * 7.0 * 3.0));  // flat: S0 t / 2
    CHECK_THROWS_AS(chi_power_law(1.0, -1.0, 1e-6, 1.0), DomainError);
}

TEST_CASE("property: power-law scaling and linearity") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double a = 2.5 * u(rng) - 0.4, C = std::pow(10.0, 8 + 4 * u(rng));
        const double tau = 1e-7 + 1e-5 * u(rng), t = 1e-5 + 1e-3 * u(rng), k = 0.1 + 5 * u(rng);
        const double base = chi_power_law(C, a, tau, t);
        CHECK(chi_power_law(C, a, k * tau, t) / base == Approx(std::pow(k, a)).epsilon(1e-12));
        CHECK(chi_power_law(C, a, tau, k * t) / base == Approx(k).epsilon(1e-12));
        CHECK(chi_power_law(k * C, a, tau, t) / base == Approx(k).epsilon(1e-12));
    }
}

TEST_CASE("property: chi non-decreasing in tau at fixed t for decreasing S") {
    const SpectrumModel m = Composite{{PowerLaw{1e10, 0.8}, Lorentzian{3e5, 2e-6}}};
    const double t = 2e-4;
    double prev = 0.0;
    for (double tau = 0.5e-6; tau < 10e-6; tau *= 1.15) {
        const double c = chi_discrete(m, tau, t, 20001, 1e-4);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("observed coherence") {
    CHECK(observed_coherence(0.0, 1e-3, 1e-3) == Approx(std::exp(-0.5)));
    CHECK(observed_coherence(0.7, 1e-3, INFINITY) == Approx(std::exp(-0.7)));
}

TEST_CASE("synthesize experiment: flat spectrum, ideal pulses, no noise") {
    const SpectrumModel m = Lorentzian{1e6, 1e-13};  // S0 = 2e-1
    SamplingPlan plan;
    plan.tau_list = {1e-6, 2.5e-6};
    plan.max_sequence_time = 50e-6;
    const auto rec = synthesize_experiment(m, ideal_train(), plan, INFINITY);
    REQUIRE(rec.size() == 2);
    CHECK(rec[0].echo_amplitudes.size() == 50);
    CHECK(rec[1].echo_amplitudes.size() == 20);
    for (const auto& r : rec)
        for (std::size_t n = 0; n < r.echo_amplitudes.size(); ++n)
            CHECK(r.echo_amplitudes[n] == Approx(std::exp(-0.2 * (n + 1) * r.tau / 2)).epsilon(1e-5));
}

TEST_CASE("synthesize experiment: determinism and seed requirement") {
    const SpectrumModel m = PowerLaw{5e10, 1.0};
    SamplingPlan plan;
    plan.tau_list = {1e-6, 1.2e-6, 1.4e-6};
    plan.max_sequence_time = 100e-6;
    plan.shot_noise_sigma = 0.01;
    CHECK_THROWS_AS(synthesize_experiment(m, ideal_train(), plan, INFINITY), ValidationError);
    plan.seed = 42;
    SynthesisOptions serial;
    serial.exec = Exec::Serial;
    const auto a = synthesize_experiment(m, ideal_train(), plan, 1e-3);
    const auto b = synthesize_experiment(m, ideal_train(), plan, 1e-3, serial);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].echo_amplitudes == b[i].echo_amplitudes);
    plan.seed = 43;
    const auto c = synthesize_experiment(m, ideal_train(), plan, 1e-3);
    CHECK(c[0].echo_amplitudes != a[0].echo_amplitudes);
}

TEST_CASE("delta mode matches the closed form for power laws") {
    const SpectrumModel m = PowerLaw{5e10, 1.0};
    SynthesisOptions d;
    d.mode = FilterMode::Delta;
    const auto chi = synthesize_chi(m, ideal_train(), 4e-6, 10, d);
    for (int n = 1; n <= 10; ++n) CHECK(chi[n - 1] == Approx(chi_power_law(5e10, 1.0, 4e-6, n * 4e-6)).epsilon(1e-6));
    PulseTrain fin = ideal_train();
    fin.shape = {ShapeKind::Square, 50e-9, 0.0};
    CHECK_THROWS_AS(synthesize_chi(m, fin, 4e-6, 10, d), ValidationError);
}

TEST_CASE("delta staircase: cumulative harmonics approach the numeric chi") {
    // chi at tau = 4 us, N = 32 built up one harmonic at a time rises in
    // steps of S(m pi/tau)/m^2 towards the numeric-filter value
    const SpectrumModel m = PowerLaw{5e10, 1.0};
    const double tau = 4e-6, t = 32 * tau;
    const double full = chi_overlap(m, ideal_filter(tau, 32), t).chi;
    double cum = 0.0;
    for (int k = 1; k <= 15; k += 2) {
        const double step = 4.0 * t / (pi * pi) * eval_spectrum(m, k * pi / tau) / (k * k);
        CHECK(step > 0.0);
        cum += step;
        CHECK(cum < full * 1.02);
    }
    CHECK(cum > 0.95 * full);
    CHECK(full == Approx(chi_power_law(5e10, 1.0, tau, t)).epsilon(0.02));
}
