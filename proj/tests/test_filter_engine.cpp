#include "ddspec/error.hpp"
#include "ddspec/filter_engine.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace ddspec;
using doctest::Approx;

namespace {

constexpr double pi = oracle::pi;

PulseTrain cpmg(double tau, int n, double beta = pi) {
    PulseTrain t;
    t.tau = tau;
    t.n_pulses = n;
    t.beta = beta;
    return t;
}

PulseTrain finite_a(double tau, int n, double beta = pi) {
    PulseTrain t = cpmg(tau, n, beta);
    t.shape = {ShapeKind::Gaussian, 64e-9, 13e-9};
    t.resonator = ResonatorModel{2.0 * pi * 2.5e9, 190.0};
    return t;
}

FilterFunction filter_of(const PulseTrain& t, double dt = 0.0, int pad = 4) {
    const double h = dt > 0.0 ? dt : default_dt(t);
    return filter_from_modulation(modulation_from_phase(build_phase_profile(t, h)), t.tau * t.n_pulses, pad);
}

double value_at(const FilterFunction& f, double w) {
    const auto it = std::lower_bound(f.omega.begin(), f.omega.end(), w);
    const auto k = static_cast<std::size_t>(it - f.omega.begin());
    // nearest bin
    if (k > 0 && (k == f.omega.size() || w - f.omega[k - 1] < f.omega[k] - w)) return f.total[k - 1];
    return f.total[k];
}

} // namespace

TEST_CASE("ideal hahn phase steps at tau/2") {
    const auto t = cpmg(2e-6, 1);
    const double dt = t.tau / 1024.0;
    const auto p = build_phase_profile(t, dt);
    REQUIRE(p.phi.size() == 1024);
    CHECK(p.phi.front() == 0.0);
    CHECK(p.phi[511] == 0.0);
    CHECK(p.phi[512] == Approx(pi));
    CHECK(p.phi.back() == Approx(pi));
}

TEST_CASE("modulation function corner values") {
    PhaseProfile p;
    p.dt = 1e-9;
    p.phi = {0.0, pi, pi / 2};
    const auto m = modulation_from_phase(p);
    CHECK(m.f_x[0] == Approx(0.0));
    CHECK(m.f_z[0] == Approx(1.0));
    CHECK(m.f_x[1] == Approx(0.0).epsilon(1e-15));
    CHECK(m.f_z[1] == Approx(-1.0));
    CHECK(m.f_x[2] == Approx(-1.0));
    CHECK(m.f_z[2] == Approx(0.0).epsilon(1e-15));
}

TEST_CASE("over-rotated train accumulates n beta") {
    const double beta = 1.05 * pi;
    auto t = finite_a(4e-6, 6, beta);
    const auto p = build_phase_profile(t, default_dt(t));
    CHECK(p.phi.back() == Approx(6 * beta).epsilon(1e-9));
    // ideal version
    const auto pi_ = build_phase_profile(cpmg(4e-6, 6, beta), 4e-6 / 1024);
    CHECK(pi_.phi.back() == Approx(6 * beta).epsilon(1e-12));
}

TEST_CASE("64 ns gaussian pulse: monotone phase reaching pi after ring-down") {
    const auto t = finite_a(4e-6, 1);
    const double dt = default_dt(t);
    const auto p = build_phase_profile(t, dt);
    for (std::size_t k = 1; k < p.phi.size(); ++k) CHECK(p.phi[k] >= p.phi[k - 1] - 1e-12);
    // half phase at the pulse centre
    const auto kc = static_cast<std::size_t>(std::floor(0.5 * t.tau / dt));
    CHECK(p.phi[kc - 1] <= pi / 2 + 1e-9);
    CHECK(p.phi[kc + 1] >= pi / 2 - 1e-9);
    // within five ring-down constants of the programmed end
    const PulseKernel k(t.shape, t.resonator, t.beta, dt);
    const double t_done = 0.5 * t.tau + k.programmed_end() + 5.0 * t.resonator->ringdown();
    const auto kd = static_cast<std::size_t>(std::ceil(t_done / dt));
    CHECK(p.phi[kd] == Approx(pi).epsilon(1e-2));
    CHECK(p.phi.back() == Approx(pi).epsilon(1e-12));
}

TEST_CASE("resolution and configuration errors") {
    const auto t = cpmg(1e-6, 2);
    CHECK_THROWS_AS(build_phase_profile(t, 1e-8), ResolutionError);
    auto f = finite_a(4e-6, 2);
    CHECK_THROWS_AS(build_phase_profile(f, 10e-9), ResolutionError);
    auto q = finite_a(4e-6, 2);
    q.resonator->q_factor = 2e5;  // ring-down of ~25 us
    CHECK_THROWS_AS(build_phase_profile(q, default_dt(q)), ConfigError);
    auto bad = cpmg(0.05e-6, 2);
    bad.shape = {ShapeKind::Square, 0.1e-6, 0.0};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    ModulationFunction empty;
    CHECK_THROWS_AS(filter_from_modulation(empty, 1e-6), ValidationError);
}

TEST_CASE("ideal CPMG peaks match the delta weights") {
    const double tau = 4e-6;
    const auto t = cpmg(tau, 32);
    const auto f = filter_of(t);
    for (int m : {1, 3, 5}) {
        const double w = m * pi / tau;
        const double ideal = 2.0 / (pi * w * w * tau * tau);
        // the filter peak height, located as the maximum near w
        const auto mx = filter_maxima(f, w * 0.97, w * 1.03);
        REQUIRE(!mx.empty());
        double best = 0.0;
        for (auto k : mx) best = std::max(best, f.total[k]);
        CHECK(best == Approx(ideal).epsilon(0.05));
    }
    // ideal pulses have no x component
    CHECK(*std::max_element(f.fx_vals.begin(), f.fx_vals.end()) < 1e-20 * *std::max_element(f.total.begin(), f.total.end()));
}

TEST_CASE("property: Plancherel and unit norm") {
    for (int n : {1, 2, 5, 16}) {
        for (double tau : {0.7e-6, 4e-6}) {
            for (bool fin : {false, true}) {
                auto t = fin ? finite_a(tau, n, 1.1 * pi) : cpmg(tau, n);
                const double dt = default_dt(t);
                const auto mod = modulation_from_phase(build_phase_profile(t, dt));
                double worst = 0.0;
                for (std::size_t k = 0; k < mod.f_z.size(); ++k)
                    worst = std::max(worst, std::fabs(mod.f_x[k] * mod.f_x[k] + mod.f_z[k] * mod.f_z[k] - 1.0));
                CHECK(worst < 1e-12);
                const double T = tau * n;
                const auto f = filter_from_modulation(mod, T);
                CHECK(f.integral() * T == Approx(1.0).epsilon(0.01));
                for (std::size_t k = 0; k < f.total.size(); ++k) {
                    CHECK(f.total[k] >= 0.0);
                    CHECK(f.total[k] == f.fx_vals[k] + f.fz_vals[k]);
                }
            }
        }
    }
}

TEST_CASE("property: halving dt leaves filter peaks unchanged") {
    const auto t = finite_a(2e-6, 16);
    const double dt = default_dt(t);
    const auto a = filter_of(t, dt);
    const auto b = filter_of(t, dt / 2);
    for (int m : {1, 3, 5, 7}) {
        const double w = m * pi / t.tau;
        CHECK(value_at(b, w) == Approx(value_at(a, w)).epsilon(0.005));
    }
}

TEST_CASE("delta peaks") {
    const double tau = 3e-6, t = 1e-4;
    const auto p = delta_filter_peaks(tau, t, 9);
    REQUIRE(p.size() == 5);
    CHECK(p[0].weight == Approx(4.0 / (t * pi * pi)));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const int m = 2 * static_cast<int>(i) + 1;
        CHECK(p[i].omega == Approx(m * pi / tau));
        CHECK(p[i].weight / p[0].weight == Approx(1.0 / (m * m)));
    }
    // flat S0 = 1: chi = t^2/2 * sum over +-peaks of weight = S0 t / 2
    const auto many = delta_filter_peaks(tau, t, 2000001);
    long double s = 0.0L;
    for (auto it = many.rbegin(); it != many.rend(); ++it) s += it->weight;
    CHECK(0.5 * t * t * 2.0 * static_cast<double>(s) == Approx(t / 2.0).epsilon(1e-6));
    CHECK_THROWS_AS(delta_filter_peaks(tau, t, 4), ValidationError);
}

TEST_CASE("finite correction: low frequency, magnitude, tau independence") {
    const PulseShape g{ShapeKind::Gaussian, 64e-9, 13e-9};
    const ResonatorModel r{2.0 * pi * 2.5e9, 190.0};
    const auto a8 = finite_correction(g, r, pi, 8e-6);
    const auto a4 = finite_correction(g, r, pi, 4e-6);
    CHECK(a8.at(0.0) == 1.0);
    CHECK(a8.at(2.0 * pi * 50e3) == Approx(1.0).epsilon(0.02));
    double best = 0.0, where = 0.0;
    for (std::size_t k = 0; k < a8.omega.size(); ++k)
        if (a8.omega[k] < 2.0 * pi * 20e6 && a8.a_vals[k] > best) {
            best = a8.a_vals[k];
            where = a8.omega[k];
        }
    CHECK(best > 1.05);
    CHECK(best < 1.2);
    CHECK(where / (2.0 * pi) == Approx(5e6).epsilon(0.2));
    // tau independence on the 4 us peaks
    for (std::size_t k = 1; k < a4.omega.size(); ++k) {
        if (a4.omega[k] > 2.0 * pi * 20e6) break;
        CHECK(a8.at(a4.omega[k]) == Approx(a4.a_vals[k]).epsilon(0.03));
    }
    CHECK(FiniteCorrection::identity().at(1e7) == 1.0);
}

TEST_CASE("flip-angle splitting") {
    CHECK(flip_angle_split_prediction(pi, 4e-6) == 0.0);
    CHECK(flip_angle_split_prediction(1.1 * pi, 4e-6) == Approx(7.853981633974483e4));
    CHECK(flip_angle_split_prediction(0.95 * pi, 4e-6) == Approx(-flip_angle_split_prediction(1.05 * pi, 4e-6)));
}
