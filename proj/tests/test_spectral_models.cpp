#include "ddspec/error.hpp"
#include "ddspec/spectral_models.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace ddspec;
using doctest::Approx;

TEST_CASE("power law value") {
    const SpectrumModel m = PowerLaw{5e10, 1.0};
    const double w = 2.0 * oracle::pi * 1e5;
    CHECK(eval_spectrum(m, w) == Approx(5e10 / w).epsilon(1e-14));
    CHECK(eval_spectrum(m, w) == Approx(7.9577e4).epsilon(1e-4));
    CHECK_THROWS_AS(eval_spectrum(m, 0.0), DomainError);
}

TEST_CASE("lorentzian at zero and composite additivity") {
    const Lorentzian l{2e5, 3e-6};
    CHECK(eval_spectrum(l, 0.0) == Approx(2.0 * l.delta * l.delta * l.tau_c));
    const double w = 1.7e6;
    CHECK(eval_spectrum(l, w) == Approx(2.0 * l.delta * l.delta * l.tau_c / (1.0 + w * w * l.tau_c * l.tau_c)));
    const SpectrumModel p = PowerLaw{1e10, 0.8};
    const SpectrumModel g = GaussianPeak{3e5, 1.2e7, 6e4};
    const SpectrumModel c = Composite{{p, g, l}};
    for (double x : {1e5, 1.19e7, 1.2e7, 3e7})
        CHECK(eval_spectrum(c, x) == Approx(eval_spectrum(p, x) + eval_spectrum(g, x) + eval_spectrum(l, x)));
}

TEST_CASE("gaussian peak is mirrored") {
    const GaussianPeak g{1e6, 1.28e7, 6.3e4};
    CHECK(eval_spectrum(g, g.omega_p) == Approx(g.A).epsilon(1e-12));
    CHECK(eval_spectrum(g, g.omega_p + g.sigma) == Approx(g.A * std::exp(-0.5)));
    CHECK(eval_spectrum(g, -g.omega_p) == eval_spectrum(g, g.omega_p));
}

TEST_CASE("lorentzian ensemble against quadrature") {
    const LorentzianEnsemble e{1e5, 1.0, 1e-6, 1e-3};
    const double w = 1e4;
    const double ref = oracle::integrate(
        [&](double lt) {
            const double tc = std::exp(lt);
            // P(tc) S_L(w; tc) dtc with P = p0 / tc, in log tc
            return e.p0 / tc * 2.0 * e.delta * e.delta * tc / (1.0 + w * w * tc * tc) * tc;
        },
        std::log(e.tau1), std::log(e.tau2), 1e-14);
    CHECK(eval_lorentzian_ensemble(e, w) == Approx(ref).epsilon(1e-9));

    // limits
    CHECK(eval_lorentzian_ensemble(e, 0.0) == Approx(2.0 * e.delta * e.delta * e.p0 * (e.tau2 - e.tau1)));
    CHECK(eval_lorentzian_ensemble(e, 1e-9) == Approx(2.0 * e.delta * e.delta * e.p0 * (e.tau2 - e.tau1)));
    const double mid = 3e4;  // 1/tau2 << w << 1/tau1
    CHECK(eval_lorentzian_ensemble(e, mid) == Approx(oracle::pi * e.delta * e.delta * e.p0 / mid).epsilon(0.05));
}

TEST_CASE("lorentzian ensemble collapses to a single lorentzian") {
    const double t1 = 2e-6, t2 = t1 * (1.0 + 1e-8);
    const LorentzianEnsemble e{1e5, 1.0, t1, t2};
    for (double w : {0.0, 1e4, 5e5, 3e6}) {
        const double single = 2.0 * e.delta * e.delta * e.p0 / (1.0 + w * w * t1 * t1) * (t2 - t1);
        CHECK(eval_lorentzian_ensemble(e, w) == Approx(single).epsilon(1e-6));
    }
}

TEST_CASE("property: evenness for random models") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const int kind = k % 5;
        SpectrumModel m;
        if (kind == 0) m = PowerLaw{std::pow(10.0, 8 + 4 * u(rng)), 2.5 * u(rng) - 0.5};
        if (kind == 1) m = Lorentzian{1e6 * u(rng) + 1.0, 1e-5 * u(rng) + 1e-9};
        if (kind == 2) m = GaussianPeak{1e6 * u(rng), 1e7 * u(rng), 1e5 * u(rng) + 1.0};
        if (kind == 3) m = LorentzianEnsemble{1e5 * u(rng) + 1.0, u(rng) + 0.1, 1e-7, 1e-7 + 1e-3 * u(rng) + 1e-9};
        if (kind == 4) m = Composite{{PowerLaw{1e10, 1.0}, GaussianPeak{1e5, 1e7, 1e5}}};
        const double w = std::pow(10.0, 2 + 6 * u(rng));
        CHECK(eval_spectrum(m, w) == eval_spectrum(m, -w));
    }
}

TEST_CASE("property: power law decreasing for alpha > 0") {
    const SpectrumModel m = PowerLaw{1e10, 0.7};
    double prev = INFINITY;
    for (double w = 1e3; w < 1e8; w *= 1.3) {
        const double v = eval_spectrum(m, w);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(validate(Lorentzian{1e5, -1e-6}), ValidationError);
    CHECK_THROWS_AS(validate(LorentzianEnsemble{1e5, 1.0, 1e-3, 1e-6}), ValidationError);
    CHECK_THROWS_AS(validate(PowerLaw{NAN, 1.0}), ValidationError);
    CHECK_THROWS_AS(validate(GaussianPeak{1.0, 1e6, 0.0}), ValidationError);
    CHECK_NOTHROW(validate(Composite{{PowerLaw{1e10, 1.0}}}));
}

TEST_CASE("json round trip") {
    const SpectrumModel m = Composite{{PowerLaw{5e10, 1.0}, GaussianPeak{1e6, 1.28e7, 6.28e4},
                                       LorentzianEnsemble{1e5, 1.0, 1e-6, 1e-3}, Lorentzian{1e5, 1e-6}}};
    const auto j = to_json(m);
    const auto back = spectrum_from_json(j);
    CHECK(to_json(back) == j);
    CHECK_THROWS_AS(spectrum_from_json(nlohmann::json{{"kind", "power_law"}, {"C", 1.0}}), ValidationError);
    CHECK_THROWS_AS(spectrum_from_json(nlohmann::json{{"kind", "pink"}}), ValidationError);
}
