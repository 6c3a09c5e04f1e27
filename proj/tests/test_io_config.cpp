#include "ddspec/config.hpp"
#include "ddspec/error.hpp"
#include "ddspec/io.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace ddspec;
using doctest::Approx;
using nlohmann::json;

TEST_CASE("number formatting round-trips exactly") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-300, 300);
    for (int k = 0; k < 2000; ++k) {
        const double v = std::pow(10.0, u(rng) / 10.0) * (k % 2 ? -1 : 1);
        CHECK(io::parse_double(io::fmt(v), "t") == v);
    }
    CHECK(std::isnan(io::parse_double(io::fmt(std::nan("")), "t")));
    CHECK(io::parse_double(io::fmt(0.1), "t") == 0.1);
    CHECK_THROWS_AS(io::parse_double("1.2x", "t"), ValidationError);
}

TEST_CASE("records round trip") {
    oracle::TempDir d("records");
    std::vector<ExperimentRecord> recs(2);
    recs[0].tau = 1.4e-6;
    recs[0].echo_amplitudes = {0.9, 0.81, 0.7290000000000001};
    recs[1].tau = 3.3e-6;
    recs[1].echo_amplitudes = {0.5};
    io::write_records(d / "r.csv", recs);
    const auto back = io::read_records(d / "r.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].tau == recs[0].tau);
    CHECK(back[0].echo_amplitudes == recs[0].echo_amplitudes);
    CHECK(back[1].echo_amplitudes == recs[1].echo_amplitudes);
}

TEST_CASE("chi grid round trip keeps flags, gaps and lengths") {
    oracle::TempDir d("grid");
    std::vector<ExperimentRecord> recs(2);
    recs[0].tau = 1e-6;
    recs[0].echo_amplitudes = {0.9, -0.1, 0.05, 0.6};
    recs[1].tau = 2e-6;
    recs[1].echo_amplitudes = {0.7, 0.2};
    ChiGridOptions o;
    o.normalize_to_max = false;
    o.chi_max = 2.0;
    const auto g = build_chi_grid(recs, std::numeric_limits<double>::infinity(), o);
    io::write_chi_grid(d / "g.csv", g);
    const auto h = io::read_chi_grid(d / "g.csv");
    CHECK(h.tau == g.tau);
    CHECK(h.lengths == g.lengths);
    CHECK(h.n_max == g.n_max);
    CHECK(h.valid == g.valid);
    for (std::size_t k = 0; k < g.chi.size(); ++k) {
        if (std::isnan(g.chi[k])) CHECK(std::isnan(h.chi[k]));
        else CHECK(h.chi[k] == g.chi[k]);
    }
    // re-writing is byte-identical
    io::write_chi_grid(d / "g2.csv", h);
    CHECK(oracle::slurp(d / "g.csv") == oracle::slurp(d / "g2.csv"));
}

TEST_CASE("malformed files name the file and line") {
    oracle::TempDir d("bad");
    io::write_text_atomic(d / "g.csv", "tau_s,1e-6,2e-6\nn_echoes,2,1\n1,0.1,0.2\n3,0.2,\n");
    try {
        io::read_chi_grid(d / "g.csv");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("g.csv:4") != std::string::npos);
    }
    io::write_text_atomic(d / "r.csv", "tau_s,n_echo,amplitude\n1e-6,1,0.5\n1e-6,3,0.4\n");
    CHECK_THROWS_AS(io::read_records(d / "r.csv"), ValidationError);
    CHECK_THROWS_AS(io::read_records(d / "missing.csv"), ValidationError);
}

TEST_CASE("spectrum, correction, IQ and field-sweep round trips") {
    oracle::TempDir d("misc");
    SpectrumEstimate e;
    e.push(1.0e7, -3.5, 1, 12, -1);
    e.push(1.1e7, 2.25e5, 0, 0, -1);
    io::write_spectrum(d / "s.csv", e);
    const auto e2 = io::read_spectrum(d / "s.csv");
    CHECK(e2.omega == e.omega);
    CHECK(e2.s_vals == e.s_vals);
    CHECK(e2.m_s == e.m_s);
    CHECK(e2.n_echoes == e.n_echoes);

    FiniteCorrection c;
    c.omega = {0.0, 1e6, 3e7};
    c.a_vals = {1.0, 1.07, 0.93};
    io::write_correction(d / "a.csv", c);
    const auto c2 = io::read_correction(d / "a.csv");
    CHECK(c2.omega == c.omega);
    CHECK(c2.a_vals == c.a_vals);

    IQTrace t;
    t.dt = 2e-9;
    for (int k = 0; k < 16; ++k) {
        t.i_vals.push_back(std::sin(0.3 * k));
        t.q_vals.push_back(std::cos(0.7 * k));
    }
    io::write_iq(d / "t.csv", t);
    const auto t2 = io::read_iq(d / "t.csv");
    CHECK(t2.dt == Approx(t.dt).epsilon(1e-12));
    CHECK(t2.i_vals == t.i_vals);
    CHECK(t2.q_vals == t.q_vals);

    FieldSweep fs;
    fs.fields = {189.0, 191.2};
    fs.traces = {t, t2};
    io::write_field_sweep(d / "sweep" / "index.csv", fs);
    const auto fs2 = io::read_field_sweep(d / "sweep" / "index.csv");
    CHECK(fs2.fields == fs.fields);
    REQUIRE(fs2.traces.size() == 2);
    CHECK(fs2.traces[1].q_vals == t.q_vals);
}

TEST_CASE("fit JSON round trip") {
    PowerLawFit f;
    f.level = 2.0;
    f.c_value = 5e10;
    f.alpha = 0.98;
    f.ci95_c = {4e10, 6e10};
    f.ci95_alpha = {0.95, 1.01};
    f.intercept = -3.25;
    f.n_points = 40;
    const auto g = io::power_law_fit_from_json(json::parse(io::to_json(f).dump()));
    CHECK(g.c_value == f.c_value);
    CHECK(g.alpha == f.alpha);
    CHECK(g.ci95_alpha.hi == f.ci95_alpha.hi);
    CHECK(g.intercept == f.intercept);
    CHECK(g.n_points == 40);
    CHECK_THROWS_AS(io::power_law_fit_from_json(json{{"level", 1.0}}), ValidationError);
    const auto j = io::to_json(f);
    CHECK(j["C"]["ci_low"].get<double>() == 4e10);
}

TEST_CASE("config parsing: sections and defaults") {
    const json j = json::parse(R"({
        "seed": 7,
        "spectrum": {"kind": "composite", "terms": [
            {"kind": "power_law", "C": 5e10, "alpha": 1},
            {"kind": "gaussian_peak", "A": 1e6, "omega_p": 1.2817e7, "sigma": 6.28e4}]},
        "train": {"beta_pi": 1.1, "shape": {"kind": "gaussian", "duration": 64e-9, "gaussian_sigma": 13e-9},
                  "resonator": {"omega0": 1.5708e10, "q_factor": 190}},
        "plan": {"tau_range": {"start": 1e-6, "stop": 2e-6, "step": 0.25e-6}, "max_sequence_time": 1e-3,
                 "shot_noise_sigma": 0.01, "averages": 128},
        "analysis": {"levels": [1, 2], "smooth_sigma": 0},
        "scan": {"window_w": 6.283e5, "tau_min": 1.4e-6, "t_max": 1e-3, "omega_range": [1.2e7, 1.4e7]}
    })");
    const auto c = parse_config(j, "/base");
    CHECK(c.seed == 7u);
    REQUIRE(c.plan);
    CHECK(c.plan->tau_list.size() == 5);
    CHECK(c.plan->tau_list.back() == Approx(2e-6));
    CHECK(c.plan->seed == 7u);  // inherited
    CHECK(c.plan->averages == 128);
    REQUIRE(c.train);
    CHECK(c.train->beta == Approx(1.1 * oracle::pi));
    CHECK(c.train->shape.kind == ShapeKind::Gaussian);
    CHECK(c.train->resonator->q_factor == 190);
    CHECK(c.analysis.levels == std::vector<double>{1, 2});
    CHECK(c.analysis.contour.smooth_sigma == 0.0);
    REQUIRE(c.scan);
    CHECK(c.scan->cfg.epsilon == 0.03);
    CHECK(c.scan->cfg.chi_noise_threshold == 4.5);
    CHECK(c.resolve("x.csv") == std::filesystem::path("/base/x.csv"));
    CHECK(c.resolve("/abs.csv") == std::filesystem::path("/abs.csv"));
    CHECK(std::isinf(c.t1));

    const auto o = parse_config(j, {}, 99u);
    CHECK(o.seed == 99u);
    CHECK(o.plan->seed == 99u);
}

TEST_CASE("config parsing: errors name the field") {
    auto expect = [](const char* text, const std::string& needle) {
        try {
            parse_config(json::parse(text));
            FAIL("expected ValidationError for " << text);
        } catch (const ValidationError& e) {
            INFO(e.what());
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect(R"({"plan": {"tau_list": [1e-6], "max_sequence_time": 1e-4, "shot_noise_sigma": 0.01}})", "seed");
    expect(R"({"plan": {"tau_list": [1e-6]}})", "plan.max_sequence_time");
    expect(R"({"plan": {"tau_list": [1e-6, "x"], "max_sequence_time": 1}})", "plan.tau_list[1]");
    expect(R"({"analysis": {"levles": [1]}})", "analysis.levles");
    expect(R"({"scan": {"window_w": 1e5, "epsilon": 0.5, "tau_min": 1e-6, "t_max": 1e-3, "omega_range": [1, 2]}})",
           "epsilon");
    expect(R"({"scan": {"window_w": 1e5, "tau_min": 1e-6, "t_max": 1e-3, "omega_range": [2, 1]}})", "scan.omega_range");
    expect(R"({"train": {"beta": 3.14, "beta_pi": 1}})", "train.beta");
    expect(R"({"train": {"shape": {"kind": "sinc"}}})", "train.shape.kind");
    expect(R"({"relaxation": {"model": "stretched", "data": "x.csv"}})", "relaxation.model");
    expect(R"({"t1": -1})", "t1");
    expect(R"({"seed": -3})", "seed");
    expect(R"({"bogus": 1})", "config.bogus");
    expect(R"({"spectrum": {"kind": "power_law", "C": 1}})", "alpha");
}

TEST_CASE("load_config: files, comments, missing paths") {
    oracle::TempDir d("cfg");
    io::write_text_atomic(d / "c.json", "{\n  // comment\n  \"seed\": 3, \"t1\": 2e-3\n}\n");
    const auto c = load_config(d / "c.json");
    CHECK(c.seed == 3u);
    CHECK(c.t1 == 2e-3);
    CHECK(c.base_dir == d.path);
    CHECK_THROWS_AS(load_config(d / "nope.json"), ValidationError);
    io::write_text_atomic(d / "bad.json", "{\"seed\": }");
    CHECK_THROWS_AS(load_config(d / "bad.json"), ValidationError);
}

TEST_CASE("train JSON round trip") {
    PulseTrain t;
    t.beta = 1.1 * oracle::pi;
    t.shape = {ShapeKind::Square, 210e-9, 0.0};
    t.resonator = ResonatorModel{2 * oracle::pi * 2.5e9, 2000};
    const auto u = train_from_json(to_json(t));
    CHECK(u.beta == t.beta);
    CHECK(u.shape.kind == ShapeKind::Square);
    CHECK(u.shape.duration == t.shape.duration);
    CHECK(u.resonator->omega0 == t.resonator->omega0);
}
