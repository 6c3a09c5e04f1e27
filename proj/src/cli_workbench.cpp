#include "ddspec/cli_workbench.hpp"

#include "ddspec/chi_grid.hpp"
#include "ddspec/config.hpp"
#include "ddspec/contour.hpp"
#include "ddspec/echo_processing.hpp"
#include "ddspec/error.hpp"
#include "ddspec/fitting.hpp"
#include "ddspec/harmonic_scan.hpp"
#include "ddspec/io.hpp"
#include "ddspec/reconstruct.hpp"
#include "ddspec/relaxation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>

namespace ddspec {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Ctx {
    RunConfig cfg;
    fs::path out_dir;
    bool quiet = false;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;

    std::ostream& info() { return *out; }
    void say(const std::string& s) {
        if (!quiet) *out << s << "\n";
    }
    void warn(const std::string& s) { *err << "warning: " << s << "\n"; }
    fs::path path(const std::string& name) const { return out_dir / name; }
};

std::string g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

template <class T>
const T& need(const std::optional<T>& v, const char* section) {
    if (!v) throw ValidationError(std::string("config.") + section + ": missing section");
    return *v;
}

const std::string& need_path(const std::string& p, const char* field) {
    if (p.empty()) throw ValidationError(std::string("config.") + field + ": missing field");
    return p;
}

// input files are part of the config contract: a missing one is a config error
void need_file(const RunConfig& cfg, const std::string& p, const char* field) {
    if (p.empty()) return;
    if (!fs::exists(cfg.resolve(p)))
        throw ValidationError(std::string("config.") + field + ": no such file " + cfg.resolve(p).string());
}

void need_grid_source(const RunConfig& cfg) {
    if (cfg.io.chi_grid.empty() && cfg.io.records.empty())
        throw ValidationError("config.io.chi_grid: missing field (or io.records)");
    if (!cfg.io.chi_grid.empty()) need_file(cfg, cfg.io.chi_grid, "io.chi_grid");
    else need_file(cfg, cfg.io.records, "io.records");
}

ChiGrid load_grid(Ctx& c) {
    if (!c.cfg.io.chi_grid.empty()) return io::read_chi_grid(c.cfg.resolve(c.cfg.io.chi_grid));
    const auto records = io::read_records(c.cfg.resolve(c.cfg.io.records));
    return build_chi_grid(records, c.cfg.t1, {c.cfg.analysis.normalize, c.cfg.analysis.chi_max});
}

std::vector<PowerLawFit> load_fits(const RunConfig& cfg) {
    const auto path = cfg.resolve(cfg.io.fits);
    json j;
    try {
        j = json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    const json& arr = j.is_object() && j.contains("fits") ? j.at("fits") : j;
    if (!arr.is_array()) throw ValidationError(path.string() + ": expected a list of fits");
    std::vector<PowerLawFit> fits;
    for (const auto& f : arr) fits.push_back(io::power_law_fit_from_json(f));
    if (fits.empty()) throw InsufficientDataError(path.string() + ": no fits");
    return fits;
}

std::optional<PeakFit> load_peak(const RunConfig& cfg) {
    if (cfg.io.peak.empty()) return std::nullopt;
    const auto path = cfg.resolve(cfg.io.peak);
    try {
        json j = json::parse(io::read_text(path));
        if (j.contains("peak")) j = j.at("peak");
        PeakFit p;
        p.amplitude = j.at("amplitude").at("value").get<double>();
        p.center = j.at("center").at("value").get<double>();
        p.width_sigma = j.at("width_sigma").at("value").get<double>();
        return p;
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::pair<double, double> chi_range(const ChiGrid& g) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t k = 0; k < g.chi.size(); ++k)
        if (g.valid[k]) {
            lo = std::min(lo, g.chi[k]);
            hi = std::max(hi, g.chi[k]);
        }
    return {lo, hi};
}

void write_json(const fs::path& p, const json& j) { io::write_text_atomic(p, j.dump(2) + "\n"); }

void maybe_raster(Ctx& c, const ChiGrid& g) {
    const int n = c.cfg.analysis.raster_points;
    if (n <= 0) return;
    double tmax = 0.0;
    for (std::size_t i = 0; i < g.columns(); ++i) tmax = std::max(tmax, g.t(i, g.column_length(i)));
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = tmax * (k + 1) / n;
    io::write_raster(c.path("chi_image.csv"), rasterize(g, t));
}

// ---------------------------------------------------------------- commands

void check_simulate(const RunConfig& cfg) {
    need(cfg.spectrum, "spectrum");
    need(cfg.train, "train");
    need(cfg.plan, "plan");
}

int cmd_simulate(Ctx& c) {
    const auto& model = *c.cfg.spectrum;
    const auto& plan = *c.cfg.plan;
    SynthesisOptions opts;
    opts.mode = c.cfg.filter_mode;
    const auto records = synthesize_experiment(model, *c.cfg.train, plan, c.cfg.t1, opts);
    // synthetic amplitudes are already relative to L(0) = 1
    const auto grid = build_chi_grid(records, c.cfg.t1, {false, plan.noise_floor_chi});
    io::write_records(c.path("records.csv"), records);
    io::write_chi_grid(c.path("chi_grid.csv"), grid);
    maybe_raster(c, grid);
    const auto [lo, hi] = chi_range(grid);
    write_json(c.path("simulate_summary.json"),
               {{"model", to_json(model)}, {"n_tau", grid.columns()}, {"chi_min", lo}, {"chi_max", hi},
                {"seed", plan.seed ? json(*plan.seed) : json(nullptr)}});
    c.say("simulate: " + std::to_string(grid.columns()) + " tau values, chi range [" + g6(lo) + ", " + g6(hi) +
          "], model " + describe(model));
    return 0;
}

void check_analyze(const RunConfig& cfg) {
    need_grid_source(cfg);
    if (cfg.analysis.reconstruct) need(cfg.train, "train");
}

int cmd_analyze(Ctx& c) {
    const auto grid = load_grid(c);
    const auto [lo, hi] = chi_range(grid);
    std::vector<double> levels;
    for (double l : c.cfg.analysis.levels) {
        if (l > hi) {
            c.warn("chi level " + g6(l) + " is above the grid maximum " + g6(hi) + "; no fit");
            continue;
        }
        levels.push_back(l);
    }
    const auto traces = trace_contours(grid, levels, c.cfg.analysis.contour);
    json fits = json::array();
    std::vector<PowerLawFit> fit_list;
    for (const auto& tr : traces) {
        if (tr.empty()) {
            c.warn("chi level " + g6(tr.level) + ": empty contour");
            continue;
        }
        try {
            const auto f = fit_power_law(tr);
            fits.push_back(io::to_json(f));
            fit_list.push_back(f);
            io::write_spectrum(c.path("spectrum_chi_" + io::fmt(tr.level) + ".csv"), spectrum_from_contour(tr));
            c.say("analyze: chi = " + g6(f.level) + "  alpha = " + g6(f.alpha) + " [" + g6(f.ci95_alpha.lo) + ", " +
                  g6(f.ci95_alpha.hi) + "]  log10 C = " + g6(std::log10(f.c_value)) + "  (" +
                  std::to_string(f.n_points) + " points)");
        } catch (const InsufficientDataError& e) {
            c.warn("chi level " + g6(tr.level) + ": " + e.what());
        }
    }
    io::write_contours(c.path("contours.csv"), traces);
    write_json(c.path("fits.json"), {{"fits", fits}});
    maybe_raster(c, grid);
    if (c.cfg.analysis.reconstruct && !fit_list.empty()) {
        ReconstructionPlan rp;
        rp.tau_list = grid.tau;
        for (std::size_t i = 0; i < grid.columns(); ++i) rp.t_max = std::max(rp.t_max, grid.t(i, grid.column_length(i)));
        rp.contour = c.cfg.analysis.contour;
        rp.synthesis.mode = c.cfg.filter_mode;
        const auto peak = load_peak(c.cfg);
        for (const auto& f : fit_list) {
            try {
                io::write_spectrum(c.path("recon_chi_" + io::fmt(f.level) + ".csv"),
                                   reconstruct_spectrum(f, peak, *c.cfg.train, rp));
            } catch (const InsufficientDataError& e) {
                c.warn(std::string("reconstruction: ") + e.what());
            }
        }
    }
    return 0;
}

void check_scan(const RunConfig& cfg) {
    need(cfg.scan, "scan");
    need_file(cfg, need_path(cfg.io.fits, "io.fits"), "io.fits");
    need_grid_source(cfg);
    const auto& corr = cfg.scan->correction;
    if (corr == "train") need(cfg.train, "train");
    else if (corr != "ideal") need_file(cfg, corr, "scan.correction");
}

int cmd_scan(Ctx& c) {
    const auto& sc = *c.cfg.scan;
    const auto grid = load_grid(c);
    const auto fits = load_fits(c.cfg);
    FiniteCorrection corr = FiniteCorrection::identity();
    if (sc.correction == "train") {
        const auto& t = *c.cfg.train;
        corr = finite_correction(t.shape, t.resonator, t.beta);
    } else if (sc.correction != "ideal") {
        corr = io::read_correction(c.cfg.resolve(sc.correction));
    }
    const auto r = harmonic_scan(grid, fits, sc.cfg, corr);
    io::write_spectrum(c.path("scan_spectrum.csv"), r.estimate);
    io::write_spectrum(c.path("scan_segments.csv"), r.segment_curves);
    io::write_segments(c.path("scan_segment_info.csv"), r.estimate.segments);
    if (sc.cfg.record_points) io::write_scan_points(c.path("scan_points.csv"), r.points);
    io::write_correction(c.path("finite_correction.csv"), corr);

    json report{{"gap_windows", r.estimate.gap_windows}, {"n_windows", r.windows.size()}};
    if (r.estimate.size() == 0) c.warn("harmonic scan produced no points (no valid harmonic in any window)");
    if (!r.estimate.gap_windows.empty())
        c.warn(std::to_string(r.estimate.gap_windows.size()) + " scan window(s) without usable cells");
    if (sc.peak_range && r.estimate.size() > 0) {
        const auto [lo, hi] = *sc.peak_range;
        try {
            const auto pk = fit_gaussian_peak(r.estimate, lo, hi);
            report["peak"] = io::to_json(pk);
            c.say("scan: peak centre " + g6(pk.center) + " rad/s (" + g6(pk.center / (2e6 * std::numbers::pi)) +
                  " MHz), sigma " + g6(pk.width_sigma) + " rad/s, amplitude " + g6(pk.amplitude) + " 1/s");
        } catch (const InsufficientDataError& e) {
            c.warn(std::string("peak fit skipped: ") + e.what());
        }
        const auto table = per_harmonic_peaks(r, lo, hi);
        json tj = json::array();
        for (const auto& [m, a] : table) tj.push_back({{"m_s", m}, {"amplitude", a}});
        report["per_harmonic"] = tj;
        if (table.size() >= 3) report["quadratic"] = io::to_json(peak_vs_harmonic_fit(table));
    }
    write_json(c.path("peak_fit.json"), report);
    c.say("scan: " + std::to_string(r.estimate.size()) + " spectrum points from " + std::to_string(r.windows.size()) +
          " windows");
    return 0;
}

void check_relaxation(const RunConfig& cfg) {
    const auto& r = need(cfg.relaxation, "relaxation");
    if (r.data.empty() && !r.t2) throw ValidationError("config.relaxation.data: missing field (or relaxation.t2)");
    need_file(cfg, r.data, "relaxation.data");
}

int cmd_fit_relaxation(Ctx& c) {
    const auto& rs = *c.cfg.relaxation;
    json report;
    std::optional<double> t2 = rs.t2;
    if (!rs.data.empty()) {
        std::vector<double> t, y;
        io::read_xy(c.cfg.resolve(rs.data), t, y);
        const auto f = fit_relaxation(t, y, rs.model);
        report["fit"] = io::to_json(f);
        std::string line = "fit-relaxation (" + to_string(f.model) + "):";
        for (std::size_t i = 0; i < f.names.size(); ++i) line += " " + f.names[i] + " = " + g6(f.values[i]);
        c.say(line);
        if (!t2 && f.model == RelaxationModel::Exp) t2 = f.get("T2");
        if (!t2 && f.model == RelaxationModel::Biexp) t2 = f.get("T2_1");
    }
    if (t2) {
        const double s0 = zero_freq_estimate(*t2);
        report["S0_per_s"] = s0;
        c.say("S(0) = " + g6(s0) + " s^-1  (T2 = " + g6(*t2) + " s)");
        if (rs.species) {
            const double ppm = concentration_from_t2(*t2, *rs.species);
            report["concentration_ppm"] = ppm;
            c.say("[N] = " + g6(ppm) + " ppm");
        }
    }
    write_json(c.path("relaxation_fit.json"), report);
    return 0;
}

void check_echo(const RunConfig& cfg) {
    const auto& e = need(cfg.echo, "echo");
    if (e.traces.empty() && e.field_sweep.empty())
        throw ValidationError("config.echo.traces: missing field (or echo.field_sweep)");
    for (const auto& t : e.traces) need_file(cfg, t, "echo.traces");
    need_file(cfg, e.field_sweep, "echo.field_sweep");
}

int cmd_echo(Ctx& c) {
    const auto& e = *c.cfg.echo;
    if (!e.traces.empty()) {
        std::string s = "file,amplitude,phase_rad\n";
        for (const auto& p : e.traces) {
            const auto a = echo_amplitude(io::read_iq(c.cfg.resolve(p)));
            s += p + "," + io::fmt(a.amplitude) + "," + io::fmt(a.phase) + "\n";
        }
        io::write_text_atomic(c.path("echo_amplitudes.csv"), s);
        c.say("echo: " + std::to_string(e.traces.size()) + " trace(s) processed");
    }
    if (!e.field_sweep.empty()) {
        const auto sw = field_sweep_spectrum(io::read_field_sweep(c.cfg.resolve(e.field_sweep)));
        std::string s = "field_mT,dc_re,dc_im,dc_abs\n";
        for (std::size_t i = 0; i < sw.fields.size(); ++i)
            s += io::fmt(sw.fields[i]) + "," + io::fmt(sw.dc[i].real()) + "," + io::fmt(sw.dc[i].imag()) + "," +
                 io::fmt(std::abs(sw.dc[i])) + "\n";
        io::write_text_atomic(c.path("field_sweep.csv"), s);
        c.say("echo: field sweep with " + std::to_string(sw.fields.size()) + " fields");
    }
    return 0;
}

void check_recon(const RunConfig& cfg) {
    need_file(cfg, need_path(cfg.io.fits, "io.fits"), "io.fits");
    need_file(cfg, cfg.io.peak, "io.peak");
    need(cfg.train, "train");
    need(cfg.plan, "plan");
}

int cmd_recon(Ctx& c) {
    const auto fits = load_fits(c.cfg);
    const auto peak = load_peak(c.cfg);
    ReconstructionPlan rp;
    rp.tau_list = c.cfg.plan->tau_list;
    rp.t_max = c.cfg.plan->max_sequence_time;
    rp.contour = c.cfg.analysis.contour;
    rp.synthesis.mode = c.cfg.filter_mode;
    for (const auto& f : fits) {
        const auto est = reconstruct_spectrum(f, peak, *c.cfg.train, rp);
        io::write_spectrum(c.path("recon_chi_" + io::fmt(f.level) + ".csv"), est);
        c.say("recon: chi = " + g6(f.level) + ", " + std::to_string(est.size()) + " points");
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ddspec: dynamical-decoupling noise spectroscopy workbench"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--seed", seed, "override the configured random seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--quiet", quiet, "suppress progress output");

    struct Cmd {
        const char* name;
        const char* help;
        void (*check)(const RunConfig&);
        int (*run)(Ctx&);
    };
    const Cmd cmds[] = {
        {"simulate", "synthesize echo records and a chi grid", check_simulate, cmd_simulate},
        {"analyze", "contours, power-law fits and fundamental spectra", check_analyze, cmd_analyze},
        {"scan", "harmonic scan with background subtraction", check_scan, cmd_scan},
        {"fit-relaxation", "T1/T2 fits and derived S(0), [N]", check_relaxation, cmd_fit_relaxation},
        {"echo", "echo amplitudes and field-sweep spectra from I/Q traces", check_echo, cmd_echo},
        {"recon", "reconstructed fundamental spectra from fits", check_recon, cmd_recon},
    };
    for (const auto& c : cmds) app.add_subcommand(c.name, c.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const Cmd* cmd = nullptr;
    for (const auto& c : cmds)
        if (app.got_subcommand(c.name)) cmd = &c;

    Ctx ctx;
    ctx.out_dir = out_dir;
    ctx.quiet = quiet;
    ctx.out = &out;
    ctx.err = &err;
    try {
        ctx.cfg = load_config(config_path, seed);
        cmd->check(ctx.cfg);
    } catch (const ValidationError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    }
    try {
        return cmd->run(ctx);
    } catch (const FitFailure& e) {
        err << "error: " << e.what() << " (rms residual " << g6(e.residual) << ")\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace ddspec
