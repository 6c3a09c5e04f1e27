#include "ddspec/io.hpp"

#include "ddspec/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ddspec::io {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s, const std::string& where) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ValidationError(where + ": cannot parse number '" + s + "'");
    return v;
}

namespace {

int parse_int(const std::string& s, const std::string& where) {
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ValidationError(where + ": cannot parse integer '" + s + "'");
    return v;
}

std::string loc(const fs::path& p, std::size_t line) { return p.string() + ":" + std::to_string(line); }

void expect_header(const std::vector<std::vector<std::string>>& rows, const fs::path& p,
                   const std::vector<std::string>& head) {
    if (rows.empty() || rows[0].size() < head.size())
        throw ValidationError(p.string() + ": missing header");
    for (std::size_t i = 0; i < head.size(); ++i)
        if (rows[0][i] != head[i])
            throw ValidationError(p.string() + ": expected column '" + head[i] + "', found '" + rows[0][i] + "'");
}

} // namespace

void write_text_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << content;
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> row;
        std::size_t a = 0;
        while (true) {
            const auto b = line.find(',', a);
            row.push_back(line.substr(a, b == std::string::npos ? std::string::npos : b - a));
            if (b == std::string::npos) break;
            a = b + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_records(const fs::path& path, const std::vector<ExperimentRecord>& records) {
    std::string s = "tau_s,n_echo,amplitude\n";
    for (const auto& r : records)
        for (std::size_t k = 0; k < r.echo_amplitudes.size(); ++k)
            s += fmt(r.tau) + "," + std::to_string(k + 1) + "," + fmt(r.echo_amplitudes[k]) + "\n";
    write_text_atomic(path, s);
}

std::vector<ExperimentRecord> read_records(const fs::path& path) {
    const auto rows = read_csv(path);
    expect_header(rows, path, {"tau_s", "n_echo", "amplitude"});
    std::vector<ExperimentRecord> out;
    std::map<double, std::size_t> by_tau;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() < 3) throw ValidationError(loc(path, i + 1) + ": expected 3 columns");
        const double tau = parse_double(r[0], loc(path, i + 1));
        const int n = parse_int(r[1], loc(path, i + 1));
        const double a = parse_double(r[2], loc(path, i + 1));
        auto it = by_tau.find(tau);
        if (it == by_tau.end()) {
            it = by_tau.emplace(tau, out.size()).first;
            out.push_back({tau, {}, 1});
        }
        auto& rec = out[it->second];
        if (n != static_cast<int>(rec.echo_amplitudes.size()) + 1)
            throw ValidationError(loc(path, i + 1) + ": echoes must be listed as N = 1, 2, ... per tau");
        rec.echo_amplitudes.push_back(a);
    }
    if (out.empty()) throw ValidationError(path.string() + ": no records");
    return out;
}

void write_chi_grid(const fs::path& path, const ChiGrid& g) {
    std::string s = "tau_s";
    for (double t : g.tau) s += "," + fmt(t);
    s += "\nn_echoes";
    for (std::size_t i = 0; i < g.columns(); ++i) s += "," + std::to_string(g.column_length(i));
    s += "\n";
    for (int n = 1; n <= g.n_max; ++n) {
        s += std::to_string(n);
        for (std::size_t i = 0; i < g.columns(); ++i) {
            s += ",";
            if (n > g.column_length(i)) continue;
            s += fmt(g.at(i, n));
            if (!g.ok(i, n) && !std::isnan(g.at(i, n))) s += "*";
        }
        s += "\n";
    }
    write_text_atomic(path, s);
}

ChiGrid read_chi_grid(const fs::path& path) {
    const auto rows = read_csv(path);
    if (rows.size() < 2 || rows[0].empty() || rows[0][0] != "tau_s" || rows[1][0] != "n_echoes")
        throw ValidationError(path.string() + ": not a chi grid (expected tau_s and n_echoes header rows)");
    ChiGrid g;
    const std::size_t nc = rows[0].size() - 1;
    if (rows[1].size() != nc + 1) throw ValidationError(loc(path, 2) + ": column count mismatch");
    for (std::size_t i = 0; i < nc; ++i) {
        g.tau.push_back(parse_double(rows[0][i + 1], loc(path, 1)));
        g.lengths.push_back(parse_int(rows[1][i + 1], loc(path, 2)));
        if (i > 0 && !(g.tau[i] > g.tau[i - 1])) throw ValidationError(loc(path, 1) + ": tau must ascend");
    }
    g.n_max = static_cast<int>(rows.size()) - 2;
    g.chi.assign(nc * static_cast<std::size_t>(std::max(g.n_max, 0)), std::nan(""));
    g.valid.assign(g.chi.size(), 0);
    for (int n = 1; n <= g.n_max; ++n) {
        const auto& r = rows[static_cast<std::size_t>(n) + 1];
        const auto where = loc(path, static_cast<std::size_t>(n) + 2);
        if (parse_int(r[0], where) != n) throw ValidationError(where + ": rows must be N = 1, 2, ...");
        for (std::size_t i = 0; i < nc; ++i) {
            std::string cell = i + 1 < r.size() ? r[i + 1] : "";
            if (cell.empty()) continue;
            bool flagged = cell.back() == '*';
            if (flagged) cell.pop_back();
            const double v = parse_double(cell, where);
            g.chi[g.index(i, n)] = v;
            g.valid[g.index(i, n)] = (!flagged && !std::isnan(v)) ? 1 : 0;
        }
    }
    return g;
}

void write_raster(const fs::path& path, const RasterGrid& r) {
    std::string s = "t_s\\tau_s";
    for (double t : r.tau_axis) s += "," + fmt(t);
    s += "\n";
    const std::size_t nc = r.tau_axis.size();
    for (std::size_t k = 0; k < r.t_axis.size(); ++k) {
        s += fmt(r.t_axis[k]);
        for (std::size_t i = 0; i < nc; ++i) s += "," + (r.valid[k * nc + i] ? fmt(r.chi[k * nc + i]) : std::string());
        s += "\n";
    }
    write_text_atomic(path, s);
}

void write_two_column(const fs::path& path, const std::string& hx, const std::string& hy,
                      const std::vector<double>& x, const std::vector<double>& y) {
    std::string s = hx + "," + hy + "\n";
    for (std::size_t i = 0; i < x.size(); ++i) s += fmt(x[i]) + "," + fmt(y[i]) + "\n";
    write_text_atomic(path, s);
}

void write_filter(const fs::path& path, const FilterFunction& f) {
    std::string s = "omega_rad_s,fx,fz,total\n";
    for (std::size_t i = 0; i < f.omega.size(); ++i)
        s += fmt(f.omega[i]) + "," + fmt(f.fx_vals[i]) + "," + fmt(f.fz_vals[i]) + "," + fmt(f.total[i]) + "\n";
    write_text_atomic(path, s);
}

void write_correction(const fs::path& path, const FiniteCorrection& c) {
    write_two_column(path, "omega_rad_s", "value", c.omega, c.a_vals);
}

FiniteCorrection read_correction(const fs::path& path) {
    const auto rows = read_csv(path);
    expect_header(rows, path, {"omega_rad_s", "value"});
    FiniteCorrection c;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() < 2) throw ValidationError(loc(path, i + 1) + ": expected 2 columns");
        c.omega.push_back(parse_double(rows[i][0], loc(path, i + 1)));
        c.a_vals.push_back(parse_double(rows[i][1], loc(path, i + 1)));
    }
    if (c.omega.empty()) throw ValidationError(path.string() + ": empty correction table");
    return c;
}

void write_ensemble(const fs::path& path, const EnsembleResult& e) {
    std::string s = "t_s,coherence,std_err\n";
    for (std::size_t i = 0; i < e.t_axis.size(); ++i)
        s += fmt(e.t_axis[i]) + "," + fmt(e.mean_coherence[i]) + "," + fmt(e.std_err[i]) + "\n";
    write_text_atomic(path, s);
}

void write_spectrum(const fs::path& path, const SpectrumEstimate& e) {
    std::string s = "omega_rad_s,s_per_s,m_s,n_echoes,window_index\n";
    for (std::size_t i = 0; i < e.size(); ++i)
        s += fmt(e.omega[i]) + "," + fmt(e.s_vals[i]) + "," + std::to_string(e.m_s[i]) + "," +
             std::to_string(e.n_echoes[i]) + "," + std::to_string(e.window_index[i]) + "\n";
    write_text_atomic(path, s);
}

SpectrumEstimate read_spectrum(const fs::path& path) {
    const auto rows = read_csv(path);
    expect_header(rows, path, {"omega_rad_s", "s_per_s", "m_s", "n_echoes", "window_index"});
    SpectrumEstimate e;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const auto w = loc(path, i + 1);
        if (r.size() < 5) throw ValidationError(w + ": expected 5 columns");
        e.push(parse_double(r[0], w), parse_double(r[1], w), parse_int(r[2], w), parse_int(r[3], w),
               parse_int(r[4], w));
    }
    return e;
}

void write_segments(const fs::path& path, const std::vector<SegmentInfo>& segs) {
    std::string s = "window_index,m_s,n_lo,n_hi,omega_lo,omega_hi,weight\n";
    for (const auto& g : segs)
        s += std::to_string(g.window_index) + "," + std::to_string(g.m_s) + "," + std::to_string(g.n_lo) + "," +
             std::to_string(g.n_hi) + "," + fmt(g.omega_lo) + "," + fmt(g.omega_hi) + "," + fmt(g.weight) + "\n";
    write_text_atomic(path, s);
}

void write_scan_points(const fs::path& path, const std::vector<ScanPoint>& pts) {
    std::string s = "window_index,m_s,n_echo,tau_s,omega_rad_s,chi,chi_b,a_finite,s_per_s\n";
    for (const auto& p : pts)
        s += std::to_string(p.window_index) + "," + std::to_string(p.m_s) + "," + std::to_string(p.n) + "," +
             fmt(p.tau) + "," + fmt(p.omega) + "," + fmt(p.chi) + "," + fmt(p.chi_b) + "," + fmt(p.a) + "," +
             fmt(p.s_p) + "\n";
    write_text_atomic(path, s);
}

void write_contours(const fs::path& path, const std::vector<ContourTrace>& traces) {
    std::string s = "level,tau_s,t_s,n_echo\n";
    for (const auto& tr : traces)
        for (const auto& p : tr.points)
            s += fmt(tr.level) + "," + fmt(p.tau) + "," + fmt(p.t) + "," + std::to_string(p.n) + "\n";
    write_text_atomic(path, s);
}

void write_iq(const fs::path& path, const IQTrace& t) {
    std::string s = "t_s,i,q\n";
    for (std::size_t k = 0; k < t.size(); ++k)
        s += fmt(static_cast<double>(k) * t.dt) + "," + fmt(t.i_vals[k]) + "," + fmt(t.q_vals[k]) + "\n";
    write_text_atomic(path, s);
}

IQTrace read_iq(const fs::path& path) {
    const auto rows = read_csv(path);
    expect_header(rows, path, {"t_s", "i", "q"});
    IQTrace t;
    std::vector<double> ts;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto w = loc(path, i + 1);
        if (rows[i].size() < 3) throw ValidationError(w + ": expected 3 columns");
        ts.push_back(parse_double(rows[i][0], w));
        t.i_vals.push_back(parse_double(rows[i][1], w));
        t.q_vals.push_back(parse_double(rows[i][2], w));
    }
    if (ts.size() >= 2) t.dt = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    validate(t);
    return t;
}

FieldSweep read_field_sweep(const fs::path& index) {
    const auto rows = read_csv(index);
    expect_header(rows, index, {"field_mT", "filename"});
    FieldSweep s;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() < 2) throw ValidationError(loc(index, i + 1) + ": expected 2 columns");
        s.fields.push_back(parse_double(rows[i][0], loc(index, i + 1)));
        s.traces.push_back(read_iq(index.parent_path() / rows[i][1]));
    }
    validate(s);
    return s;
}

void write_field_sweep(const fs::path& index, const FieldSweep& sweep) {
    std::string s = "field_mT,filename\n";
    for (std::size_t i = 0; i < sweep.fields.size(); ++i) {
        const std::string name = "trace_" + std::to_string(i) + ".csv";
        write_iq(index.parent_path() / name, sweep.traces[i]);
        s += fmt(sweep.fields[i]) + "," + name + "\n";
    }
    write_text_atomic(index, s);
}

void read_xy(const fs::path& path, std::vector<double>& x, std::vector<double>& y) {
    const auto rows = read_csv(path);
    x.clear();
    y.clear();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto w = loc(path, i + 1);
        if (rows[i].size() < 2) throw ValidationError(w + ": expected 2 columns");
        x.push_back(parse_double(rows[i][0], w));
        y.push_back(parse_double(rows[i][1], w));
    }
    if (x.empty()) throw ValidationError(path.string() + ": no data rows");
}

namespace {
nlohmann::json triple(double v, const Interval& ci) { return {{"value", v}, {"ci_low", ci.lo}, {"ci_high", ci.hi}}; }
} // namespace

nlohmann::json to_json(const PowerLawFit& f) {
    return {{"level", f.level},         {"C", triple(f.c_value, f.ci95_c)}, {"alpha", triple(f.alpha, f.ci95_alpha)},
            {"residual", f.residual},   {"n_points", f.n_points},           {"intercept", f.intercept}};
}

PowerLawFit power_law_fit_from_json(const nlohmann::json& j) {
    try {
        PowerLawFit f;
        f.level = j.at("level").get<double>();
        f.c_value = j.at("C").at("value").get<double>();
        f.ci95_c = {j.at("C").at("ci_low").get<double>(), j.at("C").at("ci_high").get<double>()};
        f.alpha = j.at("alpha").at("value").get<double>();
        f.ci95_alpha = {j.at("alpha").at("ci_low").get<double>(), j.at("alpha").at("ci_high").get<double>()};
        f.residual = j.value("residual", 0.0);
        f.n_points = j.value("n_points", 0);
        f.intercept = j.at("intercept").get<double>();
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("power-law fit record: ") + e.what());
    }
}

nlohmann::json to_json(const PeakFit& f) {
    return {{"amplitude", triple(f.amplitude, f.ci95_amplitude)},
            {"center", triple(f.center, f.ci95_center)},
            {"width_sigma", triple(f.width_sigma, f.ci95_width)},
            {"residual", f.residual},
            {"n_points", f.n_points}};
}

nlohmann::json to_json(const RelaxationFit& f) {
    nlohmann::json j{{"model", to_string(f.model)}, {"residual", f.residual}};
    for (std::size_t i = 0; i < f.names.size(); ++i) j[f.names[i]] = triple(f.values[i], f.ci95[i]);
    return j;
}

nlohmann::json to_json(const QuadraticFit& f) {
    return {{"p2", triple(f.p2, f.ci95_p2)}, {"p0", triple(f.p0, f.ci95_p0)}};
}

} // namespace ddspec::io
