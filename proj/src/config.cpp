#include "ddspec/config.hpp"

#include "ddspec/error.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace ddspec {

namespace {

using json = nlohmann::json;

// Typed access to one JSON object with dotted-path diagnostics.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    bool has(const char* key) const {
        used_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ValidationError(path_ + (key.empty() ? "" : "." + key) + ": " + what);
    }

    double number(const char* key) const {
        if (!has(key)) fail(key, "missing field");
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }
    double number(const char* key, double dflt) const { return has(key) ? number(key) : dflt; }

    int integer(const char* key, int dflt) const {
        if (!has(key)) return dflt;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        return v.get<int>();
    }

    bool boolean(const char* key, bool dflt) const {
        if (!has(key)) return dflt;
        if (!j_.at(key).is_boolean()) fail(key, "expected true or false");
        return j_.at(key).get<bool>();
    }

    std::string string(const char* key, const std::string& dflt = {}) const {
        if (!has(key)) return dflt;
        if (!j_.at(key).is_string()) fail(key, "expected a string");
        return j_.at(key).get<std::string>();
    }

    std::vector<double> numbers(const char* key) const {
        if (!has(key)) fail(key, "missing field");
        const auto& v = j_.at(key);
        if (!v.is_array()) fail(key, "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) fail(std::string(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::uint64_t seed(const char* key) const {
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail(key, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    Section sub(const char* key) const {
        if (!has(key)) fail(key, "missing section");
        return Section(j_.at(key), path_ + "." + key);
    }
    const json& raw(const char* key) const {
        used_.insert(key);
        return j_.at(key);
    }
    const std::string& path() const { return path_; }

    // rejects keys that were never looked up (typos)
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(it.key(), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    mutable std::set<std::string> used_;
};

Interval range(const Section& s, const char* key) {
    const auto v = s.numbers(key);
    if (v.size() != 2 || !(v[1] > v[0])) s.fail(key, "expected [lo, hi] with lo < hi");
    return {v[0], v[1]};
}

SamplingPlan plan_from(const Section& s) {
    SamplingPlan p;
    if (s.has("tau_list") && s.has("tau_range")) s.fail("tau_list", "give either tau_list or tau_range, not both");
    if (s.has("tau_list")) {
        p.tau_list = s.numbers("tau_list");
    } else if (s.has("tau_range")) {
        const Section r = s.sub("tau_range");
        const double a = r.number("start"), b = r.number("stop"), d = r.number("step");
        r.finish();
        if (!(d > 0.0 && b >= a)) r.fail("step", "need step > 0 and stop >= start");
        const auto n = static_cast<long>(std::floor((b - a) / d + 1e-9)) + 1;
        if (n > 1000000) r.fail("step", "more than 10^6 tau values");
        for (long k = 0; k < n; ++k) p.tau_list.push_back(a + static_cast<double>(k) * d);
    } else {
        s.fail("tau_list", "missing field (or tau_range)");
    }
    p.max_sequence_time = s.number("max_sequence_time");
    p.noise_floor_chi = s.number("noise_floor_chi", p.noise_floor_chi);
    p.shot_noise_sigma = s.number("shot_noise_sigma", 0.0);
    p.averages = s.integer("averages", 1);
    if (s.has("seed")) p.seed = s.seed("seed");
    s.finish();
    return p;
}

} // namespace

PulseTrain train_from_json(const json& j, const std::string& ctx) {
    const Section s(j, ctx);
    PulseTrain t;
    if (s.has("beta") && s.has("beta_pi")) s.fail("beta", "give either beta or beta_pi");
    if (s.has("beta")) t.beta = s.number("beta");
    if (s.has("beta_pi")) t.beta = s.number("beta_pi") * std::numbers::pi;
    t.tau = s.number("tau", 0.0);
    t.n_pulses = s.integer("n_pulses", 1);
    if (s.has("shape")) {
        const Section sh = s.sub("shape");
        const std::string kind = sh.string("kind", "instantaneous");
        if (kind == "instantaneous") t.shape.kind = ShapeKind::Instantaneous;
        else if (kind == "square") t.shape.kind = ShapeKind::Square;
        else if (kind == "gaussian") t.shape.kind = ShapeKind::Gaussian;
        else sh.fail("kind", "expected instantaneous | square | gaussian");
        t.shape.duration = sh.number("duration", 0.0);
        t.shape.gaussian_sigma = sh.number("gaussian_sigma", 0.0);
        sh.finish();
    }
    if (s.has("resonator")) {
        const Section r = s.sub("resonator");
        t.resonator = ResonatorModel{r.number("omega0"), r.number("q_factor")};
        r.finish();
    }
    s.finish();
    try {
        validate(t.shape);
        if (t.resonator && !(t.resonator->omega0 > 0.0 && t.resonator->q_factor >= 1.0))
            throw ValidationError("resonator needs omega0 > 0 and q_factor >= 1");
        if (!(t.beta > 0.0 && std::isfinite(t.beta))) throw ValidationError("beta must be > 0");
    } catch (const ValidationError& e) {
        throw ValidationError(ctx + ": " + e.what());
    }
    return t;
}

json to_json(const PulseTrain& t) {
    json shape;
    switch (t.shape.kind) {
    case ShapeKind::Instantaneous: shape = {{"kind", "instantaneous"}}; break;
    case ShapeKind::Square: shape = {{"kind", "square"}, {"duration", t.shape.duration}}; break;
    case ShapeKind::Gaussian:
        shape = {{"kind", "gaussian"}, {"duration", t.shape.duration}, {"gaussian_sigma", t.shape.gaussian_sigma}};
        break;
    }
    json j{{"beta", t.beta}, {"tau", t.tau}, {"n_pulses", t.n_pulses}, {"shape", shape}};
    if (t.resonator) j["resonator"] = {{"omega0", t.resonator->omega0}, {"q_factor", t.resonator->q_factor}};
    return j;
}

std::filesystem::path RunConfig::resolve(const std::string& p) const {
    const std::filesystem::path q(p);
    return q.is_absolute() || base_dir.empty() ? q : base_dir / q;
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir,
                       std::optional<std::uint64_t> seed_override) {
    const Section root(j, "config");
    RunConfig c;
    c.base_dir = base_dir;
    if (root.has("seed")) c.seed = root.seed("seed");
    if (seed_override) c.seed = seed_override;

    if (root.has("spectrum")) c.spectrum = spectrum_from_json(root.raw("spectrum"));
    if (root.has("train")) c.train = train_from_json(root.raw("train"), "train");
    if (root.has("plan")) {
        c.plan = plan_from(root.sub("plan"));
        if (seed_override || !c.plan->seed) c.plan->seed = c.seed;
        validate(*c.plan);
    }
    if (root.has("t1")) {
        c.t1 = root.number("t1");
        if (!(c.t1 > 0.0)) root.fail("t1", "must be > 0 (omit for no relaxation)");
    }
    if (root.has("synthesis")) {
        const Section s = root.sub("synthesis");
        const std::string m = s.string("filter_mode", "numeric");
        if (m == "numeric") c.filter_mode = FilterMode::Numeric;
        else if (m == "delta") c.filter_mode = FilterMode::Delta;
        else s.fail("filter_mode", "expected numeric | delta");
        s.finish();
    }
    if (root.has("analysis")) {
        const Section s = root.sub("analysis");
        if (s.has("levels")) c.analysis.levels = s.numbers("levels");
        for (double l : c.analysis.levels)
            if (!(l > 0.0)) s.fail("levels", "levels must be > 0");
        c.analysis.contour.smooth_sigma = s.number("smooth_sigma", c.analysis.contour.smooth_sigma);
        if (!(c.analysis.contour.smooth_sigma >= 0.0)) s.fail("smooth_sigma", "must be >= 0");
        c.analysis.normalize = s.boolean("normalize", true);
        c.analysis.chi_max = s.number("chi_max", c.analysis.chi_max);
        c.analysis.reconstruct = s.boolean("reconstruct", false);
        c.analysis.raster_points = s.integer("raster_points", 0);
        s.finish();
    }
    if (root.has("scan")) {
        const Section s = root.sub("scan");
        ScanSection sc;
        auto& h = sc.cfg;
        h.window_w = s.number("window_w");
        h.epsilon = s.number("epsilon", h.epsilon);
        h.tau_min = s.number("tau_min");
        h.tau_max = s.number("tau_max", 0.0);
        h.t_max = s.number("t_max");
        h.chi_noise_threshold = s.number("chi_noise_threshold", h.chi_noise_threshold);
        const Interval r = range(s, "omega_range");
        h.omega_lo = r.lo;
        h.omega_hi = r.hi;
        h.points_per_window = s.integer("points_per_window", h.points_per_window);
        h.record_points = s.boolean("record_points", false);
        if (s.has("peak_range")) sc.peak_range = range(s, "peak_range");
        sc.correction = s.string("correction", "ideal");
        s.finish();
        validate(h);
        c.scan = sc;
    }
    if (root.has("relaxation")) {
        const Section s = root.sub("relaxation");
        RelaxationSection r;
        try {
            r.model = relaxation_model_from_string(s.string("model", "exp"));
        } catch (const ValidationError& e) {
            s.fail("model", e.what());
        }
        r.data = s.string("data");
        if (s.has("t2")) {
            r.t2 = s.number("t2");
            if (!(*r.t2 > 0.0)) s.fail("t2", "must be > 0");
        }
        if (s.has("species")) {
            const auto sp = s.string("species");
            if (sp == "P1") r.species = Species::P1;
            else if (sp == "NV") r.species = Species::NV;
            else s.fail("species", "expected P1 | NV");
        }
        s.finish();
        c.relaxation = r;
    }
    if (root.has("echo")) {
        const Section s = root.sub("echo");
        EchoSection e;
        if (s.has("traces")) {
            const auto& v = s.raw("traces");
            if (!v.is_array()) s.fail("traces", "expected a list of paths");
            for (const auto& p : v) {
                if (!p.is_string()) s.fail("traces", "expected a list of paths");
                e.traces.push_back(p.get<std::string>());
            }
        }
        e.field_sweep = s.string("field_sweep");
        s.finish();
        c.echo = e;
    }
    if (root.has("io")) {
        const Section s = root.sub("io");
        c.io.records = s.string("records");
        c.io.chi_grid = s.string("chi_grid");
        c.io.fits = s.string("fits");
        c.io.peak = s.string("peak");
        s.finish();
    }
    root.finish();
    return c;
}

RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream f(path);
    if (!f) throw ValidationError("config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(f, nullptr, true, true);  // comments allowed
    } catch (const json::parse_error& e) {
        throw ValidationError("config: " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path(), seed_override);
}

} // namespace ddspec
