#include "ddspec/spectral_models.hpp"

#include "ddspec/error.hpp"

#include <cmath>
#include <sstream>

namespace ddspec {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw ValidationError(std::string("non-finite spectrum parameter: ") + what);
}

void require_positive(double v, const char* what) {
    require_finite(v, what);
    if (!(v > 0.0))
        throw ValidationError(std::string("spectrum parameter must be > 0: ") + what);
}

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

void validate(const SpectrumModel& model) {
    std::visit(overloaded{
        [](const PowerLaw& p) {
            require_finite(p.C, "C");
            require_finite(p.alpha, "alpha");
            if (p.C < 0.0) throw ValidationError("power law C must be >= 0");
        },
        [](const Lorentzian& p) {
            require_finite(p.delta, "delta");
            require_positive(p.tau_c, "tau_c");
        },
        [](const GaussianPeak& p) {
            require_finite(p.A, "A");
            require_finite(p.omega_p, "omega_p");
            require_positive(p.sigma, "sigma");
            if (p.A < 0.0) throw ValidationError("gaussian peak A must be >= 0");
        },
        [](const LorentzianEnsemble& p) {
            require_finite(p.delta, "delta");
            require_positive(p.p0, "p0");
            require_positive(p.tau1, "tau1");
            require_positive(p.tau2, "tau2");
            if (!(p.tau1 < p.tau2)) throw ValidationError("lorentzian ensemble needs tau1 < tau2");
        },
        [](const Composite& c) {
            for (const auto& t : c.terms) validate(t);
        },
    }, model.variant());
}

double eval_lorentzian_ensemble(const LorentzianEnsemble& m, double omega) {
    const double w = std::fabs(omega);
    const double d2 = m.delta * m.delta;
    // below ~1e-4/tau2 the series form is more accurate than the atan difference
    const double x2 = m.tau2 * w;
    if (x2 < 1e-4) {
        const double t1 = m.tau1, t2 = m.tau2;
        // atan(x)/w = t - t^3 w^2/3 + t^5 w^4/5
        const double w2 = w * w;
        const double s = (t2 - t1) - (t2 * t2 * t2 - t1 * t1 * t1) * w2 / 3.0
                         + (std::pow(t2, 5) - std::pow(t1, 5)) * w2 * w2 / 5.0;
        return 2.0 * d2 * m.p0 * s;
    }
    // atan(a) - atan(b) = atan((a-b)/(1+ab)) keeps precision when tau1 ~ tau2
    const double a = m.tau2 * w, b = m.tau1 * w;
    const double diff = std::atan2(a - b, 1.0 + a * b);
    return 2.0 * d2 * m.p0 / w * diff;
}

double eval_spectrum(const SpectrumModel& model, double omega) {
    if (!std::isfinite(omega)) throw DomainError("spectrum evaluated at non-finite omega");
    const double w = std::fabs(omega);
    return std::visit(overloaded{
        [w](const PowerLaw& p) -> double {
            if (p.alpha == 0.0) return p.C;
            if (w == 0.0) {
                if (p.alpha > 0.0) throw DomainError("power law diverges at omega = 0");
                return 0.0;
            }
            if (p.alpha == 1.0) return p.C / w;
            return p.C * std::pow(w, -p.alpha);
        },
        [w](const Lorentzian& p) -> double {
            const double x = w * p.tau_c;
            return 2.0 * p.delta * p.delta * p.tau_c / (1.0 + x * x);
        },
        [w](const GaussianPeak& p) -> double {
            const double z = (w - p.omega_p) / p.sigma;
            return p.A * std::exp(-0.5 * z * z);
        },
        [w](const LorentzianEnsemble& p) -> double {
            return eval_lorentzian_ensemble(p, w);
        },
        [w](const Composite& c) -> double {
            long double acc = 0.0L;
            for (const auto& t : c.terms) acc += eval_spectrum(t, w);
            return static_cast<double>(acc);
        },
    }, model.variant());
}

bool singular_at_zero(const SpectrumModel& model) {
    if (auto p = model.get_if<PowerLaw>()) return p->alpha > 0.0 && p->C > 0.0;
    if (auto c = model.get_if<Composite>()) {
        for (const auto& t : c->terms)
            if (singular_at_zero(t)) return true;
    }
    return false;
}

bool decay_bound(const SpectrumModel& model, double omega0, std::vector<DecayBound>& out) {
    return std::visit(overloaded{
        [&](const PowerLaw& p) {
            out.push_back({p.C, p.alpha});
            return true;
        },
        [&](const Lorentzian& p) {
            out.push_back({2.0 * p.delta * p.delta / p.tau_c, 2.0});
            return true;
        },
        [&](const GaussianPeak& p) {
            // exp(-z^2/2) * omega^2 is decreasing once (w - wp) w > 2 sigma^2
            if (omega0 < p.omega_p + p.sigma || omega0 < 2.0 * p.sigma) return false;
            const double z = (omega0 - p.omega_p) / p.sigma;
            out.push_back({p.A * std::exp(-0.5 * z * z) * omega0 * omega0, 2.0});
            return true;
        },
        [&](const LorentzianEnsemble& p) {
            out.push_back({2.0 * p.delta * p.delta * p.p0 / p.tau1, 2.0});
            return true;
        },
        [&](const Composite& c) {
            for (const auto& t : c.terms)
                if (!decay_bound(t, omega0, out)) return false;
            return true;
        },
    }, model.variant());
}

nlohmann::json to_json(const SpectrumModel& model) {
    using nlohmann::json;
    return std::visit(overloaded{
        [](const PowerLaw& p) { return json{{"kind", "power_law"}, {"C", p.C}, {"alpha", p.alpha}}; },
        [](const Lorentzian& p) {
            return json{{"kind", "lorentzian"}, {"delta", p.delta}, {"tau_c", p.tau_c}};
        },
        [](const GaussianPeak& p) {
            return json{{"kind", "gaussian_peak"}, {"A", p.A}, {"omega_p", p.omega_p}, {"sigma", p.sigma}};
        },
        [](const LorentzianEnsemble& p) {
            return json{{"kind", "lorentzian_ensemble"}, {"delta", p.delta}, {"p0", p.p0},
                        {"tau1", p.tau1}, {"tau2", p.tau2}};
        },
        [](const Composite& c) {
            json terms = json::array();
            for (const auto& t : c.terms) terms.push_back(to_json(t));
            return json{{"kind", "composite"}, {"terms", terms}};
        },
    }, model.variant());
}

namespace {

double field(const nlohmann::json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key))
        throw ValidationError("spectrum." + ctx + ": missing field '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number())
        throw ValidationError("spectrum." + ctx + ": field '" + key + "' must be a number");
    return v.get<double>();
}

SpectrumModel parse(const nlohmann::json& j, const std::string& ctx) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ValidationError("spectrum" + (ctx.empty() ? std::string() : "." + ctx) +
                              ": missing field 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    const std::string c = ctx.empty() ? kind : ctx;
    if (kind == "power_law") return PowerLaw{field(j, "C", c), field(j, "alpha", c)};
    if (kind == "lorentzian") return Lorentzian{field(j, "delta", c), field(j, "tau_c", c)};
    if (kind == "gaussian_peak")
        return GaussianPeak{field(j, "A", c), field(j, "omega_p", c), field(j, "sigma", c)};
    if (kind == "lorentzian_ensemble")
        return LorentzianEnsemble{field(j, "delta", c), field(j, "p0", c), field(j, "tau1", c),
                                  field(j, "tau2", c)};
    if (kind == "composite") {
        if (!j.contains("terms") || !j.at("terms").is_array())
            throw ValidationError("spectrum." + c + ": missing field 'terms'");
        Composite comp;
        std::size_t i = 0;
        for (const auto& t : j.at("terms"))
            comp.terms.push_back(parse(t, c + ".terms[" + std::to_string(i++) + "]"));
        return comp;
    }
    throw ValidationError("spectrum: unknown kind '" + kind + "'");
}

} // namespace

SpectrumModel spectrum_from_json(const nlohmann::json& j) {
    auto m = parse(j, "");
    validate(m);
    return m;
}

std::string describe(const SpectrumModel& model) {
    std::ostringstream os;
    os.precision(6);
    std::visit(overloaded{
        [&](const PowerLaw& p) { os << "PowerLaw(C=" << p.C << ", alpha=" << p.alpha << ")"; },
        [&](const Lorentzian& p) { os << "Lorentzian(delta=" << p.delta << ", tau_c=" << p.tau_c << ")"; },
        [&](const GaussianPeak& p) {
            os << "GaussianPeak(A=" << p.A << ", omega_p=" << p.omega_p << ", sigma=" << p.sigma << ")";
        },
        [&](const LorentzianEnsemble& p) {
            os << "LorentzianEnsemble(delta=" << p.delta << ", p0=" << p.p0 << ", tau1=" << p.tau1
               << ", tau2=" << p.tau2 << ")";
        },
        [&](const Composite& c) {
            os << "Composite[";
            for (std::size_t i = 0; i < c.terms.size(); ++i) os << (i ? ", " : "") << describe(c.terms[i]);
            os << "]";
        },
    }, model.variant());
    return os.str();
}

} // namespace ddspec
