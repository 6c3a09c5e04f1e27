#include "ddspec/relaxation.hpp"

#include "ddspec/error.hpp"
#include "lsq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddspec {

RelaxationModel relaxation_model_from_string(const std::string& s) {
    if (s == "exp") return RelaxationModel::Exp;
    if (s == "biexp") return RelaxationModel::Biexp;
    if (s == "inversion_recovery" || s == "ir") return RelaxationModel::InversionRecovery;
    if (s == "inversion_depolarization" || s == "id") return RelaxationModel::InversionDepolarization;
    throw ValidationError("unknown relaxation model '" + s +
                          "' (exp | biexp | inversion_recovery | inversion_depolarization)");
}

std::string to_string(RelaxationModel m) {
    switch (m) {
    case RelaxationModel::Exp: return "exp";
    case RelaxationModel::Biexp: return "biexp";
    case RelaxationModel::InversionRecovery: return "inversion_recovery";
    case RelaxationModel::InversionDepolarization: return "inversion_depolarization";
    }
    return "?";
}

double RelaxationFit::get(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw ValidationError("relaxation fit has no parameter '" + name + "'");
}

double eval_relaxation(RelaxationModel m, const std::vector<double>& p, double t) {
    switch (m) {
    case RelaxationModel::Exp:
    case RelaxationModel::InversionDepolarization: return p[0] * std::exp(-t / p[1]);
    case RelaxationModel::Biexp: return p[0] * std::exp(-t / p[1]) + p[2] * std::exp(-t / p[3]);
    case RelaxationModel::InversionRecovery: {
        const double s = std::sin(0.5 * p[1]);
        return p[0] * (1.0 - 2.0 * s * s * std::exp(-t / p[2]));
    }
    }
    return 0.0;
}

namespace {

// 1/e crossing of |y| relative to its largest value, used for starting values
double decay_time_guess(const std::vector<double>& t, const std::vector<double>& y) {
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::fabs(v));
    const double span = *std::max_element(t.begin(), t.end()) - *std::min_element(t.begin(), t.end());
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::fabs(y[i]) < ymax / std::exp(1.0)) return std::max(t[i], span / 100.0);
    return span;
}

} // namespace

RelaxationFit fit_relaxation(const std::vector<double>& t, const std::vector<double>& y, RelaxationModel model) {
    if (t.size() != y.size()) throw ValidationError("fit_relaxation: size mismatch");
    for (std::size_t i = 0; i < t.size(); ++i)
        if (!std::isfinite(t[i]) || !std::isfinite(y[i])) throw ValidationError("fit_relaxation: non-finite data");

    RelaxationFit f;
    f.model = model;
    std::vector<double> p0, scale;
    double ymax = 0.0, y0 = y.front(), ylast = y.back();
    for (double v : y) ymax = std::max(ymax, std::fabs(v));
    const double T = decay_time_guess(t, y);
    switch (model) {
    case RelaxationModel::Exp:
    case RelaxationModel::InversionDepolarization:
        f.names = {"M", model == RelaxationModel::Exp ? "T2" : "T1"};
        p0 = {y0 != 0.0 ? y0 : ymax, T};
        break;
    case RelaxationModel::Biexp:
        f.names = {"M1", "T2_1", "M2", "T2_2"};
        p0 = {0.8 * ymax, 0.3 * T, 0.2 * ymax, 3.0 * T};
        break;
    case RelaxationModel::InversionRecovery: {
        f.names = {"M", "theta", "T1"};
        // the recovered level is M; y(0) = M cos(theta)
        const double M = ylast != 0.0 ? ylast : ymax;
        const double c = std::clamp(y0 / M, -1.0, 1.0);
        double T1 = T;
        for (std::size_t i = 0; i < t.size(); ++i)  // zero crossing ~ T1 ln 2 for theta = pi
            if (i > 0 && (y[i] > 0.0) != (y[i - 1] > 0.0)) {
                T1 = t[i] / std::log(2.0);
                break;
            }
        p0 = {M, std::acos(c), T1};
        break;
    }
    }
    if (static_cast<int>(t.size()) < 2 * static_cast<int>(p0.size()))
        throw InsufficientDataError("fit_relaxation: need at least " + std::to_string(2 * p0.size()) + " points");
    for (double v : p0) scale.push_back(std::max(std::fabs(v), 1e-300));
    if (model == RelaxationModel::InversionRecovery) scale[1] = 1.0;

    auto resid = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < t.size(); ++i) r[i] = eval_relaxation(model, p, t[i]) - y[i];
    };
    auto res = detail::levenberg_marquardt(resid, p0, scale, static_cast<int>(t.size()));

    if (model == RelaxationModel::Biexp && res.p[1] > res.p[3]) {
        std::swap(res.p[0], res.p[2]);
        std::swap(res.p[1], res.p[3]);
        std::swap(res.se[0], res.se[2]);
        std::swap(res.se[1], res.se[3]);
    }
    if (model == RelaxationModel::InversionRecovery) {
        // theta and -theta (and 2 pi - theta) are equivalent; report in [0, pi]
        double th = std::fmod(std::fabs(res.p[1]), 2.0 * std::numbers::pi);
        if (th > std::numbers::pi) th = 2.0 * std::numbers::pi - th;
        res.p[1] = th;
    }
    const std::size_t tix = model == RelaxationModel::InversionRecovery ? 2 : 1;
    if (!(res.p[tix] > 0.0) || (model == RelaxationModel::Biexp && !(res.p[1] > 0.0)))
        throw FitFailure("fit_relaxation: non-positive time constant", res.rms);

    f.values = res.p;
    f.residual = res.rms;
    const double q = detail::t95(res.dof);
    for (std::size_t i = 0; i < res.p.size(); ++i) f.ci95.push_back({res.p[i] - q * res.se[i], res.p[i] + q * res.se[i]});
    return f;
}

} // namespace ddspec
