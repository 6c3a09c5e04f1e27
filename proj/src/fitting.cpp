#include "ddspec/fitting.hpp"

#include "ddspec/error.hpp"
#include "ddspec/special.hpp"
#include "lsq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddspec {

namespace {

constexpr double pi = std::numbers::pi;

struct Line {
    double b0 = 0.0, b1 = 0.0;
    double var_b0 = 0.0, var_b1 = 0.0, cov = 0.0;
    double rss = 0.0;
    int n = 0;
};

Line ols(const std::vector<double>& x, const std::vector<double>& y) {
    Line L;
    L.n = static_cast<int>(x.size());
    double xm = 0.0, ym = 0.0;
    for (int i = 0; i < L.n; ++i) {
        xm += x[static_cast<std::size_t>(i)];
        ym += y[static_cast<std::size_t>(i)];
    }
    xm /= L.n;
    ym /= L.n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < L.n; ++i) {
        const double dx = x[static_cast<std::size_t>(i)] - xm;
        sxx += dx * dx;
        sxy += dx * (y[static_cast<std::size_t>(i)] - ym);
    }
    if (!(sxx > 0.0)) throw InsufficientDataError("regression needs at least two distinct abscissae");
    L.b1 = sxy / sxx;
    L.b0 = ym - L.b1 * xm;
    for (int i = 0; i < L.n; ++i) {
        const double r = y[static_cast<std::size_t>(i)] - L.b0 - L.b1 * x[static_cast<std::size_t>(i)];
        L.rss += r * r;
    }
    const double s2 = L.n > 2 ? L.rss / (L.n - 2) : 0.0;
    L.var_b1 = s2 / sxx;
    L.var_b0 = s2 * (1.0 / L.n + xm * xm / sxx);
    L.cov = -xm * s2 / sxx;
    return L;
}

double log_prefactor(double alpha) { return std::log(power_law_prefactor(alpha)); }

} // namespace

PowerLawFit fit_power_law(const ContourTrace& trace) {
    if (trace.points.size() < 3)
        throw InsufficientDataError("fit_power_law: need at least 3 contour points, got " +
                                    std::to_string(trace.points.size()));
    std::vector<double> x, y;
    for (const auto& p : trace.points) {
        x.push_back(std::log(p.tau));
        y.push_back(std::log(p.t));
    }
    const Line L = ols(x, y);
    PowerLawFit f;
    f.level = trace.level;
    f.n_points = L.n;
    f.intercept = L.b0;
    f.alpha = -L.b1;
    if (!(f.alpha > -1.0)) throw FitFailure("fit_power_law: alpha <= -1 has no finite chi", std::sqrt(L.rss / L.n));
    const double lnc = std::log(trace.level) - L.b0 - log_prefactor(f.alpha);
    f.c_value = std::exp(lnc);
    f.residual = std::sqrt(L.rss / L.n);

    const double h = 1e-5;
    const double g = (log_prefactor(f.alpha + h) - log_prefactor(f.alpha - h)) / (2.0 * h);
    // lnC = ln level - b0 - ln k(-b1): gradient (-1, g) in (b0, b1)
    const double var_lnc = L.var_b0 + g * g * L.var_b1 - 2.0 * g * L.cov;
    const double q = detail::t95(L.n - 2);
    const double se_a = std::sqrt(L.var_b1), se_c = std::sqrt(std::max(0.0, var_lnc));
    f.ci95_alpha = {f.alpha - q * se_a, f.alpha + q * se_a};
    f.ci95_c = {std::exp(lnc - q * se_c), std::exp(lnc + q * se_c)};
    return f;
}

double fit_line_t(const PowerLawFit& fit, double tau) { return std::exp(fit.intercept - fit.alpha * std::log(tau)); }

double fit_chi(const PowerLawFit& fit, double tau, double t) {
    return power_law_prefactor(fit.alpha) * fit.c_value * t * std::pow(tau, fit.alpha);
}

std::size_t nearest_fit(double tau, double t, const std::vector<PowerLawFit>& fits) {
    if (fits.empty()) throw InsufficientDataError("background_chi: no power-law fits");
    std::size_t best = 0;
    double dbest = INFINITY;
    const double lt = std::log(t);
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const double d = std::fabs(lt - std::log(fit_line_t(fits[i], tau)));
        if (d < dbest) {
            dbest = d;
            best = i;
        }
    }
    return best;
}

double background_chi(double tau, double t, const std::vector<PowerLawFit>& fits) {
    return fit_chi(fits[nearest_fit(tau, t, fits)], tau, t);
}

SpectrumEstimate spectrum_from_contour(const ContourTrace& trace) {
    if (trace.points.empty()) throw InsufficientDataError("spectrum_from_contour: empty trace");
    SpectrumEstimate e;
    for (const auto& p : trace.points) e.push(pi / p.tau, pi * pi * trace.level / (4.0 * p.t), 1, p.n, -1);
    SegmentInfo s;
    s.m_s = 1;
    s.n_lo = trace.points.front().n;
    s.n_hi = s.n_lo;
    for (const auto& p : trace.points) {
        s.n_lo = std::min(s.n_lo, p.n);
        s.n_hi = std::max(s.n_hi, p.n);
    }
    s.omega_lo = *std::min_element(e.omega.begin(), e.omega.end());
    s.omega_hi = *std::max_element(e.omega.begin(), e.omega.end());
    e.segments.push_back(s);
    return e;
}

PeakFit fit_gaussian_peak(const std::vector<double>& omega, const std::vector<double>& s) {
    const std::size_t n = omega.size();
    if (n != s.size()) throw ValidationError("fit_gaussian_peak: size mismatch");
    if (n < 5) throw InsufficientDataError("fit_gaussian_peak: need at least 5 points");
    const auto imax = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
    const double a0 = s[imax], w0 = omega[imax];
    // width guess from the second moment of the positive part
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (s[i] > 0.0) {
            m0 += s[i];
            m2 += s[i] * (omega[i] - w0) * (omega[i] - w0);
        }
    const auto [lo, hi] = std::minmax_element(omega.begin(), omega.end());
    const double span = *hi - *lo;
    double sg0 = m0 > 0.0 ? std::sqrt(m2 / m0) : span / 4.0;
    sg0 = std::clamp(sg0, span / (4.0 * static_cast<double>(n)), span);

    auto model = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = (omega[i] - p[1]) / p[2];
            r[i] = p[0] * std::exp(-0.5 * x * x) - s[i];
        }
    };
    const std::vector<double> scale{std::max(std::fabs(a0), 1e-300), std::max(sg0, 1e-300), sg0};
    // centre is optimised as an offset so the scale reflects its uncertainty
    auto shifted = [&](const std::vector<double>& p, std::vector<double>& r) {
        model({p[0], w0 + p[1], p[2]}, r);
    };
    const auto res = detail::levenberg_marquardt(shifted, {a0, 0.0, sg0}, scale, static_cast<int>(n));
    PeakFit f;
    f.amplitude = res.p[0];
    f.center = w0 + res.p[1];
    f.width_sigma = std::fabs(res.p[2]);
    f.residual = res.rms;
    f.n_points = static_cast<int>(n);
    const double q = detail::t95(res.dof);
    f.ci95_amplitude = {f.amplitude - q * res.se[0], f.amplitude + q * res.se[0]};
    f.ci95_center = {f.center - q * res.se[1], f.center + q * res.se[1]};
    f.ci95_width = {f.width_sigma - q * res.se[2], f.width_sigma + q * res.se[2]};
    if (!(f.width_sigma > 0.0)) throw FitFailure("fit_gaussian_peak: collapsed width", res.rms);
    return f;
}

PeakFit fit_gaussian_peak(const SpectrumEstimate& est, double omega_lo, double omega_hi) {
    std::vector<double> w, s;
    for (std::size_t i = 0; i < est.size(); ++i)
        if (est.omega[i] >= omega_lo && est.omega[i] <= omega_hi && std::isfinite(est.s_vals[i])) {
            w.push_back(est.omega[i]);
            s.push_back(est.s_vals[i]);
        }
    return fit_gaussian_peak(w, s);
}

QuadraticFit peak_vs_harmonic_fit(const std::vector<std::pair<int, double>>& peaks) {
    if (peaks.size() < 3) throw InsufficientDataError("peak_vs_harmonic_fit: need at least 3 harmonics");
    std::vector<double> x, y;
    for (const auto& [m, a] : peaks) {
        x.push_back(static_cast<double>(m) * m);
        y.push_back(a);
    }
    const Line L = ols(x, y);
    QuadraticFit f;
    f.p2 = L.b1;
    f.p0 = L.b0;
    const double q = detail::t95(L.n - 2);
    f.ci95_p2 = {f.p2 - q * std::sqrt(L.var_b1), f.p2 + q * std::sqrt(L.var_b1)};
    f.ci95_p0 = {f.p0 - q * std::sqrt(L.var_b0), f.p0 + q * std::sqrt(L.var_b0)};
    return f;
}

double zero_freq_estimate(double t2_hahn) {
    if (!(t2_hahn > 0.0)) throw ValidationError("zero_freq_estimate: T2 must be > 0");
    return 2.0 / t2_hahn;
}

namespace {
double t2_constant(Species s) { return s == Species::P1 ? 71e-6 : 160e-6; }  // s ppm
} // namespace

double concentration_from_t2(double t2, Species species) {
    if (!(t2 > 0.0)) throw ValidationError("concentration_from_t2: T2 must be > 0");
    return t2_constant(species) / t2;
}

double t2_from_concentration(double ppm, Species species) {
    if (!(ppm > 0.0)) throw ValidationError("t2_from_concentration: concentration must be > 0");
    return t2_constant(species) / ppm;
}

} // namespace ddspec
