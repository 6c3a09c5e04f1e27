#include "ddspec/filter_engine.hpp"

#include "ddspec/error.hpp"
#include "ddspec/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ddspec {

namespace {

constexpr double pi = std::numbers::pi;

// Remaining ring-down phase (fraction of beta) at which a pulse is cut off.
constexpr double kTailFraction = 1e-6;

double sinc(double x) {
    if (std::fabs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

} // namespace

double FilterFunction::integral() const {
    double s = 0.0;
    for (std::size_t k = 1; k < omega.size(); ++k)
        s += 0.5 * (total[k] + total[k - 1]) * (omega[k] - omega[k - 1]);
    return 2.0 * s;
}

double FiniteCorrection::at(double w) const {
    if (omega.empty()) return 1.0;
    w = std::fabs(w);
    if (w <= omega.front()) return a_vals.front();
    if (w >= omega.back()) return a_vals.back();
    const auto it = std::upper_bound(omega.begin(), omega.end(), w);
    const std::size_t i = static_cast<std::size_t>(it - omega.begin());
    const double x = (w - omega[i - 1]) / (omega[i] - omega[i - 1]);
    return a_vals[i - 1] + x * (a_vals[i] - a_vals[i - 1]);
}

FiniteCorrection FiniteCorrection::identity() { return {}; }

void validate(const PulseShape& shape) {
    if (shape.kind == ShapeKind::Instantaneous) return;
    if (!(std::isfinite(shape.duration) && shape.duration > 0.0))
        throw ValidationError("pulse duration must be > 0 for finite pulses");
    if (shape.kind == ShapeKind::Gaussian) {
        if (!(shape.gaussian_sigma > 0.0 && shape.gaussian_sigma < shape.duration))
            throw ValidationError("gaussian_sigma must lie in (0, duration)");
    }
}

void validate(const PulseTrain& train) {
    validate(train.shape);
    if (!(std::isfinite(train.tau) && train.tau > 0.0)) throw ValidationError("tau must be > 0");
    if (train.n_pulses < 1) throw ValidationError("n_pulses must be >= 1");
    if (!std::isfinite(train.beta)) throw ValidationError("beta must be finite");
    if (train.shape.kind != ShapeKind::Instantaneous && !(train.tau > train.shape.duration))
        throw ValidationError("tau must exceed the pulse duration");
    if (train.resonator) {
        if (!(train.resonator->omega0 > 0.0)) throw ValidationError("resonator omega0 must be > 0");
        if (!(train.resonator->q_factor >= 1.0)) throw ValidationError("resonator q_factor must be >= 1");
    }
}

double default_dt(const PulseTrain& train) {
    double dt0 = train.tau / 1024.0;
    if (train.shape.kind != ShapeKind::Instantaneous)
        dt0 = std::min(train.shape.duration / 50.0, train.tau / 512.0);
    const double half_steps = std::ceil(0.5 * train.tau / dt0 - 1e-9);
    return 0.5 * train.tau / half_steps;
}

PulseKernel::PulseKernel(const PulseShape& shape, const std::optional<ResonatorModel>& resonator,
                         double beta, double dt)
    : beta_(beta) {
    validate(shape);
    if (shape.kind == ShapeKind::Instantaneous) {
        inst_ = true;
        return;
    }
    inst_ = false;
    const double d = shape.duration;
    const std::size_t np =
        std::max<std::size_t>(400, static_cast<std::size_t>(std::ceil(d / std::min(dt, d / 400.0))));
    const double h = d / static_cast<double>(np);

    std::vector<double> env;
    env.reserve(np * 2);
    for (std::size_t j = 0; j < np; ++j) {
        if (shape.kind == ShapeKind::Square) {
            env.push_back(1.0);
        } else {
            const double u = -0.5 * d + (static_cast<double>(j) + 0.5) * h;
            const double z = u / shape.gaussian_sigma;
            env.push_back(std::exp(-0.5 * z * z));
        }
    }
    double area = 0.0;
    for (double e : env) area += e * h;

    std::size_t prog_end_cell = np - 1;
    if (resonator) {
        // exact response of the one-pole filter to piecewise-constant input,
        // sampled at cell ends
        const double T = resonator->ringdown();
        const double a = std::exp(-h / T);
        std::vector<double> y;
        y.reserve(env.size() * 4);
        double acc = 0.0;
        for (double e : env) {
            acc = a * acc + (1.0 - a) * e;
            y.push_back(acc);
        }
        while (acc * T > kTailFraction * area * 1e-3) {
            acc *= a;
            y.push_back(acc);
        }
        env.swap(y);
    }

    // cumulative phase on cell boundaries, cut where the remaining tail
    // drops below kTailFraction, then renormalised to exactly beta
    std::vector<double> cum(env.size() + 1, 0.0);
    for (std::size_t j = 0; j < env.size(); ++j) cum[j + 1] = cum[j] + env[j] * h;
    const double raw_total = cum.back();
    std::size_t last = cum.size() - 1;
    while (last > np && raw_total - cum[last - 1] < kTailFraction * raw_total) --last;
    cum.resize(last + 1);
    const double scale = beta / cum.back();
    for (double& c : cum) c *= scale;

    // half-phase point
    const double half = 0.5 * beta;
    std::size_t j = 1;
    if (beta >= 0.0) {
        while (j < cum.size() && cum[j] < half) ++j;
    } else {
        while (j < cum.size() && cum[j] > half) ++j;
    }
    double u_half = -0.5 * d;
    if (j < cum.size()) {
        const double c0 = cum[j - 1], c1 = cum[j];
        const double x = (c1 == c0) ? 0.0 : (half - c0) / (c1 - c0);
        u_half = -0.5 * d + (static_cast<double>(j - 1) + x) * h;
    }
    h_ = h;
    start_ = -0.5 * d - u_half;
    end_ = start_ + h * static_cast<double>(cum.size() - 1);
    prog_end_ = 0.5 * d - u_half;
    env_end_ = env[std::min(prog_end_cell, env.size() - 1)] * scale;
    cum_ = std::move(cum);
}

double PulseKernel::phase(double s) const {
    if (inst_) {
        if (s < 0.0) return 0.0;
        if (s > 0.0) return beta_;
        return 0.5 * beta_;
    }
    if (s <= start_) return 0.0;
    if (s >= end_) return beta_;
    const double x = (s - start_) / h_;
    const std::size_t j = std::min(static_cast<std::size_t>(x), cum_.size() - 2);
    const double f = x - static_cast<double>(j);
    return cum_[j] + f * (cum_[j + 1] - cum_[j]);
}

PhaseProfile build_phase_profile(const PulseTrain& train, double dt) {
    validate(train);
    if (!(std::isfinite(dt) && dt > 0.0)) throw ValidationError("dt must be > 0");
    if (train.shape.kind == ShapeKind::Instantaneous) {
        if (dt > train.tau / 1000.0 * (1.0 + 1e-9))
            throw ResolutionError("dt must be <= tau/1000 for instantaneous pulses");
    } else if (dt > train.shape.duration / 20.0 * (1.0 + 1e-9)) {
        throw ResolutionError("dt must be <= duration/20 to resolve the pulse shape");
    }

    const PulseKernel kernel(train.shape, train.resonator, train.beta, dt);
    if (!kernel.instantaneous()) {
        if (kernel.end() - kernel.start() >= train.tau)
            throw ConfigError("pulse ring-down extends past the start of the next pulse (support " +
                              std::to_string(kernel.end() - kernel.start()) + " s >= tau)");
        if (0.5 * train.tau + kernel.start() < 0.0)
            throw ConfigError("first pulse starts before t = 0");
    }

    const double total = train.tau * train.n_pulses;
    const auto n = static_cast<std::size_t>(std::llround(total / dt));
    PhaseProfile prof;
    prof.dt = dt;
    prof.phi.assign(n, 0.0);
    std::vector<double> step(n + 1, 0.0);

    for (int p = 1; p <= train.n_pulses; ++p) {
        const double c = train.tau * (p - 0.5);
        const double lo = c + kernel.start(), hi = c + kernel.end();
        // cells whose centre lies in [lo, hi] get the kernel value
        auto first_at_or_after = [&](double t) {
            const double k = std::ceil(t / dt - 0.5);
            return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n)));
        };
        const std::size_t k_lo = first_at_or_after(lo);
        std::size_t k_hi = first_at_or_after(hi);
        while (k_hi < n && (static_cast<double>(k_hi) + 0.5) * dt <= hi) ++k_hi;
        for (std::size_t k = k_lo; k < k_hi; ++k)
            prof.phi[k] += kernel.phase((static_cast<double>(k) + 0.5) * dt - c);
        step[k_hi] += train.beta;
    }
    double run = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        run += step[k];
        prof.phi[k] += run;
    }
    for (int p = 1; p <= train.n_pulses; ++p) prof.echo_times.push_back(train.tau * p);
    return prof;
}

ModulationFunction modulation_from_phase(const PhaseProfile& profile) {
    ModulationFunction m;
    m.dt = profile.dt;
    m.echo_times = profile.echo_times;
    m.f_x.resize(profile.phi.size());
    m.f_z.resize(profile.phi.size());
    for (std::size_t k = 0; k < profile.phi.size(); ++k) {
        m.f_x[k] = -std::sin(profile.phi[k]);
        m.f_z[k] = std::cos(profile.phi[k]);
    }
    return m;
}

FilterFunction filter_from_modulation(const ModulationFunction& mod, double t_detect, int pad) {
    if (mod.f_z.empty() || mod.f_x.size() != mod.f_z.size())
        throw ValidationError("empty or inconsistent modulation function");
    if (!(t_detect > 0.0)) throw ValidationError("t_detect must be > 0");
    if (pad < 1) throw ValidationError("pad must be >= 1");
    const auto n = static_cast<std::size_t>(std::llround(t_detect / mod.dt));
    if (n == 0) throw ValidationError("t_detect shorter than one sample");
    const std::size_t L = fft::next_pow2(static_cast<std::size_t>(pad) * n);

    auto spectrum = [&](const std::vector<double>& f) {
        std::vector<double> x(L, 0.0);
        std::copy_n(f.begin(), std::min(n, f.size()), x.begin());
        std::vector<fft::cplx> X;
        fft::forward_real(x, X);
        return X;
    };
    const auto X = spectrum(mod.f_x);
    const auto Z = spectrum(mod.f_z);

    FilterFunction out;
    out.t = t_detect;
    const std::size_t nb = L / 2 + 1;
    out.omega.resize(nb);
    out.fx_vals.resize(nb);
    out.fz_vals.resize(nb);
    out.total.resize(nb);
    const double dt = mod.dt;
    const double norm = 1.0 / (2.0 * pi * t_detect * t_detect);
    for (std::size_t k = 0; k < nb; ++k) {
        const double w = 2.0 * pi * static_cast<double>(k) / (static_cast<double>(L) * dt);
        const double s = dt * sinc(0.5 * w * dt);
        const double g = s * s * norm;
        out.omega[k] = w;
        out.fx_vals[k] = g * std::norm(X[k]);
        out.fz_vals[k] = g * std::norm(Z[k]);
        out.total[k] = out.fx_vals[k] + out.fz_vals[k];
    }
    return out;
}

std::vector<DeltaPeak> delta_filter_peaks(double tau, double t, int m_max) {
    if (m_max < 1 || m_max % 2 == 0) throw ValidationError("m_max must be odd and >= 1");
    std::vector<DeltaPeak> out;
    for (int m = 1; m <= m_max; m += 2) {
        const double w = m * pi / tau;
        out.push_back({w, 4.0 / (t * tau * tau * w * w)});
    }
    return out;
}

FiniteCorrection finite_correction(const PulseShape& shape,
                                   const std::optional<ResonatorModel>& resonator, double beta,
                                   double tau_ref) {
    PulseTrain real;
    real.tau = tau_ref;
    real.n_pulses = 1;
    real.beta = beta;
    real.shape = shape;
    real.resonator = resonator;
    validate(real);
    // tau_ref/dt a power of two puts every odd peak m pi/tau_ref on an FFT bin
    const double dt0 = default_dt(real);
    const std::size_t n = fft::next_pow2(static_cast<std::size_t>(std::ceil(tau_ref / dt0)));
    const double dt = tau_ref / static_cast<double>(n);

    PulseTrain ideal = real;
    ideal.shape = PulseShape{};
    ideal.resonator.reset();

    const auto fr = filter_from_modulation(modulation_from_phase(build_phase_profile(real, dt)), tau_ref);
    const auto fi = filter_from_modulation(modulation_from_phase(build_phase_profile(ideal, dt)), tau_ref);

    const double fmax = *std::max_element(fi.total.begin(), fi.total.end());
    const double dw = fi.omega[1] - fi.omega[0];
    FiniteCorrection corr;
    corr.omega.push_back(0.0);
    corr.a_vals.push_back(1.0);
    const double w_lim = 0.5 * fi.omega.back();
    for (int m = 1;; m += 2) {
        const double w = m * pi / tau_ref;
        if (w > w_lim) break;
        const auto k = static_cast<std::size_t>(std::llround(w / dw));
        if (fi.total[k] < 1e-12 * fmax) continue;
        corr.omega.push_back(fi.omega[k]);
        corr.a_vals.push_back(fr.total[k] / fi.total[k]);
    }
    return corr;
}

double flip_angle_split_prediction(double beta, double tau) { return (beta - pi) / tau; }

std::vector<std::size_t> filter_maxima(const FilterFunction& f, double lo, double hi) {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k + 1 < f.omega.size(); ++k) {
        if (f.omega[k] < lo || f.omega[k] > hi) continue;
        if (f.total[k] > f.total[k - 1] && f.total[k] >= f.total[k + 1]) out.push_back(k);
    }
    return out;
}

} // namespace ddspec
