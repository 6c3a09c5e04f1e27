#include "ddspec/block_filter.hpp"

#include "ddspec/error.hpp"
#include "ddspec/fft.hpp"
#include "ddspec/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddspec {

namespace {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

double sinc(double x) {
    if (std::fabs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

void batch_term(const SpectrumModel& model, const double* w, long double* acc, std::size_t n) {
    if (auto p = model.get_if<PowerLaw>()) {
        if (p->alpha == 1.0) {
            for (std::size_t i = 0; i < n; ++i) acc[i] += p->C / std::fabs(w[i]);
        } else if (p->alpha == 0.0) {
            for (std::size_t i = 0; i < n; ++i) acc[i] += p->C;
        } else {
            for (std::size_t i = 0; i < n; ++i) acc[i] += p->C * std::pow(std::fabs(w[i]), -p->alpha);
        }
        return;
    }
    if (auto c = model.get_if<Composite>()) {
        for (const auto& t : c->terms) batch_term(t, w, acc, n);
        return;
    }
    if (auto g = model.get_if<GaussianPeak>()) {
        const double inv = 1.0 / g->sigma;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (std::fabs(w[i]) - g->omega_p) * inv;
            // beyond 40 sigma the term underflows anyway
            if (std::fabs(z) < 40.0) acc[i] += g->A * std::exp(-0.5 * z * z);
        }
        return;
    }
    for (std::size_t i = 0; i < n; ++i) acc[i] += eval_spectrum(model, w[i]);
}

// largest frequency at which the model still has structure worth resolving,
// and the narrowest feature width
void model_scales(const SpectrumModel& model, double& w_hi, double& width) {
    if (auto g = model.get_if<GaussianPeak>()) {
        w_hi = std::max(w_hi, g->omega_p + 12.0 * g->sigma);
        width = std::min(width, g->sigma);
    } else if (auto l = model.get_if<Lorentzian>()) {
        width = std::min(width, 1.0 / l->tau_c);
    } else if (auto e = model.get_if<LorentzianEnsemble>()) {
        width = std::min(width, 1.0 / e->tau2);
    } else if (auto c = model.get_if<Composite>()) {
        for (const auto& t : c->terms) model_scales(t, w_hi, width);
    }
}

void check_power_laws(const SpectrumModel& model) {
    if (auto p = model.get_if<PowerLaw>()) {
        if (!(p->alpha > -1.0)) throw DomainError("chi diverges for power laws with alpha <= -1");
    } else if (auto c = model.get_if<Composite>()) {
        for (const auto& t : c->terms) check_power_laws(t);
    }
}

int periods_for(const SpectrumModel& model, double tau, const ChiFamilyOptions& opts) {
    double w_hi = 0.0, width = INFINITY;
    model_scales(model, w_hi, width);
    const int need = static_cast<int>(std::ceil(w_hi * tau / (2.0 * pi))) + 1;
    return std::max(opts.periods, need);
}

// ideal block transform times i*omega, given s = (-1)^j and z = exp(-i pi (k+1/2)/M)
inline cplx ideal_num(double s, cplx z, cplx eib) {
    const cplx sz = s * z;
    return 1.0 - sz + eib * (sz - z * z);
}

// Int_W^inf S(w)/w^2 dw. Power laws exactly; everything else through
// x = W/w, i.e. (1/W) Int_0^1 S(W/x) dx, by composite Simpson.
double tail_integral(const SpectrumModel& model, double W) {
    if (auto p = model.get_if<PowerLaw>())
        return p->C * std::pow(W, -(1.0 + p->alpha)) / (1.0 + p->alpha);
    if (auto c = model.get_if<Composite>()) {
        double s = 0.0;
        for (const auto& t : c->terms) s += tail_integral(t, W);
        return s;
    }
    constexpr int n = 2048;
    double s = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double x = static_cast<double>(i) / n;
        const double wgt = (i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += wgt * eval_spectrum(model, W / x);
    }
    // x = 0 contributes S(inf) = 0 for the bounded models
    return s / (3.0 * n) / W;
}

} // namespace

void eval_spectrum_batch(const SpectrumModel& model, const double* omega, double* out, std::size_t n) {
    std::vector<long double> acc(n, 0.0L);
    batch_term(model, omega, acc.data(), n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(acc[i]);
}

BlockResponse::BlockResponse(const PulseShape& shape, const std::optional<ResonatorModel>& resonator,
                             double beta, double omega_max, Exec exec)
    : beta_(beta), omega_max_(omega_max) {
    validate(shape);
    if (shape.kind == ShapeKind::Instantaneous) return;
    const PulseKernel kernel(shape, resonator, beta, shape.duration / 200.0);
    h_ = shape.duration / 200.0;
    // cells aligned so that s = 0 (the ideal step) is a cell boundary
    const long j0 = static_cast<long>(std::floor(kernel.start() / h_)) - 1;
    const long j1 = static_cast<long>(std::ceil(kernel.end() / h_)) + 1;
    for (long j = j0; j < j1; ++j) {
        const double s = (static_cast<double>(j) + 0.5) * h_;
        const cplx real = std::polar(1.0, kernel.phase(s));
        const cplx ideal = s < 0.0 ? cplx(1.0, 0.0) : std::polar(1.0, beta);
        cell_s_.push_back(s);
        delta_.push_back(real - ideal);
    }
    s0_ = kernel.start();
    s1_ = kernel.end();

    // linear interpolation error ~ (dw * width)^2 / 8
    dw_ = 0.01 / std::max(s1_ - s0_, h_);
    const auto half = static_cast<std::size_t>(std::ceil(omega_max / dw_)) + 1;
    const std::size_t n = 2 * half + 1;
    omega_max_ = dw_ * static_cast<double>(half);
    table_.assign(n, cplx(0.0, 0.0));
    const auto fill = [&](std::size_t i) {
        const double w = -omega_max_ + dw_ * static_cast<double>(i);
        table_[i] = correction_direct(w);
    };
    parallel_for(n, exec, fill);
}

cplx BlockResponse::correction_direct(double w) const {
    if (delta_.empty()) return {0.0, 0.0};
    // accumulate with a rotating phasor; renormalise every few hundred steps
    const cplx rot = std::polar(1.0, -w * h_);
    cplx ph = std::polar(1.0, -w * cell_s_.front());
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < delta_.size(); ++j) {
        acc += delta_[j] * ph;
        ph *= rot;
        if ((j & 255u) == 255u) ph = std::polar(1.0, -w * cell_s_[j + 1 < cell_s_.size() ? j + 1 : j]);
    }
    return acc * (h_ * sinc(0.5 * w * h_));
}

cplx BlockResponse::correction(double w) const {
    if (table_.empty()) return {0.0, 0.0};
    if (std::fabs(w) >= omega_max_) return correction_direct(w);
    const double x = (w + omega_max_) / dw_;
    const auto i = static_cast<std::size_t>(x);
    const double f = x - static_cast<double>(i);
    return table_[i] + f * (table_[i + 1] - table_[i]);
}

cplx BlockResponse::eval(double w, double tau) const {
    const cplx eib = std::polar(1.0, beta_);
    cplx g;
    if (std::fabs(w * tau) < 1e-6) {
        g = 0.5 * tau * (1.0 + eib);
    } else {
        const cplx z = std::polar(1.0, -0.5 * w * tau);
        g = (1.0 - z + eib * (z - z * z)) / cplx(0.0, w);
    }
    if (!table_.empty()) g += std::polar(1.0, -0.5 * w * tau) * correction(w);
    return g;
}

double chi_family_omega_max(const SpectrumModel& model, double tau, const ChiFamilyOptions& opts) {
    return 2.0 * pi / tau * (periods_for(model, tau, opts) + 1);
}

std::vector<double> chi_family(const SpectrumModel& model, const BlockResponse& block, double tau,
                               int n_max, const ChiFamilyOptions& opts) {
    if (!(tau > 0.0)) throw ValidationError("tau must be > 0");
    if (n_max < 1) return {};
    check_power_laws(model);
    if (!block.ideal()) {
        const double lead = 0.5 * tau + block.support_start();
        if (block.support_end() - block.support_start() >= tau || lead < 0.0)
            throw ConfigError("pulse ring-down extends past the start of the next pulse");
    }

    const int J = periods_for(model, tau, opts);
    double w_hi = 0.0, width = INFINITY;
    model_scales(model, w_hi, width);
    std::size_t M = std::max<std::size_t>(2 * static_cast<std::size_t>(n_max) + 2, 256);
    if (std::isfinite(width)) {
        const double need = opts.min_grid_points_per_sigma * 2.0 * pi / (tau * width);
        M = std::max(M, static_cast<std::size_t>(std::min(need, 1048576.0)));
    }
    M = fft::next_pow2(M);

    const double base = 2.0 * pi / tau;
    const double dw = base / static_cast<double>(M);
    const cplx eib = std::polar(1.0, block.beta());

    std::vector<cplx> z(M);
    for (std::size_t k = 0; k < M; ++k) z[k] = std::polar(1.0, -pi * (static_cast<double>(k) + 0.5) / M);

    std::vector<double> K(M, 0.0), w(M), s(M);
    for (int j = -J; j < J; ++j) {
        const double sg = (j % 2 == 0) ? 1.0 : -1.0;
        for (std::size_t k = 0; k < M; ++k) w[k] = base * (j + (static_cast<double>(k) + 0.5) / M);
        eval_spectrum_batch(model, w.data(), s.data(), M);
        if (block.ideal()) {
            for (std::size_t k = 0; k < M; ++k)
                K[k] += s[k] * std::norm(ideal_num(sg, z[k], eib)) / (w[k] * w[k]);
        } else {
            for (std::size_t k = 0; k < M; ++k) {
                const cplx g = ideal_num(sg, z[k], eib) / cplx(0.0, w[k]) + sg * z[k] * block.correction(w[k]);
                K[k] += s[k] * std::norm(g);
            }
        }
    }

    std::vector<cplx> X;
    fft::forward_real(K, X);

    // Beyond |w| = Omega = J 2 pi/tau, S/w^2 varies slowly over one period of
    // the ideal block factor |i w G|^2 = |1 + (e^{ib}-1) y - e^{ib} y^2|^2,
    // y = e^{-i w tau/2}, whose only harmonics are d = 0 (weight 2 + 4 sin^2(b/2))
    // and d = +-1 (weight -e^{-+ib}). Summing the Fejer weights then gives
    // chi_tail(N) = Int_Omega^inf S/w^2 dw / (2 pi) * [N (2 + 4 sin^2(b/2)) - 2 (N - 1)].
    const double omega_edge = base * J;
    double tail_int = 0.0;
    {
        const double a = block.ideal() ? 1.0 : [&] {
            const cplx gi = ideal_num(J % 2 == 0 ? 1.0 : -1.0, cplx(1.0, 0.0), eib) / cplx(0.0, omega_edge);
            const double r = std::norm(gi) > 0.0 ? std::norm(block.eval(omega_edge, tau)) / std::norm(gi) : 0.0;
            return std::clamp(r, 0.0, 2.0);
        }();
        tail_int = a * tail_integral(model, omega_edge) / (2.0 * pi);
    }
    const double sb = std::sin(0.5 * block.beta());
    const double w0 = 2.0 + 4.0 * sb * sb;

    std::vector<double> chi(static_cast<std::size_t>(n_max));
    const double c0 = dw * X[0].real();
    double s1 = 0.0, s2 = 0.0;  // sum_{d<N} a_d, sum_{d<N} d a_d
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) {
            const int d = n - 1;
            const cplx cd = dw * std::polar(1.0, -pi * d / static_cast<double>(M)) * X[static_cast<std::size_t>(d)];
            const double ad = (std::polar(1.0, d * block.beta()) * cd).real();
            s1 += ad;
            s2 += d * ad;
        }
        const double val = (n * c0 + 2.0 * (n * s1 - s2)) / (4.0 * pi);
        chi[static_cast<std::size_t>(n - 1)] = val + tail_int * (n * w0 - 2.0 * (n - 1));
    }
    return chi;
}

FilterFunction block_filter(const BlockResponse& block, double tau, int n, const std::vector<double>& omega) {
    FilterFunction f;
    f.t = n * tau;
    f.omega = omega;
    f.fx_vals.resize(omega.size());
    f.fz_vals.resize(omega.size());
    f.total.resize(omega.size());
    const double norm = 1.0 / (2.0 * pi * f.t * f.t);
    auto geo = [n](double x) {
        const cplx e = std::polar(1.0, x);
        if (std::abs(1.0 - e) < 1e-9) return cplx(static_cast<double>(n), 0.0);
        return (1.0 - std::polar(1.0, n * x)) / (1.0 - e);
    };
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const double w = omega[i];
        const cplx A = block.eval(w, tau) * geo(block.beta() - w * tau);
        const cplx B = std::conj(block.eval(-w, tau) * geo(block.beta() + w * tau));
        const cplx fz = 0.5 * (A + B);
        const cplx fx = -(A - B) / cplx(0.0, 2.0);
        f.fx_vals[i] = norm * std::norm(fx);
        f.fz_vals[i] = norm * std::norm(fz);
        f.total[i] = f.fx_vals[i] + f.fz_vals[i];
    }
    return f;
}

} // namespace ddspec
