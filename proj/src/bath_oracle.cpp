#include "ddspec/bath_oracle.hpp"

#include "ddspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddspec {

void validate(const BathConfig& c) {
    if (!(c.dt > 0.0)) throw ValidationError("bath.dt must be > 0");
    if (c.n_trajectories < 100) throw ValidationError("bath.n_trajectories must be >= 100");
    if (c.line_modes < 64) throw ValidationError("bath.line_modes must be >= 64");
    for (const auto& o : c.ou_components) {
        if (!(o.delta >= 0.0 && o.tau_c > 0.0)) throw ValidationError("bath O-U components need delta >= 0, tau_c > 0");
        if (c.dt > o.tau_c / 20.0 * (1.0 + 1e-12)) throw ValidationError("bath.dt must be <= tau_c / 20");
    }
    for (const auto& l : c.line_components) {
        if (!(l.A >= 0.0 && l.omega_p > 0.0 && l.sigma > 0.0))
            throw ValidationError("bath line components need A >= 0, omega_p > 0, sigma > 0");
        if (c.dt > 2.0 * std::numbers::pi / (20.0 * l.omega_p) * (1.0 + 1e-12))
            throw ValidationError("bath.dt must be <= 2 pi / (20 omega_p)");
    }
}

std::vector<double> sample_ou(double delta, double tau_c, double dt, std::size_t n_steps, std::mt19937_64& rng) {
    std::normal_distribution<double> xi(0.0, 1.0);
    std::vector<double> x(n_steps + 1);
    const double a = std::isinf(tau_c) ? 1.0 : std::exp(-dt / tau_c);
    const double b = delta * std::sqrt(std::max(0.0, -std::expm1(-2.0 * dt / tau_c)));
    x[0] = delta * xi(rng);
    for (std::size_t k = 0; k < n_steps; ++k) x[k + 1] = a * x[k] + b * xi(rng);
    return x;
}

std::vector<double> sample_line(double A, double omega_p, double sigma, double dt, std::size_t n_steps,
                                std::mt19937_64& rng, int modes) {
    std::vector<double> x(n_steps + 1, 0.0);
    if (A == 0.0) return x;
    std::normal_distribution<double> nd(0.0, 1.0);
    const double v = 2.0 * A * sigma / std::sqrt(2.0 * std::numbers::pi);
    const double amp = std::sqrt(v / modes);
    for (int k = 0; k < modes; ++k) {
        const double w = omega_p + sigma * nd(rng);
        const double a = amp * nd(rng), b = amp * nd(rng);
        // rotate a phasor instead of calling cos/sin per sample
        const double c1 = std::cos(w * dt), s1 = std::sin(w * dt);
        double c = 1.0, s = 0.0;
        for (std::size_t j = 0; j <= n_steps; ++j) {
            x[j] += a * c + b * s;
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            if ((j & 1023u) == 1023u) {  // keep the rotation on the unit circle
                c = std::cos(w * dt * static_cast<double>(j + 1));
                s = std::sin(w * dt * static_cast<double>(j + 1));
            }
        }
    }
    return x;
}

EnsembleResult ensemble_coherence(const BathConfig& cfg, const ModulationFunction& mod, Exec exec) {
    validate(cfg);
    if (mod.f_z.empty() || !(mod.dt > 0.0)) throw ValidationError("ensemble_coherence: empty modulation");
    if (mod.echo_times.empty()) throw ValidationError("ensemble_coherence: modulation has no echo times");

    EnsembleResult res;
    const double ratio = mod.dt / cfg.dt;
    res.substeps = std::max(1, static_cast<int>(std::ceil(ratio - 1e-9)));
    res.grid_adjusted = std::fabs(ratio - std::round(ratio)) > 1e-9 * ratio && ratio > 1.0;
    const int r = res.substeps;
    const double h = mod.dt / r;

    // cell index where each echo ends
    std::vector<std::size_t> echo_cell;
    for (double te : mod.echo_times) {
        const auto c = static_cast<std::size_t>(std::llround(te / mod.dt));
        if (c == 0 || c > mod.f_z.size()) throw ValidationError("ensemble_coherence: echo time outside modulation");
        echo_cell.push_back(c);
        res.t_axis.push_back(te);
    }
    const std::size_t cells = *std::max_element(echo_cell.begin(), echo_cell.end());
    const std::size_t steps = cells * static_cast<std::size_t>(r);
    const std::size_t ne = echo_cell.size();
    const auto nt = static_cast<std::size_t>(cfg.n_trajectories);

    std::vector<double> phis(nt * ne);
    auto one = [&](std::size_t j) {
        auto rng = substream(cfg.seed, j, 0xba7full);
        std::vector<double> b(steps + 1, 0.0);
        for (const auto& o : cfg.ou_components) {
            const auto x = sample_ou(o.delta, o.tau_c, h, steps, rng);
            for (std::size_t k = 0; k <= steps; ++k) b[k] += x[k];
        }
        for (const auto& l : cfg.line_components) {
            const auto x = sample_line(l.A, l.omega_p, l.sigma, h, steps, rng, cfg.line_modes);
            for (std::size_t k = 0; k <= steps; ++k) b[k] += x[k];
        }
        double phi = 0.0;
        for (std::size_t c = 0; c < cells; ++c) {
            double cell = 0.0;
            for (int s = 0; s < r; ++s) {
                const std::size_t k = c * static_cast<std::size_t>(r) + static_cast<std::size_t>(s);
                cell += 0.5 * (b[k] + b[k + 1]);
            }
            phi += mod.f_z[c] * cell * h;
            for (std::size_t e = 0; e < ne; ++e)
                if (echo_cell[e] == c + 1) phis[j * ne + e] = phi;
        }
    };
    parallel_for(nt, exec, one, false);

    // fixed-order reduction; jackknife of a mean is the usual standard error
    res.mean_coherence.assign(ne, 0.0);
    res.std_err.assign(ne, 0.0);
    res.mean_phase_sq.assign(ne, 0.0);
    res.phase_sq_std_err.assign(ne, 0.0);
    const auto n = static_cast<double>(nt);
    for (std::size_t e = 0; e < ne; ++e) {
        long double sc = 0.0L, sc2 = 0.0L, sp = 0.0L, sp2 = 0.0L;
        for (std::size_t j = 0; j < nt; ++j) {
            const double p = phis[j * ne + e];
            const double c = std::cos(p);
            sc += c;
            sc2 += static_cast<long double>(c) * c;
            sp += p * p;
            sp2 += static_cast<long double>(p) * p * p * p;
        }
        const double mc = static_cast<double>(sc / n), mp = static_cast<double>(sp / n);
        const double vc = std::max(0.0, static_cast<double>(sc2 / n) - mc * mc) * n / (n - 1.0);
        const double vp = std::max(0.0, static_cast<double>(sp2 / n) - mp * mp) * n / (n - 1.0);
        res.mean_coherence[e] = mc;
        res.std_err[e] = std::sqrt(vc / n);
        res.mean_phase_sq[e] = mp;
        res.phase_sq_std_err[e] = std::sqrt(vp / n);
    }
    return res;
}

} // namespace ddspec
