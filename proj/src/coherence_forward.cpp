#include "ddspec/coherence_forward.hpp"

#include "ddspec/error.hpp"
#include "ddspec/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace ddspec {

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> integrand(const SpectrumModel& model, const FilterFunction& f, double t) {
    const bool skip0 = singular_at_zero(model);
    std::vector<double> y(f.omega.size(), 0.0);
    for (std::size_t k = 0; k < f.omega.size(); ++k) {
        if (f.omega[k] == 0.0 && skip0) continue;
        y[k] = 0.5 * t * t * eval_spectrum(model, f.omega[k]) * f.total[k];
    }
    return y;
}

// walk a model, summing exact remainders of power-law terms and collecting
// bounds for everything else
void split_tail(const SpectrumModel& m, double tau, long m_next, long double& exact,
                std::vector<const SpectrumModel*>& others) {
    if (auto p = m.get_if<PowerLaw>()) {
        if (!(p->alpha > -1.0)) throw DomainError("chi diverges for power laws with alpha <= -1");
        exact += p->C * std::pow(pi / tau, -p->alpha) * odd_power_tail(2.0 + p->alpha, m_next);
        return;
    }
    if (auto c = m.get_if<Composite>()) {
        for (const auto& t : c->terms) split_tail(t, tau, m_next, exact, others);
        return;
    }
    others.push_back(&m);
}

long make_odd(double x) {
    auto m = static_cast<long>(std::ceil(x));
    if (m % 2 == 0) ++m;
    return std::max(1L, m);
}

} // namespace

OverlapResult chi_overlap(const SpectrumModel& model, const FilterFunction& filter, double t) {
    if (filter.omega.size() < 2) throw ValidationError("filter grid too small");
    const auto y = integrand(model, filter, t);
    double s = 0.0;
    for (std::size_t k = 1; k < y.size(); ++k) s += 0.5 * (y[k] + y[k - 1]) * (filter.omega[k] - filter.omega[k - 1]);
    OverlapResult r;
    r.chi = 2.0 * s;
    // integrands here decay at least as 1/w^2, so the remainder is about
    // <y w^2> / W; the average over the last quarter rides over filter nodes
    const std::size_t k0 = y.size() - std::max<std::size_t>(1, y.size() / 4);
    double m = 0.0;
    for (std::size_t k = k0; k < y.size(); ++k) m += y[k] * filter.omega[k] * filter.omega[k];
    m /= static_cast<double>(y.size() - k0);
    const double tail = 2.0 * m / filter.omega.back();
    r.tail_fraction = r.chi > 0.0 ? tail / r.chi : 0.0;
    r.truncation_warning = r.tail_fraction > 0.01;
    return r;
}

std::vector<double> cumulative_chi(const SpectrumModel& model, const FilterFunction& filter, double t) {
    const auto y = integrand(model, filter, t);
    std::vector<double> c(y.size(), 0.0);
    for (std::size_t k = 1; k < y.size(); ++k)
        c[k] = c[k - 1] + (y[k] + y[k - 1]) * (filter.omega[k] - filter.omega[k - 1]);
    return c;
}

double chi_discrete(const SpectrumModel& model, double tau, double t, long m_cutoff, double rel_tol) {
    if (m_cutoff < 1 || m_cutoff % 2 == 0) throw ValidationError("m_cutoff must be odd and >= 1");
    if (!(tau > 0.0 && t >= 0.0)) throw ValidationError("tau must be > 0 and t >= 0");
    long double sum = 0.0L;
    for (long m = 1; m <= m_cutoff; m += 2)
        sum += eval_spectrum(model, m * pi / tau) / (static_cast<long double>(m) * m);

    long double exact = 0.0L;
    std::vector<const SpectrumModel*> others;
    split_tail(model, tau, m_cutoff + 2, exact, others);

    const double w_next = (m_cutoff + 2) * pi / tau;
    long double bound = 0.0L;
    long suggest = m_cutoff;
    for (const auto* o : others) {
        std::vector<DecayBound> b;
        if (!decay_bound(*o, w_next, b)) {
            double w_hi = 0.0;
            if (auto g = o->get_if<GaussianPeak>()) w_hi = g->omega_p + 12.0 * g->sigma;
            throw ResolutionError("chi_discrete: cutoff m = " + std::to_string(m_cutoff) +
                                  " ends inside a spectral peak; use m_cutoff >= " +
                                  std::to_string(make_odd(w_hi * tau / pi)));
        }
        for (const auto& d : b) {
            const double scale = d.c * std::pow(pi / tau, -d.p);
            bound += scale * odd_power_tail(2.0 + d.p, m_cutoff + 2);
            // m^-(1+p) / (2 (1+p)) approximates the remainder; solve for tol
            const double target = rel_tol * static_cast<double>(sum + exact) * 2.0 * (1.0 + d.p) / scale;
            if (target > 0.0) suggest = std::max(suggest, make_odd(std::pow(target, -1.0 / (1.0 + d.p))));
        }
    }
    const long double total = sum + exact;
    if (bound > rel_tol * total && bound > 0.0L)
        throw ResolutionError("chi_discrete: remainder bound exceeds tolerance; use m_cutoff >= " +
                              std::to_string(suggest));
    return static_cast<double>(4.0L * t / (pi * pi) * total);
}

double chi_power_law(double C, double alpha, double tau, double t) {
    return power_law_prefactor(alpha) * C * t * std::pow(tau, alpha);
}

double observed_coherence(double chi, double t, double t1) {
    const double relax = std::isinf(t1) ? 0.0 : t / (2.0 * t1);
    return std::exp(-relax - chi);
}

void validate(const SamplingPlan& plan) {
    if (plan.tau_list.empty()) throw ValidationError("plan.tau_list is empty");
    for (double tau : plan.tau_list)
        if (!(std::isfinite(tau) && tau > 0.0)) throw ValidationError("plan.tau_list entries must be > 0");
    const double tmax = *std::max_element(plan.tau_list.begin(), plan.tau_list.end());
    if (!(plan.max_sequence_time > tmax))
        throw ValidationError("plan.max_sequence_time must exceed the largest tau");
    if (!(plan.shot_noise_sigma >= 0.0)) throw ValidationError("plan.shot_noise_sigma must be >= 0");
    if (plan.averages < 1) throw ValidationError("plan.averages must be >= 1");
    if (plan.shot_noise_sigma > 0.0 && !plan.seed)
        throw ValidationError("plan.seed is required when plan.shot_noise_sigma > 0");
}

BlockResponse prepare_block(const SpectrumModel& model, const PulseTrain& train_template,
                            const std::vector<double>& tau_list, const SynthesisOptions& opts) {
    double wmax = 0.0;
    if (train_template.shape.kind != ShapeKind::Instantaneous)
        for (double tau : tau_list) wmax = std::max(wmax, chi_family_omega_max(model, tau, opts.family));
    return BlockResponse(train_template.shape, train_template.resonator, train_template.beta, wmax, opts.exec);
}

std::vector<double> synthesize_chi(const SpectrumModel& model, const BlockResponse& block, double tau, int n_max,
                                   const SynthesisOptions& opts) {
    if (opts.mode == FilterMode::Delta) {
        if (!block.ideal()) throw ValidationError("delta-peak synthesis requires instantaneous pulses");
        // chi is linear in t for the delta approximation
        const double unit = chi_discrete(model, tau, tau, 200001);
        std::vector<double> chi(static_cast<std::size_t>(n_max));
        for (int n = 1; n <= n_max; ++n) chi[static_cast<std::size_t>(n - 1)] = unit * n;
        return chi;
    }
    return chi_family(model, block, tau, n_max, opts.family);
}

std::vector<double> synthesize_chi(const SpectrumModel& model, const PulseTrain& train_template, double tau,
                                   int n_max, const SynthesisOptions& opts) {
    const auto block = prepare_block(model, train_template, {tau}, opts);
    return synthesize_chi(model, block, tau, n_max, opts);
}

std::vector<ExperimentRecord> synthesize_experiment(const SpectrumModel& model, const PulseTrain& train_template,
                                                    const SamplingPlan& plan, double t1,
                                                    const SynthesisOptions& opts) {
    validate(model);
    validate(plan);
    if (!(t1 > 0.0)) throw ValidationError("t1 must be > 0 (or infinite)");
    const auto block = prepare_block(model, train_template, plan.tau_list, opts);
    const std::uint64_t seed = plan.seed.value_or(0);
    const double sigma = plan.shot_noise_sigma / std::sqrt(static_cast<double>(plan.averages));

    std::vector<ExperimentRecord> out(plan.tau_list.size());
    auto one = [&](std::size_t i) {
        const double tau = plan.tau_list[i];
        const int n_max = static_cast<int>(std::floor(plan.max_sequence_time / tau * (1.0 + 1e-12)));
        ExperimentRecord rec;
        rec.tau = tau;
        rec.averages = plan.averages;
        const auto chi = synthesize_chi(model, block, tau, n_max, opts);
        rec.echo_amplitudes.resize(chi.size());
        auto rng = substream(seed, i, 0x5e7a11ull);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (std::size_t n = 0; n < chi.size(); ++n) {
            const double t = tau * static_cast<double>(n + 1);
            double a = observed_coherence(chi[n], t, t1);
            if (sigma > 0.0) a += sigma * noise(rng);
            rec.echo_amplitudes[n] = a;
        }
        out[i] = std::move(rec);
    };
    parallel_for(plan.tau_list.size(), opts.exec, one, true);
    return out;
}

} // namespace ddspec
