#include "ddspec/echo_processing.hpp"

#include "ddspec/error.hpp"
#include "ddspec/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddspec {

void validate(const IQTrace& t) {
    if (t.i_vals.size() != t.q_vals.size()) throw ValidationError("IQ trace: I and Q lengths differ");
    if (t.i_vals.size() < 8) throw ValidationError("IQ trace: need at least 8 samples");
    if (!(t.dt > 0.0)) throw ValidationError("IQ trace: dt must be > 0");
}

void validate(const FieldSweep& s) {
    if (s.fields.size() != s.traces.size()) throw ValidationError("field sweep: one trace per field required");
    for (std::size_t k = 1; k < s.fields.size(); ++k)
        if (!(s.fields[k] > s.fields[k - 1])) throw ValidationError("field sweep: fields must be ascending");
    for (const auto& t : s.traces) {
        validate(t);
        if (t.size() != s.traces.front().size()) throw ValidationError("field sweep: mixed trace lengths");
    }
}

std::vector<double> blackman(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    const double d = 2.0 * std::numbers::pi / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        // evaluate from the nearer end so the taper is exactly symmetric
        const double x = static_cast<double>(std::min(k, n - 1 - k)) * d;
        w[k] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
    }
    return w;
}

IQTrace blackman_window(const IQTrace& trace) {
    validate(trace);
    IQTrace out = trace;
    const auto w = blackman(trace.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        out.i_vals[k] *= w[k];
        out.q_vals[k] *= w[k];
    }
    return out;
}

EchoAmplitude echo_amplitude(const IQTrace& trace) {
    const auto win = blackman_window(trace);
    long double si = 0.0L, sq = 0.0L;
    for (std::size_t k = 0; k < win.size(); ++k) {
        si += win.i_vals[k];
        sq += win.q_vals[k];
    }
    EchoAmplitude a;
    const double i = static_cast<double>(si), q = static_cast<double>(sq);
    a.amplitude = std::hypot(i, q);
    a.phase = (i == 0.0 && q == 0.0) ? 0.0 : std::atan2(q, i);
    return a;
}

std::vector<std::complex<double>> trace_spectrum(const IQTrace& trace) {
    const auto win = blackman_window(trace);
    std::vector<std::complex<double>> x(win.size()), X;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = {win.i_vals[k], win.q_vals[k]};
    fft::transform(x, X, -1);
    return X;
}

std::vector<std::complex<double>> inverse_spectrum(const std::vector<std::complex<double>>& spec) {
    std::vector<std::complex<double>> x;
    fft::transform(spec, x, +1);
    for (auto& v : x) v /= static_cast<double>(spec.size());
    return x;
}

FieldSweepSpectrum field_sweep_spectrum(const FieldSweep& sweep) {
    validate(sweep);
    FieldSweepSpectrum s;
    s.fields = sweep.fields;
    for (const auto& t : sweep.traces) s.dc.push_back(trace_spectrum(t).front());
    return s;
}

} // namespace ddspec
