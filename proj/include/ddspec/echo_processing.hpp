#pragma once

// Baseband I/Q echo traces -> echo amplitudes and echo-detected field sweeps.

#include <complex>
#include <utility>
#include <vector>

namespace ddspec {

struct IQTrace {
    double dt = 0.0;
    std::vector<double> i_vals, q_vals;
    std::size_t size() const { return i_vals.size(); }
};

struct FieldSweep {
    std::vector<double> fields;  // mT, ascending
    std::vector<IQTrace> traces;
};

void validate(const IQTrace& trace);
void validate(const FieldSweep& sweep);

// 0.42 - 0.5 cos(2 pi k/(n-1)) + 0.08 cos(4 pi k/(n-1))
std::vector<double> blackman(std::size_t n);
IQTrace blackman_window(const IQTrace& trace);

struct EchoAmplitude {
    double amplitude = 0.0;
    double phase = 0.0;  // rad; 0 for a zero trace
};

// Windowed sum of I + iQ.
EchoAmplitude echo_amplitude(const IQTrace& trace);

// Unnormalised DFT (sum_k x_k e^{-2 pi i jk/n}) of the windowed trace.
std::vector<std::complex<double>> trace_spectrum(const IQTrace& trace);
// Inverse of the above up to the window: returns the windowed samples.
std::vector<std::complex<double>> inverse_spectrum(const std::vector<std::complex<double>>& spec);

struct FieldSweepSpectrum {
    std::vector<double> fields;
    std::vector<std::complex<double>> dc;
};

FieldSweepSpectrum field_sweep_spectrum(const FieldSweep& sweep);

} // namespace ddspec
