#pragma once

// Fast chi(N) for every echo of a periodic train at one tau.
//
// For a train of identical pulses the phasor exp(i Phi) over block k
// (t in [k tau, (k+1) tau]) is exp(i k beta) u(t - k tau), so
//   chi_N = 1/(4 pi) Int S(w) |U(w)|^2 D_N(beta - w tau) dw,
//   D_N(x) = sin^2(N x / 2) / sin^2(x / 2) = sum_{|d|<N} (N - |d|) e^{i d x}.
// With c_d = Int S |U|^2 e^{-i d w tau} dw this is a weighted sum over d, and
// c_d for all d comes from one FFT of S|U|^2 folded onto one period 2 pi/tau.
// U splits into the analytic ideal block (phase step beta at tau/2) plus a
// short pulse-shape correction whose transform P(w) does not depend on tau,
// so P is tabulated once per pulse shape.

#include "ddspec/filter_engine.hpp"
#include "ddspec/parallel.hpp"
#include "ddspec/spectral_models.hpp"

#include <complex>
#include <vector>

namespace ddspec {

class BlockResponse {
public:
    // Builds the correction table for |omega| <= omega_max.
    BlockResponse(const PulseShape& shape, const std::optional<ResonatorModel>& resonator,
                  double beta, double omega_max, Exec exec = Exec::Parallel);

    double beta() const { return beta_; }
    bool ideal() const { return table_.empty(); }
    double omega_max() const { return omega_max_; }
    // support of a single pulse relative to its half-phase point
    double support_start() const { return s0_; }
    double support_end() const { return s1_; }

    // pulse-shape correction transform (zero for instantaneous pulses)
    std::complex<double> correction(double omega) const;
    // full block transform for interpulse delay tau
    std::complex<double> eval(double omega, double tau) const;

    // direct (untabulated) evaluation of the correction, the reference for the table
    std::complex<double> correction_direct(double omega) const;

private:
    double beta_ = 0.0;
    double omega_max_ = 0.0;
    double s0_ = 0.0, s1_ = 0.0;
    double h_ = 0.0;
    std::vector<double> cell_s_;                 // cell centres of the correction samples
    std::vector<std::complex<double>> delta_;    // exp(i phi_real) - exp(i phi_ideal)
    double dw_ = 0.0;
    std::vector<std::complex<double>> table_;    // P on [-omega_max, omega_max]
};

struct ChiFamilyOptions {
    int periods = 32;          // folded periods on each side of omega = 0
    double min_grid_points_per_sigma = 4.0;
};

// chi_N for N = 1..n_max. Includes an estimate of the spectral tail
// beyond the folded band.
std::vector<double> chi_family(const SpectrumModel& model, const BlockResponse& block, double tau,
                               int n_max, const ChiFamilyOptions& opts = {});

// Frequency needed by chi_family for a given tau and model (for sizing tables).
double chi_family_omega_max(const SpectrumModel& model, double tau, const ChiFamilyOptions& opts = {});

// Filter built from the block decomposition, on an arbitrary grid (>= 0).
FilterFunction block_filter(const BlockResponse& block, double tau, int n, const std::vector<double>& omega);

// Evaluates a model on many points with one dispatch.
void eval_spectrum_batch(const SpectrumModel& model, const double* omega, double* out, std::size_t n);

} // namespace ddspec
