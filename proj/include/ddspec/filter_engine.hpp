#pragma once

// Control-phase profiles, toggling-frame modulation functions and multi-axis
// filter functions for ideal and finite-pulse CPMG trains (pi_y pulses).
//
// Time sampling: every profile/modulation array is cell-centred. Sample k
// represents the interval [k dt, (k+1) dt] and is evaluated at (k + 1/2) dt,
// so the arrays are exact piecewise-constant representations and the
// Fourier transform below is the exact transform of that representation.

#include <cstddef>
#include <optional>
#include <vector>

namespace ddspec {

enum class ShapeKind { Instantaneous, Square, Gaussian };

struct PulseShape {
    ShapeKind kind = ShapeKind::Instantaneous;
    double duration = 0.0;        // s
    double gaussian_sigma = 0.0;  // s, gaussian only (truncated at +-duration/2)
};

struct ResonatorModel {
    double omega0 = 0.0;    // rad/s
    double q_factor = 1.0;
    double ringdown() const { return 2.0 * q_factor / omega0; }
};

struct PulseTrain {
    double tau = 0.0;  // s, echo N at N*tau, pulse k centred at tau*(k - 1/2)
    int n_pulses = 1;
    double beta = 3.14159265358979323846;
    PulseShape shape;
    std::optional<ResonatorModel> resonator;
};

struct PhaseProfile {
    double dt = 0.0;
    std::vector<double> phi;          // cumulative control phase at (k+1/2) dt
    std::vector<double> echo_times;   // N tau, N = 1..n_pulses
};

struct ModulationFunction {
    double dt = 0.0;
    std::vector<double> f_x, f_z;
    std::vector<double> echo_times;
    double duration() const { return dt * static_cast<double>(f_z.size()); }
};

// Filters of real modulation functions are even; only omega >= 0 is stored.
struct FilterFunction {
    std::vector<double> omega;
    std::vector<double> fx_vals, fz_vals, total;
    double t = 0.0;
    double integral() const;  // over the full symmetric grid
};

struct FiniteCorrection {
    std::vector<double> omega;
    std::vector<double> a_vals;
    double at(double omega) const;  // linear interpolation, flat beyond the ends
    static FiniteCorrection identity();
};

struct DeltaPeak {
    double omega;
    double weight;
};

void validate(const PulseShape& shape);
void validate(const PulseTrain& train);

// min(duration/50, tau/512) for finite pulses, tau/1024 for instantaneous ones,
// shrunk so that tau/2 is an integer number of steps.
double default_dt(const PulseTrain& train);

// Cumulative phase of one isolated pulse as a function of time measured from
// its half-phase point. Piecewise linear (exact for the piecewise-constant
// resonator-filtered envelope) and flat outside [start, end].
class PulseKernel {
public:
    PulseKernel(const PulseShape& shape, const std::optional<ResonatorModel>& resonator,
                double beta, double dt);

    double phase(double s) const;
    double start() const { return start_; }
    double end() const { return end_; }
    double beta() const { return beta_; }
    bool instantaneous() const { return inst_; }
    // programmed (pre-ring-down) pulse end relative to the half-phase point
    double programmed_end() const { return prog_end_; }
    // convolved envelope right at the programmed end, normalised to area beta
    double envelope_at_programmed_end() const { return env_end_; }

private:
    bool inst_ = true;
    double beta_ = 0.0;
    double start_ = 0.0, end_ = 0.0, h_ = 0.0;
    double prog_end_ = 0.0, env_end_ = 0.0;
    std::vector<double> cum_;  // phase at start_ + j h_
};

PhaseProfile build_phase_profile(const PulseTrain& train, double dt);
ModulationFunction modulation_from_phase(const PhaseProfile& profile);

// F_mu(omega) = |FT of f_mu over [0, t_detect]|^2 / (2 pi t^2), zero padded by
// at least `pad` so the grid step is <= 2 pi / (pad t).
FilterFunction filter_from_modulation(const ModulationFunction& mod, double t_detect, int pad = 4);

std::vector<DeltaPeak> delta_filter_peaks(double tau, double t, int m_max);

// A(omega) from a CPMG-1 reference at tau_ref, sampled at the odd filter peaks.
FiniteCorrection finite_correction(const PulseShape& shape,
                                   const std::optional<ResonatorModel>& resonator, double beta,
                                   double tau_ref = 8e-6);

double flip_angle_split_prediction(double beta, double tau);

// Local maxima of the stored filter inside [lo, hi].
std::vector<std::size_t> filter_maxima(const FilterFunction& f, double lo, double hi);

} // namespace ddspec
