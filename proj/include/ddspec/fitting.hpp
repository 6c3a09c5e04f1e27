#pragma once

// Power-law contour fits, background chi, fundamental spectra, Gaussian peak
// fits and the small closed-form estimators.

#include "ddspec/contour.hpp"
#include "ddspec/spectrum_estimate.hpp"

#include <utility>
#include <vector>

namespace ddspec {

// chi = C'(alpha) C t tau^alpha on a contour chi = level, i.e.
// ln t = ln(level / (C'(alpha) C)) - alpha ln tau.
struct PowerLawFit {
    double level = 0.0;
    double c_value = 0.0;
    double alpha = 0.0;
    Interval ci95_c, ci95_alpha;
    double residual = 0.0;  // rms of ln t
    int n_points = 0;
    double intercept = 0.0;  // of ln t vs ln tau
};

PowerLawFit fit_power_law(const ContourTrace& trace);

// t at which the fit predicts chi = level for a given tau.
double fit_line_t(const PowerLawFit& fit, double tau);
// chi predicted by the fit at (tau, t).
double fit_chi(const PowerLawFit& fit, double tau, double t);

// Picks the fit whose line passes closest to (tau, t) in ln t and evaluates
// its chi there. Ties go to the earlier fit.
double background_chi(double tau, double t, const std::vector<PowerLawFit>& fits);
std::size_t nearest_fit(double tau, double t, const std::vector<PowerLawFit>& fits);

// (pi/tau, pi^2 level / (4 t)) for every contour point.
SpectrumEstimate spectrum_from_contour(const ContourTrace& trace);

struct PeakFit {
    double amplitude = 0.0;
    double center = 0.0;
    double width_sigma = 0.0;
    Interval ci95_amplitude, ci95_center, ci95_width;
    double residual = 0.0;  // rms
    int n_points = 0;
};

// A exp(-(w - w_p)^2 / (2 sigma^2)) by Levenberg-Marquardt. FitFailure on
// non-convergence, InsufficientDataError with fewer than 5 points.
PeakFit fit_gaussian_peak(const std::vector<double>& omega, const std::vector<double>& s);
PeakFit fit_gaussian_peak(const SpectrumEstimate& est, double omega_lo, double omega_hi);

struct QuadraticFit {
    double p2 = 0.0, p0 = 0.0;
    Interval ci95_p2, ci95_p0;
};

// amplitude = p2 m_s^2 + p0, ordinary least squares.
QuadraticFit peak_vs_harmonic_fit(const std::vector<std::pair<int, double>>& peaks);

// S(0) = 2/T2 from an exponential Hahn decay.
double zero_freq_estimate(double t2_hahn);

enum class Species { P1, NV };
// [N] in ppm from T2: 71 us ppm (P1) or 160 us ppm (NV).
double concentration_from_t2(double t2, Species species);
double t2_from_concentration(double ppm, Species species);

} // namespace ddspec
