#pragma once

// Harmonic scan: spectral peaks above pi/tau_min measured with the m_s-th
// filter harmonic after subtracting the power-law background chi_B.

#include "ddspec/chi_grid.hpp"
#include "ddspec/filter_engine.hpp"
#include "ddspec/fitting.hpp"
#include "ddspec/parallel.hpp"
#include "ddspec/spectrum_estimate.hpp"

#include <utility>
#include <vector>

namespace ddspec {

struct HarmonicScanConfig {
    double window_w = 0.0;         // W, rad/s
    double epsilon = 0.03;         // harmonic width limit as a fraction of W
    double tau_min = 0.0;          // s
    double tau_max = 0.0;          // s; 0 means 2 pi / W
    double t_max = 0.0;            // s, N_max tau_start <= t_max
    double chi_noise_threshold = 4.5;
    double omega_lo = 0.0, omega_hi = 0.0;  // scan range, rad/s
    int points_per_window = 51;    // resampling grid; odd so half windows share points
    bool record_points = false;    // keep every S_P cell in the result (memory heavy)
};

void validate(const HarmonicScanConfig& cfg);
double effective_tau_max(const HarmonicScanConfig& cfg);

// sqrt(2 pi) / (epsilon W): the shortest detection time whose harmonic is
// narrower than epsilon W.
double min_detection_time(double epsilon, double window_w);

// smallest odd integer > omega_plus tau_min / pi
int harmonic_m_min(double omega_plus, double tau_min);
// largest odd integer <= 2 omega_minus / W (0 if none)
int harmonic_m_max(double omega_minus, double window_w);

// pi^2 m_s^2 (chi - chi_B) / (4 N tau A)
double harmonic_sp(int m_s, double chi, double chi_b, int n, double tau, double a = 1.0);

struct HarmonicPlan {
    int m_s = 0;
    std::size_t fin = 0, start = 0;  // tau axis indices, tau_fin <= tau_start
    int n_min = 0, n_max = 0;
};

struct WindowPlan {
    int index = 0;
    double omega_minus = 0.0, omega_plus = 0.0;
    int m_min = 0, m_max = 0;
    std::vector<HarmonicPlan> harmonics;  // only those with a usable tau and N range
};

WindowPlan plan_window(const HarmonicScanConfig& cfg, const std::vector<double>& tau_axis, double omega_minus,
                       int index = 0);
std::vector<double> window_starts(const HarmonicScanConfig& cfg);

struct ScanPoint {
    int window_index = 0;
    int m_s = 0;
    int n = 0;
    double tau = 0.0;
    double omega = 0.0;
    double chi = 0.0, chi_b = 0.0;
    double a = 1.0;
    double s_p = 0.0;
};

struct HarmonicScanResult {
    SpectrumEstimate estimate;           // stitched over windows
    SpectrumEstimate segment_curves;     // per (window, m_s), averaged over N
    std::vector<ScanPoint> points;       // every cell that entered S_P
    std::vector<WindowPlan> windows;
};

HarmonicScanResult harmonic_scan(const ChiGrid& grid, const std::vector<PowerLawFit>& fits,
                                 const HarmonicScanConfig& cfg, const FiniteCorrection& correction,
                                 Exec exec = Exec::Parallel);

// Largest value of each m_s curve (averaged over windows) inside [lo, hi].
// Harmonics covering less than 90% of the range are left out.
std::vector<std::pair<int, double>> per_harmonic_peaks(const HarmonicScanResult& r, double omega_lo,
                                                       double omega_hi);

} // namespace ddspec
