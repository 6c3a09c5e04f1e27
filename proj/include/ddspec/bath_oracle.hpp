#pragma once

// Monte-Carlo trajectories of the semiclassical noise field b_z(t) (in rad/s,
// gyromagnetic ratio folded in), used as an independent oracle for
// coherence = exp(-chi).

#include "ddspec/filter_engine.hpp"
#include "ddspec/parallel.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace ddspec {

struct OUComponent {
    double delta = 0.0;  // rad/s, stationary standard deviation
    double tau_c = 0.0;  // s
};

struct LineComponent {
    double A = 0.0;        // s^-1, peak of S(omega)
    double omega_p = 0.0;  // rad/s
    double sigma = 0.0;    // rad/s
};

struct BathConfig {
    std::vector<OUComponent> ou_components;
    std::vector<LineComponent> line_components;
    double dt = 0.0;        // largest sampling step, s
    double duration = 0.0;  // s (informational; the modulation sets the span)
    int n_trajectories = 1000;
    std::uint64_t seed = 0;
    int line_modes = 128;   // cosine/sine pairs per spectral line
};

void validate(const BathConfig& cfg);

struct EnsembleResult {
    std::vector<double> t_axis;           // echo times
    std::vector<double> mean_coherence;   // <cos phi>
    std::vector<double> std_err;          // jackknife
    std::vector<double> mean_phase_sq;    // <phi^2>
    std::vector<double> phase_sq_std_err;
    int substeps = 1;                     // bath samples per modulation cell
    bool grid_adjusted = false;           // modulation dt was not a multiple of cfg.dt
};

// x_{k+1} = x_k e^{-dt/tc} + delta sqrt(1 - e^{-2 dt/tc}) xi_k, x_0 ~ N(0, delta^2).
// Returns n_steps + 1 samples at k dt.
std::vector<double> sample_ou(double delta, double tau_c, double dt, std::size_t n_steps, std::mt19937_64& rng);

// Sum of K random-frequency quadrature pairs with autocorrelation
// v exp(-sigma^2 u^2 / 2) cos(omega_p u), v = 2 A sigma / sqrt(2 pi), whose
// transform is the GaussianPeak{A, omega_p, sigma} spectrum (both signs of omega).
std::vector<double> sample_line(double A, double omega_p, double sigma, double dt, std::size_t n_steps,
                                std::mt19937_64& rng, int modes = 128);

// phi_N = Int_0^{t_N} f_z b dt per trajectory (trapezoid per cell, f_z constant
// on a cell); reports <cos phi_N> at every echo time of the modulation.
EnsembleResult ensemble_coherence(const BathConfig& cfg, const ModulationFunction& mod,
                                  Exec exec = Exec::Parallel);

} // namespace ddspec
