#pragma once

// Forward synthesis: chi from spectra and filters, closed-form power-law chi,
// and synthetic echo-decay experiments.

#include "ddspec/block_filter.hpp"
#include "ddspec/filter_engine.hpp"
#include "ddspec/parallel.hpp"
#include "ddspec/spectral_models.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace ddspec {

struct OverlapResult {
    double chi = 0.0;
    double tail_fraction = 0.0;       // estimated integrand mass beyond the grid
    bool truncation_warning = false;  // tail_fraction > 1%
};

// chi = t^2/2 Int S F dw, trapezoid over the symmetric grid. The omega = 0
// sample is dropped for spectra that diverge there. The filter grid (see the
// pad argument of filter_from_modulation) must resolve the spectrum features.
OverlapResult chi_overlap(const SpectrumModel& model, const FilterFunction& filter, double t);

// Running value of the same integral over [-w, w] for every grid point w.
std::vector<double> cumulative_chi(const SpectrumModel& model, const FilterFunction& filter, double t);

// (4t/pi^2) sum_{odd m <= m_cutoff} S(m pi/tau)/m^2, with the exact remainder
// of power-law terms added. Other terms must have a provable remainder below
// rel_tol of the total, otherwise ResolutionError names a sufficient cutoff.
double chi_discrete(const SpectrumModel& model, double tau, double t, long m_cutoff, double rel_tol = 1e-6);

double chi_power_law(double C, double alpha, double tau, double t);

// exp(-t/(2 T1) - chi); t1 = +inf disables relaxation.
double observed_coherence(double chi, double t, double t1);

struct SamplingPlan {
    std::vector<double> tau_list;
    double max_sequence_time = 0.0;
    double noise_floor_chi = std::numeric_limits<double>::infinity();
    double shot_noise_sigma = 0.0;
    int averages = 1;
    std::optional<std::uint64_t> seed;
};

struct ExperimentRecord {
    double tau = 0.0;
    std::vector<double> echo_amplitudes;  // index N-1
    int averages = 1;
};

enum class FilterMode {
    Numeric,  // realistic filters via the block decomposition
    Delta     // delta-peak approximation (ideal pulses only)
};

struct SynthesisOptions {
    FilterMode mode = FilterMode::Numeric;
    Exec exec = Exec::Parallel;
    ChiFamilyOptions family;
};

void validate(const SamplingPlan& plan);

// chi for N = 1..n_max at one tau.
std::vector<double> synthesize_chi(const SpectrumModel& model, const PulseTrain& train_template, double tau,
                                   int n_max, const SynthesisOptions& opts = {});

// Same, reusing a prepared block response (the expensive part for finite pulses).
std::vector<double> synthesize_chi(const SpectrumModel& model, const BlockResponse& block, double tau,
                                   int n_max, const SynthesisOptions& opts);

// Block response sized for every tau in the list.
BlockResponse prepare_block(const SpectrumModel& model, const PulseTrain& train_template,
                            const std::vector<double>& tau_list, const SynthesisOptions& opts = {});

std::vector<ExperimentRecord> synthesize_experiment(const SpectrumModel& model, const PulseTrain& train_template,
                                                    const SamplingPlan& plan, double t1,
                                                    const SynthesisOptions& opts = {});

} // namespace ddspec
