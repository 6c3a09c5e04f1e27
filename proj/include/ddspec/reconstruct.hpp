#pragma once

// "Recon." curves: forward-synthesise chi from the fitted model with realistic
// filters and run the fundamental-frequency analysis on it again.

#include "ddspec/coherence_forward.hpp"
#include "ddspec/contour.hpp"
#include "ddspec/fitting.hpp"

#include <optional>
#include <vector>

namespace ddspec {

struct ReconstructionPlan {
    std::vector<double> tau_list;
    double t_max = 0.0;
    ContourOptions contour;
    SynthesisOptions synthesis;
};

// Model used for one fit: PowerLaw{C, alpha} plus the peak when given.
SpectrumModel reconstruction_model(const PowerLawFit& fit, const std::optional<PeakFit>& peak);

// One estimate per fit, traced at that fit's own chi level.
std::vector<SpectrumEstimate> reconstruct_spectra(const std::vector<PowerLawFit>& fits,
                                                  const std::optional<PeakFit>& peak,
                                                  const PulseTrain& train_template, const ReconstructionPlan& plan);

SpectrumEstimate reconstruct_spectrum(const PowerLawFit& fit, const std::optional<PeakFit>& peak,
                                      const PulseTrain& train_template, const ReconstructionPlan& plan);

} // namespace ddspec
