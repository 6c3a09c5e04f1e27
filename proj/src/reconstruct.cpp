#include "ddspec/reconstruct.hpp"

#include "ddspec/chi_grid.hpp"
#include "ddspec/error.hpp"

namespace ddspec {

SpectrumModel reconstruction_model(const PowerLawFit& fit, const std::optional<PeakFit>& peak) {
    SpectrumModel bg = PowerLaw{fit.c_value, fit.alpha};
    if (!peak || peak->amplitude <= 0.0) return bg;
    return Composite{{bg, GaussianPeak{peak->amplitude, peak->center, peak->width_sigma}}};
}

SpectrumEstimate reconstruct_spectrum(const PowerLawFit& fit, const std::optional<PeakFit>& peak,
                                      const PulseTrain& train_template, const ReconstructionPlan& plan) {
    const auto model = reconstruction_model(fit, peak);
    const auto grid = chi_grid_from_model(model, train_template, plan.tau_list, plan.t_max, plan.synthesis);
    const auto trace = trace_contour(grid, fit.level, plan.contour);
    if (trace.empty()) throw InsufficientDataError("reconstruction: contour at chi = " + std::to_string(fit.level) +
                                                   " never crossed");
    return spectrum_from_contour(trace);
}

std::vector<SpectrumEstimate> reconstruct_spectra(const std::vector<PowerLawFit>& fits,
                                                  const std::optional<PeakFit>& peak,
                                                  const PulseTrain& train_template, const ReconstructionPlan& plan) {
    if (fits.empty()) throw InsufficientDataError("reconstruction: no fits");
    std::vector<SpectrumEstimate> out;
    for (const auto& f : fits) out.push_back(reconstruct_spectrum(f, peak, train_template, plan));
    return out;
}

} // namespace ddspec
