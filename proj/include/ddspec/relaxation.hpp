#pragma once

// T2 / T1 relaxation fits.

#include "ddspec/spectrum_estimate.hpp"

#include <string>
#include <vector>

namespace ddspec {

enum class RelaxationModel {
    Exp,                     // M e^{-t/T}
    Biexp,                   // M1 e^{-t/T2_1} + M2 e^{-t/T2_2}, T2_1 < T2_2
    InversionRecovery,       // M (1 - 2 sin^2(theta/2) e^{-t/T1})
    InversionDepolarization  // M e^{-t/T1}
};

RelaxationModel relaxation_model_from_string(const std::string& s);
std::string to_string(RelaxationModel m);

struct RelaxationFit {
    RelaxationModel model = RelaxationModel::Exp;
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<Interval> ci95;
    double residual = 0.0;  // rms
    double get(const std::string& name) const;
};

double eval_relaxation(RelaxationModel model, const std::vector<double>& params, double t);

// Needs at least twice as many points as parameters.
RelaxationFit fit_relaxation(const std::vector<double>& t, const std::vector<double>& signal, RelaxationModel model);

} // namespace ddspec
