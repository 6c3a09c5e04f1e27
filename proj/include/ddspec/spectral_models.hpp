#pragma once

// Parametric noise power spectral densities.
//
// Conventions used everywhere in the library: omega in rad/s, S in 1/s,
// S(omega) = integral g(u) exp(-i omega u) du for the field autocorrelation
// g (so an O-U field with variance delta^2 has the Lorentzian below), and
// filters carry the 1/(2 pi) of the symmetric transform pair.

#include <json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace ddspec {

struct PowerLaw {
    double C = 0.0;      // 1/s * (rad/s)^alpha
    double alpha = 1.0;
};

struct Lorentzian {
    double delta = 0.0;  // rad/s
    double tau_c = 0.0;  // s
};

struct GaussianPeak {
    double A = 0.0;        // 1/s
    double omega_p = 0.0;  // rad/s
    double sigma = 0.0;    // rad/s
};

// Superposition of Lorentzians with tau_c distributed as p0/tau_c on [tau1, tau2].
struct LorentzianEnsemble {
    double delta = 0.0;
    double p0 = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
};

class SpectrumModel;

struct Composite {
    std::vector<SpectrumModel> terms;
};

class SpectrumModel {
public:
    using Variant = std::variant<PowerLaw, Lorentzian, GaussianPeak,
                                 LorentzianEnsemble, Composite>;

    SpectrumModel() : v_(Composite{}) {}
    SpectrumModel(PowerLaw p) : v_(p) {}
    SpectrumModel(Lorentzian p) : v_(p) {}
    SpectrumModel(GaussianPeak p) : v_(p) {}
    SpectrumModel(LorentzianEnsemble p) : v_(p) {}
    SpectrumModel(Composite p) : v_(std::move(p)) {}

    const Variant& variant() const { return v_; }

    template <class T> const T* get_if() const { return std::get_if<T>(&v_); }

private:
    Variant v_;
};

// Throws ValidationError if any parameter is non-finite or out of range.
void validate(const SpectrumModel& model);

double eval_spectrum(const SpectrumModel& model, double omega);
double eval_lorentzian_ensemble(const LorentzianEnsemble& m, double omega);

// True when S diverges at omega = 0 (any power law with alpha > 0 inside).
bool singular_at_zero(const SpectrumModel& model);

// Upper bound on S(omega) for omega >= omega0 of the form c * omega^-p,
// used to bound truncated harmonic sums. Returns false when no such bound
// is available (peak not yet passed at omega0).
struct DecayBound {
    double c = 0.0;
    double p = 0.0;
};
bool decay_bound(const SpectrumModel& model, double omega0,
                 std::vector<DecayBound>& out);

nlohmann::json to_json(const SpectrumModel& model);
SpectrumModel spectrum_from_json(const nlohmann::json& j);

std::string describe(const SpectrumModel& model);

} // namespace ddspec
