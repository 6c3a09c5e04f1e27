#pragma once

// Run configuration: a JSON document with one section per concern. Numbers
// are plain SI values. Every problem is reported as a ValidationError whose
// message starts with the dotted field path.

#include "ddspec/coherence_forward.hpp"
#include "ddspec/contour.hpp"
#include "ddspec/fitting.hpp"
#include "ddspec/harmonic_scan.hpp"
#include "ddspec/relaxation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ddspec {

struct AnalysisSection {
    std::vector<double> levels{0.5, 1.0, 2.0, 3.0, 4.0};
    ContourOptions contour;
    bool normalize = true;      // normalise amplitudes to the dataset maximum
    double chi_max = std::numeric_limits<double>::infinity();
    bool reconstruct = false;
    int raster_points = 0;      // > 0 also writes an image view with this many t rows
};

struct ScanSection {
    HarmonicScanConfig cfg;
    std::optional<Interval> peak_range;  // rad/s, Gaussian fit window
    std::string correction = "ideal";    // "ideal", "train" or a CSV path
};

struct RelaxationSection {
    RelaxationModel model = RelaxationModel::Exp;
    std::string data;                    // t_s,signal CSV
    std::optional<double> t2;            // report S(0) / [N] for a known T2
    std::optional<Species> species;
};

struct EchoSection {
    std::vector<std::string> traces;     // IQ CSVs
    std::string field_sweep;             // index CSV
};

struct IOSection {
    std::string records, chi_grid, fits, peak;
};

struct RunConfig {
    std::filesystem::path base_dir;      // relative paths resolve against this
    std::optional<std::uint64_t> seed;
    std::optional<SpectrumModel> spectrum;
    std::optional<PulseTrain> train;     // tau and n_pulses are set per tau
    std::optional<SamplingPlan> plan;
    double t1 = std::numeric_limits<double>::infinity();
    FilterMode filter_mode = FilterMode::Numeric;
    AnalysisSection analysis;
    std::optional<ScanSection> scan;
    std::optional<RelaxationSection> relaxation;
    std::optional<EchoSection> echo;
    IOSection io;

    std::filesystem::path resolve(const std::string& p) const;
};

// seed_override (the --seed flag) replaces both the top-level and the plan seed.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {},
                       std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_config(const std::filesystem::path& path,
                      std::optional<std::uint64_t> seed_override = std::nullopt);

PulseTrain train_from_json(const nlohmann::json& j, const std::string& ctx = "train");
nlohmann::json to_json(const PulseTrain& train);

} // namespace ddspec
