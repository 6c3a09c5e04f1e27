#pragma once

// File formats. Every CSV uses shortest round-trip number formatting, so
// writing and reading back is lossless. Writers go through a temporary file
// and a rename.

#include "ddspec/bath_oracle.hpp"
#include "ddspec/chi_grid.hpp"
#include "ddspec/contour.hpp"
#include "ddspec/echo_processing.hpp"
#include "ddspec/filter_engine.hpp"
#include "ddspec/fitting.hpp"
#include "ddspec/harmonic_scan.hpp"
#include "ddspec/relaxation.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ddspec::io {

namespace fs = std::filesystem;

std::string fmt(double v);
double parse_double(const std::string& s, const std::string& where);

void write_text_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

// Split a CSV file into rows of fields; lines starting with '#' are skipped.
std::vector<std::vector<std::string>> read_csv(const fs::path& path);

// tau_s,n_echo,amplitude
void write_records(const fs::path& path, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records(const fs::path& path);

// Header rows "tau_s,..." and "n_echoes,...", then one row per N. Cells above
// the noise floor carry a trailing '*', missing cells are empty, NaN is "nan".
void write_chi_grid(const fs::path& path, const ChiGrid& grid);
ChiGrid read_chi_grid(const fs::path& path);

// Image view: first row "t_s\tau_s,...", then one row per t value.
void write_raster(const fs::path& path, const RasterGrid& r);

void write_two_column(const fs::path& path, const std::string& hx, const std::string& hy,
                      const std::vector<double>& x, const std::vector<double>& y);
// omega_rad_s,fx,fz,total
void write_filter(const fs::path& path, const FilterFunction& f);
// omega_rad_s,value
void write_correction(const fs::path& path, const FiniteCorrection& c);
FiniteCorrection read_correction(const fs::path& path);

// t_s,coherence,std_err
void write_ensemble(const fs::path& path, const EnsembleResult& e);

// omega_rad_s,s_per_s,m_s,n_echoes,window_index
void write_spectrum(const fs::path& path, const SpectrumEstimate& s);
SpectrumEstimate read_spectrum(const fs::path& path);

// window_index,m_s,n_lo,n_hi,omega_lo,omega_hi,weight
void write_segments(const fs::path& path, const std::vector<SegmentInfo>& segs);

void write_scan_points(const fs::path& path, const std::vector<ScanPoint>& pts);

// level,tau_s,t_s,n_echo
void write_contours(const fs::path& path, const std::vector<ContourTrace>& traces);

// t_s,i,q
void write_iq(const fs::path& path, const IQTrace& t);
IQTrace read_iq(const fs::path& path);
// index file: field_mT,filename (relative to the index)
FieldSweep read_field_sweep(const fs::path& index);
void write_field_sweep(const fs::path& index, const FieldSweep& sweep);

// t_s,signal (first two columns)
void read_xy(const fs::path& path, std::vector<double>& x, std::vector<double>& y);

nlohmann::json to_json(const PowerLawFit& f);
PowerLawFit power_law_fit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PeakFit& f);
nlohmann::json to_json(const RelaxationFit& f);
nlohmann::json to_json(const QuadraticFit& f);

} // namespace ddspec::io
