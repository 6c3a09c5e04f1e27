#pragma once

#include <vector>

namespace ddspec {

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// One (window, m_s) segment of a harmonic scan, or the contour-derived fundamental.
struct SegmentInfo {
    int window_index = -1;
    int m_s = 1;
    int n_lo = 0, n_hi = 0;
    double omega_lo = 0.0, omega_hi = 0.0;
    double weight = 1.0;  // weight this segment received in its window average
};

// Reconstructed S(omega) with per-point provenance. s_vals may be negative
// after background subtraction. For stitched harmonic-scan output m_s = 0,
// n_echoes = 0 and window_index = -1 (the point is an average); for
// contour-derived points m_s = 1 and n_echoes is the echo the contour crossed at.
struct SpectrumEstimate {
    std::vector<double> omega;
    std::vector<double> s_vals;
    std::vector<int> m_s;
    std::vector<int> n_echoes;
    std::vector<int> window_index;
    std::vector<SegmentInfo> segments;
    std::vector<int> gap_windows;  // windows with no usable (m_s, N, tau) cell

    std::size_t size() const { return omega.size(); }
    void push(double w, double s, int m, int n, int win) {
        omega.push_back(w);
        s_vals.push_back(s);
        m_s.push_back(m);
        n_echoes.push_back(n);
        window_index.push_back(win);
    }
};

} // namespace ddspec
