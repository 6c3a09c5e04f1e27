#include "ddspec/harmonic_scan.hpp"

#include "ddspec/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace ddspec {

namespace {
constexpr double pi = std::numbers::pi;
}

void validate(const HarmonicScanConfig& c) {
    if (!(c.window_w > 0.0)) throw ValidationError("scan.window_w must be > 0");
    if (!(c.epsilon > 0.0 && c.epsilon <= 0.1)) throw ValidationError("scan.epsilon must be in (0, 0.1]");
    if (!(c.tau_min > 0.0)) throw ValidationError("scan.tau_min must be > 0");
    if (!(c.tau_max >= 0.0)) throw ValidationError("scan.tau_max must be >= 0");
    if (!(effective_tau_max(c) > c.tau_min)) throw ValidationError("scan.tau_max must exceed scan.tau_min");
    if (!(c.t_max > 0.0)) throw ValidationError("scan.t_max must be > 0");
    if (!(c.omega_hi > c.omega_lo && c.omega_lo > 0.0))
        throw ValidationError("scan.omega_range must satisfy 0 < lo < hi");
    if (c.points_per_window < 3 || c.points_per_window % 2 == 0)
        throw ValidationError("scan.points_per_window must be odd and >= 3");
}

double effective_tau_max(const HarmonicScanConfig& c) {
    const double natural = 2.0 * pi / c.window_w;
    return c.tau_max > 0.0 ? std::min(c.tau_max, natural) : natural;
}

double min_detection_time(double epsilon, double window_w) {
    return std::sqrt(2.0 * pi) / (epsilon * window_w);
}

int harmonic_m_min(double omega_plus, double tau_min) {
    const double x = omega_plus * tau_min / pi;
    auto m = static_cast<int>(std::floor(x)) + 1;  // strictly greater
    if (m % 2 == 0) ++m;
    return m;
}

int harmonic_m_max(double omega_minus, double window_w) {
    auto m = static_cast<int>(std::floor(2.0 * omega_minus / window_w));
    if (m % 2 == 0) --m;
    return std::max(m, 0);
}

double harmonic_sp(int m_s, double chi, double chi_b, int n, double tau, double a) {
    return pi * pi * m_s * m_s * (chi - chi_b) / (4.0 * n * tau * a);
}

std::vector<double> window_starts(const HarmonicScanConfig& c) {
    const double half = 0.5 * c.window_w;
    const double span = c.omega_hi - c.omega_lo;
    const int n = span <= c.window_w ? 1 : static_cast<int>(std::ceil((span - c.window_w) / half - 1e-9)) + 1;
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = c.omega_lo + k * half;
    return s;
}

WindowPlan plan_window(const HarmonicScanConfig& c, const std::vector<double>& tau, double omega_minus, int index) {
    WindowPlan w;
    w.index = index;
    w.omega_minus = omega_minus;
    w.omega_plus = omega_minus + c.window_w;
    w.m_min = harmonic_m_min(w.omega_plus, c.tau_min);
    w.m_max = harmonic_m_max(w.omega_minus, c.window_w);
    const double tmax = effective_tau_max(c);
    const double nfloor = min_detection_time(c.epsilon, c.window_w);
    for (int m = w.m_min; m <= w.m_max; m += 2) {
        const double t_start_lim = std::min(m * pi / w.omega_minus, tmax * (1.0 + 1e-12));
        const double t_fin_lim = std::max(m * pi / w.omega_plus, c.tau_min * (1.0 - 1e-12));
        // tau_start: largest available <= limit; tau_fin: smallest available >= limit
        auto hi = std::upper_bound(tau.begin(), tau.end(), t_start_lim);
        auto lo = std::lower_bound(tau.begin(), tau.end(), t_fin_lim);
        if (hi == tau.begin() || lo == tau.end()) continue;
        const auto start = static_cast<std::size_t>(hi - tau.begin()) - 1;
        const auto fin = static_cast<std::size_t>(lo - tau.begin());
        if (fin > start) continue;
        HarmonicPlan h;
        h.m_s = m;
        h.fin = fin;
        h.start = start;
        h.n_min = static_cast<int>(std::floor(nfloor / tau[fin])) + 1;
        h.n_max = static_cast<int>(std::floor(c.t_max / tau[start] * (1.0 + 1e-12)));
        if (h.n_min > h.n_max) continue;
        w.harmonics.push_back(h);
    }
    return w;
}

namespace {

struct WindowOut {
    std::vector<double> value;  // per grid point, NaN where empty
    std::vector<std::pair<int, std::vector<double>>> m_curves;
    std::vector<int> m_counts;  // N segments contributing per m_s
    std::vector<SegmentInfo> segs;
    std::vector<ScanPoint> points;
};

WindowOut scan_window(const ChiGrid& g, const std::vector<PowerLawFit>& fits, const HarmonicScanConfig& c,
                      const FiniteCorrection& corr, const WindowPlan& plan) {
    const int P = c.points_per_window;
    const double dw = c.window_w / (P - 1);
    WindowOut out;
    out.value.assign(static_cast<std::size_t>(P), std::nan(""));
    std::vector<double> msum(static_cast<std::size_t>(P), 0.0);
    std::vector<int> mcnt(static_cast<std::size_t>(P), 0);

    std::vector<double> ws, ss;
    for (const auto& h : plan.harmonics) {
        std::vector<double> nsum(static_cast<std::size_t>(P), 0.0);
        std::vector<int> ncnt(static_cast<std::size_t>(P), 0);
        int n_used_lo = 0, n_used_hi = 0, n_segments = 0;
        for (int n = h.n_min; n <= h.n_max; ++n) {
            bool used = false;
            auto flush = [&] {
                if (ws.size() >= 2) {
                    used = true;
                    const auto k0 = static_cast<int>(std::ceil((ws.front() - plan.omega_minus) / dw - 1e-9));
                    const auto k1 = static_cast<int>(std::floor((ws.back() - plan.omega_minus) / dw + 1e-9));
                    std::size_t j = 0;
                    for (int k = std::max(k0, 0); k <= std::min(k1, P - 1); ++k) {
                        const double w = plan.omega_minus + k * dw;
                        while (j + 2 < ws.size() && ws[j + 1] < w) ++j;
                        const double f = std::clamp((w - ws[j]) / (ws[j + 1] - ws[j]), 0.0, 1.0);
                        nsum[static_cast<std::size_t>(k)] += ss[j] + f * (ss[j + 1] - ss[j]);
                        ++ncnt[static_cast<std::size_t>(k)];
                    }
                }
                ws.clear();
                ss.clear();
            };
            // ascending omega = descending tau; runs split where a cell is unusable
            for (std::size_t ii = h.start + 1; ii-- > h.fin;) {
                const double tau = g.tau[ii];
                if (!g.ok(ii, n) || g.at(ii, n) > c.chi_noise_threshold) {
                    flush();
                    continue;
                }
                const double chi = g.at(ii, n);
                const double t = n * tau;
                const double omega = h.m_s * pi / tau;
                const double chib = background_chi(tau, t, fits);
                const double a = corr.at(omega);
                const double sp = harmonic_sp(h.m_s, chi, chib, n, tau, a);
                ws.push_back(omega);
                ss.push_back(sp);
                if (c.record_points) out.points.push_back({plan.index, h.m_s, n, tau, omega, chi, chib, a, sp});
            }
            flush();
            if (used) {
                if (n_segments == 0) n_used_lo = n;
                n_used_hi = n;
                ++n_segments;
            }
        }
        if (n_segments == 0) continue;
        std::vector<double> curve(static_cast<std::size_t>(P), std::nan(""));
        double wlo = INFINITY, whi = -INFINITY;
        for (int k = 0; k < P; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            if (ncnt[kk] == 0) continue;
            curve[kk] = nsum[kk] / ncnt[kk];
            msum[kk] += curve[kk];
            ++mcnt[kk];
            wlo = std::min(wlo, plan.omega_minus + k * dw);
            whi = std::max(whi, plan.omega_minus + k * dw);
        }
        out.m_curves.emplace_back(h.m_s, std::move(curve));
        out.m_counts.push_back(n_segments);
        SegmentInfo s;
        s.window_index = plan.index;
        s.m_s = h.m_s;
        s.n_lo = n_used_lo;
        s.n_hi = n_used_hi;
        s.omega_lo = wlo;
        s.omega_hi = whi;
        out.segs.push_back(s);
    }
    for (auto& s : out.segs) s.weight = 1.0 / static_cast<double>(out.segs.size());
    for (int k = 0; k < P; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        if (mcnt[kk] > 0) out.value[kk] = msum[kk] / mcnt[kk];
    }
    return out;
}

} // namespace

HarmonicScanResult harmonic_scan(const ChiGrid& grid, const std::vector<PowerLawFit>& fits,
                                 const HarmonicScanConfig& cfg, const FiniteCorrection& correction, Exec exec) {
    validate(cfg);
    if (fits.empty()) throw InsufficientDataError("harmonic_scan: no power-law fits for the background");
    const auto starts = window_starts(cfg);
    HarmonicScanResult r;
    r.windows.resize(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i)
        r.windows[i] = plan_window(cfg, grid.tau, starts[i], static_cast<int>(i));

    std::vector<WindowOut> outs(starts.size());
    parallel_for(starts.size(), exec,
                 [&](std::size_t i) { outs[i] = scan_window(grid, fits, cfg, correction, r.windows[i]); }, true);

    // stitch on the global grid lo + k W/(P-1); window i starts at k = i (P-1)/2
    const int P = cfg.points_per_window;
    const int step = (P - 1) / 2;
    const double dw = cfg.window_w / (P - 1);
    const std::size_t nk = (starts.size() - 1) * static_cast<std::size_t>(step) + static_cast<std::size_t>(P);
    std::vector<double> sum(nk, 0.0);
    std::vector<int> cnt(nk, 0);
    for (std::size_t i = 0; i < outs.size(); ++i) {
        const auto& o = outs[i];
        if (o.segs.empty()) r.estimate.gap_windows.push_back(static_cast<int>(i));
        for (int k = 0; k < P; ++k) {
            const double v = o.value[static_cast<std::size_t>(k)];
            if (std::isnan(v)) continue;
            const std::size_t gk = i * static_cast<std::size_t>(step) + static_cast<std::size_t>(k);
            sum[gk] += v;
            ++cnt[gk];
        }
        for (std::size_t m = 0; m < o.m_curves.size(); ++m)
            for (int k = 0; k < P; ++k) {
                const double v = o.m_curves[m].second[static_cast<std::size_t>(k)];
                if (!std::isnan(v))
                    r.segment_curves.push(starts[i] + k * dw, v, o.m_curves[m].first, o.m_counts[m],
                                          static_cast<int>(i));
            }
        r.estimate.segments.insert(r.estimate.segments.end(), o.segs.begin(), o.segs.end());
        r.points.insert(r.points.end(), o.points.begin(), o.points.end());
    }
    r.segment_curves.segments = r.estimate.segments;
    for (std::size_t k = 0; k < nk; ++k) {
        if (cnt[k] == 0) continue;
        const double w = cfg.omega_lo + static_cast<double>(k) * dw;
        if (w > cfg.omega_hi * (1.0 + 1e-12)) continue;
        r.estimate.push(w, sum[k] / cnt[k], 0, 0, -1);
    }
    return r;
}

std::vector<std::pair<int, double>> per_harmonic_peaks(const HarmonicScanResult& r, double lo, double hi) {
    // average each m_s over windows at each frequency, then take the maximum
    std::map<int, std::map<long long, std::pair<double, int>>> acc;
    const auto& c = r.segment_curves;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.omega[i] < lo || c.omega[i] > hi) continue;
        auto& cell = acc[c.m_s[i]][std::llround(c.omega[i])];
        cell.first += c.s_vals[i];
        ++cell.second;
    }
    std::vector<std::pair<int, double>> out;
    for (const auto& [m, pts] : acc) {
        // harmonics that only see the edge of the range cannot show the peak
        const double span = static_cast<double>(pts.rbegin()->first - pts.begin()->first);
        if (span < 0.9 * (hi - lo)) continue;
        double best = -INFINITY;
        for (const auto& [key, v] : pts) best = std::max(best, v.first / v.second);
        out.emplace_back(m, best);
    }
    return out;
}

} // namespace ddspec
