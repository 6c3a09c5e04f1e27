#include "ddspec/special.hpp"

#include "ddspec/error.hpp"

#include <cmath>
#include <numbers>

namespace ddspec {

namespace {

// Hurwitz zeta(s, a) = sum_{k>=0} (k + a)^-s with n direct terms and an
// Euler-Maclaurin correction using Bernoulli numbers B2..B16.
double hurwitz(double s, double a) {
    constexpr int n = 12;
    long double sum = 0.0L;
    for (int k = 0; k < n; ++k) sum += std::pow(static_cast<long double>(k) + a, -s);
    const long double x = static_cast<long double>(n) + a;
    sum += std::pow(x, 1.0L - s) / (s - 1.0L);
    sum += 0.5L * std::pow(x, -static_cast<long double>(s));
    // B_{2j} / (2j)!
    static constexpr long double b[] = {
        1.0L / 12.0L,         -1.0L / 720.0L,           1.0L / 30240.0L,
        -1.0L / 1209600.0L,   1.0L / 47900160.0L,       -691.0L / 1307674368000.0L,
        1.0L / 74724249600.0L, -3617.0L / 10670622842880000.0L};
    // rising factorial s (s+1) ... (s+2j-2) times x^{-s-2j+1}
    long double poch = s;
    long double xp = std::pow(x, -static_cast<long double>(s) - 1.0L);
    for (int j = 0; j < 8; ++j) {
        sum += b[j] * poch * xp;
        poch *= (s + 2 * j + 1) * (s + 2 * j + 2);
        xp /= x * x;
    }
    return static_cast<double>(sum);
}

} // namespace

double riemann_zeta(double s) {
    if (!(s > 1.0)) throw DomainError("riemann_zeta requires s > 1");
    return hurwitz(s, 1.0);
}

double power_law_prefactor(double alpha) {
    if (!(alpha > -1.0)) throw DomainError("power-law chi requires alpha > -1");
    const double p = 2.0 + alpha;
    return 4.0 * riemann_zeta(p) * (1.0 - std::exp2(-p)) / std::pow(std::numbers::pi, p);
}

double odd_power_tail(double p, long m0) {
    if (!(p > 1.0)) throw DomainError("odd_power_tail requires p > 1");
    if (m0 < 1 || m0 % 2 == 0) throw DomainError("odd_power_tail needs an odd start");
    // sum_{k>=0} (m0 + 2k)^-p = 2^-p zeta(p, m0/2)
    return std::exp2(-p) * hurwitz(p, 0.5 * static_cast<double>(m0));
}

} // namespace ddspec
