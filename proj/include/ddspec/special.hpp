#pragma once

namespace ddspec {

// Riemann zeta for real s > 1: direct sum of the first terms plus an
// Euler-Maclaurin remainder. Accurate to ~1e-13 on (1, 8].
double riemann_zeta(double s);

// C'(alpha)/C in chi = C' t tau^alpha for S = C omega^-alpha:
// 4 zeta(2+alpha) (1 - 2^-(2+alpha)) / pi^(2+alpha). Requires alpha > -1.
double power_law_prefactor(double alpha);

// sum over odd m >= m0 of m^-p for p > 1 (m0 odd); Hurwitz-style remainder.
double odd_power_tail(double p, long m0);

} // namespace ddspec
