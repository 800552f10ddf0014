#pragma once

// Band-limited majorant/minorant pair for an interval indicator, after
// Beurling and Selberg.  The extremal function
//
//   F(z) = (sin pi z / pi)^2 [ sum_{n>=0} (z-n)^{-2} - sum_{n>=1} (z+n)^{-2} + 2/z ]
//
// majorizes sgn with integral excess 1 and Fourier transform supported in
// [-1,1].  Scaling by the degree D = n^3 and combining two copies produces
// g2 <= 1_{[l,r]} <= g1 with g_i band-limited to [-D, D].  Coefficients are
// recovered exactly (up to certified evaluation error) by sampling the
// periodization, a trigonometric polynomial of degree D.

#include <complex>
#include <cstddef>
#include <vector>

namespace dioph::selberg {

// Trigamma / tetragamma for x > 0, ~1e-13 relative accuracy.
double psi1(double x);
double psi2(double x);

struct Certified {
    double value = 0;
    double err = 0;  // absolute error bound
};

// Truncated-series evaluation of F with K terms per one-sided sum and the
// integral-test tail bound; err is certified for K > |x| + 1 and grows near
// the series poles, which is reported, not hidden.
Certified selberg_eval(double x, unsigned K);

// Excess R(y) = F(y) - sgn(y) >= 0 via the trigamma closed form.
double selberg_excess(double y);

// Periodized excess  rho(v) = sum_j R(v + D j)  for integer lattice step D.
Certified excess_periodized(double v, long D);

struct BandlimitedPair {
    double gamma = 0;
    double psi = 0;
    unsigned n = 1;
    long D = 1;      // band limit n^3
    double l = 0;    // gamma - psi
    double r = 0;    // gamma + psi
    double tol = 0;  // certified per-coefficient error bound

    // index k + D holds the coefficient at frequency k, k = -D..D
    std::vector<std::complex<double>> g1;
    std::vector<std::complex<double>> g2;

    // Structurally zero beyond the band: no computation, no storage.
    std::complex<double> coef1(long k) const {
        return (k < -D || k > D) ? std::complex<double>{0, 0} : g1[static_cast<size_t>(k + D)];
    }
    std::complex<double> coef2(long k) const {
        return (k < -D || k > D) ? std::complex<double>{0, 0} : g2[static_cast<size_t>(k + D)];
    }
};

// Builds the pair for the interval [gamma - psi, gamma + psi], degree n^3.
// Throws on tolerance-not-met when the evaluation error cannot be certified
// below `tol`.
BandlimitedPair build_pair(double gamma, double psi, unsigned n, double tol = 1e-8);

// Direct (non-periodized) evaluations.
double eval_g1(const BandlimitedPair& pair, double x);
double eval_g2(const BandlimitedPair& pair, double x);

// Value of sum_{|k|<=D} coef(k) e(k theta); imaginary part is diagnostic.
std::complex<double> trig_series(const std::vector<std::complex<double>>& coefs_minus_to_plus,
                                 double theta);

struct SandwichViolation {
    double x;
    double margin;  // how far past the tolerance the inequality failed
    int side;       // 1 = majorant, 2 = minorant
};

struct SandwichReport {
    std::vector<SandwichViolation> violations;
    std::size_t points_checked = 0;
    bool pass() const { return violations.empty(); }
};

SandwichReport sandwich_check(const BandlimitedPair& pair, const std::vector<double>& grid,
                              double tol = 1e-9);

struct L1Result {
    double d1 = 0;
    double d2 = 0;
    double err = 0;  // certified bound covering quadrature + tail truncation
};

// integral over R of |g_i - indicator|; both equal 1/D up to the reported err.
L1Result l1_distance(const BandlimitedPair& pair, double tol = 1e-5);

}  // namespace dioph::selberg
