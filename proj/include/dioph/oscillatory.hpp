#pragma once

// Numerical verifiers for van der Corput-type estimates on a closed-form
// phase registry.  Derivative bounds are certified by interval evaluation
// before any bound is asserted; quadrature is Gauss-Legendre on panels short
// enough that the phase advances by a bounded amount per panel.

#include "dioph/big.hpp"
#include "dioph/kaufman.hpp"

#include <complex>
#include <string>
#include <vector>

namespace dioph::osc {

// Phases f on [0,1] with closed-form first and second derivatives:
//   Linear:     f = a x + b
//   Quadratic:  f = a x^2 + b x          (a > 0)
//   MoebiusDiff: f = xi [ (p x + p')/(q x + q') - (p1 x + p1')/(q1 x + q1') ]
// with unimodular integer coefficient pairs, as arise from continued-fraction
// convergent maps of equal parity.
struct PhaseSpec {
    enum class Kind { Linear, Quadratic, MoebiusDiff };
    Kind kind = Kind::Linear;
    double a = 1, b = 0;
    double xi = 0;
    long p = 0, pp = 1, q = 1, qp = 0;      // first map (p x + p')/(q x + q')
    long p1 = 0, pp1 = 1, q1 = 1, qp1 = 0;  // second map

    static PhaseSpec linear(double a, double b = 0);
    static PhaseSpec quadratic(double a, double b = 0);
    static PhaseSpec moebius_diff(double xi, long p, long pp, long q, long qp, long p1, long pp1,
                                  long q1, long qp1);

    double eval(double x) const;
    double deriv(double x) const;
    // certified range of f' over [lo, hi] (outer enclosure)
    void deriv_range(double lo, double hi, double& out_lo, double& out_hi) const;
};

// Certified hypothesis constants for the two oscillation lemmas.  The
// nonstationary bound reads |f'| and |f''| directly; the linear-factor bound
// reads the g in f' = (C1 x + C2) g(x), a different pair of constants.
struct PhaseBounds {
    bool nonstationary_ok = false;  // |f'| >= A > 0 on [0,1]
    double A = 0;                   // lower bound on |f'|
    double B = 0;                   // upper bound on |f''|
    bool stationary_form = false;   // f' = (C1 x + C2) g(x) available
    double C1 = 0;
    double C2 = 0;
    double g_A = 0;                 // lower bound on |g|
    double g_B = 0;                 // upper bound on |g'| (g_B >= g_A required)
};

PhaseBounds certify(const PhaseSpec& f);

struct Quadrature {
    std::complex<double> value;
    double err = 0;  // reported bound on |value - integral|
};

// integral over [0,1] of e(f(x)) dx with oscillation-aware adaptive panels.
Quadrature osc_integral(const PhaseSpec& f, double tol = 1e-8);

struct BoundReport {
    std::string lemma;
    double lhs = 0;
    double rhs = 0;
    double margin = 0;  // rhs + tol - lhs, negative on violation
    bool violated = false;
    PhaseBounds certified;
    double tol = 0;
};

// |integral of e(f)| <= 1/A + B/A^2.
BoundReport check_nonstationary(const PhaseSpec& f, double tol = 1e-8);

// |integral of e(f)| <= 6 B / (A^{3/2} C1^{1/2}) for f' = (C1 x + C2) g.
BoundReport check_stationary(const PhaseSpec& f, double tol = 1e-8);

// --- comparison lemma -------------------------------------------------------

// |F| <= 1 with |F'| <= M; the integral of |F| against a measure is compared
// with 2r + Lambda(r/M) (1 + m2 M / r^3).  F is either the constant 1 or the
// real oscillation cos(2 pi theta(x)); in the latter case m2 comes from
// certified quadrature of the doubled phase.
struct ComparisonSpec {
    enum class FKind { One, CosPhase };
    FKind fkind = FKind::One;
    PhaseSpec theta;
    double M = 1;   // certified bound on |F'|
    double m2 = 1;
    double m2_err = 0;

    double F(double x) const;
};

ComparisonSpec comparison_one();
ComparisonSpec comparison_cos_phase(const PhaseSpec& theta, double quad_tol = 1e-8);

struct MeasureHandle {
    enum class Kind { Lebesgue, Scheme };
    Kind kind = Kind::Lebesgue;
    const kaufman::CantorScheme* scheme = nullptr;
    kaufman::TreeEnumeration tree;  // supports the modulus-of-mass envelope
    std::size_t mc_samples = 20000;
    std::uint64_t seed = 7;
    Int target_q = Int(1000000);

    static MeasureHandle lebesgue();
    static MeasureHandle from_scheme(const kaufman::CantorScheme& scheme, std::size_t tree_budget,
                                     std::size_t mc_samples, std::uint64_t seed);

    double lambda(double h) const;  // conservative upper envelope
};

BoundReport check_comparison(const ComparisonSpec& spec, const MeasureHandle& mu, double r,
                             double tol = 1e-6);

}  // namespace dioph::osc
