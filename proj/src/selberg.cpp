#include "dioph/selberg.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dioph::selberg {

namespace {

constexpr double kPi = std::numbers::pi;

// (sin pi z / pi)^2
double fejer_factor(double z) {
    double s = std::sin(kPi * z);
    return s * s / (kPi * kPi);
}

// Bernoulli numbers B_2..B_10 for the asymptotic tails.
constexpr double kB[5] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66};

}  // namespace

double psi1(double x) {
    if (!(x > 0)) throw std::domain_error("psi1: argument must be positive");
    double acc = 0;
    while (x < 10) {
        acc += 1.0 / (x * x);
        x += 1;
    }
    double inv = 1.0 / x, inv2 = inv * inv;
    double v = inv + 0.5 * inv2;
    double p = inv * inv2;  // x^{-3}
    for (double b : kB) {
        v += b * p;
        p *= inv2;
    }
    return acc + v;
}

double psi2(double x) {
    if (!(x > 0)) throw std::domain_error("psi2: argument must be positive");
    double acc = 0;
    while (x < 10) {
        acc -= 2.0 / (x * x * x);
        x += 1;
    }
    double inv = 1.0 / x, inv2 = inv * inv;
    double v = -inv2 - inv * inv2;
    double p = inv2 * inv2;  // x^{-4}
    double k = 3;
    for (double b : kB) {
        v -= k * b * p;
        p *= inv2;
        k += 2;
    }
    return acc + v;
}

Certified selberg_eval(double x, unsigned K) {
    if (K < 1) throw std::domain_error("selberg_eval: truncation order must be >= 1");
    const double fk = fejer_factor(x);
    if (x == std::floor(x)) {
        // F interpolates the sign function at the integers (F(0) = 1).
        return {x >= 0 ? 1.0 : -1.0, 0.0};
    }
    double sum = 2.0 / x;
    double largest = std::fabs(sum);
    for (unsigned n = 0; n <= K; ++n) {
        double d = x - static_cast<double>(n);
        double t = 1.0 / (d * d);
        sum += t;
        largest = std::max(largest, t);
        if (n >= 1) {
            double e = x + static_cast<double>(n);
            double u = 1.0 / (e * e);
            sum -= u;
            largest = std::max(largest, u);
        }
    }
    Certified out;
    out.value = fk * sum;
    double tail;
    double kk = static_cast<double>(K);
    if (kk > std::fabs(x) + 1) {
        tail = 1.0 / (kk - std::fabs(x)) + 1.0 / (kk + std::fabs(x));
    } else {
        tail = 2.0;  // truncation too short to certify anything sharper
    }
    // series tail + a conservative floating-point slop for the summation
    out.err = fk * tail + largest * fk * static_cast<double>(K) * 1e-16 + 1e-13;
    return out;
}

double selberg_excess(double y) {
    if (y == 0) return 0;  // sgn(0) = +1 convention, F(0) = 1
    double a = std::fabs(y);
    if (a == std::floor(a)) return 0;  // touches sgn at the integers
    double fk = fejer_factor(a);
    if (y > 0) return 2 * fk * (1.0 / a - psi1(a + 1));
    return 2 * fk * (psi1(a) - 1.0 / a);
}

Certified excess_periodized(double v, long D) {
    if (D < 1) throw std::domain_error("excess_periodized: D must be >= 1");
    const double dd = static_cast<double>(D);
    double vm = std::fmod(v, dd);
    if (vm < 0) vm += dd;
    if (vm == 0) {
        // jump point of the periodization; report the upper one-sided value
        return {2.0, 1e-9};
    }
    const double s = fejer_factor(vm);  // constant across the integer lattice

    const int J = 40;
    double pos = 0, neg = 0;
    for (int j = 0; j < J; ++j) {
        double y = vm + dd * j;
        pos += 1.0 / y - psi1(y + 1);
        double w = dd * (j + 1) - vm;
        neg += psi1(w) - 1.0 / w;
    }
    // polygamma closed forms for the lattice tails:
    //   sum_{j>=J} (v + D j)^{-2} = D^{-2} psi1(J + v/D)
    //   sum_{j>=J} (v + D j)^{-3} = -D^{-3} psi2(J + v/D) / 2
    auto tail = [&](double a, bool plus_side) {
        double s2 = psi1(a) / (dd * dd);
        double s3 = -psi2(a) / (2 * dd * dd * dd);
        // sum_{k>=0} (a+k)^{-5} <= a^{-5} + 1/(4 a^4), scaled by D^{-5}
        double s5b = (std::pow(a, -5.0) + 1.0 / (4 * std::pow(a, 4.0))) / std::pow(dd, 5.0);
        Certified t;
        t.value = 0.5 * s2 + (plus_side ? -1.0 : 1.0) * s3 / 6.0;
        t.err = s5b / 20.0;
        return t;
    };
    Certified tp = tail(static_cast<double>(J) + vm / dd, true);
    Certified tn = tail(static_cast<double>(J + 1) - vm / dd, false);

    Certified out;
    out.value = 2 * s * (pos + tp.value + neg + tn.value);
    out.err = 2 * s * (tp.err + tn.err) + 1e-12 * (1 + std::fabs(out.value)) + 1e-13 * J;
    return out;
}

namespace {

double frac(double x) {
    double f = x - std::floor(x);
    return f;
}

// periodized indicator of [l, l + len] mod 1, len < 1
double indicator_periodized(double x, double l, double len) {
    return frac(x - l) <= len ? 1.0 : 0.0;
}

}  // namespace

BandlimitedPair build_pair(double gamma, double psi, unsigned n, double tol) {
    if (!(psi > 0 && psi < 0.5)) throw std::domain_error("build_pair: need 0 < psi < 1/2");
    if (n < 1) throw std::domain_error("build_pair: need n >= 1");
    BandlimitedPair pair;
    pair.gamma = gamma;
    pair.psi = psi;
    pair.n = n;
    pair.D = static_cast<long>(n) * n * n;
    pair.l = gamma - psi;
    pair.r = gamma + psi;

    const long D = pair.D;
    const long M = 2 * D + 2;  // >= 2D+1 samples: degree-D coefficients are exact
    const double dd = static_cast<double>(D);

    // Sampling offset keeping every R-argument away from its lattice jump.
    double best_theta = 0.5, best_clear = -1;
    for (double theta : {0.5, 0.381966011250105, 0.267949192431123, 0.135623730950488}) {
        double clear = 1e300;
        for (long t = 0; t < M; ++t) {
            double x = (static_cast<double>(t) + theta) / static_cast<double>(M);
            for (double v : {dd * (x - pair.l), dd * (pair.r - x)}) {
                double m = std::fmod(v, dd);
                if (m < 0) m += dd;
                clear = std::min(clear, std::min(m, dd - m));
            }
        }
        if (clear > best_clear) {
            best_clear = clear;
            best_theta = theta;
        }
    }

    std::vector<double> G1(M), G2(M);
    double worst_err = 0;
    for (long t = 0; t < M; ++t) {
        double x = (static_cast<double>(t) + best_theta) / static_cast<double>(M);
        double ind = indicator_periodized(x, pair.l, 2 * psi);
        Certified a1 = excess_periodized(dd * (x - pair.l), D);
        Certified b1 = excess_periodized(dd * (pair.r - x), D);
        Certified a2 = excess_periodized(-dd * (x - pair.l), D);
        Certified b2 = excess_periodized(-dd * (pair.r - x), D);
        G1[t] = ind + 0.5 * (a1.value + b1.value);
        G2[t] = ind - 0.5 * (a2.value + b2.value);
        worst_err = std::max(worst_err, 0.5 * (a1.err + b1.err));
        worst_err = std::max(worst_err, 0.5 * (a2.err + b2.err));
    }
    pair.tol = worst_err + 1e-12;
    if (pair.tol > tol)
        throw std::runtime_error("build_pair: tolerance-not-met for the requested bound");

    pair.g1.assign(static_cast<size_t>(2 * D + 1), {0, 0});
    pair.g2.assign(static_cast<size_t>(2 * D + 1), {0, 0});
    for (long k = -D; k <= D; ++k) {
        std::complex<double> c1{0, 0}, c2{0, 0};
        for (long t = 0; t < M; ++t) {
            double x = (static_cast<double>(t) + best_theta) / static_cast<double>(M);
            double ang = -2 * kPi * static_cast<double>(k) * x;
            std::complex<double> e{std::cos(ang), std::sin(ang)};
            c1 += G1[t] * e;
            c2 += G2[t] * e;
        }
        pair.g1[static_cast<size_t>(k + D)] = c1 / static_cast<double>(M);
        pair.g2[static_cast<size_t>(k + D)] = c2 / static_cast<double>(M);
    }
    return pair;
}

double eval_g1(const BandlimitedPair& pair, double x) {
    double dd = static_cast<double>(pair.D);
    double ind = (x >= pair.l && x <= pair.r) ? 1.0 : 0.0;
    return ind + 0.5 * (selberg_excess(dd * (x - pair.l)) + selberg_excess(dd * (pair.r - x)));
}

double eval_g2(const BandlimitedPair& pair, double x) {
    double dd = static_cast<double>(pair.D);
    double ind = (x > pair.l && x < pair.r) ? 1.0 : 0.0;
    return ind - 0.5 * (selberg_excess(dd * (pair.l - x)) + selberg_excess(dd * (x - pair.r)));
}

std::complex<double> trig_series(const std::vector<std::complex<double>>& coefs, double theta) {
    const long D = (static_cast<long>(coefs.size()) - 1) / 2;
    std::complex<double> acc{0, 0};
    for (long k = -D; k <= D; ++k) {
        double ang = 2 * kPi * static_cast<double>(k) * theta;
        acc += coefs[static_cast<size_t>(k + D)] * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    return acc;
}

SandwichReport sandwich_check(const BandlimitedPair& pair, const std::vector<double>& grid,
                              double tol) {
    SandwichReport rep;
    rep.points_checked = grid.size();
    for (double x : grid) {
        double ind = (x >= pair.l && x <= pair.r) ? 1.0 : 0.0;
        double hi = eval_g1(pair, x);
        double lo = eval_g2(pair, x);
        if (hi < ind - tol) rep.violations.push_back({x, ind - tol - hi, 1});
        if (lo > ind + tol) rep.violations.push_back({x, lo - ind - tol, 2});
    }
    return rep;
}

namespace {

// adaptive Simpson for the smooth positive excess
double simpson(double fa, double fm, double fb, double h) { return h * (fa + 4 * fm + fb) / 6; }

double adapt(double (*f)(double), double a, double m, double b, double fa, double fm, double fb,
             double whole, double tol, int depth, double* err_out) {
    double lm = (a + m) / 2, rm = (m + b) / 2;
    double flm = f(lm), frm = f(rm);
    double left = simpson(fa, flm, fm, m - a);
    double right = simpson(fm, frm, fb, b - m);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15 * tol) {
        *err_out += std::fabs(delta) / 15 + tol;
        return left + right + delta / 15;
    }
    return adapt(f, a, lm, m, fa, flm, fm, left, tol / 2, depth - 1, err_out) +
           adapt(f, m, rm, b, fm, frm, fb, right, tol / 2, depth - 1, err_out);
}

double integrate_excess(double a, double b, double tol, double* err_out) {
    // panel per unit interval: the integrand oscillates with period 1
    double total = 0;
    long panels = std::max(1L, static_cast<long>(std::ceil(b - a)));
    double w = (b - a) / static_cast<double>(panels);
    for (long i = 0; i < panels; ++i) {
        double pa = a + w * static_cast<double>(i);
        double pb = pa + w;
        double pm = (pa + pb) / 2;
        double fa = selberg_excess(pa), fm = selberg_excess(pm), fb = selberg_excess(pb);
        total += adapt(&selberg_excess, pa, pm, pb, fa, fm, fb, simpson(fa, fm, fb, pb - pa),
                       tol / static_cast<double>(panels), 30, err_out);
    }
    return total;
}

}  // namespace

L1Result l1_distance(const BandlimitedPair& pair, double tol) {
    // |g_i - 1_{[l,r]}| integrates to (1/D) * integral of the excess R, for
    // both the majorant and the minorant.
    const double dd = static_cast<double>(pair.D);
    // choose T so the R-tail beyond it stays under half the error budget:
    // R(u) <= 2/(pi^2) * 0.62/u^2 for |u| >= 3.
    double budget = tol * dd;  // error allowed on integral of R
    double T = std::max(8.0, 4 * 0.62 / (kPi * kPi) / (budget / 2));
    double err = 4 * 0.62 / (kPi * kPi) / T;  // tail both sides
    double quad = integrate_excess(-T, T, budget / 4, &err);
    L1Result out;
    out.d1 = quad / dd;
    out.d2 = quad / dd;
    out.err = err / dd;
    if (out.err > tol) throw std::runtime_error("l1_distance: tolerance-not-met");
    return out;
}

}  // namespace dioph::selberg
