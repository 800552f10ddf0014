#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "dioph/rng.hpp"
#include "dioph/selberg.hpp"

using namespace dioph;
using namespace dioph::selberg;

TEST_CASE("polygamma against brute-force sums") {
    for (double x : {0.3, 1.0, 2.5, 7.0, 25.0}) {
        double s1 = 0, s2 = 0;
        const long J = 10000000;
        for (long k = J - 1; k >= 0; --k) {  // ascending magnitude for fp accuracy
            double t = x + static_cast<double>(k);
            s1 += 1.0 / (t * t);
            s2 += -2.0 / (t * t * t);
        }
        // brute tail corrections (integral test)
        double T = x + static_cast<double>(J) - 0.5;
        s1 += 1.0 / T;
        s2 += -1.0 / (T * T);
        CHECK(psi1(x) == doctest::Approx(s1).epsilon(1e-9));
        CHECK(psi2(x) == doctest::Approx(s2).epsilon(1e-9));
    }
    // classical value psi1(1) = pi^2/6
    CHECK(psi1(1.0) == doctest::Approx(M_PI * M_PI / 6).epsilon(1e-13));
}

TEST_CASE("selberg_eval approaches sgn away from zero and majorizes it") {
    auto p = selberg_eval(5.5, 100);
    CHECK(p.value >= 1.0 - p.err);
    CHECK(std::fabs(p.value - 1.0) < 0.01);

    auto m = selberg_eval(-5.5, 100);
    CHECK(m.value >= -1.0 - m.err);
    CHECK(std::fabs(m.value + 1.0) < 0.01);

    // majorant property on a grid
    for (int i = 0; i <= 200; ++i) {
        double x = -10.0 + 20.0 * i / 200.0;
        auto e = selberg_eval(x, 400);
        double sgn = x >= 0 ? 1.0 : -1.0;
        CHECK(e.value + e.err >= sgn);
    }
}

TEST_CASE("series evaluation agrees with the trigamma closed form") {
    for (double x : {0.25, 0.9, 2.3, -1.7, -0.4, 6.9}) {
        auto series = selberg_eval(x, 20000);
        double sgn = x >= 0 ? 1.0 : -1.0;
        double closed = sgn + selberg_excess(x);
        CHECK(std::fabs(series.value - closed) <= series.err + 1e-11);
    }
}

TEST_CASE("excess is nonnegative and integrable-looking") {
    for (double y : {-50.3, -7.7, -0.2, 0.001, 0.5, 3.3, 41.9}) CHECK(selberg_excess(y) >= 0);
    CHECK(selberg_excess(0.0) == 0.0);
    CHECK(selberg_excess(4.0) == 0.0);   // touches sgn at integers
    CHECK(selberg_excess(-3.0) == 0.0);
    CHECK(selberg_excess(100.5) < 1e-3);
}

TEST_CASE("periodized excess matches a long brute-force sum") {
    const long D = 8;
    for (double v : {0.7, 3.2, 5.9, 7.3}) {
        double brute = 0;
        const long J = 300000;
        for (long j = -J; j <= J; ++j)
            brute += selberg_excess(v + static_cast<double>(D * j));
        auto fast = excess_periodized(v, D);
        // brute truncation leaves ~ 2/(pi^2 D^2 J) behind
        CHECK(std::fabs(fast.value - brute) <= fast.err + 1e-6);
    }
}

TEST_CASE("build_pair: zeroth coefficients and band structure") {
    auto pair = build_pair(0.5, 0.1, 2);
    CHECK(pair.D == 8);
    // g1(0) = 2 psi + 1/D, g2(0) = 2 psi - 1/D
    CHECK(pair.coef1(0).real() == doctest::Approx(0.2 + 0.125).epsilon(1e-6));
    CHECK(pair.coef2(0).real() == doctest::Approx(0.2 - 0.125).epsilon(1e-6));
    CHECK(std::fabs(pair.coef1(0).imag()) < 1e-9);
    // beyond the band: structurally zero
    CHECK(pair.coef1(9) == std::complex<double>{0, 0});
    CHECK(pair.coef2(-9) == std::complex<double>{0, 0});
    CHECK(pair.tol <= 1e-8);

    CHECK_THROWS_AS(build_pair(0.5, 0.6, 2), std::domain_error);
    CHECK_THROWS_AS(build_pair(0.5, 0.1, 2, 1e-16), std::runtime_error);
}

TEST_CASE("coefficient bounds and conjugate symmetry over a family") {
    Rng rng(5150);
    for (int trial = 0; trial < 12; ++trial) {
        double gamma = 0.1 + 0.8 * rng.uniform01();
        double psi = 0.02 + 0.38 * rng.uniform01();
        unsigned n = 2 + static_cast<unsigned>(rng.below(3));
        auto pair = build_pair(gamma, psi, n);
        double invD = 1.0 / static_cast<double>(pair.D);
        for (long k = -pair.D; k <= pair.D; ++k) {
            double bound = (k == 0 ? 2 * psi : std::min(1.0 / std::fabs((double)k), 2 * psi)) +
                           invD + pair.tol + 1e-9;
            CHECK(std::abs(pair.coef1(k)) <= bound);
            CHECK(std::abs(pair.coef2(k)) <= bound);
            CHECK(std::abs(pair.coef1(-k) - std::conj(pair.coef1(k))) < 1e-9);
            CHECK(std::abs(pair.coef2(-k) - std::conj(pair.coef2(k))) < 1e-9);
        }
    }
}

TEST_CASE("sandwich holds pointwise and for the periodized Fourier sums") {
    auto pair = build_pair(0.5, 0.1, 2);

    CHECK(eval_g1(pair, 0.5) >= 1.0 - 1e-9);   // interior point
    CHECK(eval_g2(pair, 0.9) <= 1e-9);         // far point

    std::vector<double> grid;
    for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000.0);
    auto rep = sandwich_check(pair, grid, 1e-9);
    CHECK(rep.pass());
    CHECK(rep.points_checked == 1000);

    // periodized: sum g2^(k) e(k t) <= 1_{[l,r]}(t mod 1) <= sum g1^(k) e(k t)
    for (int i = 0; i < 400; ++i) {
        double t = 2.7 * i / 400.0;  // deliberately runs past [0,1]
        double u = t - pair.l;
        u -= std::floor(u);
        double ind = u <= 2 * pair.psi ? 1.0 : 0.0;
        double hi = trig_series(pair.g1, t).real();
        double lo = trig_series(pair.g2, t).real();
        CHECK(hi >= ind - 1e-7);
        CHECK(lo <= ind + 1e-7);
    }
}

TEST_CASE("L1 distance equals 1/D within tolerance") {
    auto p2 = build_pair(0.5, 0.1, 2);
    auto r2 = l1_distance(p2, 1e-5);
    CHECK(std::fabs(r2.d1 - 0.125) <= 1e-4);
    CHECK(std::fabs(r2.d2 - 0.125) <= 1e-4);
    CHECK(r2.d1 >= 0);

    auto p3 = build_pair(0.3, 0.05, 3);
    auto r3 = l1_distance(p3, 1e-5);
    CHECK(std::fabs(r3.d1 - 1.0 / 27) <= 1e-4);
}
