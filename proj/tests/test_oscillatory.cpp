#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "dioph/cf.hpp"
#include "dioph/oscillatory.hpp"
#include "dioph/rng.hpp"

using namespace dioph;
using namespace dioph::osc;

namespace {

// closed form: integral over [0,1] of e(a x + b) dx
std::complex<double> linear_closed(double a, double b) {
    if (a == 0) return std::polar(1.0, 2 * M_PI * b);
    std::complex<double> num = std::polar(1.0, 2 * M_PI * (a + b)) - std::polar(1.0, 2 * M_PI * b);
    return num / std::complex<double>{0, 2 * M_PI * a};
}

kaufman::CantorScheme desk_scheme() {
    kaufman::BlockParams bp;
    bp.N = 3;
    bp.m = 1;
    bp.j0 = 2;
    bp.eps = make_rat(13, 20);
    auto dist = kaufman::build_block_distribution(bp);
    auto good = kaufman::build_good_set(dist, bp.j0, make_rat(124, 125));
    return kaufman::build_scheme(std::move(dist), std::move(good), Rat(1),
                                 kaufman::ScheduleSpec::desk_arithmetic(1));
}

}  // namespace

TEST_CASE("oscillatory quadrature against linear closed forms") {
    auto z = osc_integral(PhaseSpec::linear(10), 1e-9);
    CHECK(std::abs(z.value) <= z.err + 1e-9);  // integer frequency: exactly zero

    auto one = osc_integral(PhaseSpec::linear(0), 1e-9);
    CHECK(std::abs(one.value - 1.0) <= one.err + 1e-12);

    auto half = osc_integral(PhaseSpec::linear(0.5), 1e-9);
    CHECK(std::abs(half.value) == doctest::Approx(2 / M_PI).epsilon(1e-8));

    Rng rng(31337);
    for (int i = 0; i < 200; ++i) {
        double a = (rng.uniform01() - 0.5) * 100;
        double b = rng.uniform01();
        auto got = osc_integral(PhaseSpec::linear(a, b), 1e-8);
        double true_err = std::abs(got.value - linear_closed(a, b));
        CHECK(true_err <= got.err + 1e-12);  // reported error is sound
        CHECK(std::abs(got.value) <= 1 + got.err);
    }
}

TEST_CASE("nonstationary-phase bound") {
    auto r1 = check_nonstationary(PhaseSpec::linear(10), 1e-9);
    CHECK_FALSE(r1.violated);
    CHECK(r1.rhs == doctest::Approx(0.1));
    CHECK(r1.lhs <= 1e-8);

    // f = 10x + x^2/100: A >= 10, B = 0.02
    auto r2 = check_nonstationary(PhaseSpec::quadratic(0.01, 10), 1e-9);
    CHECK_FALSE(r2.violated);
    CHECK(r2.certified.A >= 10.0);
    CHECK(r2.certified.B == doctest::Approx(0.02));
    CHECK(r2.rhs <= 0.1002 + 1e-9);

    auto r3 = check_nonstationary(PhaseSpec::linear(1000), 1e-9);
    CHECK_FALSE(r3.violated);
    CHECK(r3.rhs == doctest::Approx(0.001));
    CHECK(r3.lhs <= 0.001 + 1e-6);

    // stationary point inside [0,1]: no certified floor on |f'|
    CHECK_THROWS_AS(check_nonstationary(PhaseSpec::quadratic(10), 1e-8), std::domain_error);
}

TEST_CASE("stationary-phase bound on the fresnel-type integral") {
    auto rep = check_stationary(PhaseSpec::quadratic(10), 1e-9);
    CHECK_FALSE(rep.violated);
    CHECK(rep.rhs == doctest::Approx(6.0 / std::sqrt(20.0)));
    // |C + iS|(2 sqrt 10) / (2 sqrt 10) with the fresnel asymptotics at
    // t^2 = 40: C ~ 1/2, S ~ 1/2 - 1/(pi t)
    CHECK(rep.lhs == doctest::Approx(0.10632).epsilon(0.001));
    CHECK(rep.lhs <= rep.rhs);

    // tiny quadratic: bound exceeds 1, trivially satisfied
    auto small = check_stationary(PhaseSpec::quadratic(0.01), 1e-9);
    CHECK_FALSE(small.violated);
    CHECK(small.rhs >= 1.0);
}

TEST_CASE("moebius-difference phases from convergent pairs never violate") {
    Rng rng(777);
    int checked_stationary = 0, checked_nonstationary = 0;
    for (int trial = 0; trial < 50; ++trial) {
        cf::Word w1, w2;
        unsigned len = 2 + static_cast<unsigned>(rng.below(3));
        for (unsigned i = 0; i < len; ++i) {
            w1.push(Int(1 + rng.below(4)));
            w2.push(Int(1 + rng.below(4)));
        }
        if (w1.qn() == w2.qn() && w1.q_prev() == w2.q_prev()) continue;
        const cf::Word& lo = w1.qn() <= w2.qn() ? w1 : w2;
        const cf::Word& hi = w1.qn() <= w2.qn() ? w2 : w1;
        double xi = 10 + rng.uniform01() * 1000;
        auto f = PhaseSpec::moebius_diff(
            xi, lo.pn().get_si(), lo.p_prev().get_si(), lo.qn().get_si(), lo.q_prev().get_si(),
            hi.pn().get_si(), hi.p_prev().get_si(), hi.qn().get_si(), hi.q_prev().get_si());
        auto pb = certify(f);
        if (pb.nonstationary_ok) {
            auto rep = check_nonstationary(f, 1e-8);
            CHECK_FALSE(rep.violated);
            ++checked_nonstationary;
        }
        if (pb.stationary_form && pb.g_B >= pb.g_A && pb.g_A > 0) {
            auto rep = check_stationary(f, 1e-8);
            CHECK_FALSE(rep.violated);
            ++checked_stationary;
        }
    }
    CHECK(checked_nonstationary + checked_stationary >= 40);
}

TEST_CASE("comparison lemma: trivial and lebesgue cases") {
    auto one = comparison_one();
    auto leb = MeasureHandle::lebesgue();
    auto rep = check_comparison(one, leb, 0.5, 1e-9);
    CHECK_FALSE(rep.violated);
    CHECK(rep.lhs == 1.0);
    CHECK(rep.rhs >= 1.0);  // rhs >= 2r = 1 alone

    // F = cos(2 pi K x): integral of |F| over [0,1] is 2/pi
    auto cosph = comparison_cos_phase(PhaseSpec::linear(5), 1e-9);
    CHECK(cosph.m2 == doctest::Approx(0.5).epsilon(1e-7));
    for (double r : {0.1, 0.01}) {
        auto rr = check_comparison(cosph, leb, r, 1e-6);
        CHECK_FALSE(rr.violated);
        CHECK(rr.lhs == doctest::Approx(2 / M_PI).epsilon(1e-3));
    }
}

TEST_CASE("comparison lemma against the scheme measure") {
    auto sch = desk_scheme();
    auto mu = MeasureHandle::from_scheme(sch, 20000, 4000, 99);
    CHECK(mu.lambda(1.0) == doctest::Approx(1.0));
    CHECK(mu.lambda(1e-5) < mu.lambda(1e-2));

    auto w1 = sample_mu(sch, 5, Int(1000)).word;
    auto w2 = sample_mu(sch, 6, Int(1000)).word;
    // trim to equal parity
    while (w1.size() > w2.size()) w1.pop();
    while (w2.size() > w1.size()) w2.pop();
    if (w1.qn() != w2.qn() || w1.q_prev() != w2.q_prev()) {
        const cf::Word& lo = w1.qn() <= w2.qn() ? w1 : w2;
        const cf::Word& hi = w1.qn() <= w2.qn() ? w2 : w1;
        auto theta = PhaseSpec::moebius_diff(
            500, lo.pn().get_si(), lo.p_prev().get_si(), lo.qn().get_si(), lo.q_prev().get_si(),
            hi.pn().get_si(), hi.p_prev().get_si(), hi.qn().get_si(), hi.q_prev().get_si());
        auto spec = comparison_cos_phase(theta, 1e-8);
        for (double r : {0.1, 0.05, 0.02}) {
            auto rep = check_comparison(spec, mu, r, 1e-6);
            CHECK_FALSE(rep.violated);
            CHECK(rep.lhs <= 1.0 + 1e-9);
        }
    }
}
