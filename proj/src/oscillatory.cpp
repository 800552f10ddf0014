#include "dioph/oscillatory.hpp"

#include "dioph/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dioph::osc {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration.
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

GaussRule make_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1);
            double step = p1 / dp;
            t -= step;
            if (std::fabs(step) < 1e-15) break;
        }
        double p0 = 1, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1);
        r.x[i] = t;
        r.w[i] = 2 / ((1 - t * t) * dp * dp);
    }
    return r;
}

const GaussRule& rule7() {
    static GaussRule r = make_rule(7);
    return r;
}
const GaussRule& rule15() {
    static GaussRule r = make_rule(15);
    return r;
}

std::complex<double> panel_gl(const PhaseSpec& f, double a, double b, const GaussRule& g) {
    std::complex<double> acc{0, 0};
    double mid = (a + b) / 2, half = (b - a) / 2;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        double x = mid + half * g.x[i];
        double ph = kTwoPi * f.eval(x);
        acc += g.w[i] * std::complex<double>{std::cos(ph), std::sin(ph)};
    }
    return acc * half;
}

}  // namespace

PhaseSpec PhaseSpec::linear(double a, double b) {
    PhaseSpec f;
    f.kind = Kind::Linear;
    f.a = a;
    f.b = b;
    return f;
}

PhaseSpec PhaseSpec::quadratic(double a, double b) {
    if (!(a > 0)) throw std::domain_error("quadratic phase needs a > 0");
    PhaseSpec f;
    f.kind = Kind::Quadratic;
    f.a = a;
    f.b = b;
    return f;
}

PhaseSpec PhaseSpec::moebius_diff(double xi, long p, long pp, long q, long qp, long p1, long pp1,
                                  long q1, long qp1) {
    if (q <= 0 || q1 <= 0 || qp < 0 || qp1 < 0)
        throw std::domain_error("moebius maps need positive denominators on [0,1]");
    long det0 = p * qp - pp * q;
    long det1 = p1 * qp1 - pp1 * q1;
    if (std::abs(det0) != 1 || std::abs(det1) != 1 || det0 != det1)
        throw std::domain_error("moebius pair must be unimodular with equal parity");
    PhaseSpec f;
    f.kind = Kind::MoebiusDiff;
    f.xi = xi;
    f.p = p;
    f.pp = pp;
    f.q = q;
    f.qp = qp;
    f.p1 = p1;
    f.pp1 = pp1;
    f.q1 = q1;
    f.qp1 = qp1;
    return f;
}

double PhaseSpec::eval(double x) const {
    switch (kind) {
        case Kind::Linear: return a * x + b;
        case Kind::Quadratic: return a * x * x + b * x;
        case Kind::MoebiusDiff: {
            double m0 = (static_cast<double>(p) * x + static_cast<double>(pp)) /
                        (static_cast<double>(q) * x + static_cast<double>(qp));
            double m1 = (static_cast<double>(p1) * x + static_cast<double>(pp1)) /
                        (static_cast<double>(q1) * x + static_cast<double>(qp1));
            return xi * (m0 - m1);
        }
    }
    throw std::logic_error("unreachable");
}

double PhaseSpec::deriv(double x) const {
    switch (kind) {
        case Kind::Linear: return a;
        case Kind::Quadratic: return 2 * a * x + b;
        case Kind::MoebiusDiff: {
            double det = static_cast<double>(p * qp - pp * q);
            double d0 = static_cast<double>(q) * x + static_cast<double>(qp);
            double d1 = static_cast<double>(q1) * x + static_cast<double>(qp1);
            return xi * det * (1 / (d0 * d0) - 1 / (d1 * d1));
        }
    }
    throw std::logic_error("unreachable");
}

void PhaseSpec::deriv_range(double lo, double hi, double& out_lo, double& out_hi) const {
    switch (kind) {
        case Kind::Linear:
            out_lo = out_hi = a;
            return;
        case Kind::Quadratic: {
            double v0 = 2 * a * lo + b, v1 = 2 * a * hi + b;
            out_lo = std::min(v0, v1);
            out_hi = std::max(v0, v1);
            return;
        }
        case Kind::MoebiusDiff: {
            // det/(qx+q')^2 is monotone in x; take both endpoints of each term
            double det = static_cast<double>(p * qp - pp * q);
            auto term = [&](double qq, double qqp, double x) {
                double d = qq * x + qqp;
                return det * xi / (d * d);
            };
            double a0 = term(static_cast<double>(q), static_cast<double>(qp), lo);
            double a1 = term(static_cast<double>(q), static_cast<double>(qp), hi);
            double b0 = term(static_cast<double>(q1), static_cast<double>(qp1), lo);
            double b1 = term(static_cast<double>(q1), static_cast<double>(qp1), hi);
            out_lo = std::min(a0, a1) - std::max(b0, b1);
            out_hi = std::max(a0, a1) - std::min(b0, b1);
            return;
        }
    }
    throw std::logic_error("unreachable");
}

PhaseBounds certify(const PhaseSpec& f) {
    PhaseBounds pb;
    switch (f.kind) {
        case PhaseSpec::Kind::Linear: {
            pb.nonstationary_ok = f.a != 0;
            pb.A = std::fabs(f.a);
            pb.B = 0;
            return pb;
        }
        case PhaseSpec::Kind::Quadratic: {
            double dlo, dhi;
            f.deriv_range(0, 1, dlo, dhi);
            if (dlo > 0 || dhi < 0) {
                pb.nonstationary_ok = true;
                pb.A = std::min(std::fabs(dlo), std::fabs(dhi));
            }
            pb.B = 2 * f.a;
            // f' = (2a x + b) * 1: the linear-factor form with g == 1
            pb.stationary_form = true;
            pb.C1 = 2 * f.a;
            pb.C2 = f.b;
            pb.g_A = 1;
            pb.g_B = 1;
            return pb;
        }
        case PhaseSpec::Kind::MoebiusDiff: {
            double dlo, dhi;
            f.deriv_range(0, 1, dlo, dhi);
            // |f''| <= 2 |xi| (q/d0^3 + q1/d1^3) with d >= min over [0,1]
            auto sec = [&](double qq, double qqp) {
                double dmin = std::min(qqp, qq + qqp);
                if (dmin <= 0) dmin = 1;
                return 2 * std::fabs(f.xi) * qq / (dmin * dmin * dmin);
            };
            pb.B = sec(static_cast<double>(f.q), static_cast<double>(f.qp)) +
                   sec(static_cast<double>(f.q1), static_cast<double>(f.qp1));
            if (dlo > 0 || dhi < 0) {
                pb.nonstationary_ok = true;
                pb.A = std::min(std::fabs(dlo), std::fabs(dhi));
            }
            // linear-factor form: f' = g(x) (C1 x + C2) with
            // g = det xi ((q+q1)x + q'+q1') / (d0^2 d1^2)
            double C1 = static_cast<double>(f.q1 - f.q);
            double C2 = static_cast<double>(f.qp1 - f.qp);
            if (C1 > 0) {
                pb.stationary_form = true;
                pb.C1 = C1;
                pb.C2 = C2;
                double nlo = static_cast<double>(f.qp + f.qp1);
                double nhi = static_cast<double>(f.q + f.q1 + f.qp + f.qp1);
                double d0min = std::max(1.0, std::min<double>(f.qp, f.q + f.qp));
                double d1min = std::max(1.0, std::min<double>(f.qp1, f.q1 + f.qp1));
                double d0max = std::max<double>(f.qp, f.q + f.qp);
                double d1max = std::max<double>(f.qp1, f.q1 + f.qp1);
                double Dmin = d0min * d0min * d1min * d1min;
                double Dmax = d0max * d0max * d1max * d1max;
                pb.g_A = std::fabs(f.xi) * nlo / Dmax;
                // |g'| <= |xi| (N' Dmax + Nmax D'max) / Dmin^2
                double dprime_max = 2 * static_cast<double>(f.q) * d0max * d1max * d1max +
                                    2 * static_cast<double>(f.q1) * d1max * d0max * d0max;
                double gp = std::fabs(f.xi) *
                            (static_cast<double>(f.q + f.q1) * Dmax + nhi * dprime_max) /
                            (Dmin * Dmin);
                pb.g_B = gp;
            }
            return pb;
        }
    }
    throw std::logic_error("unreachable");
}

Quadrature osc_integral(const PhaseSpec& f, double tol) {
    if (!(tol > 0)) throw std::domain_error("osc_integral: tol must be positive");
    // initial panels limited to a fixed phase advance
    struct Panel {
        double a, b;
        std::complex<double> coarse;
    };
    std::vector<Panel> work;
    double x0 = 0;
    while (x0 < 1) {
        double dlo, dhi;
        f.deriv_range(x0, std::min(1.0, x0 + 0.125), dlo, dhi);
        double slope = std::max(std::fabs(dlo), std::fabs(dhi));
        double w = slope > 0 ? 0.5 / slope : 0.125;
        w = std::clamp(w, 1e-7, 0.125);
        double x1 = std::min(1.0, x0 + w);
        work.push_back({x0, x1, panel_gl(f, x0, x1, rule7())});
        x0 = x1;
    }
    Quadrature out;
    double budget_per = tol / static_cast<double>(work.size());
    std::size_t guard = 0;
    while (!work.empty()) {
        if (++guard > 2'000'000) throw std::runtime_error("osc_integral: tolerance-not-met");
        Panel p = work.back();
        work.pop_back();
        std::complex<double> fine = panel_gl(f, p.a, p.b, rule15());
        double delta = std::abs(fine - p.coarse);
        if (delta <= budget_per || (p.b - p.a) < 1e-12) {
            out.value += fine;
            out.err += delta + 1e-15;
        } else {
            double mid = (p.a + p.b) / 2;
            work.push_back({p.a, mid, panel_gl(f, p.a, mid, rule7())});
            work.push_back({mid, p.b, panel_gl(f, mid, p.b, rule7())});
        }
    }
    // |integral of a unit-modulus integrand| <= 1 always
    if (std::abs(out.value) > 1 + out.err + 1e-12)
        throw std::runtime_error("osc_integral: unit-modulus invariant broken");
    return out;
}

BoundReport check_nonstationary(const PhaseSpec& f, double tol) {
    PhaseBounds pb = certify(f);
    if (!pb.nonstationary_ok || !(pb.A > 0))
        throw std::domain_error("check_nonstationary: |f'| has no certified positive floor");
    Quadrature qd = osc_integral(f, tol);
    BoundReport rep;
    rep.lemma = "nonstationary-phase";
    rep.certified = pb;
    rep.tol = tol + qd.err;
    rep.lhs = std::abs(qd.value);
    rep.rhs = 1 / pb.A + pb.B / (pb.A * pb.A);
    rep.margin = rep.rhs + rep.tol - rep.lhs;
    rep.violated = rep.margin < 0;
    return rep;
}

BoundReport check_stationary(const PhaseSpec& f, double tol) {
    PhaseBounds pb = certify(f);
    if (!pb.stationary_form || !(pb.C1 > 0))
        throw std::domain_error("check_stationary: no certified linear-factor form with C1 > 0");
    if (!(pb.g_B >= pb.g_A) || !(pb.g_A > 0))
        throw std::domain_error("check_stationary: hypothesis B >= A > 0 not certified for g");
    Quadrature qd = osc_integral(f, tol);
    BoundReport rep;
    rep.lemma = "stationary-phase";
    rep.certified = pb;
    rep.tol = tol + qd.err;
    rep.lhs = std::abs(qd.value);
    rep.rhs = 6 * pb.g_B / (std::pow(pb.g_A, 1.5) * std::sqrt(pb.C1));
    rep.margin = rep.rhs + rep.tol - rep.lhs;
    rep.violated = rep.margin < 0;
    return rep;
}

double ComparisonSpec::F(double x) const {
    return fkind == FKind::One ? 1.0 : std::cos(kTwoPi * theta.eval(x));
}

ComparisonSpec comparison_one() { return ComparisonSpec{}; }

ComparisonSpec comparison_cos_phase(const PhaseSpec& theta, double quad_tol) {
    ComparisonSpec cs;
    cs.fkind = ComparisonSpec::FKind::CosPhase;
    cs.theta = theta;
    double dlo, dhi;
    theta.deriv_range(0, 1, dlo, dhi);
    cs.M = kTwoPi * std::max(std::fabs(dlo), std::fabs(dhi));
    if (cs.M == 0) cs.M = 1e-12;
    // cos^2(2 pi t) = 1/2 + cos(4 pi t)/2: m2 via the doubled phase
    PhaseSpec doubled = theta;
    switch (theta.kind) {
        case PhaseSpec::Kind::Linear:
        case PhaseSpec::Kind::Quadratic:
            doubled.a = 2 * theta.a;
            doubled.b = 2 * theta.b;
            break;
        case PhaseSpec::Kind::MoebiusDiff: doubled.xi = 2 * theta.xi; break;
    }
    Quadrature qd = osc_integral(doubled, quad_tol);
    cs.m2 = 0.5 + 0.5 * qd.value.real();
    cs.m2_err = 0.5 * qd.err;
    return cs;
}

MeasureHandle MeasureHandle::lebesgue() {
    MeasureHandle m;
    m.kind = Kind::Lebesgue;
    return m;
}

MeasureHandle MeasureHandle::from_scheme(const kaufman::CantorScheme& scheme,
                                         std::size_t tree_budget, std::size_t mc_samples,
                                         std::uint64_t seed) {
    MeasureHandle m;
    m.kind = Kind::Scheme;
    m.scheme = &scheme;
    m.tree = kaufman::enumerate_tree(scheme, tree_budget, kaufman::ExpandOrder::BreadthFirst);
    m.mc_samples = mc_samples;
    m.seed = seed;
    return m;
}

double MeasureHandle::lambda(double h) const {
    if (h >= 1) return 1;
    if (h <= 0) return 0;
    if (kind == Kind::Lebesgue) return h;
    return kaufman::lambda_upper(tree, h);
}

namespace {

// adaptive Simpson of |F| on [0,1]; kinks at the zeros of F are handled by
// refinement, with the residual folded into the reported error
double integrate_abs_F(const ComparisonSpec& spec, double tol, double* err_out) {
    struct Seg {
        double a, b, fa, fm, fb, whole;
    };
    auto simpson = [&](double fa, double fm, double fb, double h) {
        return h * (fa + 4 * fm + fb) / 6;
    };
    std::vector<Seg> work;
    const int initial = 64;
    for (int i = 0; i < initial; ++i) {
        double a = static_cast<double>(i) / initial, b = static_cast<double>(i + 1) / initial;
        double fa = std::fabs(spec.F(a)), fm = std::fabs(spec.F((a + b) / 2)),
               fb = std::fabs(spec.F(b));
        work.push_back({a, b, fa, fm, fb, simpson(fa, fm, fb, b - a)});
    }
    double total = 0;
    std::size_t guard = 0;
    while (!work.empty()) {
        Seg s = work.back();
        work.pop_back();
        double m = (s.a + s.b) / 2;
        double lm = (s.a + m) / 2, rm = (m + s.b) / 2;
        double flm = std::fabs(spec.F(lm)), frm = std::fabs(spec.F(rm));
        double left = simpson(s.fa, flm, s.fm, m - s.a);
        double right = simpson(s.fm, frm, s.fb, s.b - m);
        double delta = left + right - s.whole;
        if (std::fabs(delta) <= tol * (s.b - s.a) || (s.b - s.a) < 1e-9 || ++guard > 4'000'000) {
            total += left + right;
            *err_out += std::fabs(delta) + tol * (s.b - s.a);
        } else {
            work.push_back({s.a, m, s.fa, flm, s.fm, left});
            work.push_back({m, s.b, s.fm, frm, s.fb, right});
        }
    }
    return total;
}

}  // namespace

BoundReport check_comparison(const ComparisonSpec& spec, const MeasureHandle& mu, double r,
                             double tol) {
    if (!(r > 0)) throw std::domain_error("check_comparison: r must be positive");
    BoundReport rep;
    rep.lemma = "measure-comparison";
    rep.certified.A = spec.M;  // report M in the A slot
    rep.certified.B = spec.m2;
    rep.tol = tol + spec.m2_err * spec.M / (r * r * r);

    if (spec.fkind == ComparisonSpec::FKind::One) {
        rep.lhs = 1.0;
    } else if (mu.kind == MeasureHandle::Kind::Lebesgue) {
        double qerr = 0;
        rep.lhs = integrate_abs_F(spec, tol / 4, &qerr);
        rep.tol += qerr;
    } else {
        double acc = 0;
        for (std::size_t i = 0; i < mu.mc_samples; ++i) {
            auto h = kaufman::sample_mu(*mu.scheme, mu.seed + i, mu.target_q);
            acc += std::fabs(spec.F(h.midpoint_d));
        }
        rep.lhs = acc / static_cast<double>(mu.mc_samples);
        rep.tol += 3.0 / std::sqrt(static_cast<double>(mu.mc_samples));
    }
    rep.rhs = 2 * r + mu.lambda(r / spec.M) * (1 + spec.m2 * spec.M / (r * r * r));
    rep.margin = rep.rhs + rep.tol - rep.lhs;
    rep.violated = rep.margin < 0;
    return rep;
}

}  // namespace dioph::osc
