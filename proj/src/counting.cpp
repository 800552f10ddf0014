#include "dioph/counting.hpp"

#include "dioph/parallel.hpp"
#include "dioph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dioph::counting {

LacunarySequence LacunarySequence::geometric(Rat q0, Rat C) {
    if (C <= 1) throw std::domain_error("lacunary ratio must exceed 1");
    if (q0 <= 0) throw std::domain_error("q0 must be positive");
    LacunarySequence s;
    s.kind = Kind::Geometric;
    s.q0 = std::move(q0);
    s.ratio = std::move(C);
    return s;
}

LacunarySequence LacunarySequence::integer_power(unsigned long b) {
    if (b < 2) throw std::domain_error("integer-power base must be >= 2");
    LacunarySequence s;
    s.kind = Kind::IntegerPower;
    s.base = b;
    return s;
}

LacunarySequence LacunarySequence::explicit_list(std::vector<Rat> terms, const Rat& C) {
    if (terms.empty()) throw std::domain_error("explicit sequence must be non-empty");
    if (C <= 1) throw std::domain_error("lacunary ratio must exceed 1");
    for (std::size_t i = 0; i + 1 < terms.size(); ++i) {
        if (terms[i] <= 0 || terms[i + 1] < terms[i] * C)
            throw std::domain_error("explicit sequence violates the gap condition");
    }
    LacunarySequence s;
    s.kind = Kind::Explicit;
    s.list = std::move(terms);
    s.ratio = C;
    return s;
}

std::vector<Rat> LacunarySequence::values(std::size_t N) const {
    std::vector<Rat> out;
    out.reserve(N);
    switch (kind) {
        case Kind::Geometric: {
            Rat q = q0;
            for (std::size_t n = 1; n <= N; ++n) {
                q *= ratio;
                out.push_back(q);
            }
            break;
        }
        case Kind::IntegerPower: {
            Int q = 1;
            for (std::size_t n = 1; n <= N; ++n) {
                q *= base;
                out.push_back(Rat(q));
            }
            break;
        }
        case Kind::Explicit: {
            if (N > list.size())
                throw std::out_of_range("explicit sequence shorter than requested N");
            out.assign(list.begin(), list.begin() + static_cast<long>(N));
            break;
        }
    }
    return out;
}

ApproxFunction ApproxFunction::power_of_q(Rat coef, long u, unsigned long v) {
    ApproxFunction f;
    f.kind = Kind::PowerOfQ;
    f.coef = std::move(coef);
    f.u = u;
    f.v = v;
    return f;
}

ApproxFunction ApproxFunction::power_of_index(Rat coef, long u, unsigned long v) {
    ApproxFunction f;
    f.kind = Kind::PowerOfIndex;
    f.coef = std::move(coef);
    f.u = u;
    f.v = v;
    return f;
}

ApproxFunction ApproxFunction::from_table(std::vector<Rat> values) {
    ApproxFunction f;
    f.kind = Kind::Table;
    f.table = std::move(values);
    return f;
}

namespace {

Rat rational_power(const Rat& base, long u) {
    if (u >= 0) return rpow(base, static_cast<unsigned long>(u));
    return 1 / rpow(base, static_cast<unsigned long>(-u));
}

}  // namespace

RatInterval ApproxFunction::value(std::size_t n, const Rat& q) const {
    switch (kind) {
        case Kind::Table:
            if (n == 0 || n > table.size()) throw std::out_of_range("psi table too short");
            return RatInterval(table[n - 1]);
        case Kind::PowerOfQ: {
            if (v == 1) return RatInterval(coef * rational_power(q, u));
            RatInterval iv = pow_interval(q, make_rat(Int(u), Int(v)), prec);
            return iv * coef;
        }
        case Kind::PowerOfIndex: {
            Rat base(static_cast<long>(n));
            if (v == 1) return RatInterval(coef * rational_power(base, u));
            RatInterval iv = pow_interval(base, make_rat(Int(u), Int(v)), prec);
            return iv * coef;
        }
    }
    throw std::logic_error("unreachable");
}

double ApproxFunction::value_d(std::size_t n, const Rat& q) const {
    switch (kind) {
        case Kind::Table: return table.at(n - 1).get_d();
        case Kind::PowerOfQ:
            return coef.get_d() *
                   std::pow(q.get_d(), static_cast<double>(u) / static_cast<double>(v));
        case Kind::PowerOfIndex:
            return coef.get_d() *
                   std::pow(static_cast<double>(n), static_cast<double>(u) / static_cast<double>(v));
    }
    throw std::logic_error("unreachable");
}

namespace {

// || t || over the interval [t - w, t + w] as an exact rational range.
RatInterval dist_range(const Rat& t, const Rat& w) {
    if (w == 0) {
        Rat d = dist_to_int(t);
        return {d, d};
    }
    Rat a = t - w, b = t + w;
    if (b - a >= 1) return {Rat(0), make_rat(1, 2)};
    Rat lo, hi;
    Int ka = rceil(a);
    lo = (Rat(ka) <= b) ? Rat(0) : std::min(dist_to_int(a), dist_to_int(b));
    // a half-integer inside [a,b] forces the max 1/2
    Rat ha = a - make_rat(1, 2);
    if (Rat(rceil(ha)) + make_rat(1, 2) <= b) {
        hi = make_rat(1, 2);
    } else {
        hi = std::max(dist_to_int(a), dist_to_int(b));
    }
    return {lo, hi};
}

// dist <= psi with both sides possibly intervals.
Truth3 hit_verdict(const RatInterval& dist, const RatInterval& psi) {
    if (dist.hi <= psi.lo) return Truth3::True;
    if (dist.lo > psi.hi) return Truth3::False;
    return Truth3::Unknown;
}

void check_psi_range(const RatInterval& psi) {
    // psi = 1 is tolerated (a trivially-true comparison); 0 and > 1 are not.
    if (psi.lo <= 0 || psi.hi > 1) throw std::domain_error("psi value outside (0,1]");
}

}  // namespace

CountRecord hitting_count(const Rat& x, const Rat& x_halfwidth, std::size_t N, const Rat& gamma,
                          const ApproxFunction& psi, const LacunarySequence& A, bool keep_hits) {
    if (N < 1) throw std::domain_error("hitting_count: N must be >= 1");
    CountRecord rec;
    rec.N = N;
    if (keep_hits) rec.hits.emplace();
    std::vector<Rat> qs = A.values(N);
    for (std::size_t n = 1; n <= N; ++n) {
        const Rat& q = qs[n - 1];
        RatInterval pv = psi.value(n, q);
        check_psi_range(pv);
        rec.Psi += pv.mid_d();
        Rat t = q * x - gamma;
        RatInterval dist = dist_range(t, x_halfwidth * q);
        switch (hit_verdict(dist, pv)) {
            case Truth3::True:
                ++rec.R;
                if (keep_hits) rec.hits->push_back(n);
                break;
            case Truth3::Unknown: ++rec.uncertain; break;
            case Truth3::False: break;
        }
    }
    return rec;
}

std::size_t schmidt_count(const Rat& x, std::size_t Q, const Rat& gamma,
                          const ApproxFunction& psi) {
    if (Q < 1) throw std::domain_error("schmidt_count: Q must be >= 1");
    std::size_t count = 0;
    RatInterval prev;
    for (std::size_t q = 1; q <= Q; ++q) {
        RatInterval pv = psi.value(q, Rat(static_cast<long>(q)));
        if (pv.lo < 0 || pv.hi >= make_rat(1, 2))
            throw std::domain_error("schmidt_count: psi must map into [0, 1/2)");
        if (q > 1 && pv.lo > prev.hi)
            throw std::domain_error("schmidt_count: psi must be non-increasing");
        prev = pv;
        Rat d = dist_to_int(Rat(static_cast<long>(q)) * x - gamma);
        // strict inequality here, unlike the lacunary counts
        if (d < pv.lo) {
            ++count;
        } else if (d < pv.hi) {
            throw std::domain_error("schmidt_count: comparison unresolved at working precision");
        }
    }
    return count;
}

Rat discrepancy(const Rat& x, const LacunarySequence& A, std::size_t N) {
    if (N < 1) throw std::domain_error("discrepancy: N must be >= 1");
    std::vector<Rat> qs = A.values(N);
    std::vector<Rat> pts;
    pts.reserve(N);
    for (const Rat& q : qs) {
        Rat t = q * x;
        pts.push_back(t - Rat(rfloor(t)));
    }
    std::sort(pts.begin(), pts.end());
    Rat best = 0;
    const Rat nn(static_cast<long>(N));
    for (std::size_t i = 1; i <= N; ++i) {
        Rat up = Rat(static_cast<long>(i)) / nn - pts[i - 1];
        Rat dn = pts[i - 1] - Rat(static_cast<long>(i - 1)) / nn;
        if (up > best) best = up;
        if (dn > best) best = dn;
    }
    return best;
}

unsigned dyadic_bits_needed(const LacunarySequence& A, std::size_t N) {
    switch (A.kind) {
        case LacunarySequence::Kind::IntegerPower: {
            double lg = std::log2(static_cast<double>(A.base));
            return static_cast<unsigned>(std::ceil(static_cast<double>(N) * lg)) + 128;
        }
        case LacunarySequence::Kind::Explicit: {
            const Rat& last = A.list.at(std::min(N, A.list.size()) - 1);
            return static_cast<unsigned>(mpz_sizeinbase(last.get_num().get_mpz_t(), 2)) + 128;
        }
        case LacunarySequence::Kind::Geometric: {
            if (A.ratio.get_den() == 1 && A.q0.get_den() == 1) {
                double lg = std::log2(A.ratio.get_d());
                return static_cast<unsigned>(std::ceil(static_cast<double>(N) * lg)) + 128;
            }
            // non-integer ratio: q_n x mod 1 never collapses for dyadic x
            return 192;
        }
    }
    return 192;
}

namespace {

std::vector<std::size_t> dyadic_checkpoints(std::size_t N_max) {
    std::vector<std::size_t> cps;
    for (std::size_t n = 32; n <= N_max; n *= 2) cps.push_back(n);
    if (cps.empty() || cps.back() != N_max) cps.push_back(N_max);
    return cps;
}

// One sample's hit counts at the requested checkpoints, exact arithmetic;
// the caller supplies precomputed psi enclosures.
struct SampleCounts {
    std::vector<std::size_t> R;
    std::size_t uncertain = 0;
};

// r/td <= a  (a rational, r >= 0, td > 0), no gcd reduction on r/td.
inline bool frac_leq(const Int& r, const Int& td, const Rat& a) {
    return r * a.get_den() <= a.get_num() * td;
}

SampleCounts run_sample(const Rat& x, const Rat& gamma, const LacunarySequence& A,
                        const std::vector<Rat>& qs, const std::vector<RatInterval>& psis,
                        const std::vector<std::size_t>& checkpoints) {
    SampleCounts sc;
    sc.R.reserve(checkpoints.size());
    std::size_t R = 0, cp = 0;
    const Int& gn = gamma.get_num();
    const Int& gd = gamma.get_den();

    auto tally = [&](const Int& r_in, const Int& td, std::size_t n) {
        Int r = r_in;
        Int r2 = td - r;
        if (r2 < r) r = r2;  // distance to nearest integer, scaled by td
        const RatInterval& pv = psis[n - 1];
        if (frac_leq(r, td, pv.lo)) {
            ++R;
        } else if (frac_leq(r, td, pv.hi)) {
            ++sc.uncertain;
        }
        if (cp < checkpoints.size() && n == checkpoints[cp]) {
            sc.R.push_back(R);
            ++cp;
        }
    };

    if (A.kind == LacunarySequence::Kind::IntegerPower) {
        // Keep y = q_n x mod 1 with a fixed denominator; one short multiply
        // and one remainder per step instead of full-width products.
        const Int& den = x.get_den();
        Int y;
        mpz_fdiv_r(y.get_mpz_t(), x.get_num().get_mpz_t(), den.get_mpz_t());
        Int td = den * gd;
        Int t, r;
        for (std::size_t n = 1; n <= checkpoints.back(); ++n) {
            y *= static_cast<unsigned long>(A.base);
            mpz_fdiv_r(y.get_mpz_t(), y.get_mpz_t(), den.get_mpz_t());
            t = y * gd - gn * den;
            mpz_fdiv_r(r.get_mpz_t(), t.get_mpz_t(), td.get_mpz_t());
            tally(r, td, n);
        }
        return sc;
    }

    // general case: t_n = q_n x - gamma over the product denominator
    Int X = x.get_num() * gd;
    Int D = x.get_den() * gd;
    Int G = gn * x.get_den();
    for (std::size_t n = 1; n <= checkpoints.back(); ++n) {
        const Rat& q = qs[n - 1];
        Int tn = X * q.get_num() - G * q.get_den();
        Int td = D * q.get_den();
        Int r;
        mpz_fdiv_r(r.get_mpz_t(), tn.get_mpz_t(), td.get_mpz_t());
        tally(r, td, n);
    }
    return sc;
}

}  // namespace

CountingLawResult counting_law_experiment(std::size_t ensemble, std::size_t N_max,
                                          const Rat& gamma, const ApproxFunction& psi,
                                          const LacunarySequence& A, std::uint64_t seed,
                                          unsigned threads) {
    if (ensemble < 30) throw std::domain_error("counting-law ensemble must be >= 30");
    CountingLawResult res;
    res.checkpoints = dyadic_checkpoints(N_max);

    std::vector<Rat> qs = A.values(N_max);
    std::vector<RatInterval> psis;
    psis.reserve(N_max);
    std::vector<double> Psi_cum(N_max + 1, 0.0);
    for (std::size_t n = 1; n <= N_max; ++n) {
        RatInterval pv = psi.value(n, qs[n - 1]);
        check_psi_range(pv);
        Psi_cum[n] = Psi_cum[n - 1] + pv.mid_d();
        psis.push_back(std::move(pv));
    }
    if (Psi_cum[N_max] < 10.0)
        throw std::domain_error("degenerate counting-law run: Psi(N_max) < 10");

    unsigned bits = dyadic_bits_needed(A, N_max);
    auto samples = parallel_map_ordered<SampleCounts>(ensemble, threads, [&](std::size_t i) {
        Rng rng = stream_rng(seed, i);
        Rat x = rng.uniform_dyadic(bits);
        return run_sample(x, gamma, A, qs, psis, res.checkpoints);
    });

    const double eps0 = res.eps0;
    std::vector<double> log_psi;
    std::vector<double> median_log_dev;
    for (std::size_t c = 0; c < res.checkpoints.size(); ++c) {
        std::size_t N = res.checkpoints[c];
        double Psi = Psi_cum[N];
        double denom = std::sqrt(Psi) * std::pow(std::log(Psi + 2.0), 1.5 + eps0);
        std::vector<double> abs_norm;
        std::vector<double> log_dev;
        abs_norm.reserve(ensemble);
        for (std::size_t i = 0; i < ensemble; ++i) {
            double dev = static_cast<double>(samples[i].R[c]) - 2.0 * Psi;
            double ne = dev / denom;
            res.rows.push_back({N, i, samples[i].R[c], Psi, ne});
            abs_norm.push_back(std::fabs(ne));
            log_dev.push_back(std::log(std::max(std::fabs(dev), 1e-9)));
        }
        res.median_abs_norm_err.push_back(median(abs_norm));
        res.q90_abs_norm_err.push_back(quantile(abs_norm, 0.9));
        log_psi.push_back(std::log(Psi));
        median_log_dev.push_back(median(log_dev));
    }
    res.fitted_exponent = least_squares(log_psi, median_log_dev).slope;
    for (const auto& s : samples) res.total_uncertain += s.uncertain;
    return res;
}

ZeroOneResult zero_one_experiment(std::size_t ensemble, const LacunarySequence& A,
                                  const Rat& gamma, const ApproxFunction& psi_convergent,
                                  const ApproxFunction& psi_divergent, std::size_t N_max,
                                  std::uint64_t seed, unsigned threads) {
    if (ensemble < 1) throw std::domain_error("empty ensemble");
    if (N_max < 4) throw std::domain_error("N_max too small for a half-range split");

    std::vector<Rat> qs = A.values(N_max);
    std::vector<RatInterval> psi_c, psi_d;
    double tail_conv = 0, Psi_div = 0;
    for (std::size_t n = 1; n <= N_max; ++n) {
        RatInterval c = psi_convergent.value(n, qs[n - 1]);
        RatInterval d = psi_divergent.value(n, qs[n - 1]);
        check_psi_range(c);
        check_psi_range(d);
        if (n > N_max / 2) tail_conv += c.mid_d();
        Psi_div += d.mid_d();
        psi_c.push_back(std::move(c));
        psi_d.push_back(std::move(d));
    }
    // analytic continuation of the convergent tail for index power laws
    if (psi_convergent.kind == ApproxFunction::Kind::PowerOfIndex) {
        double e = static_cast<double>(psi_convergent.u) / static_cast<double>(psi_convergent.v);
        if (e < -1)
            tail_conv += psi_convergent.coef.get_d() *
                         std::pow(static_cast<double>(N_max), 1.0 + e) / (-1.0 - e);
    }
    if (tail_conv >= 0.01)
        throw std::domain_error("zero-one run: convergent tail beyond N_max/2 is not < 0.01");
    if (Psi_div < 20.0)
        throw std::domain_error("zero-one run: divergent Psi(N_max) < 20");

    std::vector<std::size_t> cps{N_max / 2, N_max};
    unsigned bits = dyadic_bits_needed(A, N_max);

    struct Verdict {
        bool stabilized_conv;
        bool growing_div;
        bool above_half_psi;
    };
    auto verdicts = parallel_map_ordered<Verdict>(ensemble, threads, [&](std::size_t i) {
        Rng rng = stream_rng(seed, i);
        Rat x = rng.uniform_dyadic(bits);
        SampleCounts c = run_sample(x, gamma, A, qs, psi_c, cps);
        SampleCounts d = run_sample(x, gamma, A, qs, psi_d, cps);
        Verdict v;
        v.stabilized_conv = c.R[1] == c.R[0];
        v.growing_div = d.R[1] > d.R[0];
        v.above_half_psi = static_cast<double>(d.R[1]) >= Psi_div / 2;
        return v;
    });

    ZeroOneResult out;
    out.ensemble = ensemble;
    for (const auto& v : verdicts) {
        out.frac_stabilized_convergent += v.stabilized_conv ? 1 : 0;
        out.frac_growing_divergent += v.growing_div ? 1 : 0;
        out.frac_above_half_psi_divergent += v.above_half_psi ? 1 : 0;
    }
    out.frac_stabilized_convergent /= static_cast<double>(ensemble);
    out.frac_growing_divergent /= static_cast<double>(ensemble);
    out.frac_above_half_psi_divergent /= static_cast<double>(ensemble);
    return out;
}

PairCorrelationResult pair_correlation(std::size_t ensemble, const LacunarySequence& A,
                                       const ApproxFunction& psi, const Rat& gamma, std::size_t m,
                                       std::size_t n, std::uint64_t seed) {
    if (m >= n) throw std::domain_error("pair_correlation requires m < n");
    if (ensemble < 1000) throw std::domain_error("pair_correlation ensemble must be >= 1000");
    std::vector<Rat> qs = A.values(n);
    RatInterval pm = psi.value(m, qs[m - 1]);
    RatInterval pn = psi.value(n, qs[n - 1]);
    check_psi_range(pm);
    check_psi_range(pn);
    unsigned bits = dyadic_bits_needed(A, n);

    std::size_t both = 0;
    for (std::size_t i = 0; i < ensemble; ++i) {
        Rng rng = stream_rng(seed, i);
        Rat x = rng.uniform_dyadic(bits);
        Rat dm = dist_to_int(qs[m - 1] * x - gamma);
        Rat dn = dist_to_int(qs[n - 1] * x - gamma);
        if (dm <= pm.lo && dn <= pn.lo) ++both;
    }
    PairCorrelationResult out;
    out.empirical = static_cast<double>(both) / static_cast<double>(ensemble);
    out.bound = 4.0 * pm.mid_d() * pn.mid_d();
    out.stderr_ = std::sqrt(out.empirical * (1 - out.empirical) / static_cast<double>(ensemble));
    out.ratio = out.bound > 0 ? out.empirical / out.bound : 0;
    return out;
}

}  // namespace dioph::counting
