#include "dioph/kaufman.hpp"

#include "dioph/parallel.hpp"
#include "dioph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace dioph::kaufman {

namespace {

constexpr std::size_t kEnumerationGuard = 10'000'000;

std::vector<std::vector<unsigned>> all_tuples(unsigned alphabet, unsigned length) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> cur(length, 1);
    while (true) {
        out.push_back(cur);
        unsigned i = length;
        while (i > 0) {
            if (cur[i - 1] < alphabet) {
                ++cur[i - 1];
                std::fill(cur.begin() + i, cur.end(), 1u);
                break;
            }
            --i;
        }
        if (i == 0) break;
    }
    return out;
}

}  // namespace

BlockDistribution build_block_distribution(const BlockParams& params, mpfr_prec_t prec) {
    if (params.N < 1 || params.m < 1 || params.j0 < 1)
        throw std::domain_error("block parameters must be positive");
    if (params.eps <= 0) throw std::domain_error("eps must be positive");
    double count = std::pow(static_cast<double>(params.N), static_cast<double>(params.m));
    if (count > static_cast<double>(kEnumerationGuard))
        throw std::domain_error("enumeration-too-large: N^m exceeds the desk-scale guard");

    BlockDistribution dist;
    dist.params = params;
    Rat expo = 2 * params.eps - 2;  // q^{-2(1-eps)}

    std::vector<Rat> raw;
    Rat raw_sum = 0;
    Rat err_sum = 0;
    RatInterval sigma{Rat(0), Rat(0)};
    for (const auto& digits : all_tuples(params.N, params.m)) {
        cf::Word w;
        for (unsigned d : digits) w.push(Int(d));
        Rat err;
        Rat v = pow_rounded(Rat(w.qn()), expo, prec, &err);
        RatInterval iv = pow_interval(Rat(w.qn()), expo, prec);
        sigma = sigma + iv;
        raw.push_back(v);
        raw_sum += v;
        err_sum += err;
        dist.blocks.push_back(std::move(w));
    }
    dist.Sigma_m = sigma;
    dist.rounding_radius = raw_sum > err_sum ? err_sum / (raw_sum - err_sum) : Rat(1);
    dist.weights.reserve(raw.size());
    for (const Rat& v : raw) dist.weights.push_back(v / raw_sum);  // exact, sums to 1

    RatInterval mean{Rat(0), Rat(0)};
    for (std::size_t i = 0; i < dist.blocks.size(); ++i) {
        if (dist.blocks[i].qn() == 1) continue;  // log 1 = 0
        mean = mean + log_interval(Rat(dist.blocks[i].qn()), prec) * dist.weights[i];
    }
    dist.mean_log_q = mean;
    return dist;
}

GoodBlockSet enumerate_good_set(const BlockDistribution& dist, unsigned j0, const Rat& eps_mean,
                                mpfr_prec_t prec) {
    if (j0 < 1) throw std::domain_error("j0 must be >= 1");
    if (eps_mean <= 0) throw std::domain_error("good-set tolerance must be positive");
    const std::size_t B = dist.blocks.size();
    double total = std::pow(static_cast<double>(B), static_cast<double>(j0));
    if (total > static_cast<double>(kEnumerationGuard))
        throw std::domain_error("enumeration-too-large: (N^m)^j0 exceeds the desk-scale guard");

    std::vector<RatInterval> logs;
    logs.reserve(B);
    for (const auto& w : dist.blocks)
        logs.push_back(w.qn() == 1 ? RatInterval(Rat(0)) : log_interval(Rat(w.qn()), prec));

    const RatInterval& E = dist.mean_log_q;
    RatInterval lo_bound = E * (1 - eps_mean);  // mean must be >= this
    RatInterval hi_bound = E * (1 + eps_mean);

    GoodBlockSet gs;
    gs.params = dist.params;
    gs.params.j0 = j0;
    gs.eps_mean = eps_mean;
    gs.tuples_total = static_cast<std::size_t>(total + 0.5);
    gs.nu_mass = 0;

    std::vector<std::size_t> idx(j0, 0);
    Rat jj(static_cast<long>(j0));
    while (true) {
        RatInterval sum{Rat(0), Rat(0)};
        Rat weight = 1;
        for (unsigned t = 0; t < j0; ++t) {
            sum = sum + logs[idx[t]];
            weight *= dist.weights[idx[t]];
        }
        RatInterval mean{sum.lo / jj, sum.hi / jj};
        Truth3 above = leq(lo_bound, mean);
        Truth3 below = leq(mean, hi_bound);
        if (above == Truth3::True && below == Truth3::True) {
            cf::Word w;
            for (unsigned t = 0; t < j0; ++t)
                for (const auto& d : dist.blocks[idx[t]].digits()) w.push(d);
            gs.words.push_back(std::move(w));
            gs.nu_weights.push_back(weight);
            gs.nu_mass += weight;
        } else if (above == Truth3::Unknown || below == Truth3::Unknown) {
            ++gs.unresolved;  // excluded, but reported rather than silently resolved
        }
        unsigned t = j0;
        while (t > 0) {
            if (++idx[t - 1] < B) break;
            idx[t - 1] = 0;
            --t;
        }
        if (t == 0) break;
    }
    gs.nubar.reserve(gs.nu_weights.size());
    for (const Rat& w : gs.nu_weights) gs.nubar.push_back(w / gs.nu_mass);
    return gs;
}

GoodBlockSet build_good_set(const BlockDistribution& dist, unsigned j0, const Rat& eps_mean,
                            mpfr_prec_t prec) {
    GoodBlockSet gs = enumerate_good_set(dist, j0, eps_mean, prec);
    if (!gs.mass_ok())
        throw std::runtime_error(
            "mass-too-small: good-block mass <= 1/2; increase j0 or loosen the tolerance");
    return gs;
}

ScheduleSpec ScheduleSpec::desk_arithmetic(unsigned long stride) {
    ScheduleSpec s;
    s.mode = Mode::DeskArithmetic;
    s.stride = stride;
    s.n1 = stride;
    return s;
}

ScheduleSpec ScheduleSpec::desk_geometric(unsigned long n1) {
    ScheduleSpec s;
    s.mode = Mode::DeskGeometric;
    s.n1 = n1;
    return s;
}

ScheduleSpec ScheduleSpec::paper_faithful(unsigned long n1) {
    ScheduleSpec s;
    s.mode = Mode::PaperFaithful;
    s.n1 = n1;
    return s;
}

ScheduleSpec ScheduleSpec::explicit_list(std::vector<unsigned long> ns) {
    ScheduleSpec s;
    s.mode = Mode::Explicit;
    if (ns.empty()) throw std::domain_error("explicit schedule must be non-empty");
    for (std::size_t i = 0; i + 1 < ns.size(); ++i)
        if (ns[i] >= ns[i + 1]) throw std::domain_error("schedule must be strictly increasing");
    s.n1 = ns.front();
    s.list = std::move(ns);
    return s;
}

unsigned long CantorScheme::n_k(unsigned k) const {
    if (k < 1) throw std::domain_error("insertion ordinal is 1-based");
    switch (schedule.mode) {
        case ScheduleSpec::Mode::DeskArithmetic:
            return schedule.stride * static_cast<unsigned long>(k);
        case ScheduleSpec::Mode::DeskGeometric: {
            if (k > 50) throw std::runtime_error("infeasible schedule: geometric overflow");
            return schedule.n1 << (k - 1);
        }
        case ScheduleSpec::Mode::PaperFaithful:
        case ScheduleSpec::Mode::Explicit:
            if (k > schedule_cache.size())
                throw std::runtime_error("infeasible schedule: position not representable");
            return schedule_cache[k - 1];
    }
    throw std::logic_error("unreachable");
}

const std::vector<std::uint64_t>& CantorScheme::nubar_breakpoints() const {
    if (breaks_cache_.empty() && !good.nubar.empty()) {
        breaks_cache_.reserve(good.nubar.size());
        Rat cum = 0;
        Int two64 = Int(1) << 64;
        for (const Rat& w : good.nubar) {
            cum += w;
            Rat scaled = cum * Rat(two64);
            Int b = rfloor(scaled);
            if (b > two64 - 1) b = two64 - 1;
            std::uint64_t v = 0;
            for (int limb = 1; limb >= 0; --limb) {
                Int part = (b >> (32 * limb)) & Int(0xffffffffUL);
                v = (v << 32) | part.get_ui();
            }
            breaks_cache_.push_back(v);
        }
        breaks_cache_.back() = UINT64_MAX;  // close the last bucket
    }
    return breaks_cache_;
}

namespace {

void materialize_paper_schedule(CantorScheme& s) {
    // n_{k+1} eps >= 12 k log 2 + (1+tau) [k(k+1) + k (n_1 + ... + n_k)]
    s.schedule_cache.clear();
    s.schedule_cache.push_back(s.schedule.n1);
    RatInterval log2iv = log_interval(Rat(2), 128);
    double sum_n = static_cast<double>(s.schedule.n1);
    for (unsigned k = 1; k <= 8; ++k) {
        double kk = k;
        double rhs_hi = 12 * kk * log2iv.hi.get_d() +
                        (1 + s.tau.get_d()) * (kk * (kk + 1) + kk * sum_n);
        double n_next = std::ceil(rhs_hi / s.params.eps.get_d());
        double prev = static_cast<double>(s.schedule_cache.back());
        if (n_next <= prev) n_next = prev + 1;
        if (n_next > 1e15) break;  // deeper positions are not representable
        s.schedule_cache.push_back(static_cast<unsigned long>(n_next));
        sum_n += n_next;
    }
}

void evaluate_hypotheses(CantorScheme& s) {
    PaperHypotheses h;
    const Rat& eps = s.params.eps;
    h.eps_in_paper_range = eps < make_rat(1, 8) && eps * 100 * s.tau < 1;
    h.sigma_normalizer_ok = s.dist.Sigma_m.lo >= 1024;
    // m >= log N / eps + 1
    RatInterval logN = log_interval(Rat(static_cast<long>(s.params.N)), 128);
    h.block_length_ok = Rat(static_cast<long>(s.params.m - 1)) * eps >= logN.hi;
    // schedule growth over the first few insertions
    h.schedule_growth_ok = true;
    double sum_n = 0;
    RatInterval log2iv = log_interval(Rat(2), 128);
    for (unsigned k = 1; k <= 4; ++k) {
        unsigned long nk;
        unsigned long nk1;
        try {
            nk = s.n_k(k);
            nk1 = s.n_k(k + 1);
        } catch (const std::exception&) {
            break;
        }
        sum_n += static_cast<double>(nk);
        double rhs = 12.0 * k * log2iv.hi.get_d() +
                     (1 + s.tau.get_d()) * (static_cast<double>(k) * (k + 1) +
                                            static_cast<double>(k) * sum_n);
        if (static_cast<double>(nk1) * s.params.eps.get_d() < rhs) {
            h.schedule_growth_ok = false;
            break;
        }
    }
    s.hypotheses = h;
}

}  // namespace

CantorScheme build_scheme(BlockDistribution dist, GoodBlockSet good, const Rat& tau,
                          const ScheduleSpec& schedule) {
    if (tau <= 0) throw std::domain_error("tau must be positive");
    CantorScheme s;
    s.params = good.params;
    s.dist = std::move(dist);
    s.good = std::move(good);
    s.tau = tau;
    s.mode = CantorScheme::PhiMode::PowerLawTau;
    s.phi = PhiSpec::power(make_rat(1, 3), 0);  // unused in power-law mode
    s.c_exponent = tau;
    s.schedule = schedule;
    if (schedule.mode == ScheduleSpec::Mode::Explicit) s.schedule_cache = schedule.list;
    if (schedule.mode == ScheduleSpec::Mode::PaperFaithful) materialize_paper_schedule(s);
    evaluate_hypotheses(s);
    return s;
}

CantorScheme build_scheme_general(BlockDistribution dist, GoodBlockSet good, const Rat& tau,
                                  const PhiSpec& phi, std::vector<Int> Q) {
    if (tau <= 0) throw std::domain_error("tau must be positive");
    if (Q.empty()) throw std::domain_error("general mode needs a non-empty Q subsequence");
    CantorScheme s;
    s.params = good.params;
    s.dist = std::move(dist);
    s.good = std::move(good);
    s.tau = tau;
    s.mode = CantorScheme::PhiMode::General;
    s.phi = phi;
    s.c_exponent = tau + 20 * s.params.eps;
    s.Q = std::move(Q);

    // Q_k sandwich: Q^(tau-eps) <= 3 Phi(Q) <= Q^(tau+eps), enclosure-checked.
    const Rat eps = s.params.eps;
    for (const Int& q : s.Q) {
        RatInterval phi3 = s.phi.eval_interval(q) * Rat(3);
        RatInterval lo = pow_interval(Rat(q), tau - eps, 160);
        RatInterval hi = pow_interval(Rat(q), tau + eps, 160);
        if (!(lo.hi <= phi3.lo && phi3.hi <= hi.lo))
            throw std::domain_error("Q subsequence violates the Phi sandwich");
    }
    s.hypotheses.q_ratio_ok = true;
    for (std::size_t i = 0; i + 1 < s.Q.size(); ++i) {
        RatInterval la = log_interval(Rat(s.Q[i]), 128);
        RatInterval lb = log_interval(Rat(s.Q[i + 1]), 128);
        if (!(la.hi * 1000 < lb.lo * eps)) s.hypotheses.q_ratio_ok = false;
    }

    // n_k = max{ N > n_{k-1} : exp(N p sigma_m (1+3 eps)) <= Q_k }
    s.schedule.mode = ScheduleSpec::Mode::Explicit;
    double psig = s.p_sigma_m();
    double factor = (1 + 3 * eps.get_d()) * psig;
    unsigned long prev = 0;
    for (const Int& q : s.Q) {
        double nq = std::log(Rat(q).get_d()) / factor;
        auto nk = static_cast<unsigned long>(std::floor(nq));
        if (nk <= prev)
            throw std::domain_error("infeasible schedule: Q_k too small for a new insertion");
        s.schedule_cache.push_back(nk);
        prev = nk;
    }
    s.schedule.n1 = s.schedule_cache.front();
    s.schedule.list = s.schedule_cache;

    PaperHypotheses h = s.hypotheses;
    evaluate_hypotheses(s);
    s.hypotheses.q_ratio_ok = h.q_ratio_ok;
    // general mode tightens the eps requirement to 1/(1000 tau)
    s.hypotheses.eps_in_paper_range =
        s.params.eps < make_rat(1, 8) && s.params.eps * 1000 * s.tau < 1;
    return s;
}

namespace {

// floor(q^(u/v)) for q >= 1, u,v >= 1
Int floor_root_pow(const Int& q, unsigned long u, unsigned long v) {
    Int t = ipow(q, u);
    Int r;
    mpz_root(r.get_mpz_t(), t.get_mpz_t(), v);
    return r;
}

}  // namespace

CRange c_range(const CantorScheme& scheme, const Int& q_prefix4) {
    const Rat& e = scheme.c_exponent;
    if (e.get_num() <= 0) throw std::domain_error("c exponent must be positive");
    auto u = static_cast<unsigned long>(e.get_num().get_ui());
    auto v = static_cast<unsigned long>(e.get_den().get_ui());
    Int qe = floor_root_pow(q_prefix4, u, v);
    Int target = ipow(q_prefix4, u);

    // smallest c with (4c)^v >= q^u
    Int lo = qe / 4;
    if (lo < 1) lo = 1;
    while (ipow(4 * lo, v) < target) ++lo;
    while (lo > 1 && ipow(4 * (lo - 1), v) >= target) --lo;

    // largest c with (2c)^v <= q^u
    Int hi = qe / 2 + 1;
    while (hi > 0 && ipow(2 * hi, v) > target) --hi;
    while (ipow(2 * (hi + 1), v) <= target) ++hi;

    if (lo > hi || hi < 1)
        throw std::runtime_error("no admissible insertion digit at this continuant");
    return {lo, hi};
}

Rat mu_of_cylinder(const CantorScheme& scheme, const cf::Word& word) {
    const unsigned p = scheme.params.p();
    Rat mass = 1;
    std::size_t pos = 0;  // digits consumed
    unsigned long blocks_done = 0;
    unsigned k = 1;
    const std::size_t len = word.size();

    // lookup by digit tuple
    std::map<std::vector<unsigned long>, std::size_t> index;
    for (std::size_t i = 0; i < scheme.good.words.size(); ++i) {
        std::vector<unsigned long> key;
        for (const auto& d : scheme.good.words[i].digits()) key.push_back(d.get_ui());
        index.emplace(std::move(key), i);
    }

    while (pos < len) {
        if (blocks_done == scheme.n_k(k)) {
            if (word.digit(pos + 1) != 4)
                throw std::domain_error("inadmissible word: expected insertion digit 4");
            ++pos;  // mass unchanged across the 4
            if (pos >= len) break;
            CRange cr = c_range(scheme, word.q(pos));
            const Int& c = word.digit(pos + 1);
            if (c < cr.lo || c > cr.hi)
                throw std::domain_error("inadmissible word: insertion digit outside its range");
            mass /= Rat(cr.count());
            ++pos;
            ++k;
            continue;
        }
        if (len - pos < p)
            throw std::domain_error("inadmissible word: prefix cuts a block");
        std::vector<unsigned long> key;
        for (unsigned i = 0; i < p; ++i) key.push_back(word.digit(pos + i + 1).get_ui());
        auto it = index.find(key);
        if (it == index.end())
            throw std::domain_error("inadmissible word: block outside the good set");
        mass *= scheme.good.nubar[it->second];
        pos += p;
        ++blocks_done;
    }
    return mass;
}

namespace {

struct DrawState {
    cf::Word word;
    unsigned long blocks_done = 0;
    unsigned k = 1;
};

void draw_word(const CantorScheme& scheme, Rng& rng, const Int& target_q, DrawState& st) {
    const auto& breaks = scheme.nubar_breakpoints();
    while (st.word.qn() <= target_q) {
        if (st.blocks_done == scheme.n_k(st.k)) {
            st.word.push(Int(4));
            CRange cr = c_range(scheme, st.word.qn());
            Int c = rng.uniform_int(cr.lo, cr.hi);
            st.word.push(c);
            ++st.k;
            continue;
        }
        std::uint64_t u = rng.next();
        std::size_t i = 0;
        while (u > breaks[i]) ++i;
        for (const auto& d : scheme.good.words[i].digits()) st.word.push(d);
        ++st.blocks_done;
    }
}

}  // namespace

SampleHandle sample_mu(const CantorScheme& scheme, std::uint64_t seed, const Int& target_q) {
    if (target_q < 1) throw std::domain_error("target_q must be >= 1");
    Rng rng(seed);
    DrawState st;
    draw_word(scheme, rng, target_q, st);
    cf::Cylinder cyl = cf::cylinder(st.word);
    SampleHandle h;
    h.word = std::move(st.word);
    h.left = cyl.left;
    h.length = cyl.length;
    h.midpoint = cyl.left + cyl.length / 2;
    h.midpoint_d = h.midpoint.get_d();
    h.seed = seed;
    return h;
}

MembershipReport membership_check(const CantorScheme& scheme, const cf::Word& word) {
    MembershipReport rep;
    const unsigned p = scheme.params.p();
    std::size_t pos = 0;
    unsigned long blocks_done = 0;
    unsigned k = 1;
    const std::size_t len = word.size();

    PhiSpec phi3 = scheme.phi;  // 3 Phi for the general mode
    phi3.coef *= 3;

    while (pos < len) {
        if (blocks_done == scheme.n_k(k)) {
            if (pos + 2 > len) break;  // incomplete insertion
            if (word.digit(pos + 1) != 4)
                throw std::domain_error("inadmissible word: expected insertion digit 4");
            const Int& q4 = word.q(pos + 1);
            const Int& c = word.digit(pos + 2);

            InsertionCheck chk;
            chk.k = k;
            chk.q_prefix4 = q4;
            chk.c = c;
            if (scheme.mode == CantorScheme::PhiMode::PowerLawTau) {
                auto tu = static_cast<long>(scheme.tau.get_num().get_si());
                auto tv = static_cast<unsigned long>(scheme.tau.get_den().get_ui());
                // threshold 3 Phi(q) = q^tau, both sides exact
                chk.g_event_ok = cmp_scaled_power(Rat(4 * c), Rat(1), q4, tu, tv) >= 0;
                chk.k_guard = cmp_scaled_power(Rat(c), Rat(1), q4, tu, tv) < 0 ? Truth3::True
                                                                               : Truth3::False;
            } else {
                Truth3 g = phi3.at_least(Rat(4 * c), q4);
                chk.g_event_ok = g == Truth3::True;
                Truth3 kg = phi3.at_least(Rat(c), q4);
                chk.k_guard = kg == Truth3::True    ? Truth3::False
                              : kg == Truth3::False ? Truth3::True
                                                    : Truth3::Unknown;
                // replay the general-mode inequality chain
                const Rat eps = scheme.params.eps;
                const Rat ce = scheme.c_exponent;  // tau + 20 eps
                auto cu = static_cast<unsigned long>(ce.get_num().get_ui());
                auto cv = static_cast<unsigned long>(ce.get_den().get_ui());
                chk.chain.emplace_back(
                    "4c >= q(prefix,4)^(tau+20eps)",
                    ipow(4 * c, cv) >= ipow(q4, cu) ? Truth3::True : Truth3::False);

                double psig = scheme.p_sigma_m();
                unsigned long nk = scheme.n_k(k);
                RatInterval logq = log_interval(Rat(word.q(pos)), 128);
                double lo_env = static_cast<double>(nk) * psig * (1 - 2 * eps.get_d());
                chk.chain.emplace_back("log q(prefix) >= n_k p sigma (1-2eps)",
                                       logq.lo.get_d() >= lo_env   ? Truth3::True
                                       : logq.hi.get_d() < lo_env  ? Truth3::False
                                                                   : Truth3::Unknown);
                // parameter-only link: (tau+20e) n_k (1-2e) >= (tau+e)(n_k+1)(1+3e)
                Rat lhs = ce * static_cast<long>(nk) * (1 - 2 * eps);
                Rat rhs = (scheme.tau + eps) * static_cast<long>(nk + 1) * (1 + 3 * eps);
                chk.chain.emplace_back("(tau+20e) n_k (1-2e) >= (tau+e)(n_k+1)(1+3e)",
                                       lhs >= rhs ? Truth3::True : Truth3::False);
                if (k <= scheme.Q.size()) {
                    const Int& Qk = scheme.Q[k - 1];
                    RatInterval logQ = log_interval(Rat(Qk), 128);
                    double cap = static_cast<double>(nk + 1) * psig * (1 + 3 * eps.get_d());
                    chk.chain.emplace_back("log Q_k <= (n_k+1) p sigma (1+3eps)",
                                           logQ.hi.get_d() <= cap  ? Truth3::True
                                           : logQ.lo.get_d() > cap ? Truth3::False
                                                                   : Truth3::Unknown);
                    RatInterval phi3Q = phi3.eval_interval(Qk);
                    RatInterval Qpow = pow_interval(Rat(Qk), scheme.tau + eps, 160);
                    chk.chain.emplace_back("Q_k^(tau+eps) >= 3 Phi(Q_k)",
                                           leq(phi3Q, Qpow));
                    chk.chain.emplace_back("Q_k >= q(prefix,4)",
                                           Qk >= q4 ? Truth3::True : Truth3::False);
                }
            }
            rep.insertions.push_back(std::move(chk));
            pos += 2;
            ++k;
            continue;
        }
        if (len - pos < p) break;  // trailing partial block: nothing to check
        pos += p;
        ++blocks_done;
    }
    if (rep.insertions.empty())
        throw std::domain_error("word-too-short: no complete insertion pair to check");
    return rep;
}

// --- tree -------------------------------------------------------------------

namespace {

// Continuant-only expansion state: the digit history is not needed to grow
// the tree, and dropping it keeps deep enumerations in memory.
struct NodeState {
    Int p{0}, q{1}, p_prev{1}, q_prev{0};
    Rat mass;
    unsigned long blocks_done = 0;
    unsigned k = 1;
    bool at_c = false;  // the pending step is the c-digit of an insertion
    unsigned digits = 0;

    void push_digit(const Int& a) {
        Int np = a * p + p_prev;
        Int nq = a * q + q_prev;
        p_prev = std::move(p);
        q_prev = std::move(q);
        p = std::move(np);
        q = std::move(nq);
        ++digits;
    }
};

TreeNode to_tree_node(const NodeState& st, unsigned depth) {
    TreeNode n;
    if (st.digits == 0) {
        n.left = Rat(0);
        n.length = Rat(1);
    } else {
        Rat at0 = make_rat(st.p, st.q);
        Rat at1 = make_rat(st.p + st.p_prev, st.q + st.q_prev);
        n.left = st.digits % 2 == 0 ? at0 : at1;
        n.length = make_rat(Int(1), st.q * (st.q + st.q_prev));
    }
    n.mass = st.mass;
    n.depth = depth;
    return n;
}

}  // namespace

// Expands one parent into its complete child family; returns the children
// and checks exact mass conservation.
static std::vector<NodeState> expand_family(const CantorScheme& scheme, const NodeState& par,
                                            TreeEnumeration& out) {
    std::vector<NodeState> kids;
    Rat child_sum = 0;
    if (par.at_c) {
        CRange cr = c_range(scheme, par.q);
        Rat share = par.mass / Rat(cr.count());
        kids.reserve(static_cast<std::size_t>(cr.count().get_ui()));
        for (Int c = cr.lo; c <= cr.hi; ++c) {
            NodeState ch = par;
            ch.push_digit(c);
            ch.mass = share;
            ch.at_c = false;
            ch.k = par.k + 1;
            child_sum += share;
            kids.push_back(std::move(ch));
        }
    } else if (par.blocks_done == scheme.n_k(par.k)) {
        NodeState ch = par;
        ch.push_digit(Int(4));
        ch.at_c = true;
        child_sum = ch.mass;  // mass carried across the 4 unchanged
        kids.push_back(std::move(ch));
    } else {
        kids.reserve(scheme.good.words.size());
        for (std::size_t i = 0; i < scheme.good.words.size(); ++i) {
            NodeState ch = par;
            for (const auto& d : scheme.good.words[i].digits()) ch.push_digit(d);
            ch.mass = par.mass * scheme.good.nubar[i];
            ch.blocks_done = par.blocks_done + 1;
            child_sum += ch.mass;
            kids.push_back(std::move(ch));
        }
    }
    ++out.conservation_checked;
    if (child_sum != par.mass) ++out.conservation_violations;
    return kids;
}

TreeEnumeration enumerate_tree(const CantorScheme& scheme, std::size_t node_budget,
                               ExpandOrder order) {
    TreeEnumeration out;
    NodeState root;
    root.mass = 1;
    out.levels.push_back(TreeLevel{{to_tree_node(root, 0)}, true});
    out.nodes_enumerated = 1;

    if (order == ExpandOrder::BreadthFirst) {
        std::vector<NodeState> frontier;
        frontier.push_back(std::move(root));
        unsigned depth = 0;
        bool parent_level_complete = true;
        while (out.nodes_enumerated < node_budget && !frontier.empty()) {
            ++depth;
            std::vector<NodeState> next;
            TreeLevel level;
            level.complete = parent_level_complete;
            bool budget_hit = false;
            for (std::size_t pi = 0; pi < frontier.size(); ++pi) {
                if (out.nodes_enumerated >= node_budget) {
                    budget_hit = true;
                    for (std::size_t rest = pi; rest < frontier.size(); ++rest)
                        out.min_frontier_mass =
                            std::min(out.min_frontier_mass, frontier[rest].mass.get_d());
                    break;
                }
                auto kids = expand_family(scheme, frontier[pi], out);
                out.nodes_enumerated += kids.size();
                for (auto& k : kids) next.push_back(std::move(k));
            }
            level.complete = level.complete && !budget_hit;
            level.nodes.reserve(next.size());
            for (const auto& st : next) level.nodes.push_back(to_tree_node(st, depth));
            std::sort(level.nodes.begin(), level.nodes.end(),
                      [](const TreeNode& a, const TreeNode& b) { return a.left < b.left; });
            out.levels.push_back(std::move(level));
            parent_level_complete = out.levels.back().complete;
            frontier = std::move(next);
            if (budget_hit) break;
        }
        for (const auto& st : frontier)
            out.min_frontier_mass = std::min(out.min_frontier_mass, st.mass.get_d());
        return out;
    }

    // mass-priority: always expand the heaviest pending parent, so the
    // maximal-mass cylinder at every scale is resolved before the budget runs
    // out; the frontier minimum bounds what remains unexplored
    struct PQItem {
        double mass;
        std::size_t seq;
        bool operator<(const PQItem& o) const {
            if (mass != o.mass) return mass < o.mass;
            return seq > o.seq;  // deterministic tiebreak
        }
    };
    std::vector<NodeState> pool;
    std::vector<unsigned> depth_of;
    std::priority_queue<PQItem> pq;
    pool.push_back(std::move(root));
    depth_of.push_back(0);
    pq.push({1.0, 0});
    std::vector<std::vector<TreeNode>> by_depth(1);
    by_depth[0].push_back(out.levels[0].nodes[0]);

    while (!pq.empty() && out.nodes_enumerated < node_budget) {
        PQItem top = pq.top();
        pq.pop();
        const NodeState par = pool[top.seq];  // copy: pool may reallocate
        unsigned d = depth_of[top.seq] + 1;
        auto kids = expand_family(scheme, par, out);
        out.nodes_enumerated += kids.size();
        if (by_depth.size() <= d) by_depth.resize(d + 1);
        for (auto& k : kids) {
            by_depth[d].push_back(to_tree_node(k, d));
            pq.push({k.mass.get_d(), pool.size()});
            pool.push_back(std::move(k));
            depth_of.push_back(d);
        }
    }
    while (!pq.empty()) {
        out.min_frontier_mass = std::min(out.min_frontier_mass, pq.top().mass);
        pq.pop();
    }
    out.levels.clear();
    for (std::size_t d = 0; d < by_depth.size(); ++d) {
        TreeLevel level;
        level.nodes = std::move(by_depth[d]);
        std::sort(level.nodes.begin(), level.nodes.end(),
                  [](const TreeNode& a, const TreeNode& b) { return a.left < b.left; });
        level.complete = false;  // priority order makes no completeness claim
        out.levels.push_back(std::move(level));
    }
    out.levels.front().complete = true;
    return out;
}

HolderProfile holder_profile(const CantorScheme& scheme, std::size_t node_budget,
                             const std::vector<double>& h_grid, ExpandOrder order) {
    TreeEnumeration tree = enumerate_tree(scheme, node_budget, order);
    // candidates: single cylinders and unions of two adjacent ones
    std::vector<std::pair<double, double>> cand;  // (length, mass)
    cand.emplace_back(1.0, 1.0);
    for (const auto& level : tree.levels) {
        for (std::size_t i = 0; i < level.nodes.size(); ++i) {
            const TreeNode& u = level.nodes[i];
            cand.emplace_back(u.length.get_d(), u.mass.get_d());
            if (i + 1 < level.nodes.size()) {
                const TreeNode& v = level.nodes[i + 1];
                double span = Rat(v.left + v.length - u.left).get_d();
                cand.emplace_back(span, Rat(u.mass + v.mass).get_d());
            }
        }
    }
    std::sort(cand.begin(), cand.end());
    std::vector<double> lens, best;
    lens.reserve(cand.size());
    best.reserve(cand.size());
    double running = 0;
    for (const auto& [len, mass] : cand) {
        running = std::max(running, mass);
        lens.push_back(len);
        best.push_back(running);
    }
    const double min_len = lens.front();

    HolderProfile hp;
    hp.nodes_used = tree.nodes_enumerated;
    std::vector<double> fit_x, fit_y;
    for (double h : h_grid) {
        auto it = std::upper_bound(lens.begin(), lens.end(), h);
        double mass = it == lens.begin() ? 0.0 : best[static_cast<std::size_t>(it - lens.begin()) - 1];
        hp.h.push_back(h);
        hp.max_mass.push_back(mass);
        // fit only where the enumerated tree resolves the scale: below the
        // finest cylinder the staircase goes flat and would bias the slope
        if (mass > tree.min_frontier_mass && mass < 1.0 && h < 1.0 && h >= min_len) {
            fit_x.push_back(std::log(h));
            fit_y.push_back(std::log(mass));
        }
    }
    if (fit_x.size() >= 2) hp.fitted_exponent = least_squares(fit_x, fit_y).slope;
    return hp;
}

double lambda_upper(const TreeEnumeration& tree, double h) {
    // deepest complete level
    const TreeLevel* level = nullptr;
    for (const auto& l : tree.levels)
        if (l.complete && !l.nodes.empty()) level = &l;
    if (!level) return 1.0;
    const auto& nodes = level->nodes;
    std::vector<double> lefts(nodes.size()), rights(nodes.size()), prefix(nodes.size() + 1, 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        lefts[i] = nodes[i].left.get_d();
        rights[i] = Rat(nodes[i].left + nodes[i].length).get_d();
        prefix[i + 1] = prefix[i] + nodes[i].mass.get_d();
    }
    double bestv = 0;
    std::size_t i = 0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        while (i < j && rights[i] < lefts[j] - h) ++i;
        bestv = std::max(bestv, prefix[j + 1] - prefix[i]);
    }
    return bestv;
}

// --- scales ------------------------------------------------------------------

ScaleParams scale_params(const CantorScheme& scheme, unsigned levels) {
    ScaleParams sp;
    sp.p_sigma_m = scheme.p_sigma_m();
    sp.tau = scheme.tau.get_d();
    sp.eps = scheme.params.eps.get_d();
    for (unsigned k = 1; k <= levels; ++k) {
        try {
            sp.n_k.push_back(scheme.n_k(k));
        } catch (const std::exception&) {
            break;
        }
    }
    return sp;
}

ScaleClass classify_scale(const ScaleParams& sp, double log_zeta) {
    if (sp.n_k.empty()) throw std::domain_error("classify_scale: empty schedule");
    const double ps = sp.p_sigma_m;
    const double lo_c = 1 - 4 * sp.eps;
    const double hi_c = sp.tau + 1 + 4 * sp.eps;
    if (log_zeta <= lo_c * static_cast<double>(sp.n_k[0]) * ps)
        throw std::domain_error("below-first-scale");
    // typical first: its endpoints are closed
    for (std::size_t k = 0; k + 1 < sp.n_k.size(); ++k) {
        double lo = hi_c * static_cast<double>(sp.n_k[k]) * ps;
        double hi = lo_c * static_cast<double>(sp.n_k[k + 1]) * ps;
        if (log_zeta >= lo && log_zeta <= hi) {
            ScaleClass sc;
            sc.typical = true;
            sc.k = static_cast<unsigned>(k + 1);
            sc.n_zeta = static_cast<long>(
                std::floor((log_zeta - sp.tau * static_cast<double>(sp.n_k[k]) * ps) / ps));
            return sc;
        }
    }
    for (std::size_t k = 0; k < sp.n_k.size(); ++k) {
        double lo = lo_c * static_cast<double>(sp.n_k[k]) * ps;
        double hi = hi_c * static_cast<double>(sp.n_k[k]) * ps;
        if (log_zeta > lo && log_zeta < hi) {
            ScaleClass sc;
            sc.typical = false;
            sc.k = static_cast<unsigned>(k + 1);
            return sc;
        }
    }
    throw std::domain_error("classify_scale: log zeta beyond the materialized schedule");
}

double tau_threshold() { return (std::sqrt(73.0) - 3.0) / 8.0; }

double alpha0_value(Alpha0Config cfg, double tau) {
    switch (cfg) {
        case Alpha0Config::ConsistentClosedForm:
            // common value of the two branch expressions at the tau threshold
            return (10.0 - std::sqrt(73.0)) / 9.0;
        case Alpha0Config::PrintedClosedForm:
            return (116.0 - 13.0 * std::sqrt(73.0)) / 144.0;
        case Alpha0Config::ChooseMidpoint: {
            double lo = (tau * tau + tau) / ((tau + 2) * (tau + 2));
            double hi = (2 - tau) / (3 * (tau + 2));
            return (lo + hi) / 2;
        }
    }
    throw std::logic_error("unreachable");
}

AlphaChoice select_alpha(const ScaleParams& sp, double xi, Alpha0Config cfg) {
    const double tau = sp.tau;
    if (tau >= tau_threshold())
        throw std::domain_error("tau-above-threshold: requires tau < (sqrt(73)-3)/8");
    AlphaChoice out;
    out.alpha0 = alpha0_value(cfg, tau);
    out.choose_lo = (tau * tau + tau) / ((tau + 2) * (tau + 2));
    out.choose_hi = (2 - tau) / (3 * (tau + 2));

    ScaleClass sc = classify_scale(sp, out.alpha0 * std::log(xi));
    out.typical_branch = sc.typical;
    out.alpha = sc.typical ? out.alpha0 : out.alpha0 * (tau + 1 + 10 * sp.eps);
    if (sc.typical) {
        if (!(out.choose_lo < out.alpha && out.alpha < out.choose_hi))
            throw std::runtime_error(
                "constraint-violated: alpha0 configuration misses the admissible interval");
    } else {
        bool ok = (1 - 2 * out.alpha) > 0 && out.alpha < 1.0 / 3 &&
                  (2 * out.alpha - 1 - out.alpha * (tau + 2) / (tau + 1)) < 0;
        if (!ok)
            throw std::runtime_error(
                "constraint-violated: exceptional-branch inequalities fail for this alpha0");
    }
    return out;
}

// --- transform estimation -----------------------------------------------------

FourierEstimate fourier_estimate(const CantorScheme& scheme, const std::vector<double>& xis,
                                 std::size_t sample_count, std::uint64_t seed,
                                 const Int& target_q, unsigned threads) {
    if (sample_count < 1) throw std::domain_error("sample_count must be >= 1");
    for (double xi : xis)
        if (std::fabs(xi) * 10 > Rat(target_q).get_d())
            throw std::domain_error("target_q must be >= 10 * max |xi|");

    // draw midpoints; chunked so the reduction order is thread-count independent
    const std::size_t chunk = 4096;
    const std::size_t nchunks = (sample_count + chunk - 1) / chunk;
    auto chunks = parallel_map_ordered<std::vector<double>>(nchunks, threads, [&](std::size_t ci) {
        std::vector<double> xs;
        std::size_t begin = ci * chunk;
        std::size_t end = std::min(sample_count, begin + chunk);
        xs.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = stream_rng(seed, i);
            DrawState st;
            draw_word(scheme, rng, target_q, st);
            cf::Cylinder cyl = cf::cylinder(st.word);
            xs.push_back(Rat(cyl.left + cyl.length / 2).get_d());
        }
        return xs;
    });
    std::vector<double> xs;
    xs.reserve(sample_count);
    for (auto& c : chunks)
        for (double v : c) xs.push_back(v);

    FourierEstimate est;
    est.samples = sample_count;
    const double sc = 1.0 / static_cast<double>(sample_count);
    const double tq = Rat(target_q).get_d();
    auto points = parallel_map_ordered<FourierPoint>(xis.size(), threads, [&](std::size_t j) {
        double xi = xis[j];
        double re = 0, im = 0;
        for (double x : xs) {
            double ang = -2 * std::numbers::pi * xi * x;
            re += std::cos(ang);
            im += std::sin(ang);
        }
        FourierPoint p;
        p.xi = xi;
        p.re = re * sc;
        p.im = im * sc;
        p.stderr_ = std::sqrt(sc);
        p.truncation_err = 2 * std::numbers::pi * std::fabs(xi) / (tq * tq);
        return p;
    });
    est.points = std::move(points);

    std::vector<double> lx, ly;
    for (const auto& p : est.points) {
        double mod = std::hypot(p.re, p.im);
        if (p.xi > 0 && mod > 3 * p.stderr_) {
            lx.push_back(std::log(p.xi));
            ly.push_back(std::log(mod));
        }
    }
    est.retained = lx.size();
    if (lx.size() < 2)
        throw std::runtime_error("all-points-below-noise: increase the sample count");
    est.fit_slope = least_squares(lx, ly).slope;

    // pairs bootstrap for the slope interval
    const unsigned B = 1000;
    std::vector<double> slopes;
    slopes.reserve(B);
    Rng brng(seed ^ 0xb00757a9ULL);
    for (unsigned b = 0; b < B; ++b) {
        std::vector<double> bx, by;
        bx.reserve(lx.size());
        for (std::size_t i = 0; i < lx.size(); ++i) {
            auto pick = static_cast<std::size_t>(brng.below(lx.size()));
            bx.push_back(lx[pick]);
            by.push_back(ly[pick]);
        }
        bool degenerate = true;
        for (std::size_t i = 1; i < bx.size(); ++i)
            if (bx[i] != bx[0]) degenerate = false;
        if (degenerate) {
            --b;  // resample; cannot fit a slope on one abscissa
            continue;
        }
        slopes.push_back(least_squares(bx, by).slope);
    }
    est.fit_ci_lo = quantile(slopes, 0.025);
    est.fit_ci_hi = quantile(slopes, 0.975);
    return est;
}

// --- serialization -------------------------------------------------------------

namespace {

void put_line(std::string& out, const std::string& s) {
    out += s;
    out += '\n';
}

std::string rat_str(const Rat& r) { return r.get_str(); }

}  // namespace

std::string scheme_cache_key(const CantorScheme& scheme) {
    std::ostringstream os;
    os << "kaufman-scheme-v1|N=" << scheme.params.N << "|m=" << scheme.params.m
       << "|j0=" << scheme.params.j0 << "|eps=" << rat_str(scheme.params.eps)
       << "|eps_mean=" << rat_str(scheme.good.eps_mean) << "|tau=" << rat_str(scheme.tau)
       << "|mode=" << (scheme.mode == CantorScheme::PhiMode::PowerLawTau ? "power" : "general")
       << "|cexp=" << rat_str(scheme.c_exponent) << "|sched=";
    switch (scheme.schedule.mode) {
        case ScheduleSpec::Mode::DeskArithmetic: os << "arith:" << scheme.schedule.stride; break;
        case ScheduleSpec::Mode::DeskGeometric: os << "geom:" << scheme.schedule.n1; break;
        case ScheduleSpec::Mode::PaperFaithful: os << "paper:" << scheme.schedule.n1; break;
        case ScheduleSpec::Mode::Explicit: {
            os << "explicit";
            for (auto n : scheme.schedule_cache) os << ":" << n;
            break;
        }
    }
    if (scheme.mode == CantorScheme::PhiMode::General) {
        os << "|phi=" << rat_str(scheme.phi.coef) << "^" << scheme.phi.exp_num << "/"
           << scheme.phi.exp_den << "|Q=";
        for (const auto& q : scheme.Q) os << q.get_str() << ",";
    }
    return os.str();
}

std::vector<unsigned char> serialize_scheme(const CantorScheme& scheme) {
    if (scheme.mode == CantorScheme::PhiMode::General)
        throw std::runtime_error("general-mode schemes are session-built, not cacheable");
    std::string out;
    put_line(out, "dioph-scheme-v1");
    put_line(out, scheme_cache_key(scheme));
    put_line(out, "weights " + std::to_string(scheme.dist.weights.size()));
    for (const auto& w : scheme.dist.weights) put_line(out, rat_str(w));
    put_line(out, "good " + std::to_string(scheme.good.words.size()));
    for (std::size_t i = 0; i < scheme.good.words.size(); ++i) {
        std::string line;
        for (const auto& d : scheme.good.words[i].digits()) {
            line += d.get_str();
            line += ' ';
        }
        line += "| " + rat_str(scheme.good.nu_weights[i]);
        put_line(out, line);
    }
    put_line(out, "numass " + rat_str(scheme.good.nu_mass));
    return {out.begin(), out.end()};
}

CantorScheme deserialize_scheme(const std::vector<unsigned char>& bytes) {
    // The canonical key pins every construction parameter, so rebuilding from
    // the embedded key and re-checking the payload keeps loads honest.
    std::string text(bytes.begin(), bytes.end());
    std::istringstream is(text);
    std::string magic;
    std::getline(is, magic);
    if (magic != "dioph-scheme-v1") throw std::runtime_error("cache-corrupt: bad magic");
    std::string key;
    std::getline(is, key);

    auto grab = [&](const std::string& name, const std::string& from) {
        auto pos = from.find("|" + name + "=");
        if (pos == std::string::npos) throw std::runtime_error("cache-corrupt: missing " + name);
        pos += name.size() + 2;
        auto end = from.find('|', pos);
        return from.substr(pos, end == std::string::npos ? end : end - pos);
    };
    BlockParams params;
    params.N = static_cast<unsigned>(std::stoul(grab("N", key)));
    params.m = static_cast<unsigned>(std::stoul(grab("m", key)));
    params.j0 = static_cast<unsigned>(std::stoul(grab("j0", key)));
    params.eps = Rat(grab("eps", key), 10);
    Rat eps_mean(grab("eps_mean", key), 10);
    Rat tau(grab("tau", key), 10);
    std::string sched = grab("sched", key);

    BlockDistribution dist = build_block_distribution(params);
    GoodBlockSet good = build_good_set(dist, params.j0, eps_mean);
    ScheduleSpec spec;
    if (sched.rfind("arith:", 0) == 0) {
        spec = ScheduleSpec::desk_arithmetic(std::stoul(sched.substr(6)));
    } else if (sched.rfind("geom:", 0) == 0) {
        spec = ScheduleSpec::desk_geometric(std::stoul(sched.substr(5)));
    } else if (sched.rfind("paper:", 0) == 0) {
        spec = ScheduleSpec::paper_faithful(std::stoul(sched.substr(6)));
    } else if (sched.rfind("explicit", 0) == 0) {
        std::vector<unsigned long> ns;
        std::stringstream ss(sched.substr(8));
        std::string tok;
        while (std::getline(ss, tok, ':'))
            if (!tok.empty()) ns.push_back(std::stoul(tok));
        spec = ScheduleSpec::explicit_list(ns);
    } else {
        throw std::runtime_error("cache-corrupt: unknown schedule");
    }
    CantorScheme scheme = build_scheme(std::move(dist), std::move(good), tau, spec);
    if (scheme_cache_key(scheme) != key) throw std::runtime_error("cache-corrupt: key mismatch");
    std::vector<unsigned char> again = serialize_scheme(scheme);
    if (again != bytes) throw std::runtime_error("cache-corrupt: payload mismatch");
    return scheme;
}

}  // namespace dioph::kaufman
