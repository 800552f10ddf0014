#include "dioph/cf.hpp"

#include <cmath>
#include <stdexcept>

namespace dioph::cf {

void Word::reset() {
    digits_.clear();
    p_ = {Int(1), Int(0)};  // (p_{-1}, p_0)
    q_ = {Int(0), Int(1)};  // (q_{-1}, q_0)
}

void Word::push(const Int& a) {
    if (a < 1) throw std::domain_error("partial quotient must be a positive integer");
    digits_.push_back(a);
    const std::size_t n = p_.size();
    p_.push_back(a * p_[n - 1] + p_[n - 2]);
    q_.push_back(a * q_[n - 1] + q_[n - 2]);
}

void Word::pop() {
    if (digits_.empty()) throw std::out_of_range("pop on empty word");
    digits_.pop_back();
    p_.pop_back();
    q_.pop_back();
}

Rat Word::value() const {
    if (empty()) return Rat(0);
    return make_rat(pn(), qn());
}

Word Word::concat(const Word& suffix) const {
    Word out = *this;
    for (const auto& a : suffix.digits()) out.push(a);
    return out;
}

Cylinder cylinder(const Word& w) {
    if (w.empty()) throw std::domain_error("cylinder of the empty word");
    Cylinder c;
    c.word = w;
    Rat at0 = make_rat(w.pn(), w.qn());
    Rat at1 = make_rat(w.pn() + w.p_prev(), w.qn() + w.q_prev());
    // x(t) = (p_n + t p_{n-1}) / (q_n + t q_{n-1}) is monotone in t with the
    // sign of (-1)^n, so the endpoint order alternates with parity.
    if (w.size() % 2 == 0) {
        c.left = at0;
        c.right = at1;
    } else {
        c.left = at1;
        c.right = at0;
    }
    c.length = make_rat(Int(1), w.qn() * (w.qn() + w.q_prev()));
    return c;
}

Rat continuant_ratio(const Word& prefix, const Word& suffix) {
    if (prefix.empty() || suffix.empty())
        throw std::domain_error("continuant_ratio needs two non-empty words");
    Word joined = prefix.concat(suffix);
    return make_rat(joined.qn(), prefix.qn() * suffix.qn());
}

ExpandResult cf_expand(const Rat& x, std::size_t depth) {
    if (x < 0 || x >= 1) throw std::domain_error("cf_expand: input outside [0,1)");
    if (depth < 1) throw std::domain_error("cf_expand: depth must be >= 1");
    ExpandResult res;
    res.requested = depth;
    Rat t = x;
    while (res.word.size() < depth) {
        if (t == 0) {
            res.rational_terminated = true;
            return res;
        }
        Rat inv = 1 / t;
        Int a = rfloor(inv);
        res.word.push(a);
        t = inv - Rat(a);
    }
    if (t == 0) res.rational_terminated = true;
    return res;
}

ExpandResult cf_expand(const RatInterval& x, std::size_t depth) {
    if (x.lo > x.hi) throw std::domain_error("cf_expand: malformed enclosure");
    if (x.lo < 0 || x.hi >= 1) throw std::domain_error("cf_expand: enclosure outside [0,1)");
    if (depth < 1) throw std::domain_error("cf_expand: depth must be >= 1");
    if (x.is_point()) return cf_expand(x.lo, depth);

    ExpandResult res;
    res.requested = depth;
    Rat lo = x.lo, hi = x.hi;
    while (res.word.size() < depth) {
        if (lo == 0) {  // 0 in the enclosure: digit floor(1/x) unbounded above
            res.precision_exhausted = true;
            return res;
        }
        Int a_from_hi = rfloor(1 / hi);
        Int a_from_lo = rfloor(1 / lo);
        if (a_from_hi != a_from_lo) {
            res.precision_exhausted = true;
            return res;
        }
        res.word.push(a_from_hi);
        // image under the Gauss map, order flips
        Rat nlo = 1 / hi - Rat(a_from_hi);
        Rat nhi = 1 / lo - Rat(a_from_hi);
        lo = nlo;
        hi = nhi;
        if (lo < 0) lo = 0;  // guard against enclosure slop at exact endpoints
    }
    return res;
}

EventProfile event_profile(const Word& w, const PhiSpec& phi1, const PhiSpec& phi2, const Int& N) {
    if (w.empty()) throw std::domain_error("event_profile of the empty word");
    EventProfile ep;
    ep.bad_N_ok = true;
    for (const auto& a : w.digits())
        if (a > N) ep.bad_N_ok = false;

    for (std::size_t n = 1; n + 1 <= w.size(); ++n) {
        const Int& qn = w.q(n);
        switch (phi1.at_least(Rat(w.digit(n + 1)), qn)) {
            case Truth3::True: ep.hits_K.push_back(n); break;
            case Truth3::Unknown: ep.uncertain_K.push_back(n); break;
            case Truth3::False: break;
        }
        switch (phi2.at_least(Rat(w.digit(n) * w.digit(n + 1)), qn)) {
            case Truth3::True: ep.hits_G.push_back(n); break;
            case Truth3::Unknown: ep.uncertain_G.push_back(n); break;
            case Truth3::False: break;
        }
    }
    return ep;
}

JarnikBounds jarnik_bounds(long N) {
    if (N < 8) throw std::domain_error("jarnik_bounds requires N >= 8");
    double n = static_cast<double>(N);
    return {1.0 - 1.0 / (n * std::log(2.0)), 1.0 - 1.0 / (8.0 * n * std::log(n))};
}

}  // namespace dioph::cf
