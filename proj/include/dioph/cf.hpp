#pragma once

// Exact continued-fraction engine: expansions, continuants, cylinder
// intervals, and partial-quotient event detection.  All arithmetic on the
// continuant side is exact; real inputs travel as rational enclosures.

#include "dioph/big.hpp"
#include "dioph/interval.hpp"
#include "dioph/phi.hpp"

#include <cstddef>
#include <vector>

namespace dioph::cf {

// Finite word of partial quotients a_1..a_n with incrementally cached
// continuants.  Index k in p(k)/q(k) refers to the k-digit prefix, with
// q(0) = 1, p(0) = 0 and the convention (p_{-1}, q_{-1}) = (1, 0).
class Word {
  public:
    Word() { reset(); }
    explicit Word(const std::vector<Int>& digits) {
        reset();
        for (const auto& a : digits) push(a);
    }
    explicit Word(std::initializer_list<long> digits) {
        reset();
        for (long a : digits) push(Int(a));
    }

    void push(const Int& a);
    void pop();

    std::size_t size() const { return digits_.size(); }
    bool empty() const { return digits_.empty(); }
    const std::vector<Int>& digits() const { return digits_; }
    const Int& digit(std::size_t i) const { return digits_.at(i - 1); }  // 1-indexed

    const Int& p(std::size_t k) const { return p_.at(k + 1); }
    const Int& q(std::size_t k) const { return q_.at(k + 1); }
    const Int& pn() const { return p_.back(); }
    const Int& qn() const { return q_.back(); }
    const Int& p_prev() const { return p_[p_.size() - 2]; }
    const Int& q_prev() const { return q_[q_.size() - 2]; }

    // Value of the finite continued fraction [a_1, ..., a_n].
    Rat value() const;

    Word concat(const Word& suffix) const;

    bool operator==(const Word& o) const { return digits_ == o.digits_; }

  private:
    void reset();
    std::vector<Int> digits_;
    std::vector<Int> p_, q_;  // entry k+1 holds (p_k, q_k); entry 0 is (p_{-1}, q_{-1})
};

struct Cylinder {
    Word word;
    Rat left;    // inf of the fundamental interval
    Rat right;   // sup
    Rat length;  // 1 / (q_n (q_n + q_{n-1}))
};

Cylinder cylinder(const Word& w);

// q_{n+k}(prefix.suffix) / (q_n(prefix) q_k(suffix)); always in [1, 2].
Rat continuant_ratio(const Word& prefix, const Word& suffix);

struct ExpandResult {
    Word word;
    bool rational_terminated = false;
    bool precision_exhausted = false;
    std::size_t requested = 0;
};

// Expansion of an exact rational in [0,1).  Terminating expansions come out
// in canonical form (final digit never 1) because the Gauss map is applied
// with exact floors.
ExpandResult cf_expand(const Rat& x, std::size_t depth);

// Expansion of a real given as a rational enclosure.  Digits are emitted only
// while both endpoints agree on the floor; otherwise the result is flagged
// precision-exhausted with the digits resolved so far.
ExpandResult cf_expand(const RatInterval& x, std::size_t depth);

struct EventProfile {
    // Indices n (1-based) with a_{n+1} >= Phi1(q_n).
    std::vector<std::size_t> hits_K;
    // Indices n with a_n * a_{n+1} >= Phi2(q_n).
    std::vector<std::size_t> hits_G;
    std::vector<std::size_t> uncertain_K;
    std::vector<std::size_t> uncertain_G;
    bool bad_N_ok = false;  // all digits <= N
};

EventProfile event_profile(const Word& w, const PhiSpec& phi1, const PhiSpec& phi2, const Int& N);

struct JarnikBounds {
    double lower;  // 1 - 1/(N ln 2)
    double upper;  // 1 - 1/(8 N ln N)
};

// Closed-form dimension bounds for the bounded-digit set, N >= 8.
JarnikBounds jarnik_bounds(long N);

}  // namespace dioph::cf
