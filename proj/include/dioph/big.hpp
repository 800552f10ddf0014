#pragma once

// Exact big-integer / big-rational helpers on top of GMP's C++ bindings.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dioph {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(long num, long den) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline Rat make_rat(const Int& num, const Int& den) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline Int ipow(Int base, unsigned long e) {
    Int out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
}

inline Rat rpow(const Rat& base, unsigned long e) {
    Rat out;
    mpz_pow_ui(out.get_num_mpz_t(), base.get_num().get_mpz_t(), e);
    mpz_pow_ui(out.get_den_mpz_t(), base.get_den().get_mpz_t(), e);
    return out;  // already canonical
}

// floor(x) for rational x (mpz_fdiv rounds toward -inf).
inline Int rfloor(const Rat& x) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
    return q;
}

inline Int rceil(const Rat& x) {
    Int q;
    mpz_cdiv_q(q.get_mpz_t(), x.get_num().get_mpz_t(), x.get_den().get_mpz_t());
    return q;
}

// Distance to the nearest integer, in [0, 1/2].
inline Rat dist_to_int(const Rat& x) {
    Rat f = x - Rat(rfloor(x));
    Rat other = 1 - f;
    return f <= other ? f : other;
}

// Compares a against c * q^(u/v) exactly via cross-powering.
// Requires a >= 0, c > 0, q >= 1, v >= 1.  Returns -1 / 0 / +1.
inline int cmp_scaled_power(const Rat& a, const Rat& c, const Int& q, long u, unsigned long v) {
    if (a < 0) return -1;
    // a >= c*q^(u/v)  <=>  (a/c)^v >= q^u
    Rat lhs = rpow(a / c, v);
    Rat rhs;
    if (u >= 0) {
        rhs = Rat(ipow(q, static_cast<unsigned long>(u)));
    } else {
        rhs = make_rat(Int(1), ipow(q, static_cast<unsigned long>(-u)));
    }
    return cmp(lhs, rhs);
}

inline Int parse_int(const std::string& s) { return Int(s, 10); }

inline std::string to_string(const Rat& x) { return x.get_str(); }

inline double to_double(const Rat& x) { return x.get_d(); }

}  // namespace dioph
