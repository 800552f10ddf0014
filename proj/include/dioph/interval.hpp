#pragma once

// Rational enclosures of real quantities, with MPFR used for outward-rounded
// transcendentals.  A comparison against an enclosure is three-valued: number
// theory predicates are never decided by silent floating-point rounding.

#include "dioph/big.hpp"

#include <mpfr.h>

namespace dioph {

enum class Cmp3 { Less, Greater, Uncertain };

// Closed interval [lo, hi] with exact rational endpoints.
struct RatInterval {
    Rat lo;
    Rat hi;

    RatInterval() = default;
    RatInterval(Rat v) : lo(v), hi(v) {}
    RatInterval(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {}

    bool is_point() const { return lo == hi; }
    Rat width() const { return hi - lo; }
    double mid_d() const { return (lo.get_d() + hi.get_d()) / 2; }

    RatInterval operator+(const RatInterval& o) const { return {lo + o.lo, hi + o.hi}; }
    RatInterval operator-(const RatInterval& o) const { return {lo - o.hi, hi - o.lo}; }
    RatInterval operator*(const Rat& c) const {
        return c >= 0 ? RatInterval{lo * c, hi * c} : RatInterval{hi * c, lo * c};
    }
};

inline RatInterval operator*(const Rat& c, const RatInterval& iv) { return iv * c; }

// x <=> [lo,hi]: Less when x < lo, Greater when x > hi, else Uncertain
// (which includes genuine containment).
inline Cmp3 cmp_point_interval(const Rat& x, const RatInterval& iv) {
    if (x < iv.lo) return Cmp3::Less;
    if (x > iv.hi) return Cmp3::Greater;
    return Cmp3::Uncertain;
}

// Tri-valued a <= b for intervals.
enum class Truth3 { True, False, Unknown };

inline Truth3 leq(const RatInterval& a, const RatInterval& b) {
    if (a.hi <= b.lo) return Truth3::True;
    if (a.lo > b.hi) return Truth3::False;
    return Truth3::Unknown;
}

inline Truth3 lt(const RatInterval& a, const RatInterval& b) {
    if (a.hi < b.lo) return Truth3::True;
    if (a.lo >= b.hi) return Truth3::False;
    return Truth3::Unknown;
}

// --- MPFR-backed enclosure builders -------------------------------------

// RAII wrapper around a single mpfr_t.
class MpfrReal {
  public:
    explicit MpfrReal(mpfr_prec_t prec) { mpfr_init2(x_, prec); }
    ~MpfrReal() { mpfr_clear(x_); }
    MpfrReal(const MpfrReal&) = delete;
    MpfrReal& operator=(const MpfrReal&) = delete;
    mpfr_ptr get() { return x_; }

  private:
    mpfr_t x_;
};

// Exact conversion mpfr -> rational (finite values only).
Rat mpfr_to_rat(mpfr_srcptr x);

// Enclosures at `prec` bits of working precision.
RatInterval log_interval(const Rat& x, mpfr_prec_t prec = 128);   // x > 0
RatInterval exp_interval(const Rat& x, mpfr_prec_t prec = 128);
RatInterval exp_interval(const RatInterval& x, mpfr_prec_t prec = 128);
RatInterval sqrt_interval(const Rat& x, mpfr_prec_t prec = 128);  // x >= 0
// base^expo for base > 0 (expo any rational).
RatInterval pow_interval(const Rat& base, const Rat& expo, mpfr_prec_t prec = 128);

// Nearest-rounded rational approximation of base^expo (used where an exact
// probability vector is later renormalized; the rounding is recorded by the
// caller via the returned error radius).
Rat pow_rounded(const Rat& base, const Rat& expo, mpfr_prec_t prec, Rat* error_radius);

}  // namespace dioph
