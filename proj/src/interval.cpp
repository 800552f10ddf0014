#include "dioph/interval.hpp"

#include <stdexcept>

namespace dioph {

Rat mpfr_to_rat(mpfr_srcptr x) {
    if (!mpfr_number_p(x)) throw std::domain_error("mpfr_to_rat: non-finite value");
    if (mpfr_zero_p(x)) return Rat(0);
    Int mant;
    mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), x);
    Rat r(mant);
    if (e >= 0) {
        mpz_mul_2exp(r.get_num_mpz_t(), r.get_num().get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    } else {
        mpz_mul_2exp(r.get_den_mpz_t(), r.get_den().get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
    }
    r.canonicalize();
    return r;
}

namespace {

template <typename Op>
RatInterval unary_enclosure(const Rat& x, mpfr_prec_t prec, Op op) {
    MpfrReal in(prec + 8), lo(prec), hi(prec);
    mpfr_set_q(in.get(), x.get_mpq_t(), MPFR_RNDD);
    // in == x exactly only if x fits the precision; widen via both roundings.
    MpfrReal in_up(prec + 8);
    mpfr_set_q(in_up.get(), x.get_mpq_t(), MPFR_RNDU);
    op(lo.get(), in.get(), MPFR_RNDD);
    op(hi.get(), in_up.get(), MPFR_RNDU);
    RatInterval out{mpfr_to_rat(lo.get()), mpfr_to_rat(hi.get())};
    if (out.lo > out.hi) std::swap(out.lo, out.hi);  // monotone decreasing ops
    return out;
}

}  // namespace

RatInterval log_interval(const Rat& x, mpfr_prec_t prec) {
    if (x <= 0) throw std::domain_error("log_interval: nonpositive argument");
    return unary_enclosure(x, prec, [](mpfr_ptr r, mpfr_srcptr a, mpfr_rnd_t rnd) {
        mpfr_log(r, a, rnd);
    });
}

RatInterval exp_interval(const Rat& x, mpfr_prec_t prec) {
    return unary_enclosure(x, prec, [](mpfr_ptr r, mpfr_srcptr a, mpfr_rnd_t rnd) {
        mpfr_exp(r, a, rnd);
    });
}

RatInterval exp_interval(const RatInterval& x, mpfr_prec_t prec) {
    RatInterval lo = exp_interval(x.lo, prec);
    RatInterval hi = exp_interval(x.hi, prec);
    return {lo.lo, hi.hi};
}

RatInterval sqrt_interval(const Rat& x, mpfr_prec_t prec) {
    if (x < 0) throw std::domain_error("sqrt_interval: negative argument");
    return unary_enclosure(x, prec, [](mpfr_ptr r, mpfr_srcptr a, mpfr_rnd_t rnd) {
        mpfr_sqrt(r, a, rnd);
    });
}

RatInterval pow_interval(const Rat& base, const Rat& expo, mpfr_prec_t prec) {
    if (base <= 0) throw std::domain_error("pow_interval: base must be positive");
    // base^expo = exp(expo * log base); handle the sign of expo by interval product.
    RatInterval lg = log_interval(base, prec);
    RatInterval prod = lg * expo;
    return exp_interval(prod, prec);
}

Rat pow_rounded(const Rat& base, const Rat& expo, mpfr_prec_t prec, Rat* error_radius) {
    RatInterval iv = pow_interval(base, expo, prec);
    Rat mid = (iv.lo + iv.hi) / 2;
    if (error_radius) *error_radius = (iv.hi - iv.lo) / 2;
    return mid;
}

}  // namespace dioph
