#pragma once

// Threshold functions Phi(q) evaluable on big-integer continuants.  Rational
// power laws compare exactly by cross-powering; the log-factor variant goes
// through an outward-rounded enclosure and can report an uncertain verdict.

#include "dioph/big.hpp"
#include "dioph/interval.hpp"

#include <cmath>
#include <stdexcept>

namespace dioph {

struct PhiSpec {
    enum class Kind { PowerLaw, PowerLogLaw };

    Kind kind = Kind::PowerLaw;
    Rat coef = 1;           // c
    long exp_num = 1;       // u in q^(u/v)
    unsigned long exp_den = 1;
    long log_power = 0;     // w in c * q^(u/v) * (ln q)^w
    mpfr_prec_t prec = 128;

    static PhiSpec power(Rat c, long u, unsigned long v = 1) {
        PhiSpec p;
        p.kind = Kind::PowerLaw;
        p.coef = std::move(c);
        p.exp_num = u;
        p.exp_den = v;
        return p;
    }

    static PhiSpec power_log(Rat c, long u, unsigned long v, long w, mpfr_prec_t prec = 128) {
        PhiSpec p;
        p.kind = Kind::PowerLogLaw;
        p.coef = std::move(c);
        p.exp_num = u;
        p.exp_den = v;
        p.log_power = w;
        p.prec = prec;
        return p;
    }

    // Verdict on a >= Phi(q).  PowerLaw decides exactly (ties included);
    // PowerLogLaw may return Unknown when the enclosure straddles a.
    Truth3 at_least(const Rat& a, const Int& q) const {
        if (q <= 0) throw std::domain_error("PhiSpec: q must be positive");
        if (kind == Kind::PowerLaw) {
            return cmp_scaled_power(a, coef, q, exp_num, exp_den) >= 0 ? Truth3::True
                                                                       : Truth3::False;
        }
        RatInterval iv = eval_interval(q);
        if (a >= iv.hi) return Truth3::True;
        if (a < iv.lo) return Truth3::False;
        return Truth3::Unknown;
    }

    RatInterval eval_interval(const Int& q) const {
        Rat expo = make_rat(Int(exp_num), Int(exp_den));
        RatInterval v = pow_interval(Rat(q), expo, prec);
        v = v * coef;
        if (kind == Kind::PowerLogLaw && log_power != 0) {
            if (q == 1) return {Rat(0), Rat(0)};
            RatInterval lg = log_interval(Rat(q), prec);
            for (long i = 0; i < log_power; ++i) {
                RatInterval t{v.lo * lg.lo, v.hi * lg.hi};  // all positive here
                v = t;
            }
        }
        return v;
    }

    double eval_d(double q) const {
        double e = static_cast<double>(exp_num) / static_cast<double>(exp_den);
        double v = coef.get_d() * std::pow(q, e);
        if (kind == Kind::PowerLogLaw) v *= std::pow(std::log(q), static_cast<double>(log_power));
        return v;
    }
};

}  // namespace dioph
