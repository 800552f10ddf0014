#pragma once

// Hitting-count experiments for lacunary sequences: R(x,N) counts, Schmidt
// counts over all denominators, zero-one dichotomy runs, pair correlations,
// and exact star discrepancy.  Distance-to-integer comparisons are exact
// rational arithmetic whenever the inputs allow it; otherwise they pass
// through outward-rounded enclosures with an explicit uncertain bucket.

#include "dioph/big.hpp"
#include "dioph/interval.hpp"
#include "dioph/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dioph::counting {

struct LacunarySequence {
    enum class Kind { Geometric, IntegerPower, Explicit };

    Kind kind = Kind::IntegerPower;
    Rat q0 = 1;          // geometric: q_n = q0 * C^n
    Rat ratio = 2;       // C
    unsigned long base = 2;  // integer power: q_n = base^n
    std::vector<Rat> list;   // explicit terms q_1, q_2, ...

    static LacunarySequence geometric(Rat q0, Rat C);
    static LacunarySequence integer_power(unsigned long b);
    // Validates the gap condition q_{n+1}/q_n >= C on construction.
    static LacunarySequence explicit_list(std::vector<Rat> terms, const Rat& C);

    // q_1..q_N, computed incrementally.
    std::vector<Rat> values(std::size_t N) const;
};

struct ApproxFunction {
    enum class Kind { PowerOfQ, PowerOfIndex, Table };

    Kind kind = Kind::PowerOfIndex;
    Rat coef = 1;
    long u = -1;             // exponent numerator
    unsigned long v = 1;     // exponent denominator
    std::vector<Rat> table;  // per-index values for Kind::Table
    mpfr_prec_t prec = 128;

    static ApproxFunction power_of_q(Rat coef, long u, unsigned long v = 1);
    static ApproxFunction power_of_index(Rat coef, long u, unsigned long v = 1);
    static ApproxFunction from_table(std::vector<Rat> values);

    bool exact() const { return kind == Kind::Table || v == 1; }

    // psi at index n (1-based) where the sequence value is q.
    RatInterval value(std::size_t n, const Rat& q) const;
    double value_d(std::size_t n, const Rat& q) const;
};

struct CountRecord {
    std::size_t N = 0;
    std::size_t R = 0;            // certain hits
    std::size_t uncertain = 0;    // comparisons the enclosure could not resolve
    double Psi = 0;               // sum of psi(q_n), n <= N
    std::optional<std::vector<std::size_t>> hits;
    std::string x_provenance;
};

// R(x, N) = #{ n <= N : || q_n x - gamma || <= psi(q_n) }.
// x_halfwidth > 0 treats x as the enclosure [x - w, x + w].
CountRecord hitting_count(const Rat& x, const Rat& x_halfwidth, std::size_t N, const Rat& gamma,
                          const ApproxFunction& psi, const LacunarySequence& A,
                          bool keep_hits = false);

// #{ 1 <= q <= Q : || q x - gamma || < psi(q) }, psi non-increasing into [0, 1/2).
std::size_t schmidt_count(const Rat& x, std::size_t Q, const Rat& gamma,
                          const ApproxFunction& psi);

// Star discrepancy of (q_n x mod 1)_{n<=N}, exact via the sorted-points formula.
Rat discrepancy(const Rat& x, const LacunarySequence& A, std::size_t N);

// --- experiments ---------------------------------------------------------

struct CountRow {
    std::size_t N;
    std::size_t sample_id;
    std::size_t R;
    double Psi;
    double norm_err;  // (R - 2 Psi) / (Psi^(1/2) (log(Psi+2))^(3/2+eps0))
};

struct CountingLawResult {
    std::vector<std::size_t> checkpoints;     // dyadic N values plus N_max
    std::vector<CountRow> rows;               // checkpoint-major, sample-minor
    std::vector<double> median_abs_norm_err;  // per checkpoint
    std::vector<double> q90_abs_norm_err;     // per checkpoint
    double fitted_exponent = 0;               // slope of median log|R-2Psi| vs log Psi
    double eps0 = 0.1;
    std::size_t total_uncertain = 0;
};

// Lebesgue-ensemble counting-law run; x_i are seeded dyadic rationals with
// enough bits that every comparison stays exact and non-degenerate.
CountingLawResult counting_law_experiment(std::size_t ensemble, std::size_t N_max,
                                          const Rat& gamma, const ApproxFunction& psi,
                                          const LacunarySequence& A, std::uint64_t seed,
                                          unsigned threads = 1);

struct ZeroOneResult {
    double frac_stabilized_convergent = 0;  // no new hits in the second half
    double frac_growing_divergent = 0;      // new hits in the second half
    double frac_above_half_psi_divergent = 0;  // R >= Psi(N_max)/2
    std::size_t ensemble = 0;
};

ZeroOneResult zero_one_experiment(std::size_t ensemble, const LacunarySequence& A,
                                  const Rat& gamma, const ApproxFunction& psi_convergent,
                                  const ApproxFunction& psi_divergent, std::size_t N_max,
                                  std::uint64_t seed, unsigned threads = 1);

struct PairCorrelationResult {
    double empirical = 0;  // fraction of samples hitting both E_{q_m} and E_{q_n}
    double bound = 0;      // 4 psi(q_m) psi(q_n)
    double stderr_ = 0;
    double ratio = 0;      // empirical / bound
};

PairCorrelationResult pair_correlation(std::size_t ensemble, const LacunarySequence& A,
                                       const ApproxFunction& psi, const Rat& gamma,
                                       std::size_t m, std::size_t n, std::uint64_t seed);

// Random-x bit budget: enough bits that (q_n x mod 1) keeps full entropy for
// n <= N, plus guard bits.
unsigned dyadic_bits_needed(const LacunarySequence& A, std::size_t N);

}  // namespace dioph::counting
