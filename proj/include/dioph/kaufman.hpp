#pragma once

// Mass-distribution construction on a continued-fraction Cantor set: block
// digits weighted by a continuant power law, a good-block set carved out by
// an empirical-mean condition, and inserted digit pairs (4, c_k) that force
// a product event a_n a_{n+1} >= 3 Phi(q_n) while each single digit stays
// below the 3 Phi threshold.  Masses are exact rationals end to end; the
// construction is sampleable, enumerable, and serializable.

#include "dioph/big.hpp"
#include "dioph/cf.hpp"
#include "dioph/interval.hpp"
#include "dioph/phi.hpp"
#include "dioph/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dioph::kaufman {

struct BlockParams {
    unsigned N = 2;   // digit alphabet {1..N}
    unsigned m = 1;   // digits per lambda-block
    unsigned j0 = 2;  // lambda-blocks per super-block
    Rat eps;          // distortion parameter
    unsigned p() const { return j0 * m; }
};

struct BlockDistribution {
    BlockParams params;
    std::vector<cf::Word> blocks;  // all m-tuples over {1..N}, lexicographic
    std::vector<Rat> weights;      // exact probability vector near q^{-2(1-eps)}/Sigma
    Rat rounding_radius;           // recorded bound on the pre-normalization rounding
    RatInterval Sigma_m;           // enclosure of the unnormalized mass sum
    RatInterval mean_log_q;        // enclosure of m * sigma_m = E log q_m

    double sigma_m_d() const {
        return mean_log_q.mid_d() / static_cast<double>(params.m);
    }
};

// Enumerates {1..N}^m and the exact weight vector.  Guard: N^m <= 10^7.
BlockDistribution build_block_distribution(const BlockParams& params, mpfr_prec_t prec = 192);

struct GoodBlockSet {
    BlockParams params;
    Rat eps_mean;                   // tolerance used in the empirical-mean condition
    std::vector<cf::Word> words;    // admitted p-digit words, lexicographic
    std::vector<Rat> nu_weights;    // product weights of admitted tuples
    Rat nu_mass;                    // total admitted product mass
    std::vector<Rat> nubar;         // nu_weights / nu_mass (sums to 1 exactly)
    std::size_t tuples_total = 0;
    std::size_t unresolved = 0;     // tuples whose membership comparison stayed unknown
    bool mass_ok() const { return nu_mass > make_rat(1, 2); }
};

// All (N^m)^{j0} tuples tested against |mean log Y - E| <= eps_mean * E.
// Guard: tuple count <= 10^7.  Never fails on mass; see build_good_set.
GoodBlockSet enumerate_good_set(const BlockDistribution& dist, unsigned j0, const Rat& eps_mean,
                                mpfr_prec_t prec = 192);

// Same, but fails loudly when the admitted mass is <= 1/2.
GoodBlockSet build_good_set(const BlockDistribution& dist, unsigned j0, const Rat& eps_mean,
                            mpfr_prec_t prec = 192);

struct ScheduleSpec {
    enum class Mode { PaperFaithful, DeskArithmetic, DeskGeometric, Explicit };
    Mode mode = Mode::DeskArithmetic;
    unsigned long n1 = 1;      // first insertion position (blocks completed)
    unsigned long stride = 1;  // arithmetic: n_k = stride * k
    std::vector<unsigned long> list;  // explicit positions, strictly increasing

    static ScheduleSpec desk_arithmetic(unsigned long stride);
    static ScheduleSpec desk_geometric(unsigned long n1);
    static ScheduleSpec paper_faithful(unsigned long n1);
    static ScheduleSpec explicit_list(std::vector<unsigned long> ns);
};

struct PaperHypotheses {
    bool eps_in_paper_range = false;   // eps < min(1/(100 tau), 1/8)
    bool schedule_growth_ok = false;   // the super-exponential schedule inequality
    bool sigma_normalizer_ok = false;  // Sigma_m >= 2^10
    bool block_length_ok = false;      // m >= log N / eps + 1
    bool q_ratio_ok = true;            // general mode: log Q_k / log Q_{k+1} < eps/1000
};

struct CantorScheme {
    enum class PhiMode { PowerLawTau, General };

    BlockParams params;
    BlockDistribution dist;
    GoodBlockSet good;
    Rat tau;               // liminf exponent
    PhiMode mode = PhiMode::PowerLawTau;
    PhiSpec phi;           // general mode: the approximating function itself
    Rat c_exponent;        // tau, or tau + 20 eps in general mode
    ScheduleSpec schedule;
    std::vector<unsigned long> schedule_cache;  // materialized n_k (paper/explicit modes fully)
    std::vector<Int> Q;    // general mode subsequence
    PaperHypotheses hypotheses;

    unsigned long n_k(unsigned k) const;  // 1-based insertion position in blocks
    double p_sigma_m() const {
        return dist.mean_log_q.mid_d() * static_cast<double>(params.j0);
    }

    // 64-bit cumulative thresholds for drawing from nubar (derived, cached).
    const std::vector<std::uint64_t>& nubar_breakpoints() const;

  private:
    mutable std::vector<std::uint64_t> breaks_cache_;
};

// Power-law mode: Phi(q) = q^tau / 3 (so the 3Phi threshold is exactly q^tau).
CantorScheme build_scheme(BlockDistribution dist, GoodBlockSet good, const Rat& tau,
                          const ScheduleSpec& schedule);

// General mode: a non-decreasing Phi with liminf log Phi / log q = tau, plus
// the integer subsequence Q_k the schedule is pinned to.
CantorScheme build_scheme_general(BlockDistribution dist, GoodBlockSet good, const Rat& tau,
                                  const PhiSpec& phi, std::vector<Int> Q);

// Admissible integer range for c at an insertion with continuant q = q(prefix,4):
// smallest/largest c with 1/4 q^e <= c <= 1/2 q^e, e = scheme.c_exponent.
struct CRange {
    Int lo;
    Int hi;
    Int count() const { return hi - lo + 1; }
};
CRange c_range(const CantorScheme& scheme, const Int& q_prefix4);

// --- the measure ----------------------------------------------------------

// Grammar-aligned prefix: blocks, then (4, c) at scheduled positions.
// Throws on words that are not scheme prefixes (including mid-block cuts).
Rat mu_of_cylinder(const CantorScheme& scheme, const cf::Word& word);

struct SampleHandle {
    cf::Word word;
    Rat left;       // enclosing cylinder
    Rat length;
    Rat midpoint;
    double midpoint_d = 0;
    std::uint64_t seed = 0;
};

// Draws a word block-by-block from nubar with c uniform on its admissible
// range, stopping once q(word) > target_q.  Deterministic per seed.
SampleHandle sample_mu(const CantorScheme& scheme, std::uint64_t seed, const Int& target_q);

struct InsertionCheck {
    unsigned k = 0;
    Int q_prefix4;
    Int c;
    bool g_event_ok = false;      // 4 c >= 3 Phi(q)
    Truth3 k_guard = Truth3::Unknown;  // c < 3 Phi(q)
    std::vector<std::pair<std::string, Truth3>> chain;  // general mode links
};

struct MembershipReport {
    std::vector<InsertionCheck> insertions;
    bool all_g_events_ok() const {
        for (const auto& c : insertions)
            if (!c.g_event_ok) return false;
        return !insertions.empty();
    }
};

// Replays the product-event inequalities at every realized insertion.
MembershipReport membership_check(const CantorScheme& scheme, const cf::Word& word);

// --- exhaustive tree ------------------------------------------------------

struct TreeNode {
    Rat left;
    Rat length;
    Rat mass;
    unsigned depth = 0;  // grammar steps from the root
};

struct TreeLevel {
    std::vector<TreeNode> nodes;  // complete level, sorted by left endpoint
    bool complete = false;
};

struct TreeEnumeration {
    std::vector<TreeLevel> levels;    // level g = words with g grammar steps
    std::size_t nodes_enumerated = 0;
    std::size_t conservation_checked = 0;
    std::size_t conservation_violations = 0;
    double min_frontier_mass = 1.0;   // masses below this are unexplored
};

enum class ExpandOrder {
    BreadthFirst,   // complete levels, for exactness and envelope checks
    MassPriority,   // highest-mass parents first, for scale profiling
};

// Expansion with complete child families; a level is marked incomplete when
// the node budget cuts it off.
TreeEnumeration enumerate_tree(const CantorScheme& scheme, std::size_t node_budget,
                               ExpandOrder order = ExpandOrder::BreadthFirst);

struct HolderProfile {
    std::vector<double> h;            // grid, decreasing
    std::vector<double> max_mass;     // realized max mass at scale h (from below)
    double fitted_exponent = 0;       // least-squares log mass vs log h
    std::size_t nodes_used = 0;
};

// Max mu-mass over scheme cylinders (and unions of two adjacent siblings) of
// length <= h, for each h in the dyadic grid.
HolderProfile holder_profile(const CantorScheme& scheme, std::size_t node_budget,
                             const std::vector<double>& h_grid,
                             ExpandOrder order = ExpandOrder::MassPriority);

// Conservative upper envelope of interval masses at scale h, from the
// deepest complete level: max sliding-window sum of intersecting cylinders.
double lambda_upper(const TreeEnumeration& tree, double h);

// --- scales and alpha -----------------------------------------------------

struct ScaleParams {
    double p_sigma_m = 1;
    double tau = 1;
    double eps = 0.01;
    std::vector<unsigned long> n_k;  // enough terms to cover the queried range
};

ScaleParams scale_params(const CantorScheme& scheme, unsigned levels);

struct ScaleClass {
    bool typical = false;
    unsigned k = 0;       // witnessing insertion ordinal
    long n_zeta = 0;      // typical branch only
};

// Classification of log zeta against the insertion geometry; throws
// below-first-scale when log zeta <= (1 - 4 eps) n_1 p sigma_m.
ScaleClass classify_scale(const ScaleParams& sp, double log_zeta);

enum class Alpha0Config { ConsistentClosedForm, PrintedClosedForm, ChooseMidpoint };

struct AlphaChoice {
    double alpha = 0;
    double alpha0 = 0;
    bool typical_branch = false;
    double choose_lo = 0;  // (tau^2+tau)/(tau+2)^2
    double choose_hi = 0;  // (2-tau)/(3(tau+2))
};

// tau threshold below which the scale/alpha machinery applies.
double tau_threshold();                      // (sqrt(73)-3)/8
double alpha0_value(Alpha0Config cfg, double tau);

// Picks alpha: alpha0 when xi^alpha0 sits at a typical scale, else
// alpha0 (tau+1+10 eps); verifies the branch inequalities and throws
// constraint-violated on an inconsistent alpha0 configuration.
AlphaChoice select_alpha(const ScaleParams& sp, double xi,
                         Alpha0Config cfg = Alpha0Config::ConsistentClosedForm);

// --- transform estimation --------------------------------------------------

struct FourierPoint {
    double xi = 0;
    double re = 0;
    double im = 0;
    double stderr_ = 0;
    double truncation_err = 0;  // 2 pi |xi| / target_q^2
};

struct FourierEstimate {
    std::vector<FourierPoint> points;
    double fit_slope = 0;       // log |mu-hat| vs log xi over retained points
    double fit_ci_lo = 0;       // bootstrap 95% interval
    double fit_ci_hi = 0;
    std::size_t retained = 0;   // points above the noise floor
    std::size_t samples = 0;
};

FourierEstimate fourier_estimate(const CantorScheme& scheme, const std::vector<double>& xis,
                                 std::size_t sample_count, std::uint64_t seed,
                                 const Int& target_q, unsigned threads = 1);

// --- serialization ---------------------------------------------------------

std::string scheme_cache_key(const CantorScheme& scheme);  // canonical parameter text
std::vector<unsigned char> serialize_scheme(const CantorScheme& scheme);
CantorScheme deserialize_scheme(const std::vector<unsigned char>& bytes);

}  // namespace dioph::kaufman
