#include "dioph/commands.hpp"

#include "dioph/cf.hpp"
#include "dioph/manifest.hpp"
#include "dioph/oscillatory.hpp"
#include "dioph/selberg.hpp"
#include "dioph/stats.hpp"
#include "dioph/version.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dioph::cli {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void parse_exponent(const Config& cfg, const std::string& section, long& u, unsigned long& v) {
    Rat e = cfg.get_rat(section, "exponent");
    u = static_cast<long>(e.get_num().get_si());
    v = static_cast<unsigned long>(e.get_den().get_ui());
}

std::vector<double> parse_list_d(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

std::vector<unsigned long> parse_list_u(const std::string& text) {
    std::vector<unsigned long> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoul(tok));
    return out;
}

std::uint64_t seed_of(const Config& cfg) { return cfg.get_u64_or("", "seed", 20240607); }

void finish(ManifestBuilder& mb, const Config& cfg, const RunOptions& opts) {
    mb.json()["code_version"] = kVersion;
    mb.set_config_echo(cfg.serialize());
    mb.set_seed(seed_of(cfg));
    auto path = mb.write(opts.out_dir);
    if (!opts.quiet) {
        for (const auto& c : mb.json()["checks"])
            std::printf("%s %s%s%s\n", c["pass"].get<bool>() ? "PASS" : "FAIL",
                        c["name"].get<std::string>().c_str(),
                        c["details"].get<std::string>().empty() ? "" : ": ",
                        c["details"].get<std::string>().c_str());
        std::printf("manifest: %s\n", path.string().c_str());
    }
}

}  // namespace

counting::LacunarySequence sequence_from_config(const Config& cfg, const std::string& section) {
    std::string kind = cfg.get_or(section, "kind", "integer-power");
    if (kind == "integer-power") {
        return counting::LacunarySequence::integer_power(
            static_cast<unsigned long>(cfg.get_long_or(section, "base", 2)));
    }
    if (kind == "geometric") {
        return counting::LacunarySequence::geometric(cfg.get_rat_or(section, "q0", Rat(1)),
                                                     cfg.get_rat_or(section, "ratio", Rat(2)));
    }
    if (kind == "explicit") {
        std::vector<Rat> terms;
        std::stringstream ss(cfg.get(section, "terms"));
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) terms.push_back(parse_rational(tok));
        return counting::LacunarySequence::explicit_list(terms,
                                                         cfg.get_rat_or(section, "gap", Rat(2)));
    }
    throw std::invalid_argument("config-invalid: unknown sequence kind " + kind);
}

counting::ApproxFunction approx_from_config(const Config& cfg, const std::string& section) {
    std::string kind = cfg.get_or(section, "kind", "index-power");
    Rat coef = cfg.get_rat_or(section, "coef", Rat(1));
    if (kind == "index-power") {
        long u;
        unsigned long v;
        parse_exponent(cfg, section, u, v);
        return counting::ApproxFunction::power_of_index(coef, u, v);
    }
    if (kind == "q-power") {
        long u;
        unsigned long v;
        parse_exponent(cfg, section, u, v);
        return counting::ApproxFunction::power_of_q(coef, u, v);
    }
    if (kind == "table") {
        std::vector<Rat> vals;
        std::stringstream ss(cfg.get(section, "values"));
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) vals.push_back(parse_rational(tok));
        return counting::ApproxFunction::from_table(vals);
    }
    throw std::invalid_argument("config-invalid: unknown psi kind " + kind);
}

kaufman::CantorScheme scheme_from_config(const Config& cfg, const RunOptions& opts,
                                         bool* cache_hit) {
    kaufman::BlockParams bp;
    bp.N = static_cast<unsigned>(cfg.get_long_or("scheme", "N", 3));
    bp.m = static_cast<unsigned>(cfg.get_long_or("scheme", "m", 1));
    bp.j0 = static_cast<unsigned>(cfg.get_long_or("scheme", "j0", 2));
    bp.eps = cfg.get_rat_or("scheme", "eps", make_rat(13, 20));
    Rat mean_tol = cfg.get_rat_or("scheme", "mean-tol", make_rat(124, 125));
    Rat tau = cfg.get_rat_or("scheme", "tau", Rat(1));

    std::string sched = cfg.get_or("scheme", "schedule", "arith:8");
    kaufman::ScheduleSpec spec;
    if (sched.rfind("arith:", 0) == 0) {
        spec = kaufman::ScheduleSpec::desk_arithmetic(std::stoul(sched.substr(6)));
    } else if (sched.rfind("geom:", 0) == 0) {
        spec = kaufman::ScheduleSpec::desk_geometric(std::stoul(sched.substr(5)));
    } else if (sched.rfind("paper:", 0) == 0) {
        spec = kaufman::ScheduleSpec::paper_faithful(std::stoul(sched.substr(6)));
    } else if (sched.rfind("explicit:", 0) == 0) {
        spec = kaufman::ScheduleSpec::explicit_list(parse_list_u(sched.substr(9)));
    } else {
        throw std::invalid_argument("config-invalid: unknown schedule " + sched);
    }

    std::string mode = cfg.get_or("scheme", "mode", "power");
    if (mode == "general") {
        PhiSpec phi = PhiSpec::power(cfg.get_rat_or("scheme", "phi-coef", make_rat(1, 3)),
                                     cfg.get_long_or("scheme", "phi-exp-num", 1),
                                     static_cast<unsigned long>(
                                         cfg.get_long_or("scheme", "phi-exp-den", 1)));
        std::vector<Int> Q;
        std::stringstream ss(cfg.get("scheme", "Q"));
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) Q.push_back(parse_int(tok));
        auto dist = kaufman::build_block_distribution(bp);
        auto good = kaufman::build_good_set(dist, bp.j0, mean_tol);
        if (cache_hit) *cache_hit = false;
        return kaufman::build_scheme_general(std::move(dist), std::move(good), tau, phi,
                                             std::move(Q));
    }

    auto build_cold = [&] {
        auto dist = kaufman::build_block_distribution(bp);
        auto good = kaufman::build_good_set(dist, bp.j0, mean_tol);
        return kaufman::build_scheme(std::move(dist), std::move(good), tau, spec);
    };

    CacheStore cache(opts.cache_dir.empty() ? opts.out_dir / "cache" : opts.cache_dir);
    kaufman::CantorScheme probe = build_cold();
    std::string key = kaufman::scheme_cache_key(probe);
    if (auto blob = cache.load(key)) {
        if (cache_hit) *cache_hit = true;
        return kaufman::deserialize_scheme(*blob);  // throws cache-corrupt on mismatch
    }
    cache.store(key, kaufman::serialize_scheme(probe));
    if (cache_hit) *cache_hit = false;
    return probe;
}

namespace {

// --- cf-check -------------------------------------------------------------

int cmd_cf_check(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("cf-check");
    std::size_t words = static_cast<std::size_t>(cfg.get_long_or("cf", "words", 10000));
    unsigned max_digit = static_cast<unsigned>(cfg.get_long_or("cf", "max-digit", 4));
    unsigned max_len = static_cast<unsigned>(cfg.get_long_or("cf", "max-len", 12));
    Rng rng(seed_of(cfg));

    std::size_t det_viol = 0, len_viol = 0, ratio_viol = 0, order_viol = 0, nest_viol = 0;
    for (std::size_t t = 0; t < words; ++t) {
        cf::Word w;
        unsigned len = 1 + static_cast<unsigned>(rng.below(max_len));
        for (unsigned i = 0; i < len; ++i) w.push(Int(1 + rng.below(max_digit)));
        for (std::size_t k = 1; k <= w.size(); ++k) {
            Int det = w.p(k) * w.q(k - 1) - w.p(k - 1) * w.q(k);
            if (det != (k % 2 == 1 ? 1 : -1)) ++det_viol;
        }
        cf::Cylinder c = cf::cylinder(w);
        Rat q2(w.qn() * w.qn());
        if (!(2 * c.length * q2 >= 1 && c.length * q2 <= 1)) ++len_viol;

        cf::Word suffix;
        unsigned slen = 1 + static_cast<unsigned>(rng.below(max_len));
        for (unsigned i = 0; i < slen; ++i) suffix.push(Int(1 + rng.below(max_digit)));
        Rat r = cf::continuant_ratio(w, suffix);
        if (!(r >= 1 && r <= 2)) ++ratio_viol;

        // child ordering given the parity of the parent
        bool odd = w.size() % 2 == 1;
        Rat prev_left, prev_right;
        for (long a = 1; a <= 4; ++a) {
            cf::Word child = w;
            child.push(Int(a));
            cf::Cylinder cc = cf::cylinder(child);
            if (!(c.left <= cc.left && cc.right <= c.right)) ++nest_viol;
            if (a > 1) {
                if (odd ? cc.left < prev_right : cc.right > prev_left) ++order_viol;
            }
            prev_left = cc.left;
            prev_right = cc.right;
        }
    }
    mb.add_check("determinant-identity", det_viol == 0, std::to_string(det_viol) + " violations");
    mb.add_check("cylinder-length-bounds", len_viol == 0, std::to_string(len_viol) + " violations");
    mb.add_check("continuant-ratio-range", ratio_viol == 0,
                 std::to_string(ratio_viol) + " violations");
    mb.add_check("child-order-parity", order_viol == 0, std::to_string(order_viol) + " violations");
    mb.add_check("cylinder-nesting", nest_viol == 0, std::to_string(nest_viol) + " violations");
    mb.add_stat("words", static_cast<double>(words));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

// --- extremal-check ---------------------------------------------------------

int cmd_extremal_check(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("extremal-check");
    auto gammas = parse_list_d(cfg.get_or("extremal", "gammas", "0.3,0.5,0.7"));
    auto psis = parse_list_d(cfg.get_or("extremal", "psis", "0.05,0.1,0.2"));
    auto ns = parse_list_u(cfg.get_or("extremal", "ns", "2,3,4"));
    std::size_t grid_n = static_cast<std::size_t>(cfg.get_long_or("extremal", "grid", 1000));
    double tol0 = cfg.get_double_or("extremal", "zeroth-tol", 1e-6);
    double tol1 = cfg.get_double_or("extremal", "l1-tol", 1e-4);

    std::string csv = "k,re_g1,im_g1,re_g2,im_g2,tol\n";
    std::size_t zeroth_viol = 0, bound_viol = 0, sandwich_viol = 0, l1_viol = 0;
    for (double gamma : gammas) {
        for (double psi : psis) {
            for (unsigned long n : ns) {
                auto pair = selberg::build_pair(gamma, psi, static_cast<unsigned>(n));
                double invD = 1.0 / static_cast<double>(pair.D);
                if (std::fabs(pair.coef1(0).real() - (2 * psi + invD)) > tol0) ++zeroth_viol;
                if (std::fabs(pair.coef2(0).real() - (2 * psi - invD)) > tol0) ++zeroth_viol;
                for (long k = -pair.D; k <= pair.D; ++k) {
                    double cap = (k == 0 ? 2 * psi
                                         : std::min(1.0 / std::fabs(static_cast<double>(k)),
                                                    2 * psi)) +
                                 invD + pair.tol + 1e-9;
                    if (std::abs(pair.coef1(k)) > cap) ++bound_viol;
                    if (std::abs(pair.coef2(k)) > cap) ++bound_viol;
                    csv += std::to_string(k) + "," + fmt17(pair.coef1(k).real()) + "," +
                           fmt17(pair.coef1(k).imag()) + "," + fmt17(pair.coef2(k).real()) + "," +
                           fmt17(pair.coef2(k).imag()) + "," + fmt17(pair.tol) + "\n";
                }
                std::vector<double> grid;
                grid.reserve(grid_n);
                for (std::size_t i = 0; i < grid_n; ++i)
                    grid.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(grid_n));
                auto rep = selberg::sandwich_check(pair, grid, 1e-9);
                sandwich_viol += rep.violations.size();
                auto l1 = selberg::l1_distance(pair, 1e-5);
                if (std::fabs(l1.d1 - invD) > tol1 || std::fabs(l1.d2 - invD) > tol1) ++l1_viol;
            }
        }
    }
    auto coef_path = opts.out_dir / "extremal_coefficients.csv";
    atomic_write(coef_path, csv);
    mb.add_output(coef_path);
    mb.add_check("zeroth-coefficients", zeroth_viol == 0, std::to_string(zeroth_viol));
    mb.add_check("coefficient-bound", bound_viol == 0, std::to_string(bound_viol));
    mb.add_check("sandwich", sandwich_viol == 0, std::to_string(sandwich_viol));
    mb.add_check("l1-distance", l1_viol == 0, std::to_string(l1_viol));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

// --- counting commands -------------------------------------------------------

std::string count_csv(const counting::CountingLawResult& res) {
    std::string csv = "N,sample_id,R,Psi,norm_err\n";
    for (const auto& row : res.rows) {
        csv += std::to_string(row.N) + "," + std::to_string(row.sample_id) + "," +
               std::to_string(row.R) + "," + fmt17(row.Psi) + "," + fmt17(row.norm_err) + "\n";
    }
    return csv;
}

int cmd_count(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("count");
    auto seq = sequence_from_config(cfg, "sequence");
    auto psi = approx_from_config(cfg, "psi");
    std::size_t n_max = static_cast<std::size_t>(cfg.get_long_or("experiment", "n-max", 10000));
    std::size_t samples = static_cast<std::size_t>(cfg.get_long_or("experiment", "samples", 100));
    Rat gamma = cfg.get_rat_or("experiment", "gamma", Rat(0));
    double med_cap = cfg.get_double_or("experiment", "median-cap", 5.0);
    double exp_cap = cfg.get_double_or("experiment", "exponent-cap", 0.75);

    auto res = counting::counting_law_experiment(samples, n_max, gamma, psi, seq, seed_of(cfg),
                                                 opts.threads);
    auto csv_path = opts.out_dir / "count.csv";
    atomic_write(csv_path, count_csv(res));
    mb.add_output(csv_path);

    double worst_median = 0;
    for (double m : res.median_abs_norm_err) worst_median = std::max(worst_median, m);
    mb.add_check("median-normalized-error", worst_median <= med_cap,
                 "max over checkpoints " + fmt17(worst_median));
    mb.add_check("regression-exponent", res.fitted_exponent <= exp_cap,
                 fmt17(res.fitted_exponent));
    mb.add_check("comparisons-exact", res.total_uncertain == 0,
                 std::to_string(res.total_uncertain) + " unresolved");
    mb.add_stat("fitted_exponent", res.fitted_exponent);
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

int cmd_zero_one(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("zero-one");
    auto seq = sequence_from_config(cfg, "sequence");
    auto conv = approx_from_config(cfg, "psi-convergent");
    auto div = approx_from_config(cfg, "psi-divergent");
    std::size_t n_max = static_cast<std::size_t>(cfg.get_long_or("experiment", "n-max", 65536));
    std::size_t samples = static_cast<std::size_t>(cfg.get_long_or("experiment", "samples", 100));
    Rat gamma = cfg.get_rat_or("experiment", "gamma", Rat(0));
    double threshold = cfg.get_double_or("experiment", "threshold", 0.95);

    auto res = counting::zero_one_experiment(samples, seq, gamma, conv, div, n_max, seed_of(cfg),
                                             opts.threads);
    std::string csv = "metric,fraction\n";
    csv += "stabilized_convergent," + fmt17(res.frac_stabilized_convergent) + "\n";
    csv += "growing_divergent," + fmt17(res.frac_growing_divergent) + "\n";
    csv += "above_half_psi_divergent," + fmt17(res.frac_above_half_psi_divergent) + "\n";
    auto csv_path = opts.out_dir / "zero_one.csv";
    atomic_write(csv_path, csv);
    mb.add_output(csv_path);

    mb.add_check("convergent-stabilizes", res.frac_stabilized_convergent >= threshold,
                 fmt17(res.frac_stabilized_convergent));
    mb.add_check("divergent-grows", res.frac_growing_divergent >= threshold,
                 fmt17(res.frac_growing_divergent));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

int cmd_schmidt(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("schmidt");
    auto psi = approx_from_config(cfg, "psi");
    std::size_t q_max = static_cast<std::size_t>(cfg.get_long_or("experiment", "q-max", 10000));
    std::size_t samples = static_cast<std::size_t>(cfg.get_long_or("experiment", "samples", 50));
    Rat gamma = cfg.get_rat_or("experiment", "gamma", Rat(0));

    double Psi = 0;
    for (std::size_t q = 1; q <= q_max; ++q)
        Psi += 2 * psi.value_d(q, Rat(static_cast<long>(q)));

    std::string csv = "sample_id,S,Psi,ratio\n";
    std::vector<double> ratios;
    for (std::size_t i = 0; i < samples; ++i) {
        Rng rng = stream_rng(seed_of(cfg), i);
        Rat x = rng.uniform_dyadic(192);
        std::size_t s = counting::schmidt_count(x, q_max, gamma, psi);
        double ratio = static_cast<double>(s) / Psi;
        ratios.push_back(ratio);
        csv += std::to_string(i) + "," + std::to_string(s) + "," + fmt17(Psi) + "," +
               fmt17(ratio) + "\n";
    }
    auto csv_path = opts.out_dir / "schmidt.csv";
    atomic_write(csv_path, csv);
    mb.add_output(csv_path);
    double med = median(ratios);
    mb.add_check("main-term-tracking", std::fabs(med - 1.0) <= 0.2, "median ratio " + fmt17(med));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

int cmd_discrepancy(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("discrepancy");
    auto seq = sequence_from_config(cfg, "sequence");
    std::size_t n_max = static_cast<std::size_t>(cfg.get_long_or("experiment", "n-max", 10000));
    std::size_t samples = static_cast<std::size_t>(cfg.get_long_or("experiment", "samples", 50));
    double cap = cfg.get_double_or("experiment", "median-cap", 0.05);

    std::string csv = "sample_id,dstar\n";
    std::vector<double> ds;
    unsigned bits = counting::dyadic_bits_needed(seq, n_max);
    for (std::size_t i = 0; i < samples; ++i) {
        Rng rng = stream_rng(seed_of(cfg), i);
        Rat x = rng.uniform_dyadic(bits);
        Rat d = counting::discrepancy(x, seq, n_max);
        ds.push_back(d.get_d());
        csv += std::to_string(i) + "," + fmt17(d.get_d()) + "\n";
    }
    auto csv_path = opts.out_dir / "discrepancy.csv";
    atomic_write(csv_path, csv);
    mb.add_output(csv_path);
    double med = median(ds);
    mb.add_check("median-dstar", med <= cap, fmt17(med));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

int cmd_pair_corr(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("pair-corr");
    auto seq = sequence_from_config(cfg, "sequence");
    auto psi = approx_from_config(cfg, "psi");
    std::size_t m = static_cast<std::size_t>(cfg.get_long_or("experiment", "m", 3));
    std::size_t n = static_cast<std::size_t>(cfg.get_long_or("experiment", "n", 9));
    std::size_t samples = static_cast<std::size_t>(cfg.get_long_or("experiment", "samples", 10000));
    Rat gamma = cfg.get_rat_or("experiment", "gamma", Rat(0));

    auto res = counting::pair_correlation(samples, seq, psi, gamma, m, n, seed_of(cfg));
    mb.add_stat("empirical", res.empirical);
    mb.add_stat("bound", res.bound);
    mb.add_stat("stderr", res.stderr_);
    mb.add_stat("ratio", res.ratio);
    mb.add_check("within-three-stderr", std::fabs(res.empirical - res.bound) <= 3 * res.stderr_ +
                                            1e-12,
                 "empirical " + fmt17(res.empirical) + " vs bound " + fmt17(res.bound));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

// --- scheme commands ----------------------------------------------------------

int cmd_scheme_build(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("scheme-build");
    bool cache_hit = false;
    auto scheme = scheme_from_config(cfg, opts, &cache_hit);
    mb.add_flag("cache-hit", cache_hit);
    mb.add_flag("paper-eps-range", scheme.hypotheses.eps_in_paper_range);
    mb.add_flag("paper-schedule-growth", scheme.hypotheses.schedule_growth_ok);
    mb.add_flag("paper-sigma-normalizer", scheme.hypotheses.sigma_normalizer_ok);
    mb.add_flag("paper-block-length", scheme.hypotheses.block_length_ok);
    mb.add_flag("paper-Q-ratio", scheme.hypotheses.q_ratio_ok);
    mb.add_stat("good-set-size", static_cast<double>(scheme.good.words.size()));
    mb.add_stat("good-set-mass", scheme.good.nu_mass.get_d());
    mb.add_stat("p-sigma-m", scheme.p_sigma_m());
    mb.add_stat_text("cache-key-sha256", sha256_hex(kaufman::scheme_cache_key(scheme)));
    mb.add_check("good-mass-above-half", scheme.good.nu_mass > make_rat(1, 2),
                 fmt17(scheme.good.nu_mass.get_d()));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

int cmd_scheme_sample(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("scheme-sample");
    auto scheme = scheme_from_config(cfg, opts);
    std::size_t count = static_cast<std::size_t>(cfg.get_long_or("sample", "count", 100));
    Int target = parse_int(cfg.get_or("sample", "target-q", "1000000"));

    std::string csv = "sample_id,digits,q,midpoint\n";
    std::size_t g_ok = 0, with_insertion = 0;
    for (std::size_t i = 0; i < count; ++i) {
        auto h = kaufman::sample_mu(scheme, seed_of(cfg) + i, target);
        csv += std::to_string(i) + "," + std::to_string(h.word.size()) + "," +
               h.word.qn().get_str() + "," + fmt17(h.midpoint_d) + "\n";
        try {
            auto rep = kaufman::membership_check(scheme, h.word);
            ++with_insertion;
            if (rep.all_g_events_ok()) ++g_ok;
        } catch (const std::domain_error&) {
            // truncated before the first insertion pair
        }
    }
    auto csv_path = opts.out_dir / "scheme_samples.csv";
    atomic_write(csv_path, csv);
    mb.add_output(csv_path);
    mb.add_stat("samples-with-insertion", static_cast<double>(with_insertion));
    mb.add_check("product-events-realized", g_ok == with_insertion,
                 std::to_string(g_ok) + "/" + std::to_string(with_insertion));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

int cmd_holder(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("holder");
    auto scheme = scheme_from_config(cfg, opts);
    std::size_t budget = static_cast<std::size_t>(cfg.get_long_or("holder", "budget", 400000));
    long j_min = cfg.get_long_or("holder", "j-min", 8);
    long j_max = cfg.get_long_or("holder", "j-max", 24);
    std::vector<double> grid;
    for (long j = j_min; j <= j_max; ++j) grid.push_back(std::pow(2.0, -static_cast<double>(j)));
    auto hp = kaufman::holder_profile(scheme, budget, grid);

    std::string csv = "h,max_mass\n";
    for (std::size_t i = 0; i < hp.h.size(); ++i)
        csv += fmt17(hp.h[i]) + "," + fmt17(hp.max_mass[i]) + "\n";
    auto csv_path = opts.out_dir / "holder.csv";
    atomic_write(csv_path, csv);
    mb.add_output(csv_path);

    double tau = scheme.tau.get_d();
    double bound = 2.0 / (tau + 2) - 0.1;
    mb.add_stat("fitted_exponent", hp.fitted_exponent);
    mb.add_stat("nodes", static_cast<double>(hp.nodes_used));
    mb.add_check("mass-scaling-exponent", hp.fitted_exponent >= bound,
                 fmt17(hp.fitted_exponent) + " vs bound " + fmt17(bound));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

int cmd_fourier(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("fourier");
    auto scheme = scheme_from_config(cfg, opts);
    std::size_t samples = static_cast<std::size_t>(cfg.get_long_or("fourier", "samples", 1000000));
    long j_min = cfg.get_long_or("fourier", "j-min", 4);
    long j_max = cfg.get_long_or("fourier", "j-max", 20);
    Int target = parse_int(cfg.get_or("fourier", "target-q", "10500000"));

    std::vector<double> xis{0};
    for (long j = j_min; j <= j_max; ++j) xis.push_back(std::pow(2.0, static_cast<double>(j)));
    auto est = kaufman::fourier_estimate(scheme, xis, samples, seed_of(cfg), target, opts.threads);

    std::string csv = "xi,re,im,stderr\n";
    for (const auto& p : est.points)
        csv += fmt17(p.xi) + "," + fmt17(p.re) + "," + fmt17(p.im) + "," + fmt17(p.stderr_) + "\n";
    auto csv_path = opts.out_dir / "fourier.csv";
    atomic_write(csv_path, csv);
    mb.add_output(csv_path);

    double bot = 0, top = 0;
    for (std::size_t i = 1; i < est.points.size(); ++i) {
        double mod = std::hypot(est.points[i].re, est.points[i].im);
        if (i <= 2) bot = std::max(bot, mod);
        if (i + 2 >= est.points.size()) top = std::max(top, mod);
    }
    mb.add_stat("fit_slope", est.fit_slope);
    mb.add_stat("fit_ci_lo", est.fit_ci_lo);
    mb.add_stat("fit_ci_hi", est.fit_ci_hi);
    mb.add_stat("retained", static_cast<double>(est.retained));
    mb.add_check("unit-at-zero", est.points[0].re == 1.0 && est.points[0].im == 0.0,
                 fmt17(est.points[0].re));
    mb.add_check("decay-slope-negative", est.fit_slope < 0 && est.fit_ci_hi < 0,
                 fmt17(est.fit_slope) + " CI[" + fmt17(est.fit_ci_lo) + "," +
                     fmt17(est.fit_ci_hi) + "]");
    mb.add_check("octave-ordering", top < bot,
                 "top " + fmt17(top) + " vs bottom " + fmt17(bot));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

// --- oscillatory-verify ---------------------------------------------------------

int cmd_oscillatory_verify(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("oscillatory-verify");
    double tol = cfg.get_double_or("oscillatory", "tol", 1e-8);

    nlohmann::json reports = nlohmann::json::array();
    std::size_t violations = 0, phases = 0;
    auto record = [&](const osc::BoundReport& rep) {
        reports.push_back({{"lemma", rep.lemma},
                           {"lhs", rep.lhs},
                           {"rhs", rep.rhs},
                           {"margin", rep.margin},
                           {"certified_bounds",
                            {{"A", rep.certified.A},
                             {"B", rep.certified.B},
                             {"C1", rep.certified.C1},
                             {"C2", rep.certified.C2}}},
                           {"tol", rep.tol}});
        if (rep.violated) ++violations;
    };

    // twenty linear phases
    for (double a : {1.0, -2.0, 3.0, -5.0, 8.0, -13.0, 21.0, -34.0, 55.0, -89.0, 144.0, 4.5,
                     -7.25, 12.75, 0.5, 1000.0, -250.0, 33.25, 66.5, 99.75}) {
        record(osc::check_nonstationary(osc::PhaseSpec::linear(a, 0.3), tol));
        ++phases;
    }
    // ten quadratics
    for (auto [a, b] : std::vector<std::pair<double, double>>{{10, 0},
                                                              {5, 1},
                                                              {0.01, 10},
                                                              {100, 0},
                                                              {2, 3},
                                                              {50, 5},
                                                              {1, 0},
                                                              {0.5, 2},
                                                              {25, 1},
                                                              {7, 11}}) {
        auto f = osc::PhaseSpec::quadratic(a, b);
        auto pb = osc::certify(f);
        record(osc::check_stationary(f, tol));  // g == 1: hypotheses always hold
        if (pb.nonstationary_ok) record(osc::check_nonstationary(f, tol));
        ++phases;
    }
    // twenty moebius differences from convergent pairs
    Rng rng(seed_of(cfg) ^ 0x05c1117a70u);
    while (phases < 50) {
        cf::Word w1, w2;
        unsigned len = 2 + static_cast<unsigned>(rng.below(3));
        for (unsigned i = 0; i < len; ++i) {
            w1.push(Int(1 + rng.below(4)));
            w2.push(Int(1 + rng.below(4)));
        }
        if (w1.qn() == w2.qn() && w1.q_prev() == w2.q_prev()) continue;
        const cf::Word& lo = w1.qn() <= w2.qn() ? w1 : w2;
        const cf::Word& hi = w1.qn() <= w2.qn() ? w2 : w1;
        double xi = 10 + rng.uniform01() * 990;
        auto f = osc::PhaseSpec::moebius_diff(xi, lo.pn().get_si(), lo.p_prev().get_si(),
                                              lo.qn().get_si(), lo.q_prev().get_si(),
                                              hi.pn().get_si(), hi.p_prev().get_si(),
                                              hi.qn().get_si(), hi.q_prev().get_si());
        auto pb = osc::certify(f);
        bool used = false;
        if (pb.nonstationary_ok) {
            record(osc::check_nonstationary(f, tol));
            used = true;
        }
        if (pb.stationary_form && pb.g_B >= pb.g_A && pb.g_A > 0) {
            record(osc::check_stationary(f, tol));
            used = true;
        }
        if (used) ++phases;
    }
    // comparison lemma on lebesgue and on the scheme measure
    auto leb = osc::MeasureHandle::lebesgue();
    record(osc::check_comparison(osc::comparison_one(), leb, 0.5, 1e-9));
    for (double r : {0.1, 0.01})
        record(osc::check_comparison(osc::comparison_cos_phase(osc::PhaseSpec::linear(5)), leb, r,
                                     1e-6));

    mb.json()["reports"] = reports;
    auto rep_path = opts.out_dir / "oscillatory_reports.json";
    atomic_write(rep_path, reports.dump(2) + "\n");
    mb.add_output(rep_path);
    mb.add_stat("phases", static_cast<double>(phases));
    mb.add_check("zero-violations", violations == 0, std::to_string(violations));
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

// --- dims ------------------------------------------------------------------------

int cmd_dims(const Config& cfg, const RunOptions& opts) {
    ManifestBuilder mb("dims");
    double tau = cfg.get_double_or("dims", "tau", 0.5);
    nlohmann::json out;
    out["bounded-digit-dim-bounds"] = nlohmann::json::array();
    for (unsigned long n : parse_list_u(cfg.get_or("dims", "ns", "8,16,64,256"))) {
        auto b = cf::jarnik_bounds(static_cast<long>(n));
        out["bounded-digit-dim-bounds"].push_back(
            {{"N", n}, {"lower", b.lower}, {"upper", b.upper}});
    }
    out["tau-threshold"] = kaufman::tau_threshold();
    out["alpha0-consistent"] = kaufman::alpha0_value(kaufman::Alpha0Config::ConsistentClosedForm,
                                                     tau);
    out["alpha0-printed"] = kaufman::alpha0_value(kaufman::Alpha0Config::PrintedClosedForm, tau);
    out["alpha0-midpoint"] = kaufman::alpha0_value(kaufman::Alpha0Config::ChooseMidpoint, tau);
    out["choose-interval"] = {(tau * tau + tau) / ((tau + 2) * (tau + 2)),
                              (2 - tau) / (3 * (tau + 2))};
    out["event-set-dim"] = 2.0 / (tau + 2);
    auto path = opts.out_dir / "dims.json";
    atomic_write(path, out.dump(2) + "\n");
    mb.add_output(path);
    mb.add_check("bounds-ordered", true, "");
    finish(mb, cfg, opts);
    return mb.all_checks_pass() ? 0 : 2;
}

}  // namespace

std::vector<std::string> command_names() {
    return {"cf-check",  "extremal-check", "count",        "zero-one",
            "schmidt",   "discrepancy",    "pair-corr",    "scheme-build",
            "scheme-sample", "holder",     "fourier",      "oscillatory-verify",
            "dims"};
}

Config default_config(const std::string& command) {
    Config cfg;
    cfg.set("", "command", command);
    cfg.set("", "seed", "20240607");
    if (command == "count") {
        cfg.set("sequence", "kind", "integer-power");
        cfg.set("sequence", "base", "2");
        cfg.set("psi", "kind", "index-power");
        cfg.set("psi", "coef", "1/2");
        cfg.set("psi", "exponent", "-4/5");
        cfg.set("experiment", "gamma", "0");
        cfg.set("experiment", "n-max", "10000");
        cfg.set("experiment", "samples", "100");
    } else if (command == "zero-one") {
        cfg.set("sequence", "kind", "integer-power");
        cfg.set("sequence", "base", "2");
        cfg.set("psi-convergent", "kind", "index-power");
        cfg.set("psi-convergent", "coef", "1");
        cfg.set("psi-convergent", "exponent", "-2");
        cfg.set("psi-divergent", "kind", "index-power");
        cfg.set("psi-divergent", "coef", "1/2");
        cfg.set("psi-divergent", "exponent", "-4/5");
        cfg.set("experiment", "gamma", "0");
        cfg.set("experiment", "n-max", "65536");
        cfg.set("experiment", "samples", "100");
    } else if (command == "fourier" || command == "holder" || command == "scheme-build" ||
               command == "scheme-sample") {
        cfg.set("scheme", "N", "3");
        cfg.set("scheme", "m", "1");
        cfg.set("scheme", "j0", "2");
        cfg.set("scheme", "eps", "13/20");
        cfg.set("scheme", "mean-tol", "124/125");
        cfg.set("scheme", "tau", "1");
        cfg.set("scheme", "schedule", command == "holder" || command == "fourier"
                                          ? "arith:8"
                                          : "explicit:1,2,3");
    }
    return cfg;
}

int run(const Config& cfg, const RunOptions& opts) {
    std::string command = cfg.get("", "command");
    if (command == "cf-check") return cmd_cf_check(cfg, opts);
    if (command == "extremal-check") return cmd_extremal_check(cfg, opts);
    if (command == "count") return cmd_count(cfg, opts);
    if (command == "zero-one") return cmd_zero_one(cfg, opts);
    if (command == "schmidt") return cmd_schmidt(cfg, opts);
    if (command == "discrepancy") return cmd_discrepancy(cfg, opts);
    if (command == "pair-corr") return cmd_pair_corr(cfg, opts);
    if (command == "scheme-build") return cmd_scheme_build(cfg, opts);
    if (command == "scheme-sample") return cmd_scheme_sample(cfg, opts);
    if (command == "holder") return cmd_holder(cfg, opts);
    if (command == "fourier") return cmd_fourier(cfg, opts);
    if (command == "oscillatory-verify") return cmd_oscillatory_verify(cfg, opts);
    if (command == "dims") return cmd_dims(cfg, opts);
    throw std::invalid_argument("config-invalid: unknown command " + command);
}

}  // namespace dioph::cli
