#pragma once

// End-to-end verification driver: builds the grid, operator and systems
// from an ExperimentConfig, runs the selected check groups, and assembles
// the BoundReport. Identity checks become pass/fail entries at the
// configured tolerance; inequality constants are reported as metrics
// (finiteness is the only hard gate on those).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dyadic_tb/config.hpp"
#include "dyadic_tb/report.hpp"
#include "dyadic_tb/verifier.hpp"

namespace dytb {

namespace detail {

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// test functions for one top cube, all bounded by 1 and supported in q1
inline std::vector<GridFunction> test_family(const GridSpec& spec, const CZOperator& T,
                                             const DyadicCube& q1, const TestFunctionSpec& tf,
                                             std::uint64_t seed) {
    std::vector<GridFunction> out;
    Rng seeds(seed ^ 0xfeedULL);
    for (const auto& kind : tf.kinds) {
        if (kind == "extremal") {
            out.push_back(extremal_function(T, q1));
            continue;
        }
        for (int c = 0; c < tf.count; ++c) {
            const std::uint64_t s = seeds.next_u64();
            const GridFunction full =
                (kind == "pm1") ? random_signs(spec, s) : random_bounded(spec, s, true);
            out.push_back(restrict_to(full, q1));
        }
    }
    return out;
}

struct MaxTracker {
    double value = 0.0;
    void add(double v) { value = std::max(value, v); }
};
struct MinTracker {
    double value = std::numeric_limits<double>::infinity();
    void add(double v) { value = std::min(value, v); }
    double get() const { return std::isfinite(value) ? value : 0.0; }
};

}  // namespace detail

inline BoundReport run_full_verification(const ExperimentConfig& cfg) {
    using detail::MaxTracker;
    using detail::MinTracker;

    BoundReport rep;
    const nlohmann::json cfg_json = config_to_json(cfg);
    rep.config_hash = config_hash_of(cfg_json);
    rep.seed = cfg.seed;
    const double tol = cfg.tolerance_identity * cfg.tolerance_scale;

    const GridSpec spec = cfg.grid;
    const CZKernel kernel = kernel_zoo(cfg.kernel(), spec.n);
    const CZOperator T = discretize(kernel, spec, cfg.quadrature);
    PseudoAccretiveSystem sys1(spec, cfg.sys1, 1);
    PseudoAccretiveSystem sys2(spec, cfg.sys2, 2);
    const auto& ver = cfg.verification;

    // ---- kernel bounds on sampled pairs -----------------------------------
    if (ver.enabled("kernel")) {
        const auto kb = check_kernel_bounds(kernel, cfg.seed ^ 0xabcdULL, 4000);
        rep.metric("kernel.size_ratio", kb.worst_size_ratio);
        rep.metric("kernel.sup_ratio", kb.worst_sup_ratio);
        rep.metric("kernel.hoelder_ratio", kb.worst_hoelder_ratio);
        if (kernel.size_constant > 0.0) rep.check("kernel.size_bound", kb.worst_size_ratio, 1.0 + 1e-9);
        if (kernel.sup_bound > 0.0) rep.check("kernel.sup_bound", kb.worst_sup_ratio, 1.0 + 1e-9);
        if (kernel.hoelder_constant > 0.0)
            rep.check("kernel.hoelder_bound", kb.worst_hoelder_ratio, 1.0 + 1e-9);
    }

    // ---- testing-system hypotheses ----------------------------------------
    if (ver.enabled("system")) {
        for (int side = 1; side <= 2; ++side) {
            const auto& sys = (side == 1) ? sys1 : sys2;
            const auto v = validate(sys, T);
            const std::string p = (side == 1) ? "hyp.b1." : "hyp.b2.";
            rep.metric(p + "C_i", v.C_i);
            rep.metric(p + "C_ii", v.C_ii);
            rep.metric(p + "support_leak", v.worst_support_leak);
            rep.metric(p + "normalization_error", v.worst_normalization_error);
            rep.check(p + "support", v.worst_support_leak, tol);
            rep.check(p + "eq8.17", v.worst_normalization_error, tol);
            rep.check(p + "finite", std::isfinite(v.C_i + v.C_ii) ? 0.0 : 1.0, 0.5);
        }
    }

    // ---- martingale and adapted identities --------------------------------
    if (ver.enabled("identities")) {
        const GridFunction b = sys1.generate(root_cube());
        const auto b_sys = make_adapted_system(b, AccretivityParams(0.1, sys1.q(), 1e6));
        MaxTracker e81, e82, e83, e89, elam;
        Rng seeds(cfg.seed ^ 0x1d3ULL);
        const int trials = std::max(2, ver.random_trials / 2);
        for (int t = 0; t < trials; ++t) {
            const GridFunction f = random_bounded(spec, seeds.next_u64(), true);
            for (int k = 0; k < spec.L; ++k) {
                const GridFunction dk = difference(f, k);
                e81.add(detail::max_abs_diff(difference(dk, k), dk));
                if (k + 1 < spec.L) e81.add(linf_norm(difference(dk, k + 1)));
            }
            const auto sq = square_function(f);
            e82.add(std::abs(sq.total + sq.coarse - l2_norm_sq(f)));
            GridFunction acc = expectation(f, 0);
            for (int k = 0; k < spec.L; ++k) acc += difference(f, k);
            e83.add(detail::max_abs_diff(acc, f));

            GridFunction aacc = adapted_expectation(f, b_sys, 0);
            for (int k = 0; k < spec.L; ++k) {
                const GridFunction dk = adapted_difference(f, b_sys, k);
                aacc += dk;
                e89.add(detail::max_abs_diff(adapted_difference(dk, b_sys, k), dk));
                if (k + 1 < spec.L) e89.add(linf_norm(adapted_difference(dk, b_sys, k + 1)));
            }
            e89.add(detail::max_abs_diff(aacc, f));

            const CubeSums bg = cube_integrals(pointwise_product(f, b));
            for (const auto& q : generation_cubes(spec, std::min(2, spec.L - 1)))
                elam.add(detail::max_abs_diff(lambda_apply(b_sys, bg, q),
                                              adapted_difference_local(b_sys, bg, q)));
        }
        rep.metric("eq8.1.error", e81.value);
        rep.metric("eq8.2.error", e82.value);
        rep.metric("eq8.3.error", e83.value);
        rep.metric("eq8.9.error", e89.value);
        rep.metric("lambda.factorization_error", elam.value);
        rep.check("eq8.1", e81.value, tol);
        rep.check("eq8.2", e82.value, tol);
        rep.check("eq8.3", e83.value, tol);
        rep.check("eq8.9", e89.value, tol);
        rep.check("lambda.factorization", elam.value, tol);
    }

    // ---- maximal operator constants ----------------------------------------
    if (ver.enabled("maximal")) {
        Rng seeds(cfg.seed ^ 0x7a11ULL);
        for (const double qexp : {2.0, 2.5, 4.0}) {
            MaxTracker ratio;
            const Region root = region_of_cube(spec, root_cube());
            for (int t = 0; t < ver.random_trials; ++t) {
                const GridFunction f = random_bounded(spec, seeds.next_u64());
                const double fn = lp_norm(f, qexp, root);
                if (fn < 1e-12) continue;
                ratio.add(lp_norm(maximal_function(f), qexp, root) / fn);
            }
            char name[48];
            std::snprintf(name, sizeof(name), "maximal.ratio.q%.1f", qexp);
            rep.metric(name, ratio.value);
        }
    }

    // ---- local testing constants -------------------------------------------
    B1Result b1c;
    if (ver.enabled("testing")) {
        b1c = compute_B1(T);
        rep.metric("t1loc.b1", b1c.value);
        MaxTracker direct;
        for (const auto& q : all_cubes(spec)) direct.add(t1_loc(T, q).first);
        rep.metric("t1loc.direct", direct.value);
        rep.check("t1loc.finite", std::isfinite(b1c.value + direct.value) ? 0.0 : 1.0, 0.5);
    }

    // ---- off-diagonal estimates ---------------------------------------------
    if (ver.enabled("offdiag")) {
        MaxTracker direct, dual, direct_hs, dual_hs;
        Rng seeds(cfg.seed ^ 0x0ffdULL);
        for (int g = 1; g <= std::min(spec.L, ver.sweep_max_generation); ++g)
            for (const auto& q : generation_cubes(spec, g)) {
                const auto r = off_diagonal_check(T, q, 2.0, 4, seeds.next_u64());
                direct.add(r.direct_ratio);
                dual.add(r.dual_ratio);
                const auto hs = off_diagonal_hs(T, q);
                direct_hs.add(hs.direct_hs);
                dual_hs.add(hs.dual_hs);
            }
        rep.metric("eq6.13.direct", direct.value);
        rep.metric("eq6.13.dual", dual.value);
        rep.metric("eq6.13.direct_hs", direct_hs.value);
        rep.metric("eq6.13.dual_hs", dual_hs.value);
        rep.check("eq6.13.finite",
                  std::isfinite(direct.value + dual.value + direct_hs.value + dual_hs.value)
                      ? 0.0
                      : 1.0,
                  0.5);
    }

    // ---- per-top-cube pipeline: stopping, bootstrap, recursion --------------
    std::vector<DyadicCube> tops;
    for (const int g : ver.q1_generations)
        for (const auto& q : generation_cubes(spec, g)) tops.push_back(q);

    int root_stopped = 0;
    MaxTracker bad_ratio, c0_max, mb2_const, tb2_const, buffer_ratio, buffer_total_ratio;
    MinTracker eps_min, delta_min, chain_margin;
    MaxTracker recon_err, zeta_mean, zeta_leak, zeta_ratio, fj_ratio;
    MinTracker triangle_margin, cs_margin, eq832_margin;
    MaxTracker tf_ratio, boot_recon;
    MaxTracker b2_const, s1_ratio, s2_ratio, s3_ratio, split_err, s2_far, s2_ring, s2_in,
        s2_partition, s2_linf, s1_full, s1_replacement;
    MaxTracker cm_sum, cm_t1id, cm_t1split, cm_tel, cm_t2split, cm_gq;
    MinTracker cm_accr;
    std::vector<MaxTracker> cm_child(static_cast<std::size_t>(spec.L), MaxTracker{});
    bool any_exact = false, any_boot = false, any_rec = false, any_cm = false;

    const bool want_stopping = ver.enabled("stopping");
    const bool want_boot = ver.enabled("bootstrap");
    const bool want_rec = ver.enabled("recursion");
    if (want_stopping || want_boot || want_rec) {
        for (const auto& q1 : tops) {
            const GridFunction b1 = sys1.generate(q1);
            const auto data1 = make_stopping_data(b1, T, sys1.q());
            SawtoothDecomposition d1;
            try {
                d1 = decompose(spec, q1, data1, cfg.stopping);
            } catch (const RootStoppedError&) {
                ++root_stopped;
                continue;
            }
            any_exact = true;

            if (want_stopping) {
                const auto l818 = verify_decomposition(d1, data1);
                bad_ratio.add(l818.bad_measure_ratio);
                eps_min.add(l818.realized_epsilon);
                delta_min.add(l818.delta_realized);
                c0_max.add(l818.c0_realized);
                mb2_const.add(l818.mb2_family_sup);
                tb2_const.add(l818.tb2_sup);
                if (l818.bad_measure > 0.0)
                    buffer_ratio.add(l818.buffer_measure_with_bad_child /
                                     (std::pow(2.0, spec.n) * l818.bad_measure));
                buffer_total_ratio.add(l818.buffer_measure / q1.volume(spec.n));
                chain_margin.add((l818.chain_rhs - l818.chain_lhs) /
                                 std::max(1.0, l818.chain_rhs));
                rep.check("eq8.19.partition", l818.partition_ok ? 0.0 : 1.0, 0.5);
                rep.check("eq8.19.maximality", l818.maximality_ok ? 0.0 : 1.0, 0.5);
                rep.check("eq8.26.soundness", l818.stopping_sound ? 0.0 : 1.0, 0.5);
                rep.check("eq8.23.buffer", l818.buffer_bound_ok ? 0.0 : 1.0, 0.5);
                rep.check("eq8.27.chain", l818.chain_ok ? 0.0 : 1.0, 0.5);
                rep.check("eq8.26.bad2_chebyshev", l818.bad2_chebyshev_ok ? 0.0 : 1.0, 0.5);
                rep.metric("eq8.26.bad2_measure", l818.bad2_measure);
                rep.metric("eq8.26.chebyshev_reference", l818.chebyshev_reference);

                ZetaDiagnostics diag;
                for (const auto& f : detail::test_family(spec, T, q1, ver.test_functions, cfg.seed)) {
                    const auto parts = decompose_f(f, d1, b1, sys1, &diag);
                    recon_err.add(detail::max_abs_diff(parts.reconstruct(), f));
                }
                zeta_mean.add(diag.max_mean);
                zeta_leak.add(diag.max_support_leak);
                zeta_ratio.add(diag.max_norm_ratio);
            }

            if (want_boot) {
                any_boot = true;
                for (const auto& f : detail::test_family(spec, T, q1, ver.test_functions, cfg.seed)) {
                    const auto bt = bootstrap_check(T, d1, b1, sys1, f);
                    boot_recon.add(bt.reconstruction_error);
                    triangle_margin.add(bt.triangle_bound - std::abs(bt.direct_integral));
                    cs_margin.add(bt.cs_margin);
                    eq832_margin.add(bt.per_buffer_bound_margin);
                    fj_ratio.add(bt.fj_norm_ratio_max);
                    tf_ratio.add(std::abs(bt.direct_integral) / q1.volume(spec.n));
                }
            }

            if (want_rec) {
                std::vector<DyadicCube> q2s{q1};
                if (ver.q2_per_q1 == "self+children" && q1.gen < spec.L)
                    for (const auto& c : children(spec, q1)) q2s.push_back(c);
                for (const auto& q2 : q2s) {
                    const GridFunction b2 = sys2.generate(q2);
                    const auto data2 = make_stopping_data(b2, T.transpose(), sys2.q());
                    SawtoothDecomposition d2;
                    try {
                        d2 = decompose(spec, q2, data2, cfg.stopping);
                    } catch (const RootStoppedError&) {
                        ++root_stopped;
                        continue;
                    }
                    any_rec = true;
                    const auto b2r = compute_B2_recursion(T, d1, b1, d2, q2);
                    const double q2vol = q2.volume(spec.n);
                    b2_const.add(b2r.b2_constant);
                    s1_ratio.add(b2r.sigma1 / q2vol);
                    s2_ratio.add(b2r.sigma2 / q2vol);
                    s3_ratio.add(b2r.sigma3 / q2vol);
                    split_err.add(b2r.split_error);
                    s2_far.add(b2r.sigma2_far / q2vol);
                    s2_ring.add(b2r.sigma2_ring / q2vol);
                    s2_in.add(b2r.sigma2_in / q2vol);
                    s2_partition.add(b2r.sigma2_partition_error);
                    s2_linf.add(b2r.sigma2_in_linf_max);
                    s1_full.add(b2r.sigma1_fullspace / q2vol);
                    s1_replacement.add(b2r.sigma1_replacement / q2vol);
                    rep.check("eq8.38.sigma3_bound", b2r.sigma3_bound_ok ? 0.0 : 1.0, 0.5);

                    // commutator splitting samples over doubly-good cubes
                    if (ver.enabled("lemmas") && ver.coifman_meyer_samples > 0) {
                        std::vector<DyadicCube> pool;
                        for (const auto& q : d1.omega1)
                            if (d2.classify(q) == CubeClass::Omega1) pool.push_back(q);
                        const std::size_t step =
                            std::max<std::size_t>(1, pool.size() /
                                static_cast<std::size_t>(ver.coifman_meyer_samples));
                        const auto b_sys =
                            make_adapted_system(b1, AccretivityParams(cfg.stopping.delta, sys1.q(),
                                                                      1e6));
                        const GridFunction tb1 = T.apply(b1);
                        for (std::size_t i = 0; i < pool.size();
                             i += step) {
                            any_cm = true;
                            const auto cm = coifman_meyer_split(T, b_sys, b1, b2, tb1, pool[i],
                                                                cfg.stopping.delta);
                            cm_sum.add(cm.sum_identity_error);
                            cm_t1id.add(cm.t1_identity_error);
                            cm_t1split.add(cm.t1_split_error);
                            cm_tel.add(cm.telescoping_error);
                            cm_t2split.add(cm.t2_split_error);
                            cm_gq.add(cm.gq_identity_error);
                            cm_accr.add(cm.accretivity_margin);
                            for (std::size_t j = 0; j < cm.child_split_ratios.size(); ++j)
                                cm_child[j].add(cm.child_split_ratios[j]);
                        }
                    }
                }
            }
        }
    }
    rep.metric("stopping.root_stopped_count", static_cast<double>(root_stopped));

    if (want_stopping && any_exact) {
        rep.metric("eq8.19.bad_ratio", bad_ratio.value);
        rep.metric("eq8.19.epsilon", eps_min.get());
        rep.metric("eq8.20.delta_realized", delta_min.get());
        rep.metric("eq8.20.c0_realized", c0_max.value);
        rep.metric("eq8.21.constant", mb2_const.value);
        rep.metric("eq8.22.constant", tb2_const.value);
        rep.metric("eq8.23.buffer_ratio", buffer_ratio.value);
        rep.metric("eq8.23.buffer_total_ratio", buffer_total_ratio.value);
        rep.metric("eq8.27.margin", chain_margin.get());
        rep.metric("eq8.24.reconstruction_error", recon_err.value);
        rep.metric("zeta.mean", zeta_mean.value);
        rep.metric("zeta.support_leak", zeta_leak.value);
        rep.metric("zeta.norm_ratio", zeta_ratio.value);
        rep.check("eq8.24.reconstruction", recon_err.value, tol);
        rep.check("zeta.mean_zero", zeta_mean.value, tol);
        rep.check("zeta.support", zeta_leak.value, tol);
        rep.check("eq8.19.epsilon_positive", eps_min.get() > 0.0 ? 0.0 : 1.0, 0.5);
    }
    if (want_boot && any_boot) {
        rep.metric("eq8.16.tf_ratio", tf_ratio.value);
        rep.metric("eq8.16.reconstruction_error", boot_recon.value);
        rep.metric("eq8.16.triangle_margin", triangle_margin.get());
        rep.metric("eq8.28.fj_ratio", fj_ratio.value);
        rep.metric("eq8.32.margin", eq832_margin.get());
        rep.metric("eq8.37.margin", cs_margin.get());
        rep.check("eq8.16.reconstruction", boot_recon.value, tol);
        rep.check("eq8.16.triangle", -triangle_margin.get(), tol);
        rep.check("eq8.32.per_cube", -eq832_margin.get(), tol);
        rep.check("eq8.37.cauchy_schwarz", -cs_margin.get(), tol);
        if (ver.enabled("testing")) {
            const double eps = eps_min.get();
            const double c_real = std::max(0.0, tf_ratio.value - (1.0 - eps) * b1c.value);
            rep.metric("eq8.16.realized_epsilon", eps);
            rep.metric("eq8.16.realized_C", c_real);
            rep.check("eq8.16.epsilon_positive", eps > 0.0 ? 0.0 : 1.0, 0.5);
        }
    }
    if (want_rec && any_rec) {
        rep.metric("eq8.38.b2", b2_const.value);
        rep.metric("eq8.38.sigma1_ratio", s1_ratio.value);
        rep.metric("eq8.38.sigma2_ratio", s2_ratio.value);
        rep.metric("eq8.38.sigma3_ratio", s3_ratio.value);
        rep.metric("eq8.38.split_error", split_err.value);
        rep.metric("eq8.38.sigma2_far_ratio", s2_far.value);
        rep.metric("eq8.38.sigma2_ring_ratio", s2_ring.value);
        rep.metric("eq8.38.sigma2_in_ratio", s2_in.value);
        rep.metric("eq8.38.sigma2_partition_error", s2_partition.value);
        rep.metric("eq8.38.sigma2_in_linf", s2_linf.value);
        rep.metric("eq8.39.fullspace_ratio", s1_full.value);
        rep.metric("eq8.39.replacement_ratio", s1_replacement.value);
        rep.check("eq8.38.split", split_err.value, tol);
        rep.check("eq8.38.sigma2_partition", s2_partition.value, tol);
    }
    if (any_cm) {
        rep.metric("eq8.40.sum_error", cm_sum.value);
        rep.metric("eq8.40.accretivity_margin", cm_accr.get());
        rep.metric("eq8.45.identity_error", cm_t1id.value);
        rep.metric("eq8.45.split_error", cm_t1split.value);
        rep.metric("eq8.46_47.telescoping_error", cm_tel.value);
        rep.metric("eq8.48.split_error", cm_t2split.value);
        rep.metric("eq8.48.gq_identity_error", cm_gq.value);
        rep.check("eq8.40.sum", cm_sum.value, tol);
        rep.check("eq8.40.accretivity", -cm_accr.get(), tol);
        rep.check("eq8.45.identity", cm_t1id.value, tol);
        rep.check("eq8.45.split", cm_t1split.value, tol);
        rep.check("eq8.46_47.telescoping", cm_tel.value, tol);
        rep.check("eq8.48.split", cm_t2split.value, tol);
        rep.check("eq8.48.gq_identity", cm_gq.value, tol);
        for (std::size_t j = 0; j < cm_child.size(); ++j) {
            if (cm_child[j].value == 0.0) continue;
            char name[40];
            std::snprintf(name, sizeof(name), "eq8.49.ratio.gap%zu", j + 1);
            rep.metric(name, cm_child[j].value);
        }
    }

    // ---- sawtooth lemma sweeps at the root ----------------------------------
    if (ver.enabled("lemmas")) {
        const GridFunction b1 = sys1.generate(root_cube());
        const GridFunction b2 = sys2.generate(root_cube());
        const auto data1 = make_stopping_data(b1, T, sys1.q());
        const auto data2 = make_stopping_data(b2, T.transpose(), sys2.q());
        bool have_roots = true;
        SawtoothDecomposition d1, d2;
        try {
            d1 = decompose(spec, root_cube(), data1, cfg.stopping);
            d2 = decompose(spec, root_cube(), data2, cfg.stopping);
        } catch (const RootStoppedError&) {
            have_roots = false;
            rep.metric("lemmas.skipped_root_stopped", 1.0);
        }
        if (have_roots) {
            const auto b1_sys =
                make_adapted_system(b1, AccretivityParams(cfg.stopping.delta, sys1.q(), 1e6));
            Rng seeds(cfg.seed ^ 0x1e44ULL);
            MaxTracker l814, l842, l844, l841, l843;
            for (int t = 0; t < ver.random_trials; ++t) {
                const GridFunction f = random_bounded(spec, seeds.next_u64(), true);
                const double fq1 = l2_norm_sq(f, d1.q1);
                const double fn = l2_norm_sq(f);
                if (fq1 > 1e-12)
                    l814.add(omega1_transpose_square_sum(d1, b1_sys, f) / fq1);
                if (fn > 1e-12) {
                    l842.add(omega1_adapted_square_sum(d1, b1_sys, f) / fn);
                    l844.add(omega1_lambda_square_sum(d1, b1_sys, f) / fn);
                }
                const auto l41 = lemma841_check(f, d1, d2, b1_sys, b2);
                l841.add(l41.ratio);
                l843.add(l41.replacement_error);
            }
            rep.check("eq8.43.replacement", l843.value, tol);
            rep.metric("lem8.14.ratio", l814.value);
            rep.metric("eq8.42.ratio", l842.value);
            rep.metric("eq8.44.ratio", l844.value);
            rep.metric("lem8.41.ratio", l841.value);
            const auto l815 = lemma815_check(d1, b1);
            rep.metric("lem8.15.sup", l815.sup_ratio);
            rep.metric("lem8.15.c0", l815.c0);
            rep.metric("lem8.15.ratio", l815.c0 > 0.0 ? l815.sup_ratio / l815.c0 : 0.0);

            // localized testing lemma sweeps, both mirrors
            MaxTracker l833, l833m;
            const auto in1 = make_lemma833_inputs(T, b1);
            const auto in2 = make_lemma833_inputs(T.transpose(), b2);
            for (int g = 0; g <= std::min(spec.L, ver.sweep_max_generation); ++g)
                for (const auto& q : generation_cubes(spec, g)) {
                    l833.add(lemma833_check(T, in1, q).ratio);
                    l833m.add(lemma833_check(T.transpose(), in2, q).ratio);
                }
            rep.metric("lem8.33.ratio", l833.value);
            rep.metric("lem8.33.mirror_ratio", l833m.value);

            MaxTracker l835;
            bool l835_chain = true;
            for (int t = 0; t < ver.random_trials; ++t) {
                const GridFunction f = random_bounded(spec, seeds.next_u64(), true);
                for (int g = 0; g <= std::min(spec.L, ver.sweep_max_generation); ++g)
                    for (const auto& q : generation_cubes(spec, g)) {
                        const auto r = lemma835_check_full(f, q, sys2.generate(q));
                        l835.add(r.ratio);
                        l835_chain = l835_chain && r.within_chain;
                    }
            }
            rep.metric("lem8.35.ratio", l835.value);
            rep.check("lem8.35.chain", l835_chain ? 0.0 : 1.0, 0.5);
            rep.check("lemmas.finite",
                      std::isfinite(l814.value + l842.value + l844.value + l841.value +
                                    l833.value + l833m.value + l835.value)
                          ? 0.0
                          : 1.0,
                      0.5);
        }

        // scale-free square function estimates (no sawtooth needed)
        {
            Rng seeds2(cfg.seed ^ 0x86ddULL);
            MaxTracker p86, p88, p810, nbr;
            const auto b_sys = make_adapted_system(b1, AccretivityParams(0.1, sys1.q(), 1e6));
            for (int t = 0; t < ver.random_trials; ++t) {
                const GridFunction h = random_bounded(spec, seeds2.next_u64(), true);
                const double bmo = bmo_norm(h);
                if (bmo > 1e-12) p86.add(carleson_norm(h) / (bmo * bmo));
                const double hn = l2_norm_sq(h);
                if (hn > 1e-12) {
                    p88.add(adapted_square_sum(h, b_sys) / hn);
                    p810.add(transpose_square_sum(h, b_sys) / hn);
                    const int nb_count = (spec.n == 1) ? 2 : 8;
                    for (int m = 1; m <= nb_count; ++m)
                        nbr.add(neighbor_square_sum(h, m) / hn);
                }
            }
            rep.metric("prop8.6.ratio", p86.value);
            rep.metric("prop8.8.ratio", p88.value);
            rep.metric("prop8.10.ratio", p810.value);
            rep.metric("neighbor.square_ratio", nbr.value);
            rep.check("prop8.6_8.10.finite",
                      std::isfinite(p86.value + p88.value + p810.value + nbr.value) ? 0.0 : 1.0,
                      0.5);
        }
    }

    return rep;
}

}  // namespace dytb
