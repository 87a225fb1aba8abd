#include <catch2/catch_amalgamated.hpp>

#include "dyadic_tb/bruteforce.hpp"
#include "dyadic_tb/run.hpp"
#include "dyadic_tb/verifier.hpp"

using namespace dytb;

namespace {

struct Pipeline {
    GridSpec spec;
    CZOperator T;
    PseudoAccretiveSystem sys1;
    PseudoAccretiveSystem sys2;
    GridFunction b1;
    SawtoothDecomposition d1;

    Pipeline(const GridSpec& s, const CZKernel& k, const SystemSpec& s1, const SystemSpec& s2,
             const StoppingParams& p)
        : spec(s),
          T(discretize(k, s)),
          sys1(s, s1, 1),
          sys2(s, s2, 2),
          b1(sys1.generate(root_cube())),
          d1(decompose(s, root_cube(), make_stopping_data(b1, T, sys1.q()), p)) {}
};

}  // namespace

TEST_CASE("transpose testing constant") {
    SECTION("zero kernel") {
        GridSpec spec(1, 4);
        CHECK(compute_B1(discretize(zero_kernel(1), spec)).value == 0.0);
    }
    SECTION("averaging kernel peaks at the root") {
        GridSpec spec(1, 4);
        const auto r = compute_B1(discretize(constant_kernel(1), spec));
        CHECK(r.value == Catch::Approx(1.0));
        CHECK(r.argmax == root_cube());
    }
    SECTION("truncated Hilbert agrees with exhaustive brute force") {
        GridSpec spec(1, 6);
        const CZKernel k = hilbert_kernel(1.0 / 64);
        const auto r = compute_B1(discretize(k, spec));
        const double oracle = bruteforce::b1_constant(k, spec);
        CHECK(r.value == Catch::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("bootstrap term breakdown") {
    const StoppingParams params(0.25, 64.0);
    SECTION("zero kernel: everything vanishes") {
        Pipeline p(GridSpec(1, 4), zero_kernel(1), {.kind = "constant"}, {.kind = "constant"}, params);
        const GridFunction f = extremal_function(p.T, root_cube());
        const auto bt = bootstrap_check(p.T, p.d1, p.b1, p.sys1, f);
        CHECK(bt.term1 == 0.0);
        CHECK(bt.term2 == 0.0);
        CHECK(bt.term3 == 0.0);
        CHECK(bt.term4 == 0.0);
        CHECK(std::abs(bt.direct_integral) == 0.0);
        CHECK(bt.reconstruction_error == 0.0);
    }
    SECTION("zero input: everything vanishes") {
        Pipeline p(GridSpec(1, 4), hilbert_kernel(1.0 / 16), {.kind = "constant"},
                   {.kind = "constant"}, params);
        const auto bt = bootstrap_check(p.T, p.d1, p.b1, p.sys1, GridFunction(p.spec));
        CHECK(bt.term1 + bt.term2 + bt.term3 + bt.term4 == 0.0);
        CHECK(bt.reconstruction_error == 0.0);
    }
    SECTION("averaging kernel with the constant system: closed-form recombination") {
        Pipeline p(GridSpec(1, 4), constant_kernel(1), {.kind = "constant"}, {.kind = "constant"},
                   params);
        Rng seeds(5);
        for (int t = 0; t < 10; ++t) {
            const GridFunction f = random_signs(p.spec, seeds.next_u64());
            const auto bt = bootstrap_check(p.T, p.d1, p.b1, p.sys1, f);
            // T f = int f, so the direct integral is [f]_{root}
            const cplx expected = average(f, root_cube());
            CHECK(std::abs(bt.direct_integral - expected) < 1e-12);
            CHECK(bt.reconstruction_error < 1e-10);
            CHECK(bt.term2 < 1e-12);  // the main term dies on constants
            CHECK(bt.triangle_bound + 1e-12 >= std::abs(bt.direct_integral));
        }
    }
    SECTION("nontrivial configuration: identity, Cauchy-Schwarz and per-cube bounds") {
        Pipeline p(GridSpec(1, 6), hilbert_kernel(1.0 / 64),
                   {.kind = "perturbed", .seed = 7, .amplitude = 0.5},
                   {.kind = "perturbed", .seed = 8, .amplitude = 0.25}, StoppingParams(0.25, 8.0));
        INFO("bad cubes: " << p.d1.bad.size());
        Rng seeds(17);
        for (int t = 0; t < 5; ++t) {
            GridFunction f = random_bounded(p.spec, seeds.next_u64());
            const auto bt = bootstrap_check(p.T, p.d1, p.b1, p.sys1, f);
            CHECK(bt.reconstruction_error < 1e-10);
            CHECK(bt.triangle_bound + 1e-10 >= std::abs(bt.direct_integral));
            CHECK(bt.cs_margin >= -1e-10);
            CHECK(bt.per_buffer_bound_margin >= -1e-10);
            CHECK(std::isfinite(bt.fj_norm_ratio_max));
        }
        // extremal function drives the testing functional
        const GridFunction fx = extremal_function(p.T, root_cube());
        const auto bt = bootstrap_check(p.T, p.d1, p.b1, p.sys1, fx);
        const auto b1v = compute_B1(p.T);
        CHECK(std::abs(bt.direct_integral) <= bt.triangle_bound + 1e-10);
        // at the root the extremal integral is exactly the testing functional
        const auto pair = t1_loc(p.T, root_cube());
        CHECK(std::abs(bt.direct_integral) == Catch::Approx(pair.second).margin(1e-12));
        CHECK(pair.second <= b1v.value + 1e-12);
    }
}

TEST_CASE("third-term splitting is a partition of the integral") {
    Pipeline p(GridSpec(1, 5), hilbert_kernel(1.0 / 32),
               {.kind = "perturbed", .seed = 21, .amplitude = 0.5}, {.kind = "constant"},
               StoppingParams(0.3, 6.0));
    if (p.d1.bad.empty()) {
        SUCCEED("no bad cubes in this configuration");
        return;
    }
    const GridFunction f = random_bounded(p.spec, 99);
    const auto bt = bootstrap_check(p.T, p.d1, p.b1, p.sys1, f);
    // interior + ring + far pieces recombine to the full third-term integral
    KahanSumC direct;
    const auto q1_rows = cube_rows(p.spec, root_cube());
    for (const auto& pj : p.d1.bad) {
        const cplx avg = average(f, pj);
        const GridFunction bp = p.sys1.generate(pj);
        GridFunction fj(p.spec);
        for_each_cell_flat(p.spec, pj, [&](std::int64_t i) { fj[i] = f[i] - avg * bp[i]; });
        direct.add(integral(p.T.apply_restricted(fj, q1_rows), root_cube()));
    }
    CHECK(std::abs(direct.value() - (bt.third_interior + bt.third_far + bt.third_ring)) < 1e-11);
    CHECK(std::abs(direct.value()) == Catch::Approx(bt.term3).margin(1e-11));
}

TEST_CASE("localized testing lemma") {
    SECTION("zero kernel gives zero ratio") {
        GridSpec spec(1, 4);
        const CZOperator T = discretize(zero_kernel(1), spec);
        PseudoAccretiveSystem sys(spec, {.kind = "constant"});
        const auto in = make_lemma833_inputs(T, sys.generate(root_cube()));
        const auto r = lemma833_check(T, in, DyadicCube(1, 0));
        CHECK(r.numerator == 0.0);
        CHECK(r.ratio == 0.0);
        CHECK(r.denominator > 0.0);
    }
    SECTION("averaging kernel at the left half: closed form") {
        GridSpec spec(1, 4);
        const CZOperator T = discretize(constant_kernel(1), spec);
        PseudoAccretiveSystem sys(spec, {.kind = "constant"});
        const auto in = make_lemma833_inputs(T, sys.generate(root_cube()));
        const auto r = lemma833_check(T, in, DyadicCube(1, 0));
        // numerator: |T(1_Q)|^2 = 1/4 on 3Q cap root = [0,1): 1/4
        // denominator: int_Q |T1|^2 + int_{2Q cap root} 1 + int_Q (M1)^2
        //            = 1/2 + 3/4 + 1/2 = 7/4
        CHECK(r.numerator == Catch::Approx(0.25));
        CHECK(r.denominator == Catch::Approx(1.75));
        CHECK(r.ratio == Catch::Approx(1.0 / 7.0));
    }
    SECTION("ratio stays bounded over all cubes at depth five") {
        GridSpec spec(1, 5);
        const CZOperator T = discretize(hilbert_kernel(1.0 / 32), spec);
        PseudoAccretiveSystem s1(spec, {.kind = "perturbed", .seed = 7, .amplitude = 0.5}, 1);
        PseudoAccretiveSystem s2(spec, {.kind = "perturbed", .seed = 9, .amplitude = 0.5}, 2);
        const auto in1 = make_lemma833_inputs(T, s1.generate(root_cube()));
        const auto in2 = make_lemma833_inputs(T.transpose(), s2.generate(root_cube()));
        double worst = 0.0, worst_mirror = 0.0;
        for (const auto& q : all_cubes(spec)) {
            worst = std::max(worst, lemma833_check(T, in1, q).ratio);
            worst_mirror = std::max(worst_mirror, lemma833_check(T.transpose(), in2, q).ratio);
        }
        INFO("max ratio " << worst << ", mirror " << worst_mirror);
        CHECK(std::isfinite(worst));
        CHECK(std::isfinite(worst_mirror));
        CHECK(worst <= 16.0);
        CHECK(worst_mirror <= 16.0);
    }
}

TEST_CASE("norm-versus-oscillation lemma") {
    GridSpec spec(1, 4);
    SECTION("constants against the constant system give ratio one") {
        PseudoAccretiveSystem sys2(spec, {.kind = "constant"}, 2);
        GridFunction f(spec, cplx{3.0, -2.0});
        for (const auto& q : all_cubes(spec))
            CHECK(lemma835_check(f, q, sys2.generate(q)) == Catch::Approx(1.0));
    }
    SECTION("mean-zero functions against the constant system give ratio one") {
        PseudoAccretiveSystem sys2(spec, {.kind = "constant"}, 2);
        const DyadicCube q(1, 1);
        GridFunction f = random_bounded(spec, 77);
        const cplx avg = average(f, q);
        for_each_cell_flat(spec, q, [&](std::int64_t i) { f[i] -= avg; });
        CHECK(lemma835_check(f, q, sys2.generate(q)) == Catch::Approx(1.0));
    }
    SECTION("perturbed systems keep the ratio inside the recomputed chain") {
        GridSpec spec5(1, 5);
        PseudoAccretiveSystem sys2(spec5, {.kind = "perturbed", .seed = 4, .amplitude = 0.5}, 2);
        double worst = 0.0;
        Rng seeds(51);
        for (int t = 0; t < 6; ++t) {
            const GridFunction f = random_bounded(spec5, seeds.next_u64(), true);
            for (const auto& q : all_cubes(spec5)) {
                const auto r = lemma835_check_full(f, q, sys2.generate(q));
                CHECK(r.within_chain);
                CHECK(r.chain_constant >= 2.0 - 1e-12);  // ||b2||_2 >= |Q|^{1/2} by normalization
                worst = std::max(worst, r.ratio);
            }
        }
        INFO("max ratio " << worst);
        CHECK(std::isfinite(worst));
        CHECK(worst <= 8.0);
    }
}

TEST_CASE("recursion constant and three-way splitting") {
    const StoppingParams params(0.25, 8.0);
    SECTION("zero kernel: all sums vanish") {
        Pipeline p(GridSpec(1, 4), zero_kernel(1), {.kind = "constant"}, {.kind = "constant"},
                   StoppingParams(0.25, 1e9));
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto data2 = make_stopping_data(b2, p.T.transpose(), p.sys2.q());
        const auto d2 = decompose(p.spec, root_cube(), data2, StoppingParams(0.25, 1e9));
        const auto r = compute_B2_recursion(p.T, p.d1, p.b1, d2, root_cube());
        CHECK(r.total == 0.0);
        CHECK(r.b2_constant == 0.0);
        CHECK(r.sigma1 + r.sigma2 + r.sigma3 == 0.0);
    }
    SECTION("averaging kernel with constant systems: the main sums die on constants") {
        Pipeline p(GridSpec(1, 4), constant_kernel(1), {.kind = "constant"}, {.kind = "constant"},
                   StoppingParams(0.25, 64.0));
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto data2 = make_stopping_data(b2, p.T.transpose(), p.sys2.q());
        const auto d2 = decompose(p.spec, root_cube(), data2, StoppingParams(0.25, 64.0));
        const auto r = compute_B2_recursion(p.T, p.d1, p.b1, d2, root_cube());
        CHECK(r.total < 1e-24);
        CHECK(r.sigma1 < 1e-24);
    }
    SECTION("full breakdown for the truncated Hilbert transform") {
        Pipeline p(GridSpec(1, 6), hilbert_kernel(1.0 / 64),
                   {.kind = "perturbed", .seed = 7, .amplitude = 0.5},
                   {.kind = "perturbed", .seed = 9, .amplitude = 0.5}, params);
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto data2 = make_stopping_data(b2, p.T.transpose(), p.sys2.q());
        const auto d2 = decompose(p.spec, root_cube(), data2, params);
        const auto r = compute_B2_recursion(p.T, p.d1, p.b1, d2, root_cube());
        INFO("B2 " << r.b2_constant << " sigma " << r.sigma1 << " " << r.sigma2 << " " << r.sigma3);
        CHECK(r.split_error < 1e-10);
        CHECK(r.sigma3_bound_ok);
        CHECK(r.sigma2_partition_error < 1e-12);
        CHECK(std::isfinite(r.b2_constant));
        CHECK(std::isfinite(r.sigma2_in_linf_max));
        CHECK(r.b2_constant * root_cube().volume(1) + 1e-12 >= r.total);
        // recursion at a proper subcube
        const DyadicCube q2(1, 0);
        const GridFunction b2s = p.sys2.generate(q2);
        const auto data2s = make_stopping_data(b2s, p.T.transpose(), p.sys2.q());
        const auto d2s = decompose(p.spec, q2, data2s, params);
        const auto rs = compute_B2_recursion(p.T, p.d1, p.b1, d2s, q2);
        CHECK(rs.split_error < 1e-10);
        CHECK(rs.sigma3_bound_ok);
    }
}

TEST_CASE("commutator splitting") {
    const StoppingParams params(0.25, 8.0);
    SECTION("constant second function: only the principal term survives") {
        Pipeline p(GridSpec(1, 5), hilbert_kernel(1.0 / 32),
                   {.kind = "perturbed", .seed = 7, .amplitude = 0.4}, {.kind = "constant"},
                   StoppingParams(0.25, 16.0));
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto b_sys = make_adapted_system(p.b1, AccretivityParams(0.25, 4.0, 100.0));
        const GridFunction tb1 = p.T.apply(p.b1);
        REQUIRE(!p.d1.omega1.empty());
        const DyadicCube q = p.d1.omega1[p.d1.omega1.size() / 2];
        const auto cm = coifman_meyer_split(p.T, b_sys, p.b1, b2, tb1, q, 0.25);
        CHECK(cm.norm_t1 < 1e-12);
        CHECK(cm.norm_t2 < 1e-12);
        CHECK(cm.sum_identity_error < 1e-12);
        CHECK(cm.accretivity_margin >= 0.0);
    }
    SECTION("zero kernel: all three terms vanish") {
        Pipeline p(GridSpec(1, 4), zero_kernel(1), {.kind = "perturbed", .seed = 3, .amplitude = 0.3},
                   {.kind = "perturbed", .seed = 4, .amplitude = 0.3}, StoppingParams(0.25, 1e9));
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto b_sys = make_adapted_system(p.b1, AccretivityParams(0.25, 4.0, 100.0));
        const GridFunction tb1 = p.T.apply(p.b1);
        const auto cm =
            coifman_meyer_split(p.T, b_sys, p.b1, b2, tb1, p.d1.omega1.front(), 0.25);
        CHECK(cm.norm_t1 + cm.norm_t2 + cm.norm_t3 < 1e-13);
        CHECK(cm.telescoping_error < 1e-12);
    }
    SECTION("identities hold on random configurations") {
        Pipeline p(GridSpec(1, 6), hilbert_kernel(1.0 / 64),
                   {.kind = "perturbed", .seed = 7, .amplitude = 0.5},
                   {.kind = "perturbed", .seed = 9, .amplitude = 0.5}, params);
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto data2 = make_stopping_data(b2, p.T.transpose(), p.sys2.q());
        const auto d2 = decompose(p.spec, root_cube(), data2, params);
        const auto b_sys = make_adapted_system(p.b1, AccretivityParams(0.25, 4.0, 100.0));
        const GridFunction tb1 = p.T.apply(p.b1);
        int tested = 0;
        for (std::size_t i = 0; i < p.d1.omega1.size() && tested < 6; i += 3) {
            const DyadicCube q = p.d1.omega1[i];
            if (d2.classify(q) != CubeClass::Omega1) continue;
            ++tested;
            const auto cm = coifman_meyer_split(p.T, b_sys, p.b1, b2, tb1, q, 0.25);
            CHECK(cm.sum_identity_error < 1e-12);
            CHECK(cm.t1_identity_error < 1e-12);
            CHECK(cm.t1_split_error < 1e-12);
            CHECK(cm.telescoping_error < 1e-12);
            CHECK(cm.t2_split_error < 1e-12);
            CHECK(cm.gq_identity_error < 1e-12);
            CHECK(cm.accretivity_margin >= -1e-12);
            // residual child-splitting ratios decay with the level gap
            if (cm.child_split_ratios.size() >= 2 && cm.child_split_ratios.front() > 1e-9)
                CHECK(cm.child_split_ratios.back() <= cm.child_split_ratios.front());
        }
        REQUIRE(tested > 0);
    }
}

TEST_CASE("kernel-factorized square bound over doubly-good cubes") {
    const StoppingParams params(0.3, 16.0);
    SECTION("constant functions reduce to the orthogonal bound") {
        Pipeline p(GridSpec(1, 5), constant_kernel(1), {.kind = "constant"}, {.kind = "constant"},
                   params);
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto data2 = make_stopping_data(b2, p.T.transpose(), p.sys2.q());
        const auto d2 = decompose(p.spec, root_cube(), data2, params);
        const auto b_sys = make_adapted_system(p.b1, AccretivityParams(0.3, 4.0, 100.0));
        Rng seeds(12);
        for (int t = 0; t < 10; ++t) {
            const GridFunction g = random_bounded(p.spec, seeds.next_u64(), true);
            const auto r = lemma841_check(g, p.d1, d2, b_sys, b2);
            CHECK(r.c2 == Catch::Approx(1.0));
            CHECK(r.ratio <= 1.0 + 1e-12);  // orthogonal series bound
            CHECK(r.replacement_error < 1e-13);
        }
    }
    SECTION("zero input gives zero") {
        Pipeline p(GridSpec(1, 4), constant_kernel(1), {.kind = "constant"}, {.kind = "constant"},
                   params);
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto data2 = make_stopping_data(b2, p.T.transpose(), p.sys2.q());
        const auto d2 = decompose(p.spec, root_cube(), data2, params);
        const auto b_sys = make_adapted_system(p.b1, AccretivityParams(0.3, 4.0, 100.0));
        const auto r = lemma841_check(GridFunction(p.spec), p.d1, d2, b_sys, b2);
        CHECK(r.ratio == 0.0);
        CHECK(r.lhs == 0.0);
    }
    SECTION("perturbed systems at depth six") {
        Pipeline p(GridSpec(1, 6), hilbert_kernel(1.0 / 64),
                   {.kind = "perturbed", .seed = 7, .amplitude = 0.5},
                   {.kind = "perturbed", .seed = 9, .amplitude = 0.5}, StoppingParams(0.25, 8.0));
        const GridFunction b2 = p.sys2.generate(root_cube());
        const auto data2 = make_stopping_data(b2, p.T.transpose(), p.sys2.q());
        const auto d2 = decompose(p.spec, root_cube(), data2, StoppingParams(0.25, 8.0));
        const auto b_sys = make_adapted_system(p.b1, AccretivityParams(0.25, 4.0, 100.0));
        double worst = 0.0;
        Rng seeds(31);
        for (int t = 0; t < 8; ++t) {
            const GridFunction g = random_bounded(p.spec, seeds.next_u64(), true);
            const auto r = lemma841_check(g, p.d1, d2, b_sys, b2);
            CHECK(r.replacement_error < 1e-12);
            worst = std::max(worst, r.ratio);
        }
        INFO("max ratio " << worst);
        CHECK(std::isfinite(worst));
        CHECK(worst <= 16.0);
    }
}

TEST_CASE("sawtooth Carleson bound") {
    Pipeline p(GridSpec(1, 6), hilbert_kernel(1.0 / 64),
               {.kind = "perturbed", .seed = 7, .amplitude = 0.5}, {.kind = "constant"},
               StoppingParams(0.25, 8.0));
    const auto r = lemma815_check(p.d1, p.b1);
    INFO("sup " << r.sup_ratio << " at " << format_cube(r.argmax, 1) << ", c0 " << r.c0);
    CHECK(r.c0 >= 1.0 - 1e-12);
    // an exact orthogonal-series argument forces ratio <= c0; allow quadrature slack
    CHECK(r.sup_ratio <= 4.0 * r.c0);
}

TEST_CASE("sawtooth square sums over the good cubes") {
    Pipeline p(GridSpec(1, 6), hilbert_kernel(1.0 / 64),
               {.kind = "perturbed", .seed = 7, .amplitude = 0.5}, {.kind = "constant"},
               StoppingParams(0.25, 8.0));
    const auto b_sys = make_adapted_system(p.b1, AccretivityParams(0.25, 4.0, 1e6));
    double worst14 = 0.0, worst42 = 0.0, worst44 = 0.0;
    Rng seeds(21);
    for (int t = 0; t < 8; ++t) {
        const GridFunction f = random_bounded(p.spec, seeds.next_u64(), true);
        const double fq = l2_norm_sq(f, p.d1.q1);
        if (fq < 1e-12) continue;
        worst14 = std::max(worst14, omega1_transpose_square_sum(p.d1, b_sys, f) / fq);
        worst42 = std::max(worst42, omega1_adapted_square_sum(p.d1, b_sys, f) / fq);
        worst44 = std::max(worst44, omega1_lambda_square_sum(p.d1, b_sys, f) / fq);
    }
    INFO("transpose " << worst14 << ", adapted " << worst42 << ", factorized " << worst44);
    CHECK(worst14 > 0.0);
    CHECK(worst14 <= 32.0);
    CHECK(worst42 <= 32.0);
    CHECK(worst44 <= 64.0);
}

TEST_CASE("full verification run") {
    SECTION("zero kernel: clean report with zero testing constant") {
        ExperimentConfig cfg;
        cfg.grid = GridSpec(1, 4);
        cfg.kernels = {KernelSpec{.name = "zero"}};
        cfg.sys1 = {.kind = "constant"};
        cfg.sys2 = {.kind = "constant"};
        cfg.stopping = StoppingParams(0.25, 1e6);
        cfg.verification.random_trials = 3;
        cfg.verification.test_functions.count = 2;
        const auto rep = run_full_verification(cfg);
        CHECK(rep.metrics.at("t1loc.b1") == 0.0);
        for (const auto& c : rep.checks) {
            INFO(c.name << " value " << c.value << " threshold " << c.threshold);
            CHECK(c.pass);
        }
    }
    SECTION("truncated Hilbert end to end") {
        ExperimentConfig cfg;
        cfg.grid = GridSpec(1, 5);
        cfg.kernels = {KernelSpec{.name = "hilbert", .tau = 1.0 / 32}};
        cfg.sys1 = {.kind = "perturbed", .seed = 7, .amplitude = 0.5};
        cfg.sys2 = {.kind = "perturbed", .seed = 9, .amplitude = 0.25};
        cfg.stopping = StoppingParams(0.25, 16.0);
        cfg.verification.random_trials = 3;
        cfg.verification.test_functions.count = 2;
        const auto rep = run_full_verification(cfg);
        for (const auto& c : rep.checks) {
            INFO(c.name << " value " << c.value << " threshold " << c.threshold);
            CHECK(c.pass);
        }
        CHECK(rep.metrics.at("t1loc.b1") > 0.0);
        CHECK(rep.metrics.count("eq8.38.b2") == 1);
        CHECK(rep.metrics.count("lem8.33.ratio") == 1);
    }
    SECTION("determinism: identical configs give identical reports") {
        ExperimentConfig cfg;
        cfg.grid = GridSpec(1, 4);
        cfg.kernels = {KernelSpec{.name = "hilbert", .tau = 1.0 / 16}};
        cfg.sys1 = {.kind = "perturbed", .seed = 3, .amplitude = 0.4, .theta_max = 0.2};
        cfg.sys2 = {.kind = "perturbed", .seed = 5, .amplitude = 0.25};
        cfg.stopping = StoppingParams(0.25, 16.0);
        cfg.verification.random_trials = 2;
        cfg.verification.test_functions.count = 1;
        const auto a = run_full_verification(cfg);
        const auto b = run_full_verification(cfg);
        const auto ja = report_to_json(a, config_to_json(cfg));
        const auto jb = report_to_json(b, config_to_json(cfg));
        CHECK(ja == jb);
    }
}
