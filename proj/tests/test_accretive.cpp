#include <catch2/catch_amalgamated.hpp>

#include "dyadic_tb/accretive_system.hpp"

using namespace dytb;

TEST_CASE("constant system") {
    GridSpec spec(1, 4);
    PseudoAccretiveSystem sys(spec, {.kind = "constant"});
    for (const auto& q : all_cubes(spec)) {
        const GridFunction b = sys.generate(q);
        CHECK(std::abs(average(b, q) - cplx{1.0, 0.0}) < 1e-15);
        CHECK(std::pow(lp_norm(b, sys.q(), q), sys.q()) == Catch::Approx(q.volume(1)));
        // supported in Q
        const GridFunction leak = b - restrict_to(b, q);
        CHECK(l2_norm(leak) == 0.0);
    }
}

TEST_CASE("perturbed systems") {
    GridSpec spec(1, 4);
    SECTION("zero amplitude reduces to the constant system") {
        PseudoAccretiveSystem sys(spec, {.kind = "perturbed", .seed = 7, .amplitude = 0.0});
        for (const auto& q : all_cubes(spec)) {
            const GridFunction b = sys.generate(q);
            GridFunction diff = b - indicator(spec, q);
            CHECK(l2_norm(diff) < 1e-14);
        }
    }
    SECTION("normalization and computed L^q constant") {
        PseudoAccretiveSystem sys(spec, {.kind = "perturbed", .seed = 7, .amplitude = 0.5, .q = 4.0});
        double ci = 0.0;
        for (const auto& q : all_cubes(spec)) {
            const GridFunction b = sys.generate(q);
            CHECK(std::abs(average(b, q) - cplx{1.0, 0.0}) < 1e-13);
            ci = std::max(ci, std::pow(lp_norm(b, 4.0, q), 4.0) / q.volume(1));
        }
        INFO("computed C_i " << ci);
        CHECK(ci >= 1.0);
        CHECK(ci <= std::pow(1.5 / 0.5, 4.0));  // crude envelope of (1 + a w)/min
    }
    SECTION("determinism: same seed gives identical values") {
        PseudoAccretiveSystem a(spec, {.kind = "perturbed", .seed = 99, .amplitude = 0.3, .theta_max = 0.2});
        PseudoAccretiveSystem b(spec, {.kind = "perturbed", .seed = 99, .amplitude = 0.3, .theta_max = 0.2});
        for (const auto& q : all_cubes(spec)) {
            const GridFunction ba = a.generate(q);
            const GridFunction bb = b.generate(q);
            for (std::int64_t i = 0; i < ba.size(); ++i) {
                CHECK(ba[i].real() == bb[i].real());
                CHECK(ba[i].imag() == bb[i].imag());
            }
        }
    }
    SECTION("complex systems keep unit averages") {
        PseudoAccretiveSystem sys(spec, {.kind = "perturbed", .seed = 3, .amplitude = 0.25, .theta_max = 0.3});
        for (const auto& q : all_cubes(spec)) {
            const GridFunction b = sys.generate(q);
            CHECK(std::abs(average(b, q) - cplx{1.0, 0.0}) < 1e-13);
            bool has_imag = false;
            for_each_cell_flat(spec, q, [&](std::int64_t i) {
                if (std::abs(b[i].imag()) > 1e-12) has_imag = true;
            });
            if (q.gen < spec.L) CHECK(has_imag);
        }
    }
}

TEST_CASE("file-backed systems renormalize on ingestion") {
    GridSpec spec(1, 2);
    PseudoAccretiveSystem sys(spec, {.kind = "file"});
    sys.set_file_values(DyadicCube(1, 0), {cplx{2.0, 0.0}, cplx{4.0, 0.0}});
    const GridFunction b = sys.generate(DyadicCube(1, 0));
    CHECK(std::abs(average(b, DyadicCube(1, 0)) - cplx{1.0, 0.0}) < 1e-15);
    CHECK(b[1].real() == Catch::Approx(2.0 * b[0].real()));
    CHECK_THROWS_AS(sys.generate(DyadicCube(1, 1)), std::domain_error);
    CHECK_THROWS_AS(sys.set_file_values(DyadicCube(1, 1), {cplx{1.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("validation against operators") {
    GridSpec spec(1, 4);
    SECTION("constant system, zero kernel") {
        PseudoAccretiveSystem sys(spec, {.kind = "constant"});
        const CZOperator T = discretize(zero_kernel(1), spec);
        const auto rep = validate(sys, T);
        CHECK(rep.C_i == Catch::Approx(1.0));
        CHECK(rep.C_ii == 0.0);
        CHECK(rep.worst_support_leak == 0.0);
        CHECK(rep.worst_normalization_error < 1e-14);
    }
    SECTION("constant system, constant kernel: testing constant is |root|^2") {
        PseudoAccretiveSystem sys(spec, {.kind = "constant"});
        const CZOperator T = discretize(constant_kernel(1), spec);
        const auto rep = validate(sys, T, true);
        CHECK(rep.C_ii == Catch::Approx(1.0));  // max of |Q|^2 over Q is at the root
        for (const auto& e : rep.entries)
            CHECK(e.testing_ratio == Catch::Approx(e.cube.volume(1) * e.cube.volume(1)));
    }
    SECTION("perturbed system against the truncated Hilbert transform") {
        GridSpec spec5(1, 5);
        PseudoAccretiveSystem sys(spec5, {.kind = "perturbed", .seed = 7, .amplitude = 0.5}, 1);
        const CZOperator T = discretize(hilbert_kernel(1.0 / 32), spec5);
        const auto rep = validate(sys, T);
        INFO("C_i " << rep.C_i << ", C_ii " << rep.C_ii);
        CHECK(rep.worst_support_leak == 0.0);
        CHECK(rep.worst_normalization_error < 1e-12);
        CHECK(std::isfinite(rep.C_ii));
        CHECK(rep.C_ii > 0.0);
    }
    SECTION("side 2 validates against the transpose") {
        PseudoAccretiveSystem sys2(spec, {.kind = "perturbed", .seed = 5, .amplitude = 0.25}, 2);
        const CZOperator T = discretize(hilbert_kernel(1.0 / 16), spec);
        const auto rep = validate(sys2, T);
        CHECK(std::isfinite(rep.C_ii));
    }
}
