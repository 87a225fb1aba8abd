#include <catch2/catch_amalgamated.hpp>

#include "dyadic_tb/bruteforce.hpp"
#include "dyadic_tb/grid_function.hpp"
#include "dyadic_tb/rng.hpp"

using namespace dytb;

TEST_CASE("averages") {
    SECTION("constant functions average to the constant") {
        GridSpec spec(2, 3);
        GridFunction f(spec, cplx{2.5, -1.0});
        for (const auto& q : all_cubes(spec))
            CHECK(std::abs(average(f, q) - cplx{2.5, -1.0}) < 1e-14);
    }
    SECTION("two-cell mean") {
        GridSpec spec(1, 1);
        GridFunction f(spec);
        f[0] = 2.0;
        f[1] = 0.0;
        CHECK(average(f, root_cube()).real() == Catch::Approx(1.0));
    }
    SECTION("tower property over children") {
        GridSpec spec(2, 4);
        const GridFunction f = random_bounded(spec, 17, true);
        for (const auto& q : all_cubes(spec)) {
            if (q.gen == spec.L) continue;
            cplx acc{0.0, 0.0};
            for (const auto& c : children(spec, q)) acc += average(f, c);
            acc *= 1.0 / static_cast<double>(child_count(spec.n));
            CHECK(std::abs(acc - average(f, q)) < 1e-12);
        }
    }
    SECTION("averages match naive summation") {
        GridSpec spec(2, 4);
        const GridFunction f = random_bounded(spec, 23, true);
        for (const auto& q : all_cubes(spec))
            CHECK(std::abs(average(f, q) - bruteforce::cube_average(f, q)) < 1e-12);
    }
    SECTION("lp norms match naive summation on all cubes") {
        GridSpec spec(1, 4);
        const GridFunction f = random_bounded(spec, 29, true);
        for (const auto& q : all_cubes(spec)) {
            for (const double p : {1.0, 2.0, 3.0}) {
                double naive = 0.0;
                for (std::int64_t i = 0; i < spec.cell_count(); ++i)
                    if (bruteforce::cell_in_cube(spec, i, q))
                        naive += std::pow(std::abs(f[i]), p) * spec.cell_volume();
                CHECK(lp_norm(f, p, q) == Catch::Approx(std::pow(naive, 1.0 / p)).margin(1e-12));
            }
        }
    }
}

TEST_CASE("lp norms") {
    SECTION("normalized measure: constant one has unit norm") {
        GridSpec spec(1, 4);
        GridFunction f(spec, cplx{1.0, 0.0});
        const Region root = region_of_cube(spec, root_cube());
        for (const double p : {1.0, 2.0, 3.5}) CHECK(lp_norm(f, p, root) == Catch::Approx(1.0));
    }
    SECTION("two-cell l2") {
        GridSpec spec(1, 1);
        GridFunction f(spec);
        f[0] = 1.0;
        f[1] = -1.0;
        CHECK(lp_norm(f, 2.0, region_of_cube(spec, root_cube())) == Catch::Approx(1.0));
    }
    SECTION("Hoelder comparison against higher exponent") {
        GridSpec spec(1, 5);
        const Region root = region_of_cube(spec, root_cube());
        Rng seeds(99);
        for (int t = 0; t < 25; ++t) {
            const GridFunction f = random_bounded(spec, seeds.next_u64());
            for (const double q : {2.5, 4.0, 8.0}) {
                const double lhs = lp_norm(f, 2.0, root);
                const double rhs = lp_norm(f, q, root) * std::pow(1.0, 0.5 - 1.0 / q);
                CHECK(lhs <= rhs * (1.0 + 1e-12));
            }
        }
    }
    SECTION("infinity norm") {
        GridSpec spec(1, 2);
        GridFunction f(spec);
        f[0] = cplx{0.0, -3.0};
        f[2] = 1.5;
        CHECK(lp_norm(f, std::numeric_limits<double>::infinity(),
                      region_of_cube(spec, root_cube())) == Catch::Approx(3.0));
    }
}

TEST_CASE("maximal function") {
    SECTION("constant one is fixed") {
        GridSpec spec(2, 3);
        GridFunction f(spec, cplx{1.0, 0.0});
        const GridFunction m = maximal_function(f);
        for (std::int64_t i = 0; i < m.size(); ++i) CHECK(m[i].real() == Catch::Approx(1.0));
    }
    SECTION("quarter bump: exact values by enumeration") {
        GridSpec spec(1, 2);
        GridFunction f(spec);
        f[0] = 1.0;  // 1 on [0, 1/4)
        const GridFunction m = maximal_function(f);
        const GridFunction ref = bruteforce::maximal_function(f);
        for (std::int64_t i = 0; i < m.size(); ++i) {
            CHECK(m[i].real() == Catch::Approx(ref[i].real()));
            CHECK(m[i].real() >= 0.25 - 1e-15);  // root average reaches every cell
        }
    }
    SECTION("dominates |f| pointwise and matches brute force") {
        GridSpec spec(2, 3);
        const GridFunction f = random_bounded(spec, 31, true);
        const GridFunction m = maximal_function(f);
        const GridFunction ref = bruteforce::maximal_function(f);
        for (std::int64_t i = 0; i < m.size(); ++i) {
            CHECK(m[i].real() >= std::abs(f[i]) - 1e-13);
            CHECK(m[i].real() == Catch::Approx(ref[i].real()).margin(1e-13));
        }
    }
}

TEST_CASE("maximal operator has depth-uniform lq bounds") {
    // finite test family: the operator norm must stay within a fixed band
    // across depths; the empirical constants are also reported by the CLI
    for (const double q : {2.0, 2.5, 4.0}) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int L = 3; L <= 6; ++L) {
            GridSpec spec(1, L);
            const Region root = region_of_cube(spec, root_cube());
            double worst = 0.0;
            Rng seeds(1234 + L);
            for (int t = 0; t < 10; ++t) {
                const GridFunction f = random_bounded(spec, seeds.next_u64());
                const double fn = lp_norm(f, q, root);
                if (fn < 1e-12) continue;
                worst = std::max(worst, lp_norm(maximal_function(f), q, root) / fn);
            }
            lo = std::min(lo, worst);
            hi = std::max(hi, worst);
        }
        INFO("q = " << q << " ratio band [" << lo << ", " << hi << "]");
        CHECK(hi / lo <= 2.0);
        CHECK(std::isfinite(hi));
    }
}
