#pragma once

// b-adapted martingale machinery: E^b_k = E_k(f b)/E_k(b), its difference
// Delta^b_k, the transposes A^b_k = b E_k / E_k(b) and D^b_k, localized
// one-cube versions, and the kernel factorization
//   phi^b_Q(x,y) = lambda^b_Q(x,y) b(y),   Lambda^b_Q(b g) = Delta^b_Q g.
//
// Division by a cube average of b below the numerical floor is an error,
// not a silent NaN; such cubes belong in a stopped region.

#include <complex>
#include <stdexcept>
#include <vector>

#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/grid_function.hpp"
#include "dyadic_tb/martingale.hpp"

namespace dytb {

inline constexpr double kAccretivityFloor = 1e-10;

struct AccretivityError : std::runtime_error {
    DyadicCube cube;
    explicit AccretivityError(const DyadicCube& q, int n)
        : std::runtime_error("accretivity violation: |[b]_Q| below numerical floor at " +
                             format_cube(q, n)),
          cube(q) {}
};

struct AccretivityParams {
    double delta = 0.1;  // lower bound on |[b]_Q|
    double q = 4.0;      // integrability exponent, > 2
    double C0 = 16.0;    // upper bound on [|b|^q]_Q

    AccretivityParams() = default;
    AccretivityParams(double d, double q_, double c0) : delta(d), q(q_), C0(c0) {
        if (delta <= 0.0) throw std::invalid_argument("AccretivityParams: delta must be positive");
        if (q <= 2.0) throw std::invalid_argument("AccretivityParams: q must exceed 2");
        if (delta > 1.0 || C0 < 1.0)
            throw std::invalid_argument("AccretivityParams: need delta <= 1 <= C0");
    }
};

// A testing function together with its accretivity data. good[k][j] marks
// the generation-k cubes on which both Def-style conditions hold.
struct AdaptedSystem {
    GridFunction b;
    AccretivityParams params;
    CubeSums b_sums;                       // per-cube integrals of b
    std::vector<std::vector<char>> good;   // per-generation goodness flags

    bool is_good(const DyadicCube& q) const {
        return good[static_cast<std::size_t>(q.gen)]
                   [static_cast<std::size_t>(cube_linear_index(q))] != 0;
    }
};

inline AdaptedSystem make_adapted_system(GridFunction b, const AccretivityParams& params) {
    AdaptedSystem sys{std::move(b), params, {}, {}};
    sys.b_sums = cube_integrals(sys.b);
    const GridSpec& spec = sys.b.spec;
    GridFunction bq(spec);
    for (std::int64_t i = 0; i < sys.b.size(); ++i)
        bq[i] = std::pow(std::abs(sys.b[i]), params.q);
    const CubeSums q_sums = cube_integrals(bq);
    sys.good.resize(static_cast<std::size_t>(spec.L) + 1);
    for (int g = 0; g <= spec.L; ++g) {
        auto& flags = sys.good[static_cast<std::size_t>(g)];
        const auto cubes = generation_cubes(spec, g);
        flags.resize(cubes.size());
        for (std::size_t j = 0; j < cubes.size(); ++j) {
            const double vol = cubes[j].volume(spec.n);
            const double avg_b = std::abs(cube_integral(sys.b_sums, cubes[j]) / vol);
            const double avg_q = (cube_integral(q_sums, cubes[j]) / vol).real();
            flags[j] = (avg_b >= params.delta && avg_q <= params.C0) ? 1 : 0;
        }
    }
    return sys;
}

// [num]_Q / [b]_Q with the numerical floor: a vanishing numerator on a
// degenerate cube is taken as 0 (the cube carries none of the support).
inline cplx adapted_ratio(const AdaptedSystem& sys, const CubeSums& num_sums, const DyadicCube& q) {
    const cplx den = cube_integral(sys.b_sums, q);
    const cplx num = cube_integral(num_sums, q);
    const double vol = q.volume(sys.b.spec.n);
    if (std::abs(den) / vol < kAccretivityFloor) {
        if (std::abs(num) / vol < 1e-12) return {0.0, 0.0};
        throw AccretivityError(q, sys.b.spec.n);
    }
    return num / den;
}

// E^b_k f = E_k(f b) / E_k(b), constant on generation-k cubes.
inline GridFunction adapted_expectation(const GridFunction& f, const AdaptedSystem& sys, int k) {
    const GridSpec& spec = f.spec;
    if (k < 0 || k > spec.L) throw std::domain_error("adapted_expectation: generation out of range");
    const CubeSums fb = cube_integrals(pointwise_product(f, sys.b));
    GridFunction out(spec);
    for (const auto& q : generation_cubes(spec, k)) {
        const cplx val = adapted_ratio(sys, fb, q);
        for_each_cell_flat(spec, q, [&](std::int64_t i) { out[i] = val; });
    }
    return out;
}

// Delta^b_k = E^b_{k+1} - E^b_k.
inline GridFunction adapted_difference(const GridFunction& f, const AdaptedSystem& sys, int k) {
    const GridSpec& spec = f.spec;
    if (k < 0 || k >= spec.L) throw std::domain_error("adapted_difference: generation out of range");
    return adapted_expectation(f, sys, k + 1) - adapted_expectation(f, sys, k);
}

// A^b_k f = b E_k f / E_k b  (transpose of E^b_k under the bilinear pairing).
inline GridFunction transpose_expectation(const GridFunction& f, const AdaptedSystem& sys, int k) {
    const GridSpec& spec = f.spec;
    if (k < 0 || k > spec.L) throw std::domain_error("transpose_expectation: generation out of range");
    const CubeSums fs = cube_integrals(f);
    GridFunction out(spec);
    for (const auto& q : generation_cubes(spec, k)) {
        const cplx val = adapted_ratio(sys, fs, q);
        for_each_cell_flat(spec, q, [&](std::int64_t i) { out[i] = val * sys.b[i]; });
    }
    return out;
}

// D^b_k = A^b_{k+1} - A^b_k.
inline GridFunction transpose_difference(const GridFunction& f, const AdaptedSystem& sys, int k) {
    const GridSpec& spec = f.spec;
    if (k < 0 || k >= spec.L) throw std::domain_error("transpose_difference: generation out of range");
    return transpose_expectation(f, sys, k + 1) - transpose_expectation(f, sys, k);
}

// ---------------------------------------------------------------------------
// Localized (single-cube) versions. All take precomputed integral tables so
// sweeps over many cubes stay cheap; the *_once variants build the tables.

// 1_Q E^b_k f
inline GridFunction adapted_expectation_local(const AdaptedSystem& sys, const CubeSums& fb,
                                              const DyadicCube& q) {
    GridFunction out(sys.b.spec);
    const cplx val = adapted_ratio(sys, fb, q);
    for_each_cell_flat(sys.b.spec, q, [&](std::int64_t i) { out[i] = val; });
    return out;
}

// 1_Q Delta^b_k f: on each child Q' the constant [fb]_{Q'}/[b]_{Q'} - [fb]_Q/[b]_Q.
inline GridFunction adapted_difference_local(const AdaptedSystem& sys, const CubeSums& fb,
                                             const DyadicCube& q) {
    const GridSpec& spec = sys.b.spec;
    if (q.gen >= spec.L) throw std::domain_error("adapted_difference_local: leaf cube has no children");
    GridFunction out(spec);
    const cplx coarse = adapted_ratio(sys, fb, q);
    for (const auto& child : children(spec, q)) {
        const cplx val = adapted_ratio(sys, fb, child) - coarse;
        for_each_cell_flat(spec, child, [&](std::int64_t i) { out[i] = val; });
    }
    return out;
}

inline GridFunction adapted_difference_local_once(const GridFunction& f, const AdaptedSystem& sys,
                                                  const DyadicCube& q) {
    return adapted_difference_local(sys, cube_integrals(pointwise_product(f, sys.b)), q);
}

// 1_Q A^b_k f
inline GridFunction transpose_expectation_local(const AdaptedSystem& sys, const CubeSums& fs,
                                                const DyadicCube& q) {
    GridFunction out(sys.b.spec);
    const cplx val = adapted_ratio(sys, fs, q);
    for_each_cell_flat(sys.b.spec, q, [&](std::int64_t i) { out[i] = val * sys.b[i]; });
    return out;
}

// 1_Q D^b_k f
inline GridFunction transpose_difference_local(const AdaptedSystem& sys, const CubeSums& fs,
                                               const DyadicCube& q) {
    const GridSpec& spec = sys.b.spec;
    if (q.gen >= spec.L) throw std::domain_error("transpose_difference_local: leaf cube has no children");
    GridFunction out(spec);
    const cplx coarse = adapted_ratio(sys, fs, q);
    for (const auto& child : children(spec, q)) {
        const cplx val = adapted_ratio(sys, fs, child) - coarse;
        for_each_cell_flat(spec, child, [&](std::int64_t i) { out[i] = val * sys.b[i]; });
    }
    return out;
}

inline GridFunction transpose_difference_local_once(const GridFunction& f, const AdaptedSystem& sys,
                                                    const DyadicCube& q) {
    return transpose_difference_local(sys, cube_integrals(f), q);
}

// ||1_Q D^b_k f||_2^2 without materializing the function.
inline double transpose_difference_local_norm_sq(const AdaptedSystem& sys, const CubeSums& fs,
                                                 const CubeSums& b_abs2_sums, const DyadicCube& q) {
    const GridSpec& spec = sys.b.spec;
    const cplx coarse = adapted_ratio(sys, fs, q);
    KahanSum acc;
    for (const auto& child : children(spec, q)) {
        const cplx val = adapted_ratio(sys, fs, child) - coarse;
        acc.add(std::norm(val) * cube_integral(b_abs2_sums, child).real());
    }
    return acc.value();
}

// Lambda^b_Q g: on each child Q' the constant [g]_{Q'}/[b]_{Q'} - [g]_Q/[b]_Q,
// supported on Q. Satisfies Lambda^b_Q(b g) = Delta^b_Q g.
inline GridFunction lambda_apply(const AdaptedSystem& sys, const CubeSums& g_sums,
                                 const DyadicCube& q) {
    const GridSpec& spec = sys.b.spec;
    if (q.gen >= spec.L) throw std::domain_error("lambda_apply: leaf cube has no children");
    GridFunction out(spec);
    const cplx coarse = adapted_ratio(sys, g_sums, q);
    for (const auto& child : children(spec, q)) {
        const cplx val = adapted_ratio(sys, g_sums, child) - coarse;
        for_each_cell_flat(spec, child, [&](std::int64_t i) { out[i] = val; });
    }
    return out;
}

inline GridFunction lambda_apply_once(const GridFunction& g, const AdaptedSystem& sys,
                                      const DyadicCube& q) {
    return lambda_apply(sys, cube_integrals(g), q);
}

inline double lambda_apply_norm_sq(const AdaptedSystem& sys, const CubeSums& g_sums,
                                   const DyadicCube& q) {
    const GridSpec& spec = sys.b.spec;
    const cplx coarse = adapted_ratio(sys, g_sums, q);
    KahanSum acc;
    for (const auto& child : children(spec, q)) {
        const cplx val = adapted_ratio(sys, g_sums, child) - coarse;
        acc.add(std::norm(val) * child.volume(spec.n));
    }
    return acc.value();
}

// ---------------------------------------------------------------------------
// Square-function sums

// sum_k ||Delta^b_k f||_2^2
inline double adapted_square_sum(const GridFunction& f, const AdaptedSystem& sys) {
    KahanSum acc;
    for (int k = 0; k < f.spec.L; ++k) acc.add(l2_norm_sq(adapted_difference(f, sys, k)));
    return acc.value();
}

// sum_k ||D^b_k f||_2^2
inline double transpose_square_sum(const GridFunction& f, const AdaptedSystem& sys) {
    KahanSum acc;
    for (int k = 0; k < f.spec.L; ++k) acc.add(l2_norm_sq(transpose_difference(f, sys, k)));
    return acc.value();
}

}  // namespace dytb
