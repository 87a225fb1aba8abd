#pragma once

// Standard dyadic conditional expectations E_k, martingale differences
// Delta_k = E_{k+1} - E_k, the square-function and Carleson functionals,
// and the canonical neighbor difference operators.
//
// On the finite tree the telescoping terminates at the root, so the
// reproducing formula reads  f = E_0 f + sum_{k<L} Delta_k f  exactly.

#include <cmath>
#include <vector>

#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/grid_function.hpp"

namespace dytb {

// E_k f: constant on each generation-k cube with value [f]_Q.
inline GridFunction expectation(const GridFunction& f, int k) {
    const GridSpec& spec = f.spec;
    if (k < 0 || k > spec.L) throw std::domain_error("expectation: generation out of range");
    if (k == spec.L) return f;
    const CubeSums sums = cube_integrals(f);
    GridFunction out(spec);
    for (const auto& q : generation_cubes(spec, k)) {
        const cplx avg = cube_average(spec, sums, q);
        for_each_cell_flat(spec, q, [&](std::int64_t i) { out[i] = avg; });
    }
    return out;
}

// Delta_k f = E_{k+1} f - E_k f; mean zero on every generation-k cube.
inline GridFunction difference(const GridFunction& f, int k) {
    const GridSpec& spec = f.spec;
    if (k < 0 || k >= spec.L) throw std::domain_error("difference: generation out of range");
    return expectation(f, k + 1) - expectation(f, k);
}

// 1_Q Delta_k f for Q in D_k.
inline GridFunction difference_local(const GridFunction& f, const DyadicCube& q) {
    return restrict_to(difference(f, q.gen), q);
}

struct SquareFunctionResult {
    double total = 0.0;                // sum_k ||Delta_k f||_2^2
    std::vector<double> per_level;     // k = 0 .. L-1
    double coarse = 0.0;               // ||E_0 f||_2^2
};

// Square-function data; the finite-grid identity is
// ||f||^2 = ||E_0 f||^2 + sum_k ||Delta_k f||^2.
inline SquareFunctionResult square_function(const GridFunction& f) {
    SquareFunctionResult r;
    r.per_level.resize(static_cast<std::size_t>(f.spec.L));
    KahanSum total;
    for (int k = 0; k < f.spec.L; ++k) {
        const double term = l2_norm_sq(difference(f, k));
        r.per_level[static_cast<std::size_t>(k)] = term;
        total.add(term);
    }
    r.total = total.value();
    r.coarse = l2_norm_sq(expectation(f, 0));
    return r;
}

// |Q|^{-1} sum over dyadic Q' <= Q of ||1_{Q'} Delta_k h||_2^2
// = |Q|^{-1} sum_{k >= gen(Q)} int_Q |Delta_k h|^2.
inline double carleson_functional(const GridFunction& h, const DyadicCube& q) {
    const GridSpec& spec = h.spec;
    if (!q.inside_root(spec.n)) throw std::domain_error("carleson_functional: cube outside root");
    KahanSum acc;
    for (int k = q.gen; k < spec.L; ++k) {
        const GridFunction d = difference(h, k);
        acc.add(l2_norm_sq(d, q));
    }
    return acc.value() / q.volume(spec.n);
}

// sup_Q of the Carleson functional over all dyadic cubes, computed via
// one bottom-up pass over subtree sums of the |Delta_k h|^2 profiles.
inline double carleson_norm(const GridFunction& h) {
    const GridSpec& spec = h.spec;
    // level-sq[k] = cellwise |Delta_k h|^2 (real profile)
    std::vector<GridFunction> profiles;
    profiles.reserve(static_cast<std::size_t>(spec.L));
    for (int k = 0; k < spec.L; ++k) {
        GridFunction p(spec);
        const GridFunction d = difference(h, k);
        for (std::int64_t i = 0; i < p.size(); ++i) p[i] = std::norm(d[i]);
        profiles.push_back(std::move(p));
    }
    std::vector<CubeSums> tables;
    tables.reserve(profiles.size());
    for (const auto& p : profiles) tables.push_back(cube_integrals(p));

    double best = 0.0;
    for (int g = 0; g <= spec.L; ++g) {
        for (const auto& q : generation_cubes(spec, g)) {
            KahanSum acc;
            for (int k = g; k < spec.L; ++k) acc.add(cube_integral(tables[static_cast<std::size_t>(k)], q).real());
            best = std::max(best, acc.value() / q.volume(spec.n));
        }
    }
    return best;
}

// Dyadic BMO norm in the L^2 oscillation form:
// sup_Q ( [|h - [h]_Q|^2]_Q )^{1/2}.
inline double bmo_norm(const GridFunction& h) {
    const GridSpec& spec = h.spec;
    const CubeSums sums = cube_integrals(h);
    GridFunction sq(spec);
    for (std::int64_t i = 0; i < h.size(); ++i) sq[i] = std::norm(h[i]);
    const CubeSums sums_sq = cube_integrals(sq);
    double best = 0.0;
    for (int g = 0; g <= spec.L; ++g) {
        for (const auto& q : generation_cubes(spec, g)) {
            const double vol = q.volume(spec.n);
            const cplx mean = cube_integral(sums, q) / vol;
            // [|h - m|^2]_Q = [|h|^2]_Q - |m|^2
            const double osc = cube_integral(sums_sq, q).real() / vol - std::norm(mean);
            best = std::max(best, osc);
        }
    }
    return std::sqrt(std::max(0.0, best));
}

// ---------------------------------------------------------------------------
// Neighbor differences
//
// For Q in D_k and its m-th canonical neighbor Q^m, the function supported
// on Q with constant value [f]_Q - [f]_{Q^m}. Exterior neighbor cells
// contribute zero mass but full measure to [f]_{Q^m}.

inline cplx average_zero_extended(const GridFunction& f, const CubeSums& sums, const DyadicCube& q) {
    if (q.inside_root(f.spec.n)) return cube_average(f.spec, sums, q);
    // intersect with the root cell-by-cell; fully exterior cubes average to 0
    const GridSpec& spec = f.spec;
    if (q.gen > spec.L) throw std::domain_error("average_zero_extended: generation below finest");
    const std::int64_t w = std::int64_t{1} << (spec.L - q.gen);
    const std::int64_t axis = spec.cells_per_axis();
    KahanSumC acc;
    if (spec.n == 1) {
        const std::int64_t lo = std::max<std::int64_t>(0, q.idx[0] * w);
        const std::int64_t hi = std::min(axis, (q.idx[0] + 1) * w);
        for (std::int64_t i = lo; i < hi; ++i) acc.add(f[i]);
    } else {
        const std::int64_t lo0 = std::max<std::int64_t>(0, q.idx[0] * w);
        const std::int64_t hi0 = std::min(axis, (q.idx[0] + 1) * w);
        const std::int64_t lo1 = std::max<std::int64_t>(0, q.idx[1] * w);
        const std::int64_t hi1 = std::min(axis, (q.idx[1] + 1) * w);
        for (std::int64_t j = lo1; j < hi1; ++j)
            for (std::int64_t i = lo0; i < hi0; ++i) acc.add(f[j * axis + i]);
    }
    return acc.value() * spec.cell_volume() / q.volume(spec.n);
}

inline GridFunction neighbor_difference(const GridFunction& f, const DyadicCube& q, int m) {
    const GridSpec& spec = f.spec;
    const int count = (spec.n == 1) ? 2 : 8;
    if (m < 1 || m > count) throw std::invalid_argument("neighbor_difference: neighbor index out of range");
    const CubeSums sums = cube_integrals(f);
    const auto nb = neighbors(spec, q)[static_cast<std::size_t>(m - 1)];
    const cplx val = cube_average(spec, sums, q) - average_zero_extended(f, sums, nb);
    GridFunction out(spec);
    for_each_cell_flat(spec, q, [&](std::int64_t i) { out[i] = val; });
    return out;
}

// sum over all dyadic cubes (generations 0..L) of ||ndiff_Q^m f||_2^2.
inline double neighbor_square_sum(const GridFunction& f, int m) {
    const GridSpec& spec = f.spec;
    const int count = (spec.n == 1) ? 2 : 8;
    if (m < 1 || m > count) throw std::invalid_argument("neighbor_square_sum: neighbor index out of range");
    const CubeSums sums = cube_integrals(f);
    const auto off = neighbor_offsets(spec.n)[static_cast<std::size_t>(m - 1)];
    KahanSum acc;
    for (int g = 0; g <= spec.L; ++g) {
        for (const auto& q : generation_cubes(spec, g)) {
            DyadicCube nb = q;
            for (int d = 0; d < spec.n; ++d) nb.idx[d] += off[d];
            const cplx val = cube_average(spec, sums, q) - average_zero_extended(f, sums, nb);
            acc.add(std::norm(val) * q.volume(spec.n));
        }
    }
    return acc.value();
}

}  // namespace dytb
