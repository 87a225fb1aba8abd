#pragma once

// Independent reference computations by direct double-loop summation over
// cells. Nothing here touches CZOperator, CubeSums or the martingale
// machinery: kernels are re-evaluated pointwise and averages re-summed
// naively, so these values can stand against the main implementation path.
// Intended for depths L <= 4.

#include <cmath>
#include <complex>
#include <vector>

#include "dyadic_tb/cz_kernel.hpp"
#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/grid_function.hpp"

namespace dytb::bruteforce {

// (T f)(x_i) = sum_j K(x_i, y_j) f_j vol by plain double loop.
inline GridFunction apply_operator(const CZKernel& kernel, const GridFunction& f) {
    const GridSpec& spec = f.spec;
    const std::int64_t n = spec.cell_count();
    const double vol = spec.cell_volume();
    GridFunction out(spec);
    for (std::int64_t i = 0; i < n; ++i) {
        const Point x = cell_center(spec, i);
        cplx acc{0.0, 0.0};
        for (std::int64_t j = 0; j < n; ++j) {
            const Point y = cell_center(spec, j);
            acc += kernel.evaluate(x, y) * f[j];
        }
        out[i] = acc * vol;
    }
    return out;
}

inline GridFunction apply_transpose(const CZKernel& kernel, const GridFunction& f) {
    const GridSpec& spec = f.spec;
    const std::int64_t n = spec.cell_count();
    const double vol = spec.cell_volume();
    GridFunction out(spec);
    for (std::int64_t i = 0; i < n; ++i) {
        const Point x = cell_center(spec, i);
        cplx acc{0.0, 0.0};
        for (std::int64_t j = 0; j < n; ++j) {
            const Point y = cell_center(spec, j);
            acc += kernel.evaluate(y, x) * f[j];
        }
        out[i] = acc * vol;
    }
    return out;
}

inline bool cell_in_cube(const GridSpec& spec, std::int64_t flat, const DyadicCube& q) {
    const Cell c = cell_from_flat(spec, flat);
    const std::int64_t w = std::int64_t{1} << (spec.L - q.gen);
    for (int d = 0; d < spec.n; ++d)
        if (c[d] < q.idx[d] * w || c[d] >= (q.idx[d] + 1) * w) return false;
    return true;
}

inline cplx cube_average(const GridFunction& f, const DyadicCube& q) {
    const GridSpec& spec = f.spec;
    cplx acc{0.0, 0.0};
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < spec.cell_count(); ++i) {
        if (cell_in_cube(spec, i, q)) {
            acc += f[i];
            ++count;
        }
    }
    return acc / static_cast<double>(count);
}

// ||T^tr 1_Q||_{L^1(Q)} / |Q| by direct double summation.
inline double t1loc_transpose(const CZKernel& kernel, const GridSpec& spec, const DyadicCube& q) {
    const std::int64_t n = spec.cell_count();
    const double vol = spec.cell_volume();
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        if (!cell_in_cube(spec, i, q)) continue;
        const Point x = cell_center(spec, i);
        cplx row{0.0, 0.0};
        for (std::int64_t j = 0; j < n; ++j) {
            if (!cell_in_cube(spec, j, q)) continue;
            const Point y = cell_center(spec, j);
            row += kernel.evaluate(y, x);
        }
        acc += std::abs(row) * vol;
    }
    return acc * vol / q.volume(spec.n);
}

inline double t1loc_direct(const CZKernel& kernel, const GridSpec& spec, const DyadicCube& q) {
    const std::int64_t n = spec.cell_count();
    const double vol = spec.cell_volume();
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        if (!cell_in_cube(spec, i, q)) continue;
        const Point x = cell_center(spec, i);
        cplx row{0.0, 0.0};
        for (std::int64_t j = 0; j < n; ++j) {
            if (!cell_in_cube(spec, j, q)) continue;
            const Point y = cell_center(spec, j);
            row += kernel.evaluate(x, y);
        }
        acc += std::abs(row) * vol;
    }
    return acc * vol / q.volume(spec.n);
}

// max over all dyadic cubes of the transpose testing functional.
inline double b1_constant(const CZKernel& kernel, const GridSpec& spec) {
    double best = 0.0;
    for (const auto& q : all_cubes(spec)) best = std::max(best, t1loc_transpose(kernel, spec, q));
    return best;
}

// Brute-force maximal function over the full test family (all dyadic cubes
// plus the rasterized doubles of generations >= 1), by naive enumeration.
inline GridFunction maximal_function(const GridFunction& f) {
    const GridSpec& spec = f.spec;
    GridFunction out(spec);
    for (int g = 0; g <= spec.L; ++g) {
        for (const auto& q : generation_cubes(spec, g)) {
            double acc = 0.0;
            std::int64_t count = 0;
            for (std::int64_t i = 0; i < spec.cell_count(); ++i)
                if (cell_in_cube(spec, i, q)) {
                    acc += std::abs(f[i]);
                    ++count;
                }
            const double avg = acc / static_cast<double>(count);
            for (std::int64_t i = 0; i < spec.cell_count(); ++i)
                if (cell_in_cube(spec, i, q))
                    out[i] = std::max(out[i].real(), avg);
        }
    }
    for (int g = 1; g <= spec.L; ++g) {
        for (const auto& q : generation_cubes(spec, g)) {
            const Region r = concentric_dilate(spec, q, 2);
            double acc = 0.0;
            for (const auto& c : r.cells)
                if (cell_inside_root(spec, c)) acc += std::abs(f[cell_flat_index(spec, c)]);
            const double avg = acc / static_cast<double>(r.cells.size());
            for (const auto& c : r.cells)
                if (cell_inside_root(spec, c)) {
                    const auto i = cell_flat_index(spec, c);
                    out[i] = std::max(out[i].real(), avg);
                }
        }
    }
    return out;
}

// Fine-quadrature reference for one matrix entry: averages the kernel over
// cell_i x cell_j on a 2^extra-times finer sub-lattice, times cell volume.
inline cplx refined_entry(const CZKernel& kernel, const GridSpec& spec, std::int64_t row,
                          std::int64_t col, int extra) {
    const std::int64_t sub = std::int64_t{1} << extra;
    const double h = spec.cell_side();
    const double hs = h / static_cast<double>(sub);
    const Cell ci = cell_from_flat(spec, row);
    const Cell cj = cell_from_flat(spec, col);
    cplx acc{0.0, 0.0};
    std::int64_t samples = 0;
    const std::int64_t sub1 = (spec.n == 2) ? sub : 1;
    for (std::int64_t a1 = 0; a1 < sub1; ++a1)
        for (std::int64_t a0 = 0; a0 < sub; ++a0)
            for (std::int64_t b1 = 0; b1 < sub1; ++b1)
                for (std::int64_t b0 = 0; b0 < sub; ++b0) {
                    Point x{(static_cast<double>(ci[0]) * h) + (a0 + 0.5) * hs,
                            (static_cast<double>(ci[1]) * h) + (a1 + 0.5) * hs};
                    Point y{(static_cast<double>(cj[0]) * h) + (b0 + 0.5) * hs,
                            (static_cast<double>(cj[1]) * h) + (b1 + 0.5) * hs};
                    acc += kernel.evaluate(x, y);
                    ++samples;
                }
    return acc / static_cast<double>(samples) * spec.cell_volume();
}

}  // namespace dytb::bruteforce
