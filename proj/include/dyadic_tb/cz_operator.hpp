#pragma once

// Discretization of a bounded truncated CZ kernel to a dense cell-pair
// matrix over the root cube, application of T and T^tr, the local testing
// functionals, and the off-diagonal L^p estimate. Dense storage only: at
// L <= 10, n <= 2 the operator fits memory comfortably.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "dyadic_tb/cz_kernel.hpp"
#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/grid_function.hpp"
#include "dyadic_tb/parallel.hpp"
#include "dyadic_tb/rng.hpp"

namespace dytb {

enum class QuadratureRule { Midpoint, Tensor2 };

inline const char* quadrature_name(QuadratureRule r) {
    return r == QuadratureRule::Midpoint ? "midpoint" : "tensor2";
}

class CZOperator {
public:
    CZOperator() = default;
    CZOperator(const GridSpec& spec, std::vector<cplx> matrix, bool transposed = false)
        : spec_(spec), matrix_(std::move(matrix)), transposed_(transposed) {
        const auto n = static_cast<std::size_t>(spec.cell_count());
        if (matrix_.size() != n * n) throw std::invalid_argument("CZOperator: matrix size mismatch");
    }

    const GridSpec& spec() const { return spec_; }
    std::int64_t size() const { return spec_.cell_count(); }

    cplx entry(std::int64_t row, std::int64_t col) const {
        return transposed_ ? matrix_[idx(col, row)] : matrix_[idx(row, col)];
    }

    // A view of the transpose sharing the same storage.
    CZOperator transpose() const {
        CZOperator t;
        t.spec_ = spec_;
        t.matrix_ = matrix_;
        t.transposed_ = !transposed_;
        return t;
    }

    GridFunction apply(const GridFunction& f) const {
        if (!(f.spec == spec_)) throw std::invalid_argument("CZOperator::apply: grid mismatch");
        const std::int64_t n = size();
        GridFunction out(spec_);
        parallel_for(n, [&](std::int64_t row) {
            KahanSumC acc;
            for (std::int64_t col = 0; col < n; ++col) acc.add(entry(row, col) * f[col]);
            out[row] = acc.value();
        });
        return out;
    }

    GridFunction apply_transpose(const GridFunction& f) const { return transpose().apply(f); }

    // (T f) evaluated only on the cells of a restriction set.
    GridFunction apply_restricted(const GridFunction& f, const std::vector<std::int64_t>& rows) const {
        if (!(f.spec == spec_)) throw std::invalid_argument("CZOperator::apply_restricted: grid mismatch");
        const std::int64_t n = size();
        GridFunction out(spec_);
        parallel_for(static_cast<std::int64_t>(rows.size()), [&](std::int64_t ri) {
            const std::int64_t row = rows[static_cast<std::size_t>(ri)];
            KahanSumC acc;
            for (std::int64_t col = 0; col < n; ++col) acc.add(entry(row, col) * f[col]);
            out[row] = acc.value();
        });
        return out;
    }

    const std::vector<cplx>& raw() const { return matrix_; }
    bool is_transposed_view() const { return transposed_; }

private:
    std::size_t idx(std::int64_t row, std::int64_t col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(size()) +
               static_cast<std::size_t>(col);
    }

    GridSpec spec_;
    std::vector<cplx> matrix_;
    bool transposed_ = false;
};

// Entry (i,j) = quadrature average of K over cell_i x cell_j, times the
// cell volume, so that (T f)(x_i) = sum_j entry(i,j) f_j is the Riemann
// discretization of int K(x_i, y) f(y) dy.
inline CZOperator discretize(const CZKernel& kernel, const GridSpec& spec,
                             QuadratureRule rule = QuadratureRule::Midpoint) {
    if (kernel.dimension != spec.n)
        throw std::invalid_argument("discretize: kernel dimension does not match grid");
    const std::int64_t n = spec.cell_count();
    const double vol = spec.cell_volume();
    const double h = spec.cell_side();
    std::vector<cplx> matrix(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    const double tol_bound = kernel.sup_bound > 0.0 ? kernel.sup_bound * (1.0 + 1e-9) : 0.0;

    std::vector<Point> centers(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) centers[static_cast<std::size_t>(i)] = cell_center(spec, i);

    std::atomic<bool> unbounded{false};
    parallel_for(n, [&](std::int64_t row) {
        const Point& x = centers[static_cast<std::size_t>(row)];
        for (std::int64_t col = 0; col < n; ++col) {
            const Point& y = centers[static_cast<std::size_t>(col)];
            cplx val;
            if (rule == QuadratureRule::Midpoint) {
                val = kernel.evaluate(x, y);
            } else {
                // 2-point tensor rule per axis: samples at the cell quarter points
                KahanSumC acc;
                const double off = 0.25 * h;
                const int pts = 1 << spec.n;
                for (int a = 0; a < pts; ++a) {
                    Point xa = x;
                    for (int d = 0; d < spec.n; ++d) xa[d] += ((a >> d) & 1) ? off : -off;
                    for (int b = 0; b < pts; ++b) {
                        Point yb = y;
                        for (int d = 0; d < spec.n; ++d) yb[d] += ((b >> d) & 1) ? off : -off;
                        acc.add(kernel.evaluate(xa, yb));
                    }
                }
                val = acc.value() / static_cast<double>(pts * pts);
            }
            if (tol_bound > 0.0 && std::abs(val) > tol_bound) unbounded.store(true);
            matrix[static_cast<std::size_t>(row) * static_cast<std::size_t>(n) +
                   static_cast<std::size_t>(col)] = val * vol;
        }
    });
    if (unbounded.load())
        throw std::domain_error("discretize: kernel evaluation exceeds its declared sup bound");
    return CZOperator(spec, std::move(matrix));
}

// Local testing pair: ( ||T 1_Q||_{L^1(Q)} / |Q| , ||T^tr 1_Q||_{L^1(Q)} / |Q| ).
inline std::pair<double, double> t1_loc(const CZOperator& T, const DyadicCube& q) {
    const GridSpec& spec = T.spec();
    std::vector<std::int64_t> rows;
    for_each_cell_flat(spec, q, [&](std::int64_t i) { rows.push_back(i); });
    const GridFunction indicator_q = indicator(spec, q);
    const GridFunction tq = T.apply_restricted(indicator_q, rows);
    const GridFunction ttq = T.transpose().apply_restricted(indicator_q, rows);
    KahanSum a, b;
    for (const auto i : rows) {
        a.add(std::abs(tq[i]));
        b.add(std::abs(ttq[i]));
    }
    const double scale = spec.cell_volume() / q.volume(spec.n);
    return {a.value() * scale, b.value() * scale};
}

struct OffDiagonalReport {
    // max over trials of ||1_Q T(1_{6Q\Q} f)||_p^p / ||f||_{L^p(6Q\Q)}^p,
    // reported as the p-th-root ratio (operator-norm style)
    double direct_ratio = 0.0;
    // dual direction: max of ||1_{6Q\Q} T(1_Q g)||_p / ||g||_{L^p(Q)}
    double dual_ratio = 0.0;
    int trials = 0;
};

// Hilbert-Schmidt norms of the two off-diagonal blocks of T at Q: the
// block mapping the ring 6Q\Q into Q and its dual. These dominate the
// L^2 -> L^2 block norms and converge with depth for a fixed kernel, so
// they are the depth-comparable form of the off-diagonal constant.
struct OffDiagonalNorms {
    double direct_hs = 0.0;  // rows Q, columns 6Q\Q
    double dual_hs = 0.0;    // rows 6Q\Q, columns Q
};

inline OffDiagonalNorms off_diagonal_hs(const CZOperator& T, const DyadicCube& q) {
    const GridSpec& spec = T.spec();
    const Region six = concentric_dilate(spec, q, 6);
    const Region ring = region_difference(spec, six, region_of_cube(spec, q));
    std::vector<std::int64_t> ring_cells;
    for (const auto& c : ring.cells)
        if (cell_inside_root(spec, c)) ring_cells.push_back(cell_flat_index(spec, c));
    std::vector<std::int64_t> q_cells;
    for_each_cell_flat(spec, q, [&](std::int64_t i) { q_cells.push_back(i); });
    KahanSum direct, dual;
    for (const auto r : q_cells)
        for (const auto c : ring_cells) {
            direct.add(std::norm(T.entry(r, c)));
            dual.add(std::norm(T.entry(c, r)));
        }
    return {std::sqrt(direct.value()), std::sqrt(dual.value())};
}

// The off-diagonal estimate for any kernel with the size bound: T maps
// L^p(6Q\Q) -> L^p(Q) and L^p(Q) -> L^p(6Q\Q) with finite norm ratios.
inline OffDiagonalReport off_diagonal_check(const CZOperator& T, const DyadicCube& q, double p,
                                            int trials, std::uint64_t seed) {
    if (p <= 1.0 || std::isinf(p)) throw std::invalid_argument("off_diagonal_check: need 1 < p < inf");
    const GridSpec& spec = T.spec();
    const Region six = concentric_dilate(spec, q, 6);
    const Region ring = region_difference(spec, six, region_of_cube(spec, q));
    OffDiagonalReport rep;
    rep.trials = trials;

    std::vector<std::int64_t> ring_cells;
    for (const auto& c : ring.cells)
        if (cell_inside_root(spec, c)) ring_cells.push_back(cell_flat_index(spec, c));
    std::vector<std::int64_t> q_cells;
    for_each_cell_flat(spec, q, [&](std::int64_t i) { q_cells.push_back(i); });
    if (ring_cells.empty()) return rep;

    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        GridFunction f(spec);
        for (const auto i : ring_cells) f[i] = rng.next_symmetric();
        const double fn = lp_norm(f, p, ring);
        if (fn > 0.0) {
            const GridFunction tf = T.apply_restricted(f, q_cells);
            rep.direct_ratio = std::max(rep.direct_ratio, lp_norm(tf, p, q) / fn);
        }
        GridFunction g(spec);
        for (const auto i : q_cells) g[i] = rng.next_symmetric();
        const double gn = lp_norm(g, p, q);
        if (gn > 0.0) {
            const GridFunction tg = T.apply_restricted(g, ring_cells);
            rep.dual_ratio = std::max(rep.dual_ratio, lp_norm(tg, p, ring) / gn);
        }
    }
    return rep;
}

}  // namespace dytb
