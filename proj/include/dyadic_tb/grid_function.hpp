#pragma once

// Piecewise-constant complex functions at the finest generation, with
// averages, L^p norms over regions, and the discrete Hardy-Littlewood
// maximal function. Sums that feed identity checks use compensated
// (Kahan) accumulation.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/rng.hpp"

namespace dytb {

using cplx = std::complex<double>;

class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class KahanSumC {
public:
    void add(const cplx& z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_, im_;
};

struct GridFunction {
    GridSpec spec;
    std::vector<cplx> values;  // finest cells, coordinate 0 minor

    GridFunction() = default;
    explicit GridFunction(const GridSpec& s, cplx fill = cplx{0.0, 0.0})
        : spec(s), values(static_cast<std::size_t>(s.cell_count()), fill) {}

    cplx& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
    const cplx& operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

inline void check_same_spec(const GridFunction& a, const GridFunction& b) {
    if (!(a.spec == b.spec)) throw std::invalid_argument("grid functions live on different grids");
}

inline GridFunction& operator+=(GridFunction& a, const GridFunction& b) {
    check_same_spec(a, b);
    for (std::int64_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline GridFunction& operator-=(GridFunction& a, const GridFunction& b) {
    check_same_spec(a, b);
    for (std::int64_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
inline GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }

inline GridFunction operator*(const cplx& c, GridFunction f) {
    for (auto& v : f.values) v *= c;
    return f;
}

inline GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
    check_same_spec(a, b);
    GridFunction out(a.spec);
    for (std::int64_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

// Indicator of a dyadic cube (interior part).
inline GridFunction indicator(const GridSpec& spec, const DyadicCube& q) {
    GridFunction f(spec);
    if (!q.inside_root(spec.n)) return f;
    for_each_cell_flat(spec, q, [&](std::int64_t i) { f[i] = 1.0; });
    return f;
}

inline GridFunction indicator(const GridSpec& spec, const Region& r) {
    GridFunction f(spec);
    for (const auto& c : r.cells)
        if (cell_inside_root(spec, c)) f[cell_flat_index(spec, c)] = 1.0;
    return f;
}

inline GridFunction restrict_to(const GridFunction& f, const DyadicCube& q) {
    GridFunction out(f.spec);
    if (!q.inside_root(f.spec.n)) return out;
    for_each_cell_flat(f.spec, q, [&](std::int64_t i) { out[i] = f[i]; });
    return out;
}

inline GridFunction restrict_to(const GridFunction& f, const Region& r) {
    GridFunction out(f.spec);
    for (const auto& c : r.cells)
        if (cell_inside_root(f.spec, c)) {
            const auto i = cell_flat_index(f.spec, c);
            out[i] = f[i];
        }
    return out;
}

// ---------------------------------------------------------------------------
// Integrals and averages

// Exact integral over an interior cube.
inline cplx integral(const GridFunction& f, const DyadicCube& q) {
    if (!q.inside_root(f.spec.n)) throw std::domain_error("integral: cube outside root");
    KahanSumC acc;
    for_each_cell_flat(f.spec, q, [&](std::int64_t i) { acc.add(f[i]); });
    return acc.value() * f.spec.cell_volume();
}

inline cplx integral(const GridFunction& f) { return integral(f, root_cube()); }

// [f]_Q, the mean of f over Q.
inline cplx average(const GridFunction& f, const DyadicCube& q) {
    return integral(f, q) / q.volume(f.spec.n);
}

// Integral over the interior part of a region (exterior cells carry no mass).
inline cplx integral(const GridFunction& f, const Region& r) {
    KahanSumC acc;
    for (const auto& c : r.cells)
        if (cell_inside_root(f.spec, c)) acc.add(f[cell_flat_index(f.spec, c)]);
    return acc.value() * f.spec.cell_volume();
}

// Region average normalized by the full region measure (including any
// exterior cells, which carry zero mass).
inline cplx average(const GridFunction& f, const Region& r) {
    if (r.cells.empty()) throw std::domain_error("average: empty region");
    return integral(f, r) / r.measure(f.spec);
}

inline cplx inner_bilinear(const GridFunction& f, const GridFunction& g) {
    check_same_spec(f, g);
    KahanSumC acc;
    for (std::int64_t i = 0; i < f.size(); ++i) acc.add(f[i] * g[i]);
    return acc.value() * f.spec.cell_volume();
}

// ---------------------------------------------------------------------------
// L^p norms

inline double lp_norm(const GridFunction& f, double p, const Region& r) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& c : r.cells)
            if (cell_inside_root(f.spec, c)) m = std::max(m, std::abs(f[cell_flat_index(f.spec, c)]));
        return m;
    }
    KahanSum acc;
    for (const auto& c : r.cells)
        if (cell_inside_root(f.spec, c)) acc.add(std::pow(std::abs(f[cell_flat_index(f.spec, c)]), p));
    return std::pow(acc.value() * f.spec.cell_volume(), 1.0 / p);
}

inline double lp_norm(const GridFunction& f, double p, const DyadicCube& q) {
    if (std::isinf(p)) {
        double m = 0.0;
        for_each_cell_flat(f.spec, q, [&](std::int64_t i) { m = std::max(m, std::abs(f[i])); });
        return m;
    }
    KahanSum acc;
    for_each_cell_flat(f.spec, q, [&](std::int64_t i) { acc.add(std::pow(std::abs(f[i]), p)); });
    return std::pow(acc.value() * f.spec.cell_volume(), 1.0 / p);
}

inline double l2_norm_sq(const GridFunction& f, const DyadicCube& q) {
    KahanSum acc;
    for_each_cell_flat(f.spec, q, [&](std::int64_t i) { acc.add(std::norm(f[i])); });
    return acc.value() * f.spec.cell_volume();
}

inline double l2_norm_sq(const GridFunction& f) { return l2_norm_sq(f, root_cube()); }
inline double l2_norm(const GridFunction& f) { return std::sqrt(l2_norm_sq(f)); }

inline double linf_norm(const GridFunction& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
}

// ---------------------------------------------------------------------------
// Per-cube integral tables
//
// sums[k][cube_linear_index] = integral of f over that generation-k cube,
// built bottom-up. The backbone of every martingale operator here.

using CubeSums = std::vector<std::vector<cplx>>;

inline CubeSums cube_integrals(const GridFunction& f) {
    const GridSpec& spec = f.spec;
    CubeSums sums(static_cast<std::size_t>(spec.L) + 1);
    const double vol = spec.cell_volume();
    auto& leaf = sums[static_cast<std::size_t>(spec.L)];
    leaf.resize(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) leaf[i] = f.values[i] * vol;
    for (int g = spec.L - 1; g >= 0; --g) {
        const std::int64_t m = std::int64_t{1} << (spec.n * g);
        auto& cur = sums[static_cast<std::size_t>(g)];
        cur.assign(static_cast<std::size_t>(m), cplx{0.0, 0.0});
        const auto& fine = sums[static_cast<std::size_t>(g) + 1];
        const std::int64_t axisFine = std::int64_t{1} << (g + 1);
        if (spec.n == 1) {
            for (std::int64_t i = 0; i < m; ++i) cur[i] = fine[2 * i] + fine[2 * i + 1];
        } else {
            const std::int64_t mAxis = std::int64_t{1} << g;
            for (std::int64_t j = 0; j < mAxis; ++j)
                for (std::int64_t i = 0; i < mAxis; ++i)
                    cur[j * mAxis + i] = fine[(2 * j) * axisFine + 2 * i] +
                                         fine[(2 * j) * axisFine + 2 * i + 1] +
                                         fine[(2 * j + 1) * axisFine + 2 * i] +
                                         fine[(2 * j + 1) * axisFine + 2 * i + 1];
        }
    }
    return sums;
}

inline cplx cube_integral(const CubeSums& sums, const DyadicCube& q) {
    return sums[static_cast<std::size_t>(q.gen)][static_cast<std::size_t>(cube_linear_index(q))];
}

inline cplx cube_average(const GridSpec& spec, const CubeSums& sums, const DyadicCube& q) {
    return cube_integral(sums, q) / q.volume(spec.n);
}

// ---------------------------------------------------------------------------
// Discrete Hardy-Littlewood maximal function
//
// Test family: every dyadic cube, plus the rasterized concentric double of
// every dyadic cube of generation >= 1. The family is recorded in reports;
// it is comparable to the continuum uncentered M up to dimensional factors.

inline GridFunction maximal_function(const GridFunction& f) {
    const GridSpec& spec = f.spec;
    GridFunction absf(spec);
    for (std::int64_t i = 0; i < f.size(); ++i) absf[i] = std::abs(f[i]);
    const CubeSums sums = cube_integrals(absf);

    GridFunction out(spec);
    // dyadic cubes: every cell sees the average of each ancestor
    for (int g = 0; g <= spec.L; ++g) {
        for (const auto& q : generation_cubes(spec, g)) {
            const double avg = cube_average(spec, sums, q).real();
            for_each_cell_flat(spec, q, [&](std::int64_t i) {
                out[i] = std::max(out[i].real(), avg);
            });
        }
    }
    // concentric doubles
    for (int g = 1; g <= spec.L; ++g) {
        for (const auto& q : generation_cubes(spec, g)) {
            const Region r = concentric_dilate(spec, q, 2);
            KahanSum acc;
            for (const auto& c : r.cells)
                if (cell_inside_root(spec, c)) acc.add(absf[cell_flat_index(spec, c)].real());
            const double avg = acc.value() * spec.cell_volume() / r.measure(spec);
            for (const auto& c : r.cells)
                if (cell_inside_root(spec, c)) {
                    const auto i = cell_flat_index(spec, c);
                    out[i] = std::max(out[i].real(), avg);
                }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random test functions (seeded, deterministic)

inline GridFunction random_signs(const GridSpec& spec, std::uint64_t seed) {
    GridFunction f(spec);
    Rng rng(seed);
    for (auto& v : f.values) v = rng.next_sign();
    return f;
}

inline GridFunction random_bounded(const GridSpec& spec, std::uint64_t seed, bool complex_valued = false) {
    GridFunction f(spec);
    Rng rng(seed);
    for (auto& v : f.values) {
        if (complex_valued) {
            const cplx z = rng.next_complex_symmetric();
            v = z / std::max(1.0, std::abs(z));
        } else {
            v = rng.next_symmetric();
        }
    }
    return f;
}

}  // namespace dytb
