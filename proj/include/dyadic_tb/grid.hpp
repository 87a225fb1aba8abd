#pragma once

// Finite dyadic tree over the root cube [0,1)^n with the geometry used by
// the rest of the library: children, ancestors, concentric dilates and
// canonical same-generation neighbors. Cells outside the root are tracked
// with extended (signed) indices; they never carry function mass.

#include <array>
#include <cstdint>
#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace dytb {

inline constexpr int kMaxDimension = 2;
inline constexpr int kMaxDepth = 10;

struct GridSpec {
    int n = 1;  // ambient dimension, 1 or 2
    int L = 1;  // finest generation

    GridSpec() = default;
    GridSpec(int n_, int L_) : n(n_), L(L_) {
        if (n < 1 || n > kMaxDimension)
            throw std::invalid_argument("GridSpec: dimension must be 1 or 2");
        if (L < 1 || L > kMaxDepth)
            throw std::invalid_argument("GridSpec: depth must be in [1,10]");
    }

    std::int64_t cells_per_axis() const { return std::int64_t{1} << L; }
    std::int64_t cell_count() const { return std::int64_t{1} << (n * L); }
    double cell_side() const { return 1.0 / static_cast<double>(cells_per_axis()); }
    // Lebesgue measure of one finest cell.
    double cell_volume() const { return 1.0 / static_cast<double>(cell_count()); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// A node of the dyadic tree. Indices are signed so that neighbor/dilate
// geometry outside the root stays representable.
struct DyadicCube {
    int gen = 0;
    std::array<std::int64_t, kMaxDimension> idx{0, 0};

    DyadicCube() = default;
    DyadicCube(int g, std::int64_t i0) : gen(g), idx{i0, 0} {}
    DyadicCube(int g, std::int64_t i0, std::int64_t i1) : gen(g), idx{i0, i1} {}

    double side() const { return 1.0 / static_cast<double>(std::int64_t{1} << gen); }
    double volume(int n) const {
        double v = 1.0;
        for (int d = 0; d < n; ++d) v *= side();
        return v;
    }
    double center(int d) const { return (static_cast<double>(idx[d]) + 0.5) * side(); }

    bool inside_root(int n) const {
        const std::int64_t lim = std::int64_t{1} << gen;
        for (int d = 0; d < n; ++d)
            if (idx[d] < 0 || idx[d] >= lim) return false;
        return true;
    }

    friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
    friend auto operator<=>(const DyadicCube& a, const DyadicCube& b) {
        if (auto c = a.gen <=> b.gen; c != 0) return c;
        if (auto c = a.idx[1] <=> b.idx[1]; c != 0) return c;
        return a.idx[0] <=> b.idx[0];
    }
};

// Cube literal syntax used in configs, logs and serialized decompositions:
// "k:idx0" in 1d, "k:idx0,idx1" in 2d.
inline std::string format_cube(const DyadicCube& q, int n) {
    std::string s = std::to_string(q.gen) + ":" + std::to_string(q.idx[0]);
    if (n == 2) s += "," + std::to_string(q.idx[1]);
    return s;
}

inline DyadicCube parse_cube(const std::string& text, int n) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("cube literal missing ':': " + text);
    DyadicCube q;
    q.gen = std::stoi(text.substr(0, colon));
    std::string rest = text.substr(colon + 1);
    const auto comma = rest.find(',');
    if (n == 1) {
        if (comma != std::string::npos)
            throw std::invalid_argument("1d cube literal has two indices: " + text);
        q.idx[0] = std::stoll(rest);
    } else {
        if (comma == std::string::npos)
            throw std::invalid_argument("2d cube literal needs two indices: " + text);
        q.idx[0] = std::stoll(rest.substr(0, comma));
        q.idx[1] = std::stoll(rest.substr(comma + 1));
    }
    return q;
}

inline DyadicCube root_cube() { return DyadicCube{}; }

inline int child_count(int n) { return 1 << n; }

// Children in lexicographic index order; they partition Q.
inline std::vector<DyadicCube> children(const GridSpec& spec, const DyadicCube& q) {
    if (q.gen >= spec.L)
        throw std::domain_error("children: cube already at finest generation");
    std::vector<DyadicCube> out;
    out.reserve(child_count(spec.n));
    if (spec.n == 1) {
        for (std::int64_t o = 0; o < 2; ++o)
            out.push_back(DyadicCube(q.gen + 1, 2 * q.idx[0] + o));
    } else {
        for (std::int64_t o1 = 0; o1 < 2; ++o1)
            for (std::int64_t o0 = 0; o0 < 2; ++o0)
                out.push_back(DyadicCube(q.gen + 1, 2 * q.idx[0] + o0, 2 * q.idx[1] + o1));
    }
    return out;
}

// The i-th dyadic parent (2_D)^i Q; i = 0 is Q itself.
inline DyadicCube dyadic_ancestor(const DyadicCube& q, int i) {
    if (i < 0) throw std::invalid_argument("dyadic_ancestor: negative level count");
    if (i > q.gen) throw std::domain_error("dyadic_ancestor: would pass above the root");
    DyadicCube a = q;
    a.gen = q.gen - i;
    for (auto& v : a.idx) {
        // floor division by 2^i, valid for extended (negative) indices too
        for (int s = 0; s < i; ++s) v = (v >= 0) ? v / 2 : (v - 1) / 2;
    }
    return a;
}

inline bool contains(const DyadicCube& outer, const DyadicCube& inner) {
    if (outer.gen > inner.gen) return false;
    return dyadic_ancestor(inner, inner.gen - outer.gen) == outer;
}

// Canonical neighbor offsets: {-1,0,1}^n \ {0} in lexicographic order with
// coordinate 0 most significant. The order depends only on the offset,
// never on the cube's absolute position.
inline std::vector<std::array<int, kMaxDimension>> neighbor_offsets(int n) {
    std::vector<std::array<int, kMaxDimension>> out;
    if (n == 1) {
        for (int o0 = -1; o0 <= 1; ++o0)
            if (o0 != 0) out.push_back({o0, 0});
    } else {
        for (int o0 = -1; o0 <= 1; ++o0)
            for (int o1 = -1; o1 <= 1; ++o1)
                if (o0 != 0 || o1 != 0) out.push_back({o0, o1});
    }
    return out;
}

// The 3^n - 1 same-generation cubes adjacent to Q, i.e. the cubes tiling
// 3Q \ Q, in canonical offset order. Out-of-root neighbors are returned
// with extended indices.
inline std::vector<DyadicCube> neighbors(const GridSpec& spec, const DyadicCube& q) {
    std::vector<DyadicCube> out;
    for (const auto& off : neighbor_offsets(spec.n)) {
        DyadicCube m = q;
        for (int d = 0; d < spec.n; ++d) m.idx[d] += off[d];
        out.push_back(m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Regions: sets of finest-generation cells with extended indices.

using Cell = std::array<std::int64_t, kMaxDimension>;

inline std::int64_t pack_cell(const GridSpec& spec, const Cell& c) {
    // bias by 4*axis so extended indices in [-3*2^L, 4*2^L) pack injectively
    const std::int64_t axis = spec.cells_per_axis();
    std::int64_t p = c[0] + 3 * axis;
    if (spec.n == 2) p += (c[1] + 3 * axis) * (8 * axis);
    return p;
}

struct Region {
    int generation = 0;              // always the finest generation L
    std::vector<Cell> cells;         // distinct, sorted by packed index

    double measure(const GridSpec& spec) const {
        return static_cast<double>(cells.size()) * spec.cell_volume();
    }
};

inline void sort_region(const GridSpec& spec, Region& r) {
    std::sort(r.cells.begin(), r.cells.end(), [&](const Cell& a, const Cell& b) {
        return pack_cell(spec, a) < pack_cell(spec, b);
    });
    r.cells.erase(std::unique(r.cells.begin(), r.cells.end()), r.cells.end());
}

inline bool cell_inside_root(const GridSpec& spec, const Cell& c) {
    const std::int64_t axis = spec.cells_per_axis();
    for (int d = 0; d < spec.n; ++d)
        if (c[d] < 0 || c[d] >= axis) return false;
    return true;
}

// Flat storage index of an interior cell; coordinate 0 is the minor axis.
inline std::int64_t cell_flat_index(const GridSpec& spec, const Cell& c) {
    std::int64_t f = c[0];
    if (spec.n == 2) f += c[1] * spec.cells_per_axis();
    return f;
}

inline Cell cell_from_flat(const GridSpec& spec, std::int64_t flat) {
    Cell c{0, 0};
    const std::int64_t axis = spec.cells_per_axis();
    c[0] = flat % axis;
    if (spec.n == 2) c[1] = flat / axis;
    return c;
}

// Axis-aligned box of cells [lo, hi) per axis.
inline Region region_from_box(const GridSpec& spec, const std::array<std::int64_t, 2>& lo,
                              const std::array<std::int64_t, 2>& hi) {
    Region r;
    r.generation = spec.L;
    if (spec.n == 1) {
        for (std::int64_t i0 = lo[0]; i0 < hi[0]; ++i0) r.cells.push_back({i0, 0});
    } else {
        for (std::int64_t i1 = lo[1]; i1 < hi[1]; ++i1)
            for (std::int64_t i0 = lo[0]; i0 < hi[0]; ++i0) r.cells.push_back({i0, i1});
    }
    return r;
}

inline Region region_of_cube(const GridSpec& spec, const DyadicCube& q) {
    if (q.gen > spec.L) throw std::domain_error("region_of_cube: generation below finest");
    const std::int64_t w = std::int64_t{1} << (spec.L - q.gen);
    std::array<std::int64_t, 2> lo{q.idx[0] * w, q.idx[1] * w};
    std::array<std::int64_t, 2> hi{lo[0] + w, lo[1] + w};
    if (spec.n == 1) { lo[1] = 0; hi[1] = 1; }
    return region_from_box(spec, lo, hi);
}

// Concentric dilate of Q by factor in {2,3,6}, rasterized to finest cells
// by cell-center membership (exact whenever the dilate is grid aligned).
inline Region concentric_dilate(const GridSpec& spec, const DyadicCube& q, int factor) {
    if (factor != 2 && factor != 3 && factor != 6)
        throw std::invalid_argument("concentric_dilate: factor must be 2, 3 or 6");
    Region r;
    r.generation = spec.L;
    const double h = spec.cell_side();
    const double half = 0.5 * factor * q.side();
    std::array<std::int64_t, 2> lo{0, 0}, hi{0, 1};
    for (int d = 0; d < spec.n; ++d) {
        const double c = q.center(d);
        // cell i has center (i + 0.5) h; keep centers in [c - half, c + half)
        lo[d] = static_cast<std::int64_t>(std::ceil((c - half) / h - 0.5));
        hi[d] = static_cast<std::int64_t>(std::ceil((c + half) / h - 0.5));
    }
    if (spec.n == 1) { lo[1] = 0; hi[1] = 1; }
    return region_from_box(spec, lo, hi);
}

// Set difference a \ b on sorted-unique regions.
inline Region region_difference(const GridSpec& spec, const Region& a, const Region& b) {
    Region out;
    out.generation = a.generation;
    std::vector<std::int64_t> bp;
    bp.reserve(b.cells.size());
    for (const auto& c : b.cells) bp.push_back(pack_cell(spec, c));
    std::sort(bp.begin(), bp.end());
    for (const auto& c : a.cells)
        if (!std::binary_search(bp.begin(), bp.end(), pack_cell(spec, c))) out.cells.push_back(c);
    return out;
}

inline Region region_intersection(const GridSpec& spec, const Region& a, const Region& b) {
    Region out;
    out.generation = a.generation;
    std::vector<std::int64_t> bp;
    bp.reserve(b.cells.size());
    for (const auto& c : b.cells) bp.push_back(pack_cell(spec, c));
    std::sort(bp.begin(), bp.end());
    for (const auto& c : a.cells)
        if (std::binary_search(bp.begin(), bp.end(), pack_cell(spec, c))) out.cells.push_back(c);
    return out;
}

// All dyadic cubes of one generation, index-lexicographic.
inline std::vector<DyadicCube> generation_cubes(const GridSpec& spec, int gen) {
    if (gen < 0 || gen > spec.L) throw std::domain_error("generation_cubes: bad generation");
    std::vector<DyadicCube> out;
    const std::int64_t m = std::int64_t{1} << gen;
    if (spec.n == 1) {
        for (std::int64_t i = 0; i < m; ++i) out.push_back(DyadicCube(gen, i));
    } else {
        for (std::int64_t i1 = 0; i1 < m; ++i1)
            for (std::int64_t i0 = 0; i0 < m; ++i0) out.push_back(DyadicCube(gen, i0, i1));
    }
    return out;
}

// All dyadic cubes of all generations 0..L, generation-major.
inline std::vector<DyadicCube> all_cubes(const GridSpec& spec) {
    std::vector<DyadicCube> out;
    for (int g = 0; g <= spec.L; ++g) {
        auto gc = generation_cubes(spec, g);
        out.insert(out.end(), gc.begin(), gc.end());
    }
    return out;
}

// Linear index of an interior cube within its generation.
inline std::int64_t cube_linear_index(const DyadicCube& q) {
    return q.idx[0] + (q.idx[1] << q.gen);
}

// Flat cell range helpers: iterate the interior cells of an interior cube.
template <typename F>
inline void for_each_cell_flat(const GridSpec& spec, const DyadicCube& q, F&& fn) {
    const std::int64_t w = std::int64_t{1} << (spec.L - q.gen);
    const std::int64_t axis = spec.cells_per_axis();
    if (spec.n == 1) {
        const std::int64_t base = q.idx[0] * w;
        for (std::int64_t i = 0; i < w; ++i) fn(base + i);
    } else {
        for (std::int64_t j = 0; j < w; ++j) {
            const std::int64_t row = (q.idx[1] * w + j) * axis + q.idx[0] * w;
            for (std::int64_t i = 0; i < w; ++i) fn(row + i);
        }
    }
}

}  // namespace dytb
