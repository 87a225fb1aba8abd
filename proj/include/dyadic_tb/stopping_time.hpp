#pragma once

// The stopping-time decomposition: maximal bad-cube selection under the
// two stopping conditions (small average of b, or large maximal-function /
// testing averages), the sawtooth splitting Omega = Omega_1 u Omega_buffer,
// the four-component decomposition of a bounded f, and the post-hoc
// verification of everything the construction promises.
//
// Leaf convention: finest-generation sawtooth cubes are classified into
// Omega_buffer (they have no children to qualify for Omega_1); their
// zeta contribution is empty. The buffer bound with constant 2^n is
// checked over the buffer cubes that do have a bad child, which is
// exactly the non-leaf part of the buffer.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dyadic_tb/accretive_system.hpp"
#include "dyadic_tb/adapted.hpp"
#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/grid_function.hpp"
#include "dyadic_tb/martingale.hpp"

namespace dytb {

enum class DilateFamily { SelfAndDouble, SelfOnly };

inline const char* dilate_family_name(DilateFamily f) {
    return f == DilateFamily::SelfAndDouble ? "self+double" : "self";
}

struct StoppingParams {
    double delta = 0.25;    // accretivity cut
    double threshold = 64;  // explicit stopping threshold, exposed as a knob
    DilateFamily family = DilateFamily::SelfAndDouble;

    StoppingParams() = default;
    StoppingParams(double d, double thr, DilateFamily fam = DilateFamily::SelfAndDouble)
        : delta(d), threshold(thr), family(fam) {
        if (delta <= 0.0 || delta >= 1.0)
            throw std::invalid_argument("StoppingParams: delta must lie in (0,1)");
        if (threshold <= 0.0) throw std::invalid_argument("StoppingParams: threshold must be positive");
    }
};

struct RootStoppedError : std::runtime_error {
    explicit RootStoppedError(const std::string& what) : std::runtime_error(what) {}
};

enum class CubeClass : std::uint8_t { Outside = 0, Omega1, Buffer, BadTop, BadInterior };

struct SawtoothDecomposition {
    GridSpec spec;
    DyadicCube q1;
    StoppingParams params;
    std::vector<DyadicCube> omega1;        // generation-major, index-minor
    std::vector<DyadicCube> omega_buffer;  // includes the leaf-convention cubes
    std::vector<DyadicCube> bad;           // the maximal stopped cubes P_j
    std::vector<std::vector<CubeClass>> classes;  // per generation, per linear index

    CubeClass classify(const DyadicCube& q) const {
        return classes[static_cast<std::size_t>(q.gen)]
                      [static_cast<std::size_t>(cube_linear_index(q))];
    }
    bool in_omega(const DyadicCube& q) const {
        const CubeClass c = classify(q);
        return c == CubeClass::Omega1 || c == CubeClass::Buffer;
    }
    double bad_measure() const {
        KahanSum s;
        for (const auto& p : bad) s.add(p.volume(spec.n));
        return s.value();
    }
    double buffer_measure() const {
        KahanSum s;
        for (const auto& p : omega_buffer) s.add(p.volume(spec.n));
        return s.value();
    }
    // buffer cubes owning at least one bad child (= the non-leaf buffer)
    double buffer_measure_with_bad_child() const {
        KahanSum s;
        for (const auto& p : omega_buffer)
            if (p.gen < spec.L) s.add(p.volume(spec.n));
        return s.value();
    }
};

// Everything the stopping rule looks at, precomputed once per (b, T) pair.
struct StoppingData {
    GridFunction b;
    CubeSums b_sums;
    CubeSums mbq_sums;     // integrals of (M b)^q
    CubeSums mb2_sums;     // integrals of (M b)^2
    CubeSums tb2_sums;     // integrals of |T b|^2
    CubeSums babsq_sums;   // integrals of |b|^q
    GridFunction mbq_profile;  // cellwise (M b)^q, for dilate averages
    GridFunction mb2_profile;
    double q = 4.0;
};

inline StoppingData make_stopping_data(const GridFunction& b, const CZOperator& T, double q) {
    StoppingData d;
    d.q = q;
    d.b = b;
    d.b_sums = cube_integrals(b);
    const GridFunction mb = maximal_function(b);
    GridFunction mbq(b.spec), mb2(b.spec), babsq(b.spec);
    for (std::int64_t i = 0; i < b.size(); ++i) {
        const double m = mb[i].real();
        mbq[i] = std::pow(m, q);
        mb2[i] = m * m;
        babsq[i] = std::pow(std::abs(b[i]), q);
    }
    d.mbq_profile = mbq;
    d.mb2_profile = mb2;
    d.mbq_sums = cube_integrals(mbq);
    d.mb2_sums = cube_integrals(mb2);
    d.babsq_sums = cube_integrals(babsq);
    const GridFunction tb = T.apply(b);
    GridFunction tb2(b.spec);
    for (std::int64_t i = 0; i < b.size(); ++i) tb2[i] = std::norm(tb[i]);
    d.tb2_sums = cube_integrals(tb2);
    return d;
}

// Average of a cellwise profile over the rasterized concentric double,
// zero mass outside the root, full-measure normalization.
inline double dilate_average(const GridFunction& profile, const DyadicCube& q, int factor) {
    const GridSpec& spec = profile.spec;
    const Region r = concentric_dilate(spec, q, factor);
    KahanSum acc;
    for (const auto& c : r.cells)
        if (cell_inside_root(spec, c)) acc.add(profile[cell_flat_index(spec, c)].real());
    return acc.value() * spec.cell_volume() / r.measure(spec);
}

// sup over the configured family {Q} or {Q, 2Q} of [profile]_{Qtilde}.
inline double family_sup(const GridFunction& profile, const CubeSums& sums, const DyadicCube& q,
                         DilateFamily family) {
    double v = (cube_integral(sums, q) / q.volume(profile.spec.n)).real();
    if (family == DilateFamily::SelfAndDouble)
        v = std::max(v, dilate_average(profile, q, 2));
    return v;
}

struct StoppingConditions {
    bool small_average = false;  // condition (1)
    bool large_scalars = false;  // condition (2)
    double abs_average = 0.0;
    double scalar_value = 0.0;   // sup family [(Mb)^q] + [|Tb|^2]_Q
    bool stopped() const { return small_average || large_scalars; }
};

inline StoppingConditions evaluate_stopping(const StoppingData& d, const DyadicCube& q,
                                            const StoppingParams& params) {
    StoppingConditions c;
    const double vol = q.volume(d.b.spec.n);
    c.abs_average = std::abs(cube_integral(d.b_sums, q) / vol);
    c.small_average = (c.abs_average <= params.delta);
    c.scalar_value = family_sup(d.mbq_profile, d.mbq_sums, q, params.family) +
                     (cube_integral(d.tb2_sums, q) / vol).real();
    c.large_scalars = (c.scalar_value >= params.threshold);
    return c;
}

// Top-down maximal selection. Descendants of stopped cubes are not visited.
inline SawtoothDecomposition decompose(const GridSpec& spec, const DyadicCube& q1,
                                       const StoppingData& data, const StoppingParams& params) {
    SawtoothDecomposition d;
    d.spec = spec;
    d.q1 = q1;
    d.params = params;
    d.classes.resize(static_cast<std::size_t>(spec.L) + 1);
    for (int g = 0; g <= spec.L; ++g)
        d.classes[static_cast<std::size_t>(g)].assign(
            static_cast<std::size_t>(std::int64_t{1} << (spec.n * g)), CubeClass::Outside);

    const auto mark = [&](const DyadicCube& q, CubeClass c) {
        d.classes[static_cast<std::size_t>(q.gen)]
                 [static_cast<std::size_t>(cube_linear_index(q))] = c;
    };
    const auto mark_subtree = [&](const DyadicCube& q, auto&& self) -> void {
        if (q.gen >= spec.L) return;
        for (const auto& c : children(spec, q)) {
            mark(c, CubeClass::BadInterior);
            self(c, self);
        }
    };

    if (evaluate_stopping(data, q1, params).stopped())
        throw RootStoppedError("stopping time: the top cube itself satisfies a stopping condition");

    // depth-first, children in lexicographic order: the output lists come
    // out generation-major / index-minor after the final sort
    std::vector<DyadicCube> stack{q1};
    while (!stack.empty()) {
        const DyadicCube q = stack.back();
        stack.pop_back();
        // q is known good (checked before pushing)
        if (q.gen == spec.L) {
            mark(q, CubeClass::Buffer);
            d.omega_buffer.push_back(q);
            continue;
        }
        bool has_bad_child = false;
        for (const auto& c : children(spec, q)) {
            if (evaluate_stopping(data, c, params).stopped()) {
                has_bad_child = true;
                mark(c, CubeClass::BadTop);
                d.bad.push_back(c);
                mark_subtree(c, mark_subtree);
            } else {
                stack.push_back(c);
            }
        }
        if (has_bad_child) {
            mark(q, CubeClass::Buffer);
            d.omega_buffer.push_back(q);
        } else {
            mark(q, CubeClass::Omega1);
            d.omega1.push_back(q);
        }
    }
    const auto by_gen_index = [](const DyadicCube& a, const DyadicCube& b) { return a < b; };
    std::sort(d.omega1.begin(), d.omega1.end(), by_gen_index);
    std::sort(d.omega_buffer.begin(), d.omega_buffer.end(), by_gen_index);
    std::sort(d.bad.begin(), d.bad.end(), by_gen_index);
    return d;
}

// ---------------------------------------------------------------------------
// Post-hoc verification

struct Lemma818Report {
    double bad_measure_ratio = 0.0;     // sum |P_j| / |Q1|
    double realized_epsilon = 0.0;      // 1 - ratio
    double delta_realized = 0.0;        // min over Omega of |[b]_Q|
    double c0_realized = 0.0;           // max over Omega of [|b|^q]_Q
    double mb2_family_sup = 0.0;        // max over Omega of sup family [(Mb)^2]
    double tb2_sup = 0.0;               // max over Omega of [|Tb|^2]_Q
    double buffer_measure = 0.0;
    double buffer_measure_with_bad_child = 0.0;
    double bad_measure = 0.0;
    bool buffer_bound_ok = false;       // non-leaf buffer <= 2^n sum |P_j| (exact)
    bool partition_ok = false;
    bool maximality_ok = false;
    bool stopping_sound = false;
    bool chain_ok = false;              // the Good/Bad_2 Cauchy-Schwarz chain
    double chain_lhs = 0.0;
    double chain_rhs = 0.0;
    // Chebyshev-style control of the second bad family: every stopped cube
    // in it carries scalar mass >= threshold, so
    //   threshold * |Bad_2| <= sum over S_2 of scalar(P_j) |P_j|,
    // and the scalar mass is compared against the global reference
    // (int (Mb)^q + int |Tb|^2) / threshold.
    double bad2_measure = 0.0;
    double bad2_scalar_mass = 0.0;
    double chebyshev_reference = 0.0;
    bool bad2_chebyshev_ok = false;
};

inline Lemma818Report verify_decomposition(const SawtoothDecomposition& d, const StoppingData& data) {
    const GridSpec& spec = d.spec;
    Lemma818Report rep;
    const double q1vol = d.q1.volume(spec.n);
    rep.bad_measure = d.bad_measure();
    rep.bad_measure_ratio = rep.bad_measure / q1vol;
    rep.realized_epsilon = 1.0 - rep.bad_measure_ratio;
    rep.buffer_measure = d.buffer_measure();
    rep.buffer_measure_with_bad_child = d.buffer_measure_with_bad_child();
    rep.buffer_bound_ok =
        rep.buffer_measure_with_bad_child <= std::pow(2.0, spec.n) * rep.bad_measure + 1e-14;

    rep.delta_realized = std::numeric_limits<double>::infinity();
    bool sound = true;
    for (const auto& lst : {&d.omega1, &d.omega_buffer}) {
        for (const auto& q : *lst) {
            const auto cond = evaluate_stopping(data, q, d.params);
            if (cond.stopped()) sound = false;
            rep.delta_realized = std::min(rep.delta_realized, cond.abs_average);
            const double vol = q.volume(spec.n);
            rep.c0_realized = std::max(
                rep.c0_realized, (cube_integral(data.babsq_sums, q) / vol).real());
            rep.mb2_family_sup = std::max(
                rep.mb2_family_sup, family_sup(data.mb2_profile, data.mb2_sums, q, d.params.family));
            rep.tb2_sup = std::max(rep.tb2_sup, (cube_integral(data.tb2_sums, q) / vol).real());
        }
    }
    for (const auto& p : d.bad)
        if (!evaluate_stopping(data, p, d.params).stopped()) sound = false;
    rep.stopping_sound = sound;

    // partition: every dyadic subcube of Q1 lies in exactly one class
    bool partition = true;
    for (int g = d.q1.gen; g <= spec.L; ++g) {
        for (const auto& q : generation_cubes(spec, g)) {
            if (!contains(d.q1, q)) {
                if (d.classify(q) != CubeClass::Outside) partition = false;
                continue;
            }
            const CubeClass c = d.classify(q);
            if (c == CubeClass::Outside) partition = false;
            // bad-subtree membership must match an ancestor bad top
            bool under_bad = false;
            for (int i = 1; i <= q.gen - d.q1.gen; ++i)
                if (d.classify(dyadic_ancestor(q, i)) == CubeClass::BadTop) under_bad = true;
            if (under_bad != (c == CubeClass::BadInterior)) partition = false;
        }
    }
    rep.partition_ok = partition;

    bool maximal = true;
    for (const auto& p : d.bad) {
        if (p.gen == d.q1.gen) { maximal = false; continue; }
        const CubeClass c = d.classify(dyadic_ancestor(p, 1));
        if (c != CubeClass::Omega1 && c != CubeClass::Buffer) maximal = false;
    }
    rep.maximality_ok = maximal;

    // (1-delta)|Q1| <= C (sqrt|Good| + sqrt|Bad_2|) sqrt|Q1|, C = ||b||_2 / sqrt|Q1|
    double bad1 = 0.0, bad2 = 0.0;
    KahanSum bad2_mass;
    for (const auto& p : d.bad) {
        const auto cond = evaluate_stopping(data, p, d.params);
        if (cond.small_average) {
            bad1 += p.volume(spec.n);
        } else {
            bad2 += p.volume(spec.n);
            bad2_mass.add(cond.scalar_value * p.volume(spec.n));
        }
    }
    const double good = q1vol - bad1 - bad2;
    const double c_norm = std::sqrt(l2_norm_sq(data.b, d.q1)) / std::sqrt(q1vol);
    rep.chain_lhs = (1.0 - d.params.delta) * q1vol;
    rep.chain_rhs = c_norm * (std::sqrt(std::max(0.0, good)) + std::sqrt(bad2)) * std::sqrt(q1vol) +
                    d.params.delta * rep.bad_measure;
    rep.chain_ok = rep.chain_lhs <= rep.chain_rhs + 1e-12;

    rep.bad2_measure = bad2;
    rep.bad2_scalar_mass = bad2_mass.value();
    const double mbq_total = cube_integral(data.mbq_sums, root_cube()).real();
    const double tb2_q1 = cube_integral(data.tb2_sums, d.q1).real();
    rep.chebyshev_reference = (mbq_total + tb2_q1) / d.params.threshold;
    rep.bad2_chebyshev_ok =
        d.params.threshold * bad2 <= rep.bad2_scalar_mass * (1.0 + 1e-12) + 1e-14;
    return rep;
}

// ---------------------------------------------------------------------------
// The four-component decomposition of f on Q1

struct FDecomposition {
    GridFunction coarse;        // [f]_{Q1} b
    GridFunction sawtooth;      // sum over Omega_1 of D^b_Q f
    GridFunction bad_part;      // sum_j ( f 1_{P_j} - [f]_{P_j} b_{P_j} )
    GridFunction buffer_part;   // sum over Omega_buffer of zeta_Q

    GridFunction reconstruct() const { return coarse + sawtooth + bad_part + buffer_part; }
};

struct ZetaDiagnostics {
    double max_mean = 0.0;          // max over buffer cubes of |int zeta_Q|
    double max_support_leak = 0.0;  // mass of zeta_Q outside Q
    double max_norm_ratio = 0.0;    // max of ||zeta_Q||_2 / |Q|^{1/2}
};

// The per-cube buffer components zeta_Q (non-leaf buffer cubes only; the
// leaf-convention cubes contribute nothing).
inline std::vector<std::pair<DyadicCube, GridFunction>> zeta_components(
    const GridFunction& f, const SawtoothDecomposition& d, const GridFunction& b,
    const PseudoAccretiveSystem& sys) {
    const GridSpec& spec = f.spec;
    const CubeSums f_sums = cube_integrals(f);
    const CubeSums b_sums = cube_integrals(b);
    const auto ratio = [&](const DyadicCube& q) -> cplx {
        const cplx den = cube_integral(b_sums, q);
        const cplx nu = cube_integral(f_sums, q);
        const double vol = q.volume(spec.n);
        if (std::abs(den) / vol < kAccretivityFloor) {
            if (std::abs(nu) / vol < 1e-12) return {0.0, 0.0};
            throw AccretivityError(q, spec.n);
        }
        return nu / den;
    };
    std::vector<std::pair<DyadicCube, GridFunction>> out;
    for (const auto& q : d.omega_buffer) {
        if (q.gen >= spec.L) continue;
        GridFunction zeta(spec);
        const cplx coarse_ratio = ratio(q);
        for (const auto& child : children(spec, q)) {
            if (d.in_omega(child)) {
                const cplx val = ratio(child) - coarse_ratio;
                for_each_cell_flat(spec, child, [&](std::int64_t i) { zeta[i] += val * b[i]; });
            } else {
                for_each_cell_flat(spec, child, [&](std::int64_t i) { zeta[i] -= coarse_ratio * b[i]; });
                const cplx avg = cube_integral(f_sums, child) / child.volume(spec.n);
                const GridFunction bp = sys.generate(child);
                for_each_cell_flat(spec, child, [&](std::int64_t i) { zeta[i] += avg * bp[i]; });
            }
        }
        out.emplace_back(q, std::move(zeta));
    }
    return out;
}

// Decompose f (bounded, supported in Q1) against the sawtooth of b = b_{Q1}.
// The per-cube functions b_{P_j} come from the side system.
inline FDecomposition decompose_f(const GridFunction& f, const SawtoothDecomposition& d,
                                  const GridFunction& b, const PseudoAccretiveSystem& sys,
                                  ZetaDiagnostics* diag = nullptr) {
    const GridSpec& spec = f.spec;
    const CubeSums f_sums = cube_integrals(f);
    const CubeSums b_sums = cube_integrals(b);
    const double floor = kAccretivityFloor;

    const auto ratio = [&](const CubeSums& num, const DyadicCube& q) -> cplx {
        const cplx den = cube_integral(b_sums, q);
        const cplx nu = cube_integral(num, q);
        const double vol = q.volume(spec.n);
        if (std::abs(den) / vol < floor) {
            if (std::abs(nu) / vol < 1e-12) return {0.0, 0.0};
            throw AccretivityError(q, spec.n);
        }
        return nu / den;
    };

    FDecomposition out;
    const cplx f_avg = cube_integral(f_sums, d.q1) / d.q1.volume(spec.n);
    out.coarse = f_avg * b;

    // Omega_1: D^b_Q f = b ( [f]_{Q'} / [b]_{Q'} - [f]_Q / [b]_Q ) on children Q'
    out.sawtooth = GridFunction(spec);
    for (const auto& q : d.omega1) {
        const cplx coarse_ratio = ratio(f_sums, q);
        for (const auto& child : children(spec, q)) {
            const cplx val = ratio(f_sums, child) - coarse_ratio;
            for_each_cell_flat(spec, child, [&](std::int64_t i) {
                out.sawtooth[i] += val * b[i];
            });
        }
    }

    // bad tops: f 1_{P_j} - [f]_{P_j} b_{P_j}
    out.bad_part = GridFunction(spec);
    for (const auto& p : d.bad) {
        const cplx avg = cube_integral(f_sums, p) / p.volume(spec.n);
        const GridFunction bp = sys.generate(p);
        for_each_cell_flat(spec, p, [&](std::int64_t i) {
            out.bad_part[i] += f[i] - avg * bp[i];
        });
    }

    // buffer: zeta_Q = S^b_Q f + sum over bad children of [f]_{P_j} b_{P_j};
    // leaf-convention cubes contribute nothing
    out.buffer_part = GridFunction(spec);
    for (const auto& [q, zeta] : zeta_components(f, d, b, sys)) {
        if (diag) {
            diag->max_mean = std::max(diag->max_mean, std::abs(integral(zeta)));
            const GridFunction leak = zeta - restrict_to(zeta, q);
            diag->max_support_leak = std::max(diag->max_support_leak, l2_norm(leak));
            diag->max_norm_ratio =
                std::max(diag->max_norm_ratio, l2_norm(zeta) / std::sqrt(q.volume(spec.n)));
        }
        out.buffer_part += zeta;
    }
    return out;
}

}  // namespace dytb
