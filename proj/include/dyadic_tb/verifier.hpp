#pragma once

// The quantitative engine: local testing constants, the bootstrap term
// breakdown, the recursion constant with its three-way splitting, the
// commutator / paraproduct-error / principal splitting of the localized
// transpose testing function, and the supporting lemma sweeps. Exact
// identities are asserted at fixed tolerances; inequality constants are
// measured and reported.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dyadic_tb/accretive_system.hpp"
#include "dyadic_tb/adapted.hpp"
#include "dyadic_tb/cz_operator.hpp"
#include "dyadic_tb/grid_function.hpp"
#include "dyadic_tb/martingale.hpp"
#include "dyadic_tb/stopping_time.hpp"

namespace dytb {

inline std::vector<std::int64_t> cube_rows(const GridSpec& spec, const DyadicCube& q) {
    std::vector<std::int64_t> rows;
    for_each_cell_flat(spec, q, [&](std::int64_t i) { rows.push_back(i); });
    return rows;
}

inline std::vector<std::int64_t> region_rows(const GridSpec& spec, const Region& r) {
    std::vector<std::int64_t> rows;
    for (const auto& c : r.cells)
        if (cell_inside_root(spec, c)) rows.push_back(cell_flat_index(spec, c));
    return rows;
}

// ---------------------------------------------------------------------------
// B1: the transpose local testing constant

struct B1Result {
    double value = 0.0;
    DyadicCube argmax;
};

inline B1Result compute_B1(const CZOperator& T) {
    const GridSpec& spec = T.spec();
    B1Result res;
    for (const auto& q : all_cubes(spec)) {
        const double v = t1_loc(T, q).second;
        if (v > res.value) {
            res.value = v;
            res.argmax = q;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Bootstrap term breakdown on one (Q1, f)

struct BootstrapTerms {
    double term1 = 0.0, term2 = 0.0, term3 = 0.0, term4 = 0.0;  // |I|..|IV|
    cplx direct_integral{0.0, 0.0};      // int_{Q1} T f
    cplx recombined_integral{0.0, 0.0};  // signed sum of the four pieces
    double reconstruction_error = 0.0;   // |direct - recombined|
    double triangle_bound = 0.0;         // |I|+|II|+|III|+|IV|

    // third-term splitting: interior, far and ring parts of each f_j
    cplx third_interior{0.0, 0.0};
    cplx third_far{0.0, 0.0};
    cplx third_ring{0.0, 0.0};
    double fj_norm_ratio_max = 0.0;      // ||f_j||_2 / |P_j|^{1/2}

    // fourth-term splitting
    cplx fourth_interior{0.0, 0.0};
    cplx fourth_exterior{0.0, 0.0};
    double per_buffer_bound_margin = 1.0;  // min over buffer of rhs - lhs (scaled)

    // Cauchy-Schwarz data for the main term
    double d_sum = 0.0;          // sum ||D^b_Q f||^2 over Omega_1
    double delta_ttr_sum = 0.0;  // sum ||Delta^b_Q T^tr 1_{Q1}||^2 over Omega_1
    double cs_margin = 0.0;      // sqrt(d_sum delta_sum) - |II|

    double realized_epsilon = 0.0;
    double bad_measure_ratio = 0.0;
};

inline BootstrapTerms bootstrap_check(const CZOperator& T, const SawtoothDecomposition& d,
                                      const GridFunction& b1, const PseudoAccretiveSystem& sys1,
                                      const GridFunction& f) {
    const GridSpec& spec = T.spec();
    const DyadicCube q1 = d.q1;
    const double delta = d.params.delta;
    BootstrapTerms out;
    out.bad_measure_ratio = d.bad_measure() / q1.volume(spec.n);
    out.realized_epsilon = 1.0 - out.bad_measure_ratio;

    const std::vector<std::int64_t> q1_rows = cube_rows(spec, q1);
    const CubeSums f_sums = cube_integrals(f);
    const cplx f_avg = cube_integral(f_sums, q1) / q1.volume(spec.n);

    // term I: [f]_{Q1} T b1
    const GridFunction tb1 = T.apply_restricted(b1, q1_rows);
    cplx i_signed{0.0, 0.0};
    {
        KahanSum abs_acc;
        KahanSumC signed_acc;
        for (const auto i : q1_rows) {
            abs_acc.add(std::abs(tb1[i]));
            signed_acc.add(tb1[i]);
        }
        out.term1 = std::abs(f_avg) * abs_acc.value() * spec.cell_volume();
        i_signed = f_avg * signed_acc.value() * spec.cell_volume();
    }

    // term II in the inner-product form over Omega_1
    const GridFunction ttr_q1 = T.transpose().apply(indicator(spec, q1));
    const auto b_sys = make_adapted_system(b1, AccretivityParams(delta, 4.0, 1.0 / delta));
    const CubeSums ttr_sums = cube_integrals(pointwise_product(ttr_q1, b1));
    const CubeSums fb_plain = cube_integrals(f);
    GridFunction babs2(spec);
    for (std::int64_t i = 0; i < b1.size(); ++i) babs2[i] = std::norm(b1[i]);
    const CubeSums babs2_sums = cube_integrals(babs2);
    cplx ii_signed{0.0, 0.0};
    {
        KahanSumC acc;
        KahanSum dsum, tsum;
        for (const auto& q : d.omega1) {
            const GridFunction dq_f = transpose_difference_local(b_sys, fb_plain, q);
            const GridFunction delta_ttr = adapted_difference_local(b_sys, ttr_sums, q);
            acc.add(inner_bilinear(dq_f, delta_ttr));
            dsum.add(l2_norm_sq(dq_f, q));
            tsum.add(l2_norm_sq(delta_ttr, q));
        }
        ii_signed = acc.value();
        out.term2 = std::abs(ii_signed);
        out.d_sum = dsum.value();
        out.delta_ttr_sum = tsum.value();
        out.cs_margin = std::sqrt(out.d_sum * out.delta_ttr_sum) - out.term2;
    }

    // term III: the bad-cube corrections
    cplx iii_signed{0.0, 0.0};
    {
        KahanSumC total, interior, far, ring;
        for (const auto& p : d.bad) {
            const cplx avg = cube_integral(f_sums, p) / p.volume(spec.n);
            const GridFunction bp = sys1.generate(p);
            GridFunction fj(spec);
            for_each_cell_flat(spec, p, [&](std::int64_t i) { fj[i] = f[i] - avg * bp[i]; });
            out.fj_norm_ratio_max =
                std::max(out.fj_norm_ratio_max, l2_norm(fj) / std::sqrt(p.volume(spec.n)));
            const GridFunction tfj = T.apply_restricted(fj, q1_rows);
            total.add(integral(tfj, q1));
            interior.add(integral(tfj, p));
            const Region double_p = concentric_dilate(spec, p, 2);
            const Region q1_region = region_of_cube(spec, q1);
            const Region near = region_intersection(spec, q1_region, double_p);
            const Region ring_region = region_difference(spec, near, region_of_cube(spec, p));
            const Region far_region = region_difference(spec, q1_region, double_p);
            ring.add(integral(tfj, ring_region));
            far.add(integral(tfj, far_region));
        }
        iii_signed = total.value();
        out.term3 = std::abs(iii_signed);
        out.third_interior = interior.value();
        out.third_far = far.value();
        out.third_ring = ring.value();
    }

    // term IV: the buffer corrections
    cplx iv_signed{0.0, 0.0};
    {
        KahanSumC total, interior, exterior;
        double worst_margin = std::numeric_limits<double>::infinity();
        const CubeSums b1_sums = cube_integrals(b1);
        for (const auto& [q, zeta] : zeta_components(f, d, b1, sys1)) {
            const GridFunction tz = T.apply_restricted(zeta, q1_rows);
            const cplx on_q1 = integral(tz, q1);
            const cplx on_q = integral(tz, q);
            total.add(on_q1);
            interior.add(on_q);
            exterior.add(on_q1 - on_q);

            // per-cube bound: |int_Q T zeta| against the membership constants
            const std::vector<std::int64_t> q_rows = cube_rows(spec, q);
            KahanSum rhs;
            for (const auto& child : children(spec, q)) {
                if (d.in_omega(child)) {
                    GridFunction bc(spec);
                    for_each_cell_flat(spec, child, [&](std::int64_t i) { bc[i] = b1[i]; });
                    rhs.add(std::abs(integral(T.apply_restricted(bc, q_rows), q)) / delta);
                } else {
                    const GridFunction bp = sys1.generate(child);
                    rhs.add(std::abs(integral(T.apply_restricted(bp, q_rows), q)));
                }
            }
            {
                GridFunction bq(spec);
                for_each_cell_flat(spec, q, [&](std::int64_t i) { bq[i] = b1[i]; });
                rhs.add(std::abs(integral(T.apply_restricted(bq, q_rows), q)) / delta);
            }
            const double scale = std::max(1.0, rhs.value());
            worst_margin = std::min(worst_margin, (rhs.value() - std::abs(on_q)) / scale);
        }
        iv_signed = total.value();
        out.term4 = std::abs(iv_signed);
        out.fourth_interior = interior.value();
        out.fourth_exterior = exterior.value();
        if (std::isfinite(worst_margin)) out.per_buffer_bound_margin = worst_margin;
    }

    const GridFunction tf = T.apply_restricted(f, q1_rows);
    out.direct_integral = integral(tf, q1);
    out.recombined_integral = i_signed + ii_signed + iii_signed + iv_signed;
    out.reconstruction_error = std::abs(out.direct_integral - out.recombined_integral);
    out.triangle_bound = out.term1 + out.term2 + out.term3 + out.term4;
    return out;
}

// the extremal test function: pointwise sign of Re T^tr 1_{Q1} on Q1
inline GridFunction extremal_function(const CZOperator& T, const DyadicCube& q1) {
    const GridSpec& spec = T.spec();
    const GridFunction ttr = T.transpose().apply_restricted(indicator(spec, q1), cube_rows(spec, q1));
    GridFunction f(spec);
    for_each_cell_flat(spec, q1, [&](std::int64_t i) {
        f[i] = (ttr[i].real() >= 0.0) ? 1.0 : -1.0;
    });
    return f;
}

// ---------------------------------------------------------------------------
// Localized testing lemma: T(b1 1_Q) against the three control integrals.

struct Lemma833Inputs {
    GridFunction b1;       // the top testing function
    GridFunction tb1;      // T b1 (or T^tr b2 for the mirror)
    GridFunction mb1;      // M b1
};

inline Lemma833Inputs make_lemma833_inputs(const CZOperator& T, const GridFunction& b1) {
    return {b1, T.apply(b1), maximal_function(b1)};
}

struct Lemma833Result {
    double numerator = 0.0;
    double denominator = 0.0;
    double ratio = 0.0;
};

inline Lemma833Result lemma833_check(const CZOperator& T, const Lemma833Inputs& in,
                                     const DyadicCube& q) {
    const GridSpec& spec = T.spec();
    Lemma833Result r;
    GridFunction bq(spec);
    for_each_cell_flat(spec, q, [&](std::int64_t i) { bq[i] = in.b1[i]; });
    const Region triple = concentric_dilate(spec, q, 3);
    const GridFunction tbq = T.apply_restricted(bq, region_rows(spec, triple));
    KahanSum num;
    for (const auto i : region_rows(spec, triple)) num.add(std::norm(tbq[i]));
    r.numerator = num.value() * spec.cell_volume();

    const Region dbl = concentric_dilate(spec, q, 2);
    KahanSum den;
    for_each_cell_flat(spec, q, [&](std::int64_t i) {
        den.add(std::norm(in.tb1[i]));
        den.add(in.mb1[i].real() * in.mb1[i].real());
    });
    for (const auto i : region_rows(spec, dbl)) den.add(std::norm(in.b1[i]));
    r.denominator = den.value() * spec.cell_volume();
    if (r.denominator < 1e-30) {
        r.ratio = (r.numerator < 1e-30) ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        r.ratio = r.numerator / r.denominator;
    }
    return r;
}

// ---------------------------------------------------------------------------
// The norm-vs-oscillation lemma for one cube and testing function. Its
// own constant chain gives ratio <= 1 + ||b2_Q||_2 / |Q|^{1/2} exactly;
// the chain bound is returned alongside the measured ratio.

struct Lemma835Result {
    double ratio = 0.0;
    double chain_constant = 0.0;  // 1 + ||b2_Q||_2 |Q|^{-1/2}
    bool within_chain = true;
};

inline Lemma835Result lemma835_check_full(const GridFunction& f, const DyadicCube& q,
                                          const GridFunction& b2q) {
    const GridSpec& spec = f.spec;
    Lemma835Result out;
    out.chain_constant = 1.0 + std::sqrt(l2_norm_sq(b2q, q) / q.volume(spec.n));
    const double num = std::sqrt(l2_norm_sq(f, q));
    if (num < 1e-30) return out;
    const cplx avg = average(f, q);
    GridFunction osc(spec);
    for_each_cell_flat(spec, q, [&](std::int64_t i) { osc[i] = f[i] - avg; });
    const double osc_norm = std::sqrt(l2_norm_sq(osc, q));
    const double pairing = std::abs(inner_bilinear(restrict_to(f, q), b2q));
    const double den = osc_norm + pairing / std::sqrt(q.volume(spec.n));
    out.ratio = (den < 1e-30) ? std::numeric_limits<double>::infinity() : num / den;
    out.within_chain = out.ratio <= out.chain_constant * (1.0 + 1e-10);
    return out;
}

inline double lemma835_check(const GridFunction& f, const DyadicCube& q, const GridFunction& b2q) {
    return lemma835_check_full(f, q, b2q).ratio;
}

// ---------------------------------------------------------------------------
// The recursion constant and its three-way splitting

struct B2Report {
    double b2_constant = 0.0;   // sup over dyadic Q' <= Q1 of the localized sums
    double total = 0.0;         // sum over Omega_1 cap R_{Q2}
    double sigma1 = 0.0;        // over Omega_1 cap Omega_2
    double sigma2 = 0.0;        // over Omega_1 cap Omega_{2,buffer}
    double sigma3 = 0.0;        // over the bad subtrees of the side-2 sawtooth
    double split_error = 0.0;   // |total - sigma1 - sigma2 - sigma3|
    bool sigma3_bound_ok = false;  // sigma3 <= B2 sum |P^2_i|
    double bad2_measure = 0.0;

    // sigma2 sub-pieces, each summed over Omega_1 cap Omega_{2,buffer}
    double sigma2_far = 0.0;    // input supported on Q1 \ 2Q
    double sigma2_ring = 0.0;   // input supported on (Q1 cap 2Q) \ Q
    double sigma2_in = 0.0;     // input 1_Q
    double sigma2_partition_error = 0.0;  // worst cellwise defect of the splitting
    double sigma2_in_linf_max = 0.0;      // max over cubes of ||Delta^b_Q T^tr 1_Q||_{L^inf(Q)}

    // the full-space replacement in sigma1
    double sigma1_fullspace = 0.0;     // with T^tr 1 in place of T^tr 1_{Q1}
    double sigma1_replacement = 0.0;   // sum ||Delta^b_Q T^tr (1 - 1_{Q1})||^2
};

inline B2Report compute_B2_recursion(const CZOperator& T, const SawtoothDecomposition& d1,
                                     const GridFunction& b1, const SawtoothDecomposition& d2,
                                     const DyadicCube& q2) {
    const GridSpec& spec = T.spec();
    const DyadicCube q1 = d1.q1;
    B2Report rep;
    rep.bad2_measure = d2.bad_measure();

    const auto b_sys = make_adapted_system(b1, AccretivityParams(d1.params.delta, 4.0, 1.0));
    const GridFunction ttr_q1 = T.transpose().apply(indicator(spec, q1));
    const CubeSums ttr_sums = cube_integrals(pointwise_product(ttr_q1, b1));

    // S_Q for every Omega_1 cube, plus subtree accumulation for the sup
    std::vector<std::vector<double>> svals(static_cast<std::size_t>(spec.L) + 1);
    for (int g = 0; g <= spec.L; ++g)
        svals[static_cast<std::size_t>(g)].assign(
            static_cast<std::size_t>(std::int64_t{1} << (spec.n * g)), 0.0);
    for (const auto& q : d1.omega1) {
        const GridFunction delta_ttr = adapted_difference_local(b_sys, ttr_sums, q);
        svals[static_cast<std::size_t>(q.gen)][static_cast<std::size_t>(cube_linear_index(q))] =
            l2_norm_sq(delta_ttr, q);
    }
    // bottom-up subtree sums over the tree below Q1
    std::vector<std::vector<double>> subtree = svals;
    for (int g = spec.L - 1; g >= q1.gen; --g) {
        for (const auto& q : generation_cubes(spec, g)) {
            if (!contains(q1, q)) continue;
            double acc = subtree[static_cast<std::size_t>(q.gen)]
                                [static_cast<std::size_t>(cube_linear_index(q))];
            for (const auto& c : children(spec, q))
                acc += subtree[static_cast<std::size_t>(c.gen)]
                              [static_cast<std::size_t>(cube_linear_index(c))];
            subtree[static_cast<std::size_t>(q.gen)]
                   [static_cast<std::size_t>(cube_linear_index(q))] = acc;
        }
    }
    for (int g = q1.gen; g <= spec.L; ++g)
        for (const auto& q : generation_cubes(spec, g)) {
            if (!contains(q1, q)) continue;
            rep.b2_constant = std::max(rep.b2_constant,
                                       subtree[static_cast<std::size_t>(g)]
                                              [static_cast<std::size_t>(cube_linear_index(q))] /
                                           q.volume(spec.n));
        }

    // three-way split over the side-2 classes
    KahanSum total, s1, s2, s3;
    std::vector<DyadicCube> omega12;  // Omega_1 cap Omega_2
    std::vector<DyadicCube> buffer12; // Omega_1 cap Omega_{2,buffer}
    for (const auto& q : d1.omega1) {
        if (!contains(q2, q)) continue;
        const double v = svals[static_cast<std::size_t>(q.gen)]
                              [static_cast<std::size_t>(cube_linear_index(q))];
        total.add(v);
        switch (d2.classify(q)) {
            case CubeClass::Omega1:
                s1.add(v);
                omega12.push_back(q);
                break;
            case CubeClass::Buffer:
                s2.add(v);
                buffer12.push_back(q);
                break;
            case CubeClass::BadTop:
            case CubeClass::BadInterior:
                s3.add(v);
                break;
            case CubeClass::Outside:
                break;
        }
    }
    rep.total = total.value();
    rep.sigma1 = s1.value();
    rep.sigma2 = s2.value();
    rep.sigma3 = s3.value();
    rep.split_error = std::abs(rep.total - rep.sigma1 - rep.sigma2 - rep.sigma3);
    rep.sigma3_bound_ok = rep.sigma3 <= rep.b2_constant * rep.bad2_measure + 1e-12;

    // sigma2 sub-pieces
    {
        KahanSum far_acc, ring_acc, in_acc;
        const Region q1_region = region_of_cube(spec, q1);
        for (const auto& q : buffer12) {
            const auto rows = cube_rows(spec, q);
            const Region dbl = concentric_dilate(spec, q, 2);
            const Region near = region_intersection(spec, q1_region, dbl);
            const Region ring = region_difference(spec, near, region_of_cube(spec, q));

            const GridFunction t_in = T.transpose().apply_restricted(indicator(spec, q), rows);
            const GridFunction t_ring =
                T.transpose().apply_restricted(indicator(spec, ring), rows);

            const CubeSums in_sums = cube_integrals(pointwise_product(t_in, b1));
            const CubeSums ring_sums = cube_integrals(pointwise_product(t_ring, b1));
            const GridFunction d_in = adapted_difference_local(b_sys, in_sums, q);
            const GridFunction d_ring = adapted_difference_local(b_sys, ring_sums, q);
            const GridFunction d_all = adapted_difference_local(b_sys, ttr_sums, q);
            const GridFunction d_far = d_all - d_ring - d_in;

            in_acc.add(l2_norm_sq(d_in, q));
            ring_acc.add(l2_norm_sq(d_ring, q));
            far_acc.add(l2_norm_sq(d_far, q));
            double linf = 0.0;
            for_each_cell_flat(spec, q, [&](std::int64_t i) { linf = std::max(linf, std::abs(d_in[i])); });
            rep.sigma2_in_linf_max = std::max(rep.sigma2_in_linf_max, linf);

            // cellwise partition consistency of the three inputs
            GridFunction residual = d_in + d_ring + d_far - d_all;
            rep.sigma2_partition_error = std::max(rep.sigma2_partition_error, linf_norm(residual));
        }
        rep.sigma2_far = far_acc.value();
        rep.sigma2_ring = ring_acc.value();
        rep.sigma2_in = in_acc.value();
    }

    // sigma1 with the full-space testing function
    {
        const GridFunction ttr_one = T.transpose().apply(GridFunction(spec, cplx{1.0, 0.0}));
        const CubeSums one_sums = cube_integrals(pointwise_product(ttr_one, b1));
        GridFunction diff = ttr_one - ttr_q1;
        const CubeSums diff_sums = cube_integrals(pointwise_product(diff, b1));
        KahanSum full_acc, rep_acc;
        for (const auto& q : omega12) {
            full_acc.add(l2_norm_sq(adapted_difference_local(b_sys, one_sums, q), q));
            rep_acc.add(l2_norm_sq(adapted_difference_local(b_sys, diff_sums, q), q));
        }
        rep.sigma1_fullspace = full_acc.value();
        rep.sigma1_replacement = rep_acc.value();
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Commutator / paraproduct-error / principal splitting on one cube

struct CoifmanMeyerResult {
    double sum_identity_error = 0.0;   // cellwise defect of T1+T2+T3 = (Delta T^tr 1) E_k b2
    double accretivity_margin = 0.0;   // min over Q of |A E_k b2| - delta |A|
    double t1_identity_error = 0.0;    // T1 b2 vs Delta T^tr (1_{Q^c}([b2]_Q - E_k b2))
    double t1_split_error = 0.0;       // T1 = T' + T''
    double telescoping_error = 0.0;    // ancestor identities, all depths
    double t2_split_error = 0.0;       // T2 = Error_1 + G_Q + Phi_Q
    double gq_identity_error = 0.0;    // E_{k+1} g_Q = -Delta_Q b2
    double norm_t1 = 0.0, norm_t2 = 0.0, norm_t3 = 0.0;
    double norm_tprime = 0.0, norm_tdoubleprime = 0.0;
    double norm_error1 = 0.0, norm_gq = 0.0, norm_phi = 0.0, norm_error2 = 0.0;
    std::vector<double> child_split_ratios;  // per level gap j-k = 1, 2, ...
};

inline CoifmanMeyerResult coifman_meyer_split(const CZOperator& T, const AdaptedSystem& b_sys,
                                              const GridFunction& b1, const GridFunction& b2,
                                              const GridFunction& tb1, const DyadicCube& q,
                                              double delta) {
    const GridSpec& spec = T.spec();
    const int k = q.gen;
    CoifmanMeyerResult res;

    const GridFunction ek_b2 = expectation(b2, k);
    const GridFunction ttr_one = T.transpose().apply(GridFunction(spec, cplx{1.0, 0.0}));
    const CubeSums one_b1 = cube_integrals(pointwise_product(ttr_one, b1));
    const GridFunction a_fn = adapted_difference_local(b_sys, one_b1, q);  // Delta^b_Q T^tr 1

    const auto local_delta = [&](const GridFunction& v) {
        return adapted_difference_local(b_sys, cube_integrals(pointwise_product(v, b1)), q);
    };

    const GridFunction t3 = local_delta(T.transpose().apply(b2));
    GridFunction ek_minus = ek_b2 - b2;
    const GridFunction t2 = local_delta(T.transpose().apply(ek_minus));
    const GridFunction t_ek = local_delta(T.transpose().apply(ek_b2));
    const GridFunction t1 = pointwise_product(a_fn, ek_b2) - t_ek;

    // sum identity and the accretivity lower bound on Q
    {
        const GridFunction sum = t1 + t2 + t3;
        const GridFunction target = pointwise_product(a_fn, ek_b2);
        res.sum_identity_error = linf_norm(sum - target);
        double margin = std::numeric_limits<double>::infinity();
        for_each_cell_flat(spec, q, [&](std::int64_t i) {
            margin = std::min(margin, std::abs(a_fn[i] * ek_b2[i]) - delta * std::abs(a_fn[i]));
        });
        res.accretivity_margin = margin;
    }

    // T1 as the exterior correction, and its near/far splitting
    const cplx b2_avg = average(b2, q);
    {
        GridFunction w(spec);
        for (std::int64_t i = 0; i < w.size(); ++i) w[i] = b2_avg - ek_b2[i];
        const GridFunction t1_alt = local_delta(T.transpose().apply(w));
        res.t1_identity_error = linf_norm(t1 - t1_alt);

        const Region triple = concentric_dilate(spec, q, 3);
        const Region near_ring = region_difference(spec, triple, region_of_cube(spec, q));
        const GridFunction w_near = restrict_to(w, near_ring);
        GridFunction w_far = w - w_near;
        for_each_cell_flat(spec, q, [&](std::int64_t i) { w_far[i] = 0.0; });
        const GridFunction tprime = local_delta(T.transpose().apply(w_near));
        const GridFunction tdouble = local_delta(T.transpose().apply(w_far));
        res.t1_split_error = linf_norm(t1 - tprime - tdouble);
        res.norm_tprime = l2_norm(tprime);
        res.norm_tdoubleprime = l2_norm(tdouble);
    }

    // ancestor telescoping at every depth i
    {
        double worst = 0.0;
        const CubeSums b2_sums = cube_integrals(b2);
        for (int i = 1; i <= k; ++i) {
            const DyadicCube anc = dyadic_ancestor(q, i);
            // value form on Q: [b2]_Q = sum of level differences + [b2]_anc
            cplx acc = cube_average(spec, b2_sums, anc);
            for (int l = 1; l <= i; ++l) {
                const DyadicCube mid = dyadic_ancestor(q, l - 1);
                const DyadicCube up = dyadic_ancestor(q, l);
                acc += cube_average(spec, b2_sums, mid) - cube_average(spec, b2_sums, up);
            }
            worst = std::max(worst, std::abs(acc - b2_avg));
            // operator form everywhere: E_k = sum Delta_{k-l} + E_{k-i}
            GridFunction efold = expectation(b2, k - i);
            for (int l = 1; l <= i; ++l) efold += difference(b2, k - l);
            worst = std::max(worst, linf_norm(efold - ek_b2));
        }
        res.telescoping_error = worst;
    }

    // T2 = Error_1 + G_Q + Phi_Q, with the principal identity for G
    {
        GridFunction s = b2 - ek_b2;  // sum over j >= k of Delta_j b2
        GridFunction s_ext = s;
        for_each_cell_flat(spec, q, [&](std::int64_t i) { s_ext[i] = 0.0; });
        const GridFunction error1 = cplx{-1.0, 0.0} * local_delta(T.transpose().apply(s_ext));

        GridFunction gq(spec);
        for_each_cell_flat(spec, q, [&](std::int64_t i) { gq[i] = b2_avg - b2[i]; });
        const GridFunction phi =
            lambda_apply(b_sys, cube_integrals(pointwise_product(gq, tb1)), q);
        const GridFunction g_fn = local_delta(T.transpose().apply(gq)) - phi;
        res.t2_split_error = linf_norm(t2 - (error1 + g_fn + phi));
        res.norm_error1 = l2_norm(error1);
        res.norm_gq = l2_norm(g_fn);
        res.norm_phi = l2_norm(phi);

        const GridFunction ek1_gq = expectation(gq, k + 1);
        const GridFunction delta_q_b2 = difference_local(b2, q);
        res.gq_identity_error = linf_norm(ek1_gq + delta_q_b2);

        // principal part and the residual error
        const GridFunction gprime =
            cplx{-1.0, 0.0} * local_delta(T.transpose().apply(delta_q_b2)) +
            lambda_apply(b_sys, cube_integrals(pointwise_product(delta_q_b2, tb1)), q);
        const GridFunction error2 = g_fn - gprime;
        res.norm_error2 = l2_norm(error2);
    }

    // child splitting of the residual: decay in the level gap
    {
        for (int j = k + 1; j < spec.L; ++j) {
            double worst = 0.0;
            const GridFunction dj = difference(b2, j);
            for (const auto& child : children(spec, q)) {
                GridFunction inner = restrict_to(dj, child);
                GridFunction t_inner = T.transpose().apply_restricted(inner, cube_rows(spec, q));
                // keep only Q \ Q'
                for_each_cell_flat(spec, child, [&](std::int64_t i) { t_inner[i] = 0.0; });
                GridFunction masked(spec);
                for_each_cell_flat(spec, q, [&](std::int64_t i) { masked[i] = t_inner[i]; });
                const GridFunction out = local_delta(masked);
                const double denom = std::sqrt(l2_norm_sq(b2, child));
                if (denom > 1e-30) worst = std::max(worst, l2_norm(out) / denom);
            }
            res.child_split_ratios.push_back(worst);
        }
    }

    res.norm_t1 = l2_norm(t1);
    res.norm_t2 = l2_norm(t2);
    res.norm_t3 = l2_norm(t3);
    return res;
}

// ---------------------------------------------------------------------------
// The kernel-factorized square function bound over doubly-good cubes

struct Lemma841Result {
    double c2 = 0.0;          // sup over the side-2 sawtooth of [|b2|^2]_Q
    double lhs = 0.0;         // sum over Omega_2 cap Omega_1 of ||Lambda (b2 g)||^2
    double ratio = 0.0;       // lhs / (C2 ||g||^2_{L2(Q2)})
    double interior_piece = 0.0;   // the F_2 = Q2 \ (cup P^2_i) contribution
    double bad_piece = 0.0;        // the stopped-cube contribution
    double replacement_error = 0.0;  // averaging replacement inside the bad piece
};

inline Lemma841Result lemma841_check(const GridFunction& g, const SawtoothDecomposition& d1,
                                     const SawtoothDecomposition& d2, const AdaptedSystem& b1_sys,
                                     const GridFunction& b2) {
    const GridSpec& spec = g.spec;
    Lemma841Result res;

    GridFunction b2_abs2(spec);
    for (std::int64_t i = 0; i < b2.size(); ++i) b2_abs2[i] = std::norm(b2[i]);
    const CubeSums b2a_sums = cube_integrals(b2_abs2);
    for (const auto& lst : {&d2.omega1, &d2.omega_buffer})
        for (const auto& q : *lst)
            res.c2 = std::max(res.c2,
                              (cube_integral(b2a_sums, q) / q.volume(spec.n)).real());

    const GridFunction b2g = pointwise_product(b2, g);
    const CubeSums b2g_sums = cube_integrals(b2g);

    // F2 split
    GridFunction b2g_bad(spec);
    for (const auto& p : d2.bad)
        for_each_cell_flat(spec, p, [&](std::int64_t i) { b2g_bad[i] = b2g[i]; });
    const GridFunction b2g_f2 = b2g - b2g_bad;
    const CubeSums f2_sums = cube_integrals(b2g_f2);
    // replaced version: per-cube averages spread over the stopped cubes
    GridFunction b2g_bad_avg(spec);
    for (const auto& p : d2.bad) {
        const cplx avg = average(b2g, p);
        for_each_cell_flat(spec, p, [&](std::int64_t i) { b2g_bad_avg[i] = avg; });
    }
    const CubeSums bad_sums = cube_integrals(b2g_bad);
    const CubeSums bad_avg_sums = cube_integrals(b2g_bad_avg);

    KahanSum lhs, interior, bad_piece;
    double worst_replace = 0.0;
    for (const auto& q : d1.omega1) {
        if (d2.classify(q) != CubeClass::Omega1) continue;
        lhs.add(lambda_apply_norm_sq(b1_sys, b2g_sums, q));
        interior.add(lambda_apply_norm_sq(b1_sys, f2_sums, q));
        bad_piece.add(lambda_apply_norm_sq(b1_sys, bad_avg_sums, q));
        const GridFunction raw = lambda_apply(b1_sys, bad_sums, q);
        const GridFunction rep = lambda_apply(b1_sys, bad_avg_sums, q);
        worst_replace = std::max(worst_replace, linf_norm(raw - rep));
    }
    res.lhs = lhs.value();
    res.interior_piece = interior.value();
    res.bad_piece = bad_piece.value();
    res.replacement_error = worst_replace;
    const double gq2 = l2_norm_sq(g, d2.q1);
    res.ratio = (res.c2 * gq2 > 1e-30) ? res.lhs / (res.c2 * gq2) : 0.0;
    return res;
}

// sum over Omega_1 of ||Delta^b_Q g||^2 (the all-cubes adapted square bound
// restricted to a sawtooth) and its Lambda analogue.
inline double omega1_adapted_square_sum(const SawtoothDecomposition& d, const AdaptedSystem& b_sys,
                                        const GridFunction& g) {
    const CubeSums gb = cube_integrals(pointwise_product(g, b_sys.b));
    KahanSum acc;
    for (const auto& q : d.omega1) acc.add(l2_norm_sq(adapted_difference_local(b_sys, gb, q), q));
    return acc.value();
}

inline double omega1_lambda_square_sum(const SawtoothDecomposition& d, const AdaptedSystem& b_sys,
                                       const GridFunction& h) {
    const CubeSums hs = cube_integrals(h);
    KahanSum acc;
    for (const auto& q : d.omega1) acc.add(lambda_apply_norm_sq(b_sys, hs, q));
    return acc.value();
}

// Lemma 8.14-style sum: sum over Omega_1 of ||D^b_Q f||^2.
inline double omega1_transpose_square_sum(const SawtoothDecomposition& d, const AdaptedSystem& b_sys,
                                          const GridFunction& f) {
    const CubeSums fs = cube_integrals(f);
    KahanSum acc;
    for (const auto& q : d.omega1) acc.add(l2_norm_sq(transpose_difference_local(b_sys, fs, q), q));
    return acc.value();
}

// The sawtooth Carleson bound: sup over dyadic Qtilde <= Q1 of
// |Qtilde|^{-1} sum_{Q in Omega_1, Q <= Qtilde} ||Delta_Q b||^2, against C0.
struct Lemma815Result {
    double sup_ratio = 0.0;  // the supremum value
    double c0 = 0.0;         // max over the sawtooth of [|b|^2]_Q
    DyadicCube argmax;
};

inline Lemma815Result lemma815_check(const SawtoothDecomposition& d, const GridFunction& b) {
    const GridSpec& spec = b.spec;
    Lemma815Result res;
    GridFunction b_abs2(spec);
    for (std::int64_t i = 0; i < b.size(); ++i) b_abs2[i] = std::norm(b[i]);
    const CubeSums ba_sums = cube_integrals(b_abs2);
    for (const auto& lst : {&d.omega1, &d.omega_buffer})
        for (const auto& q : *lst)
            res.c0 = std::max(res.c0, (cube_integral(ba_sums, q) / q.volume(spec.n)).real());

    std::vector<std::vector<double>> vals(static_cast<std::size_t>(spec.L) + 1);
    for (int g = 0; g <= spec.L; ++g)
        vals[static_cast<std::size_t>(g)].assign(
            static_cast<std::size_t>(std::int64_t{1} << (spec.n * g)), 0.0);
    for (const auto& q : d.omega1)
        vals[static_cast<std::size_t>(q.gen)][static_cast<std::size_t>(cube_linear_index(q))] =
            l2_norm_sq(difference_local(b, q));
    for (int g = spec.L - 1; g >= d.q1.gen; --g)
        for (const auto& q : generation_cubes(spec, g)) {
            if (!contains(d.q1, q)) continue;
            double acc = vals[static_cast<std::size_t>(g)]
                             [static_cast<std::size_t>(cube_linear_index(q))];
            for (const auto& c : children(spec, q))
                acc += vals[static_cast<std::size_t>(c.gen)]
                           [static_cast<std::size_t>(cube_linear_index(c))];
            vals[static_cast<std::size_t>(g)][static_cast<std::size_t>(cube_linear_index(q))] = acc;
        }
    for (int g = d.q1.gen; g <= spec.L; ++g)
        for (const auto& q : generation_cubes(spec, g)) {
            if (!contains(d.q1, q)) continue;
            const double r = vals[static_cast<std::size_t>(g)]
                                 [static_cast<std::size_t>(cube_linear_index(q))] /
                             q.volume(spec.n);
            if (r > res.sup_ratio) {
                res.sup_ratio = r;
                res.argmax = q;
            }
        }
    return res;
}

}  // namespace dytb
