#pragma once

// Pseudo-accretive systems Q -> b_Q: supp b_Q in Q, [b_Q]_Q = 1 exactly
// (the renormalized form of the testing hypotheses), with L^q control.
// Generators are pure functions of (seed, cube), so identical seeds give
// bit-identical systems.

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic_tb/cz_operator.hpp"
#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/grid_function.hpp"
#include "dyadic_tb/rng.hpp"

namespace dytb {

struct SystemSpec {
    std::string kind = "constant";  // constant | perturbed | file
    std::uint64_t seed = 1;
    double amplitude = 0.0;   // oscillation strength a < 1
    double q = 4.0;           // integrability exponent, > 2
    double theta_max = 0.0;   // pointwise phase bound for complex systems
    // file kind: cube literal -> unnormalized [re, im] cell values
    std::map<std::string, std::vector<std::array<double, 2>>> file_values;
};

class PseudoAccretiveSystem {
public:
    PseudoAccretiveSystem(const GridSpec& grid, const SystemSpec& spec, int side = 1)
        : grid_(grid), spec_(spec), side_(side) {
        if (spec_.kind != "constant" && spec_.kind != "perturbed" && spec_.kind != "file")
            throw std::invalid_argument("PseudoAccretiveSystem: unknown kind '" + spec_.kind + "'");
        if (spec_.amplitude < 0.0 || spec_.amplitude >= 1.0)
            throw std::invalid_argument("PseudoAccretiveSystem: amplitude must lie in [0,1)");
        if (spec_.q <= 2.0)
            throw std::invalid_argument("PseudoAccretiveSystem: q must exceed 2");
        for (const auto& [literal, values] : spec_.file_values) {
            std::vector<cplx> cells;
            cells.reserve(values.size());
            for (const auto& v : values) cells.push_back({v[0], v[1]});
            set_file_values(parse_cube(literal, grid_.n), std::move(cells));
        }
    }

    const GridSpec& grid() const { return grid_; }
    const SystemSpec& spec() const { return spec_; }
    int side() const { return side_; }
    double q() const { return spec_.q; }

    // b_Q: supported in Q, normalized to [b_Q]_Q = 1.
    GridFunction generate(const DyadicCube& q) const {
        if (!q.inside_root(grid_.n))
            throw std::domain_error("PseudoAccretiveSystem: cube outside root");
        if (spec_.kind == "constant") return indicator(grid_, q);
        if (spec_.kind == "file") {
            const auto it = file_values_.find(q);
            if (it == file_values_.end())
                throw std::domain_error("PseudoAccretiveSystem: no stored values for cube " +
                                        format_cube(q, grid_.n));
            GridFunction b(grid_);
            std::size_t pos = 0;
            for_each_cell_flat(grid_, q, [&](std::int64_t i) { b[i] = it->second[pos++]; });
            return normalized(b, q);
        }
        return perturbed(q);
    }

    // Unnormalized per-cube values, as ingested from a file.
    void set_file_values(const DyadicCube& q, std::vector<cplx> values) {
        const std::int64_t w = std::int64_t{1} << (grid_.L - q.gen);
        std::int64_t expected = w;
        if (grid_.n == 2) expected *= w;
        if (static_cast<std::int64_t>(values.size()) != expected)
            throw std::invalid_argument("PseudoAccretiveSystem: cell count mismatch for " +
                                        format_cube(q, grid_.n));
        file_values_[q] = std::move(values);
    }

private:
    GridFunction normalized(const GridFunction& b, const DyadicCube& q) const {
        const cplx z = average(b, q);
        if (std::abs(z) < 1e-6)
            throw std::domain_error("PseudoAccretiveSystem: degenerate normalizer on cube " +
                                    format_cube(q, grid_.n));
        GridFunction out(grid_);
        for_each_cell_flat(grid_, q, [&](std::int64_t i) { out[i] = b[i] / z; });
        return out;
    }

    GridFunction perturbed(const DyadicCube& q) const {
        Rng rng = cube_rng(spec_.seed, q);
        std::vector<std::int64_t> cells;
        for_each_cell_flat(grid_, q, [&](std::int64_t i) { cells.push_back(i); });
        const std::size_t m = cells.size();

        // mean-adjusted oscillation with sup norm <= 1
        std::vector<double> w(m);
        double mean = 0.0;
        for (auto& v : w) {
            v = rng.next_symmetric();
            mean += v;
        }
        mean /= static_cast<double>(m);
        double sup = 0.0;
        for (auto& v : w) {
            v -= mean;
            sup = std::max(sup, std::abs(v));
        }
        if (sup > 0.0)
            for (auto& v : w) v /= sup;

        GridFunction b(grid_);
        for (std::size_t j = 0; j < m; ++j) {
            cplx v{1.0 + spec_.amplitude * w[j], 0.0};
            if (spec_.theta_max > 0.0) {
                const double theta = spec_.theta_max * rng.next_symmetric();
                v *= cplx{std::cos(theta), std::sin(theta)};
            }
            b[cells[j]] = v;
        }
        return normalized(b, q);
    }

    GridSpec grid_;
    SystemSpec spec_;
    int side_;
    std::map<DyadicCube, std::vector<cplx>> file_values_;
};

// ---------------------------------------------------------------------------
// Exhaustive validation of the testing hypotheses against an operator.

struct SystemValidationEntry {
    DyadicCube cube;
    double support_leak = 0.0;   // mass of b_Q outside Q
    double lq_ratio = 0.0;       // [|b_Q|^q]_Q
    double testing_ratio = 0.0;  // [|T b_Q|^2]_Q (side 1) or with T^tr (side 2)
    double normalization_error = 0.0;  // | [b_Q]_Q - 1 |
};

struct SystemValidationReport {
    double C_i = 0.0;    // max over Q of the L^q ratio
    double C_ii = 0.0;   // max over Q of the testing ratio
    double worst_support_leak = 0.0;
    double worst_normalization_error = 0.0;
    std::vector<SystemValidationEntry> entries;
};

inline SystemValidationReport validate(const PseudoAccretiveSystem& sys, const CZOperator& T,
                                       bool keep_entries = false) {
    const GridSpec& spec = sys.grid();
    const CZOperator op = (sys.side() == 2) ? T.transpose() : T;
    SystemValidationReport rep;
    for (const auto& q : all_cubes(spec)) {
        const GridFunction b = sys.generate(q);
        SystemValidationEntry e;
        e.cube = q;
        GridFunction outside = b - restrict_to(b, q);
        e.support_leak = l2_norm(outside);
        e.lq_ratio = std::pow(lp_norm(b, sys.q(), q), sys.q()) / q.volume(spec.n);
        e.normalization_error = std::abs(average(b, q) - cplx{1.0, 0.0});
        std::vector<std::int64_t> rows;
        for_each_cell_flat(spec, q, [&](std::int64_t i) { rows.push_back(i); });
        const GridFunction tb = op.apply_restricted(b, rows);
        e.testing_ratio = l2_norm_sq(tb, q) / q.volume(spec.n);
        rep.C_i = std::max(rep.C_i, e.lq_ratio);
        rep.C_ii = std::max(rep.C_ii, e.testing_ratio);
        rep.worst_support_leak = std::max(rep.worst_support_leak, e.support_leak);
        rep.worst_normalization_error = std::max(rep.worst_normalization_error, e.normalization_error);
        if (keep_entries) rep.entries.push_back(e);
    }
    return rep;
}

}  // namespace dytb
