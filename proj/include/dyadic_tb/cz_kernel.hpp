#pragma once

// Bounded truncated Calderon-Zygmund kernels. Each zoo member carries its
// size constant C_sz (|K| <= C_sz |x-y|^{-n}), Hoelder data (alpha, C_ho)
// valid for |x-y| > 2|h|, and the sup bound M coming from the truncation.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dyadic_tb/grid.hpp"
#include "dyadic_tb/rng.hpp"

namespace dytb {

using Point = std::array<double, kMaxDimension>;

inline double point_distance(const Point& x, const Point& y, int n) {
    double s = 0.0;
    for (int d = 0; d < n; ++d) s += (x[d] - y[d]) * (x[d] - y[d]);
    return std::sqrt(s);
}

inline Point cell_center(const GridSpec& spec, std::int64_t flat) {
    const Cell c = cell_from_flat(spec, flat);
    Point p{0.0, 0.0};
    for (int d = 0; d < spec.n; ++d) p[d] = (static_cast<double>(c[d]) + 0.5) * spec.cell_side();
    return p;
}

struct CZKernel {
    std::string name;
    int dimension = 1;
    std::function<std::complex<double>(const Point&, const Point&)> evaluate;
    double size_constant = 0.0;      // C_sz in |K| <= C_sz |x-y|^{-n}
    double hoelder_constant = 0.0;   // C_ho in the smoothness bound
    double hoelder_exponent = 1.0;   // alpha in (0,1]
    double sup_bound = 0.0;          // M with |K| <= M everywhere
};

// K = 0.
inline CZKernel zero_kernel(int n) {
    CZKernel k;
    k.name = "zero";
    k.dimension = n;
    k.evaluate = [](const Point&, const Point&) { return std::complex<double>{0.0, 0.0}; };
    return k;
}

// K = 1 on the unit root; C_sz = n^{n/2} since |x-y| <= sqrt(n) there.
inline CZKernel constant_kernel(int n) {
    CZKernel k;
    k.name = "constant";
    k.dimension = n;
    k.evaluate = [](const Point&, const Point&) { return std::complex<double>{1.0, 0.0}; };
    k.size_constant = std::pow(std::sqrt(static_cast<double>(n)), n);
    k.hoelder_constant = 0.0;
    k.sup_bound = 1.0;
    return k;
}

// Truncated Hilbert kernel (n = 1): K(x,y) = (x-y) / ((x-y)^2 + tau^2).
inline CZKernel hilbert_kernel(double tau) {
    if (tau <= 0.0) throw std::invalid_argument("hilbert_kernel: tau must be positive");
    CZKernel k;
    k.name = "hilbert";
    k.dimension = 1;
    k.evaluate = [tau](const Point& x, const Point& y) {
        const double d = x[0] - y[0];
        return std::complex<double>{d / (d * d + tau * tau), 0.0};
    };
    k.size_constant = 1.0;          // |d|/(d^2+tau^2) <= 1/|d|
    k.sup_bound = 0.5 / tau;        // peak at |d| = tau
    // |K'(d)| = |tau^2 - d^2|/(d^2+tau^2)^2 <= 1/d^2; with |d| > 2|h| the
    // mean value bound gives |h| sup_{|d'|>=|d|/2} 1/d'^2 <= 4|h|/d^2 each way.
    k.hoelder_exponent = 1.0;
    k.hoelder_constant = 8.0;
    return k;
}

// Truncated Riesz-type component kernel (n = 2):
// K(x,y) = (x_c - y_c) / (|x-y|^2 + tau^2)^{3/2}.
inline CZKernel riesz_kernel(double tau, int component = 0) {
    if (tau <= 0.0) throw std::invalid_argument("riesz_kernel: tau must be positive");
    if (component < 0 || component > 1) throw std::invalid_argument("riesz_kernel: component must be 0 or 1");
    CZKernel k;
    k.name = "riesz";
    k.dimension = 2;
    k.evaluate = [tau, component](const Point& x, const Point& y) {
        const double d0 = x[0] - y[0];
        const double d1 = x[1] - y[1];
        const double r2 = d0 * d0 + d1 * d1 + tau * tau;
        const double num = (component == 0) ? d0 : d1;
        return std::complex<double>{num / (r2 * std::sqrt(r2)), 0.0};
    };
    k.size_constant = 1.0;                            // |K| <= r / r^3 = 1/r^2
    k.sup_bound = 2.0 / (3.0 * std::sqrt(3.0) * tau * tau);  // peak at r = tau/sqrt(2)
    k.hoelder_exponent = 1.0;
    // |grad K| <= C r^{-3}; doubling-safe margin as for the Hilbert kernel.
    k.hoelder_constant = 24.0;
    return k;
}

// Compactly supported smooth bump: K(x,y) = (1 - |x-y|^2/rho^2)^3 for
// |x-y| < rho. Lipschitz with constant 96/(25 sqrt(5) rho).
inline CZKernel bump_kernel(int n, double rho = 0.25) {
    if (rho <= 0.0) throw std::invalid_argument("bump_kernel: rho must be positive");
    CZKernel k;
    k.name = "bump";
    k.dimension = n;
    k.evaluate = [rho, n](const Point& x, const Point& y) {
        const double r = point_distance(x, y, n);
        const double u = 1.0 - (r / rho) * (r / rho);
        return std::complex<double>{u > 0.0 ? u * u * u : 0.0, 0.0};
    };
    k.sup_bound = 1.0;
    k.size_constant = std::pow(rho, n);  // support |x-y| < rho and |K| <= 1
    k.hoelder_exponent = 1.0;
    const double lip = 96.0 / (25.0 * std::sqrt(5.0) * rho);
    // differences vanish unless |x-y| <= 2 rho when |x-y| > 2|h|
    k.hoelder_constant = 2.0 * lip * std::pow(2.0 * rho, n + 1);
    return k;
}

// Lacunary sum of smooth bumps over dyadic scales with seeded signed
// coefficients: K(x,y) = sum_s c_s 2^{sn} phi(2^s |x-y|), |c_s| <= 1,
// phi(r) = (1-r^2)^3 on [0,1). Size and smoothness constants follow from
// the geometric envelope of the active scales.
inline CZKernel random_cz_kernel(int n, std::uint64_t seed, int scales) {
    if (scales < 1) throw std::invalid_argument("random_cz_kernel: need at least one scale");
    std::vector<double> coeff(static_cast<std::size_t>(scales));
    Rng rng(seed ^ 0x51a7e57ull);
    for (auto& c : coeff) c = rng.next_symmetric();
    CZKernel k;
    k.name = "random_cz";
    k.dimension = n;
    k.evaluate = [coeff, n](const Point& x, const Point& y) {
        const double r = point_distance(x, y, n);
        double v = 0.0;
        for (std::size_t s = 0; s < coeff.size(); ++s) {
            const double scale = static_cast<double>(std::int64_t{1} << s);
            const double u = 1.0 - (r * scale) * (r * scale);
            if (u > 0.0) v += coeff[s] * std::pow(scale, n) * u * u * u;
        }
        return std::complex<double>{v, 0.0};
    };
    // scales with 2^{-s} > r contribute at most 2^{sn} each; the sum is
    // dominated by twice the largest active term
    k.size_constant = 2.0 * std::pow(2.0, n);
    double sup = 0.0;
    for (std::size_t s = 0; s < coeff.size(); ++s)
        sup += std::abs(coeff[s]) * std::pow(2.0, static_cast<double>(s * static_cast<std::size_t>(n)));
    k.sup_bound = sup;
    k.hoelder_exponent = 1.0;
    const double lip_phi = 96.0 / (25.0 * std::sqrt(5.0));
    // |d/dr| of the scale-s term <= lip_phi 2^{s(n+1)}, active only for
    // r < 2^{-s}; geometric envelope as for the size bound.
    k.hoelder_constant = 8.0 * lip_phi * std::pow(2.0, n + 1);
    return k;
}

struct KernelSpec {
    std::string name = "zero";
    double tau = 0.0;
    double rho = 0.25;
    int component = 0;
    std::uint64_t seed = 1;
    int scales = 6;
};

inline CZKernel kernel_zoo(const KernelSpec& ks, int n) {
    if (ks.name == "zero") return zero_kernel(n);
    if (ks.name == "constant") return constant_kernel(n);
    if (ks.name == "hilbert") {
        if (n != 1) throw std::invalid_argument("hilbert kernel is 1-dimensional");
        return hilbert_kernel(ks.tau);
    }
    if (ks.name == "riesz") {
        if (n != 2) throw std::invalid_argument("riesz kernel is 2-dimensional");
        return riesz_kernel(ks.tau, ks.component);
    }
    if (ks.name == "bump") return bump_kernel(n, ks.rho);
    if (ks.name == "random_cz") return random_cz_kernel(n, ks.seed, ks.scales);
    throw std::invalid_argument("kernel_zoo: unknown kernel name '" + ks.name + "'");
}

// Sampled validation of the size and smoothness bounds on random pairs.
struct KernelCheckResult {
    double worst_size_ratio = 0.0;      // max |K| |x-y|^n / C_sz
    double worst_sup_ratio = 0.0;       // max |K| / M
    double worst_hoelder_ratio = 0.0;   // max LHS / (C_ho |h|^a / |x-y|^{n+a})
};

inline KernelCheckResult check_kernel_bounds(const CZKernel& k, std::uint64_t seed, int samples) {
    KernelCheckResult res;
    Rng rng(seed);
    const int n = k.dimension;
    for (int s = 0; s < samples; ++s) {
        Point x{0.0, 0.0}, y{0.0, 0.0};
        for (int d = 0; d < n; ++d) {
            x[d] = rng.next_unit();
            y[d] = rng.next_unit();
        }
        const double r = point_distance(x, y, n);
        if (r < 1e-12) continue;
        const double kv = std::abs(k.evaluate(x, y));
        if (k.size_constant > 0.0)
            res.worst_size_ratio = std::max(res.worst_size_ratio, kv * std::pow(r, n) / k.size_constant);
        if (k.sup_bound > 0.0)
            res.worst_sup_ratio = std::max(res.worst_sup_ratio, kv / k.sup_bound);
        if (k.hoelder_constant > 0.0) {
            // displacement below the r > 2|h| threshold
            const double hmag = 0.4 * r * rng.next_unit();
            if (hmag < 1e-14) continue;
            Point xh = x, yh = y;
            const int axis = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
            xh[axis] += hmag;
            yh[axis] += hmag;
            const double lhs = std::abs(k.evaluate(x, yh) - k.evaluate(x, y)) +
                               std::abs(k.evaluate(xh, y) - k.evaluate(x, y));
            const double rhs = k.hoelder_constant * std::pow(hmag, k.hoelder_exponent) /
                               std::pow(r, n + k.hoelder_exponent);
            res.worst_hoelder_ratio = std::max(res.worst_hoelder_ratio, lhs / rhs);
        }
    }
    return res;
}

}  // namespace dytb
