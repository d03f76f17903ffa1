#pragma once

// Deep-cut ellipsoid method for nondifferentiable convex minimization over a
// convex set, with the set described only through separating cuts.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>

namespace wpcn {

template <int N>
struct EllipsoidCut {
    using Vec = Eigen::Matrix<double, N, 1>;

    bool feasible = true; // objective cut if true, feasibility cut otherwise
    double value = 0.0;   // objective f(x), or constraint violation >= 0
    Vec g = Vec::Zero();  // subgradient of f, or of the violated constraint
};

struct EllipsoidOptions {
    std::size_t max_iters = 2000;
    double abs_tol = 1e-10; // stop when best - lower_bound <= abs_tol
    double rel_tol = 1e-12;
};

template <int N>
struct EllipsoidResult {
    using Vec = Eigen::Matrix<double, N, 1>;

    Vec best = Vec::Zero();
    double best_value = std::numeric_limits<double>::infinity();
    double lower_bound = -std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
    bool found_feasible = false;
};

// Minimizes through `oracle(x) -> EllipsoidCut<N>` starting from the
// ellipsoid {x : (x - c)^T P^{-1} (x - c) <= 1}, which must contain a
// minimizer.
template <int N, class Oracle>
EllipsoidResult<N> ellipsoid_minimize(Eigen::Matrix<double, N, 1> center,
                                      Eigen::Matrix<double, N, N> shape, Oracle&& oracle,
                                      const EllipsoidOptions& opts = {})
{
    static_assert(N >= 2, "the update formulas need at least two dimensions");
    using Vec = Eigen::Matrix<double, N, 1>;
    constexpr double n = N;

    EllipsoidResult<N> res;
    res.best = center;

    for (std::size_t k = 0; k < opts.max_iters; ++k) {
        res.iterations = k + 1;
        const EllipsoidCut<N> cut = oracle(static_cast<const Vec&>(center));

        const Vec pg = shape * cut.g;
        const double width2 = cut.g.dot(pg);
        if (!(width2 > 0.0) || !std::isfinite(width2)) {
            // Zero subgradient at a feasible point: the center is optimal.
            if (cut.feasible && width2 == 0.0) {
                if (cut.value < res.best_value) {
                    res.best_value = cut.value;
                    res.best = center;
                    res.found_feasible = true;
                }
                res.lower_bound = res.best_value;
                res.converged = true;
            }
            break;
        }
        const double width = std::sqrt(width2);

        double depth = 0.0;
        if (cut.feasible) {
            if (cut.value < res.best_value) {
                res.best_value = cut.value;
                res.best = center;
                res.found_feasible = true;
            }
            res.lower_bound = std::max(res.lower_bound, cut.value - width);
            depth = cut.value - res.best_value;
            const double gap = res.best_value - res.lower_bound;
            if (gap <= opts.abs_tol || gap <= opts.rel_tol * std::abs(res.best_value)) {
                res.converged = true;
                break;
            }
        } else {
            depth = cut.value;
        }

        double a = depth / width;
        if (a >= 1.0) {
            // The cut removes the whole ellipsoid; only possible through
            // round-off once the ellipsoid is tiny.
            break;
        }
        a = std::max(a, 0.0);

        const Vec step = pg / width;
        center -= ((1.0 + n * a) / (n + 1.0)) * step;
        const double scale = n * n * (1.0 - a * a) / (n * n - 1.0);
        const double shrink = 2.0 * (1.0 + n * a) / ((n + 1.0) * (1.0 + a));
        shape = scale * (shape - shrink * step * step.transpose());
        shape = 0.5 * (shape + shape.transpose());
    }
    return res;
}

} // namespace wpcn
