// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fadechan {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

inline constexpr std::size_t kDefaultQuadBudget = 1'000'000;

// Globally adaptive Gauss-Kronrod (7/15) quadrature. Either bound may be
// infinite; half-infinite ranges are mapped to [0, 1) by x = lo + t/(1-t)
// and the full line by splitting at 0. Converges when the summed error
// estimate drops below max(tol, tol*|value|); throws BudgetExceeded (with
// the best estimate) once max_evals integrand calls have been spent.
QuadResult adaptive_quad_1d(const std::function<double(double)>& f, double lo, double hi, double tol,
                            std::size_t max_evals = kDefaultQuadBudget);

// Gauss-Legendre nodes and weights on [lo, hi].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadratureRule gauss_legendre(std::size_t n, double lo = -1.0, double hi = 1.0);

}  // namespace fadechan
