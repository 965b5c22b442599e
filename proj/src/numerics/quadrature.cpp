// SPDX-License-Identifier: Apache-2.0
#include "fadechan/numerics/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "fadechan/error.hpp"

namespace fadechan {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod15(const std::function<double(double)>& g, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = g(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double pair = g(center - dx) + g(center + dx);
        kronrod += kWgk[j] * pair;
        if (j % 2 == 1) gauss += kWg[j / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;
    double err = std::abs(kronrod - gauss);
    if (!std::isfinite(kronrod)) err = std::numeric_limits<double>::infinity();
    return {lo, hi, kronrod, err};
}

QuadResult adapt_finite(const std::function<double(double)>& g, double lo, double hi, double tol,
                        std::size_t max_evals) {
    constexpr std::size_t kPerSegment = 15;
    std::priority_queue<Segment> heap;
    Segment first = kronrod15(g, lo, hi);
    std::size_t evals = kPerSegment;
    double total = first.value;
    double total_err = first.error;
    heap.push(first);

    const double tiny = 50.0 * std::numeric_limits<double>::epsilon();
    while (total_err > std::max(tol, tol * std::abs(total))) {
        if (evals + 2 * kPerSegment > max_evals) {
            throw BudgetExceeded("adaptive_quad_1d: evaluation budget exhausted", total, total_err);
        }
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.lo + worst.hi);
        // Interval can no longer be split in floating point: accept as is.
        if (!(mid > worst.lo && mid < worst.hi) || (worst.hi - worst.lo) < tiny * std::abs(mid)) break;
        heap.pop();
        Segment left = kronrod15(g, worst.lo, mid);
        Segment right = kronrod15(g, mid, worst.hi);
        evals += 2 * kPerSegment;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Periodically resum to shed accumulated cancellation in the running totals.
        if (heap.size() % 64 == 0) {
            auto copy = heap;
            total = 0.0;
            total_err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                total_err += copy.top().error;
                copy.pop();
            }
        }
    }
    if (!std::isfinite(total)) throw DomainError("adaptive_quad_1d: integrand not finite");
    return {total, total_err, evals};
}

}  // namespace

QuadResult adaptive_quad_1d(const std::function<double(double)>& f, double lo, double hi, double tol,
                            std::size_t max_evals) {
    if (std::isnan(lo) || std::isnan(hi)) throw DomainError("adaptive_quad_1d: NaN bound");
    if (!(tol > 0.0)) throw DomainError("adaptive_quad_1d: tolerance must be positive");
    if (lo == hi) return {0.0, 0.0, 1};
    if (lo > hi) {
        QuadResult r = adaptive_quad_1d(f, hi, lo, tol, max_evals);
        r.value = -r.value;
        return r;
    }
    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) {
        QuadResult left = adaptive_quad_1d(f, lo, 0.0, tol, max_evals / 2);
        QuadResult right = adaptive_quad_1d(f, 0.0, hi, tol, max_evals - max_evals / 2);
        return {left.value + right.value, left.error_estimate + right.error_estimate,
                left.evaluations + right.evaluations};
    }
    if (hi_inf) {
        auto g = [&f, lo](double t) {
            if (t >= 1.0) return 0.0;
            const double s = 1.0 - t;
            return f(lo + t / s) / (s * s);
        };
        return adapt_finite(g, 0.0, 1.0, tol, max_evals);
    }
    if (lo_inf) {
        auto g = [&f, hi](double t) {
            if (t >= 1.0) return 0.0;
            const double s = 1.0 - t;
            return f(hi - t / s) / (s * s);
        };
        return adapt_finite(g, 0.0, 1.0, tol, max_evals);
    }
    return adapt_finite(f, lo, hi, tol, max_evals);
}

QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
    if (n == 0) throw DomainError("gauss_legendre: zero nodes");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = x;
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = p2;
        }
        dp = n == 1 ? 1.0 : static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

}  // namespace fadechan
