#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "beamsafe/errors.hpp"
#include "beamsafe/units.hpp"

namespace beamsafe {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct QuadratureSpec {
    double relative_tolerance = 1e-8;
    int max_subdivisions = 20;  // depth cap of the quadtree refinement
    int base_order = 16;        // Gauss-Legendre nodes per axis and cell

    void validate() const {
        detail::require(relative_tolerance > 0.0, "quadrature tolerance must be positive");
        detail::require(base_order >= 2, "quadrature order must be >= 2");
        detail::require(max_subdivisions >= 0, "subdivision cap must be >= 0");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

// Nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre_rule(int n) {
    detail::require(n >= 1, "Gauss-Legendre order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(units::pi * (i + 0.75) / (n + 0.5));
        double derivative = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            derivative = n * (z * p1 - p2) / (z * z - 1.0);
            const double step = p1 / derivative;
            z -= step;
            if (std::abs(step) < 1e-16) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p1 = 1.0;
        double p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
        }
        derivative = n * (z * p1 - p2) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * derivative * derivative);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -z;
        rule.nodes[hi] = z;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    return rule;
}

namespace detail {

// Tensor-product rule on one cell; inner loop over the second coordinate.
template <class F>
double tensor_cell(const F& f, const GaussLegendreRule& rule, double u0, double u1, double v0, double v1) {
    const double hu = 0.5 * (u1 - u0);
    const double cu = 0.5 * (u1 + u0);
    const double hv = 0.5 * (v1 - v0);
    const double cv = 0.5 * (v1 + v0);
    double outer = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double u = cu + hu * rule.nodes[i];
        double inner = 0.0;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            inner += rule.weights[j] * f(u, cv + hv * rule.nodes[j]);
        }
        outer += rule.weights[i] * inner;
    }
    return outer * hu * hv;
}

template <class F>
class AdaptiveRectangle {
public:
    AdaptiveRectangle(const F& f, const GaussLegendreRule& rule, int max_depth)
        : f_(f), rule_(rule), max_depth_(max_depth) {}

    double run(double u0, double u1, double v0, double v1, double relative_tolerance) {
        const double coarse = tensor_cell(f_, rule_, u0, u1, v0, v1);
        const double um = 0.5 * (u0 + u1);
        const double vm = 0.5 * (v0 + v1);
        const double q[4] = {tensor_cell(f_, rule_, u0, um, v0, vm), tensor_cell(f_, rule_, u0, um, vm, v1),
                             tensor_cell(f_, rule_, um, u1, v0, vm), tensor_cell(f_, rule_, um, u1, vm, v1)};
        const double fine = q[0] + q[1] + q[2] + q[3];
        const double scale = std::max(std::abs(fine), std::numeric_limits<double>::min());
        const double tol = relative_tolerance * scale;
        if (std::abs(fine - coarse) <= tol || max_depth_ == 0) {
            error_ = std::abs(fine - coarse);
            capped_ = std::abs(fine - coarse) > tol;
            return fine;
        }
        return refine_children(u0, u1, v0, v1, q, 1, 0.5 * tol);
    }

    double error() const { return error_; }
    bool capped() const { return capped_; }

private:
    double refine_children(double u0, double u1, double v0, double v1, const double (&q)[4], int depth, double tol) {
        const double um = 0.5 * (u0 + u1);
        const double vm = 0.5 * (v0 + v1);
        return refine(u0, um, v0, vm, q[0], depth, tol) + refine(u0, um, vm, v1, q[1], depth, tol) +
               refine(um, u1, v0, vm, q[2], depth, tol) + refine(um, u1, vm, v1, q[3], depth, tol);
    }

    double refine(double u0, double u1, double v0, double v1, double coarse, int depth, double tol) {
        const double um = 0.5 * (u0 + u1);
        const double vm = 0.5 * (v0 + v1);
        const double q[4] = {tensor_cell(f_, rule_, u0, um, v0, vm), tensor_cell(f_, rule_, u0, um, vm, v1),
                             tensor_cell(f_, rule_, um, u1, v0, vm), tensor_cell(f_, rule_, um, u1, vm, v1)};
        const double fine = q[0] + q[1] + q[2] + q[3];
        const double delta = std::abs(fine - coarse);
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(fine);
        if (delta <= std::max(tol, floor)) {
            error_ += delta;
            return fine;
        }
        if (depth >= max_depth_) {
            capped_ = true;
            error_ += delta;
            return fine;
        }
        return refine_children(u0, u1, v0, v1, q, depth + 1, 0.5 * tol);
    }

    const F& f_;
    const GaussLegendreRule& rule_;
    int max_depth_;
    double error_ = 0.0;
    bool capped_ = false;
};

} // namespace detail

// Adaptive tensor Gauss-Legendre over [u0,u1]x[v0,v1]. f is called as f(u, v).
template <class F>
QuadratureResult integrate_rectangle(const F& f, double u0, double u1, double v0, double v1,
                                     const QuadratureSpec& spec = {}) {
    spec.validate();
    const GaussLegendreRule rule = gauss_legendre_rule(spec.base_order);
    detail::AdaptiveRectangle<F> adaptive(f, rule, spec.max_subdivisions);
    const double value = adaptive.run(u0, u1, v0, v1, spec.relative_tolerance);
    if (adaptive.capped()) {
        throw NumericsError("quadrature did not converge within " + std::to_string(spec.max_subdivisions) +
                                " subdivisions",
                            value, adaptive.error());
    }
    return {value, adaptive.error()};
}

// Integral of f(x, y) over a disk, in polar coordinates about the disk center.
template <class F>
QuadratureResult integrate_disk(const F& f, Point center, double radius, const QuadratureSpec& spec = {}) {
    detail::require(radius >= 0.0, "disk radius must be >= 0");
    if (radius == 0.0) return {};
    auto polar = [&](double phi, double rho) {
        return f(center.x + rho * std::cos(phi), center.y + rho * std::sin(phi)) * rho;
    };
    return integrate_rectangle(polar, 0.0, 2.0 * units::pi, 0.0, radius, spec);
}

// Bisection. g(lo) and g(hi) must differ in sign.
template <class G>
double find_root_bracketed(const G& g, double lo, double hi, double tol) {
    detail::require(tol > 0.0, "root tolerance must be positive");
    double g_lo = g(lo);
    const double g_hi = g(hi);
    if (g_lo == 0.0) return lo;
    if (g_hi == 0.0) return hi;
    if ((g_lo > 0.0) == (g_hi > 0.0)) {
        throw ParameterError("root is not bracketed: g(lo) and g(hi) have the same sign");
    }
    for (int iter = 0; iter < 400 && std::abs(hi - lo) >= tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double g_mid = g(mid);
        if (g_mid == 0.0) return mid;
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Golden-section search for a maximum of h on [lo, hi].
template <class H>
double golden_section_maximize(const H& h, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double hc = h(c);
    double hd = h(d);
    for (int iter = 0; iter < 300 && (b - a) > tol; ++iter) {
        if (hc >= hd) {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
    }
    return 0.5 * (a + b);
}

// Log-spaced scan of h over [lo, hi] followed by golden-section refinement around the best sample.
template <class H>
double argmax_scan(const H& h, double lo, double hi, int points_per_decade, double refine_tol) {
    detail::require(lo > 0.0 && hi > lo, "argmax_scan needs 0 < lo < hi");
    detail::require(points_per_decade >= 1, "points_per_decade must be >= 1");
    const double decades = std::log10(hi / lo);
    const int n = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        xs[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    }
    xs.front() = lo;
    xs.back() = hi;
    std::size_t best = 0;
    double best_value = h(xs[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double v = h(xs[i]);
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }
    const double a = xs[best == 0 ? 0 : best - 1];
    const double b = xs[best + 1 == xs.size() ? best : best + 1];
    const double refined = golden_section_maximize(h, a, b, refine_tol);
    return h(refined) > best_value ? refined : xs[best];
}

} // namespace beamsafe
