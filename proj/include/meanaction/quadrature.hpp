#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"

namespace meanaction::quad {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline GaussLegendre build_gauss_legendre(int n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, refined by Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            const double pn = p1, pnm1 = p0;
            dp = n * (x * pn - pnm1) / (x * x - 1.0);
            double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

} // namespace detail

/// Cached rule of the given order (order >= 1).
inline const GaussLegendre& gauss_legendre(int order) {
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, detail::build_gauss_legendre(order)).first;
    return it->second;
}

/// Fixed-order Gauss–Legendre on [a, b].
template <class F>
double gauss(F&& f, double a, double b, int order) {
    const auto& rule = gauss_legendre(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

/// Composite Gauss–Legendre over `panels` equal panels.
template <class F>
double composite_gauss(F&& f, double a, double b, int panels, int order) {
    double h = (b - a) / panels;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) sum += gauss(f, a + k * h, a + (k + 1) * h, order);
    return sum;
}

struct AdaptiveResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t panels = 0;
};

namespace detail {

template <class F>
void adaptive_step(F& f, double a, double b, double whole, double tol, int order, int depth,
                   int max_depth, AdaptiveResult& out) {
    double mid = 0.5 * (a + b);
    double left = gauss(f, a, mid, order);
    double right = gauss(f, mid, b, order);
    double diff = std::abs(left + right - whole);
    if (diff <= tol || depth >= max_depth) {
        if (diff > tol)
            throw QuadratureNotConverged("adaptive Gauss-Legendre exceeded depth " + std::to_string(max_depth) +
                                         " on [" + std::to_string(a) + ", " + std::to_string(b) + "]");
        out.value += left + right;
        out.error_estimate += diff;
        out.panels += 2;
        return;
    }
    adaptive_step(f, a, mid, left, 0.5 * tol, order, depth + 1, max_depth, out);
    adaptive_step(f, mid, b, right, 0.5 * tol, order, depth + 1, max_depth, out);
}

} // namespace detail

/// Adaptive bisection driven by a fixed-order Gauss–Legendre panel rule.
/// A panel is accepted when the two-half estimate agrees with the whole-panel
/// estimate to within its share of `tol`.
template <class F>
AdaptiveResult adaptive_gauss(F&& f, double a, double b, double tol, int order = 32, int max_depth = 40) {
    AdaptiveResult out;
    if (a == b) return out;
    double whole = gauss(f, a, b, order);
    detail::adaptive_step(f, a, b, whole, tol, order, 0, max_depth, out);
    return out;
}

/// Adaptive integration over [a, b] split at `cuts` and into at least
/// `min_panels` equal pieces, so that narrow features between coarse nodes
/// cannot be missed by the first error estimate. `tol` is shared in
/// proportion to piece length.
template <class F>
AdaptiveResult adaptive_gauss_split(F&& f, double a, double b, std::vector<double> cuts, double tol, int order = 16,
                                    int min_panels = 1, int max_depth = 40) {
    AdaptiveResult out;
    if (a == b) return out;
    const double lo = std::min(a, b), hi = std::max(a, b);
    for (int k = 1; k < min_panels; ++k) cuts.push_back(lo + (hi - lo) * k / min_panels);
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> nodes;
    for (double c : cuts)
        if (c >= lo && c <= hi && (nodes.empty() || c > nodes.back())) nodes.push_back(c);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double share = tol * (nodes[i + 1] - nodes[i]) / (hi - lo);
        const auto piece = adaptive_gauss(f, nodes[i], nodes[i + 1], share, order, max_depth);
        out.value += piece.value;
        out.error_estimate += piece.error_estimate;
        out.panels += piece.panels;
    }
    if (a > b) out.value = -out.value;
    return out;
}

/// Composite Simpson weights for n+1 equally spaced nodes (n even) on [a, b].
inline std::vector<double> simpson_weights(int n, double a, double b) {
    if (n < 2 || n % 2 != 0) throw DomainError("simpson_weights: need an even number of intervals >= 2");
    std::vector<double> w(n + 1);
    double h = (b - a) / n;
    for (int i = 0; i <= n; ++i) w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    for (auto& v : w) v *= h / 3.0;
    return w;
}

} // namespace meanaction::quad
