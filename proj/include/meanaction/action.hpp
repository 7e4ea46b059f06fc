#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "annulus_map.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace meanaction {

enum class AreaRule { Simpson, GaussLegendre };

struct QuadratureConfig {
    AreaRule rule = AreaRule::Simpson;
    int line_order = 32;     ///< Gauss–Legendre nodes per grid cell in the x-sweep
    int nx = 512;            ///< x intervals (Simpson) or x panels of order 4 (Gauss–Legendre)
    int ny = 512;            ///< y lines, periodic trapezoid
    double tol = 1e-9;       ///< adaptive line-integral tolerance
    int adaptive_order = 16; ///< panel rule of the adaptive integrator
    int min_panels = 8;      ///< initial pieces of each adaptive line integral
    double fd_step = 0.0;    ///< flow Jacobian step; 0 selects the exact discrete derivative
};

/// A lifted map with the lift shifted by N and the numerical settings used to measure it.
struct ActionContext {
    LiftedMap map;
    int offset = 0;
    QuadratureConfig quad{};

    double y_plus() const { return map.y_plus() + offset; }
    double y_minus() const { return map.y_minus() + offset; }
};

/// Coefficients (P, Q) of a primitive λ = P dx + Q dy of ω on the cover.
using PrimitiveField = std::function<AnnulusPoint(const AnnulusPoint&)>;

/// λ = x/(2π) dy.
inline AnnulusPoint standard_primitive(const AnnulusPoint& p) { return {0.0, p.x / kTwoPi}; }

namespace detail {

/// ψ*λ − λ at p, given the value and Jacobian of the lift at p.
template <class Lambda>
AnnulusPoint pullback_difference(const Lambda& lambda, const AnnulusPoint& p, const LiftedValue& v) {
    const AnnulusPoint l1 = lambda(v.point);
    const AnnulusPoint l0 = lambda(p);
    return {v.jac.a * l1.x + v.jac.c * l1.y - l0.x, v.jac.b * l1.x + v.jac.d * l1.y - l0.y};
}

/// Lift value and Jacobian. The 2πN shift of the lift never enters ψ*λ − λ
/// for y-periodic λ, so offsets only appear through boundary values.
struct LiftEvaluator {
    const LiftedMap* map;
    double fd_step;

    LiftedValue operator()(const AnnulusPoint& p) const { return evaluate_with_jacobian(*map, p, fd_step); }
};

/// ψ_σ = σ ψ σ with σ(x, y) = (−x, −y); its Jacobian at p equals Dψ at σ(p).
struct ConjugatedEvaluator {
    const LiftedMap* map;
    double fd_step;

    LiftedValue operator()(const AnnulusPoint& p) const {
        const LiftedValue v = evaluate_with_jacobian(*map, {-p.x, -p.y}, fd_step);
        return {{-v.point.x, -v.point.y}, v.jac};
    }
};

/// The one-form α = ψ*λ − λ paired with the direction of a segment.
template <class Eval, class Lambda>
double segment_integrand(const Eval& eval, const Lambda& lambda, const AnnulusPoint& a, const AnnulusPoint& b,
                         double t) {
    const AnnulusPoint p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    const AnnulusPoint alpha = pullback_difference(lambda, p, eval(p));
    return alpha.x * (b.x - a.x) + alpha.y * (b.y - a.y);
}

template <class Eval, class Lambda>
double segment_integral(const Eval& eval, const Lambda& lambda, const AnnulusPoint& a, const AnnulusPoint& b,
                        const QuadratureConfig& q, const std::vector<double>& x_breaks = {}) {
    auto integrand = [&](double t) { return segment_integrand(eval, lambda, a, b, t); };
    std::vector<double> cuts;
    if (b.x != a.x)
        for (double xb : x_breaks) cuts.push_back((xb - a.x) / (b.x - a.x));
    return quad::adaptive_gauss_split(integrand, 0.0, 1.0, std::move(cuts), q.tol, q.adaptive_order, q.min_panels)
        .value;
}

/// Action values on a tensor grid, with quadrature weights for ∬ · dx dy/(2π).
struct SweepGrid {
    std::vector<double> xs; // ascending, xs.back() == 1
    std::vector<double> wx;
    std::vector<double> ys;
    std::vector<double> values; // values[j * xs.size() + i] = f(xs[i], ys[j])
};

/// x nodes and weights of the area rule. The Gauss–Legendre rule also puts
/// panel edges on `breaks` so no panel straddles a loss of smoothness.
inline void area_nodes(const QuadratureConfig& q, std::vector<double>& xs, std::vector<double>& wx,
                       const std::vector<double>& breaks = {}) {
    if (q.rule == AreaRule::Simpson) {
        xs.resize(q.nx + 1);
        for (int i = 0; i <= q.nx; ++i) xs[i] = -1.0 + 2.0 * i / q.nx;
        xs.back() = 1.0;
        wx = quad::simpson_weights(q.nx, -1.0, 1.0);
        return;
    }
    std::vector<double> edges;
    for (int k = 0; k <= q.nx; ++k) edges.push_back(-1.0 + 2.0 * k / q.nx);
    for (double b : breaks)
        if (b > -1.0 && b < 1.0) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    // drop slivers left by breakpoints close to a uniform edge
    std::vector<double> kept{-1.0};
    for (double e : edges)
        if (e - kept.back() > 1e-3 / q.nx) kept.push_back(e);
    kept.back() = 1.0;
    const auto& rule = quad::gauss_legendre(4);
    xs.clear();
    wx.clear();
    for (std::size_t k = 0; k + 1 < kept.size(); ++k) {
        const double mid = 0.5 * (kept[k] + kept[k + 1]), half = 0.5 * (kept[k + 1] - kept[k]);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            xs.push_back(mid + half * rule.nodes[i]);
            wx.push_back(half * rule.weights[i]);
        }
    }
    xs.push_back(1.0); // anchor of the sweep, zero weight
    wx.push_back(0.0);
}

/// f on the grid: f(1, y) = f_plus, then cumulative integration of α_x towards x = −1.
template <class Eval, class Lambda>
SweepGrid sweep(const Eval& eval, const Lambda& lambda, double f_plus, const QuadratureConfig& q,
                const std::vector<double>& breaks = {}) {
    if (q.nx < 2 || q.ny < 1) throw DomainError("sweep grid needs nx >= 2 and ny >= 1");
    if (q.rule == AreaRule::Simpson && q.nx % 2 != 0) throw DomainError("Simpson sweep needs an even nx");
    SweepGrid g;
    area_nodes(q, g.xs, g.wx, breaks);
    g.ys.resize(q.ny);
    for (int j = 0; j < q.ny; ++j) g.ys[j] = kTwoPi * j / q.ny;
    const std::size_t nxp = g.xs.size();
    g.values.assign(nxp * g.ys.size(), 0.0);
    const auto& rule = quad::gauss_legendre(q.line_order);
    std::vector<double> cuts(breaks.begin(), breaks.end());
    std::sort(cuts.begin(), cuts.end());

    parallel_for(g.ys.size(), [&](std::size_t j) {
        const double y = g.ys[j];
        double* row = g.values.data() + j * nxp;
        row[nxp - 1] = f_plus;
        auto piece = [&](double lo, double hi) {
            const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            double s = 0.0;
            for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
                const AnnulusPoint p{mid + half * rule.nodes[k], y};
                s += rule.weights[k] * pullback_difference(lambda, p, eval(p)).x;
            }
            return half * s;
        };
        for (std::size_t i = nxp - 1; i-- > 0;) {
            // cells between nodes may straddle a breakpoint; integrate each side separately
            double lo = g.xs[i], acc = 0.0;
            for (auto it = std::upper_bound(cuts.begin(), cuts.end(), lo); it != cuts.end() && *it < g.xs[i + 1]; ++it) {
                acc += piece(lo, *it);
                lo = *it;
            }
            row[i] = row[i + 1] - acc - piece(lo, g.xs[i + 1]);
        }
    });
    return g;
}

/// ω-average of the gridded function, ∫_A f ω / ∫_A ω with ∫_A ω = 2.
inline double omega_average(const SweepGrid& g) {
    const std::size_t nxp = g.xs.size();
    std::vector<double> line(g.ys.size());
    for (std::size_t j = 0; j < g.ys.size(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < nxp; ++i) s += g.wx[i] * g.values[j * nxp + i];
        line[j] = s;
    }
    // Pairwise reduction keeps the result independent of the worker count.
    while (line.size() > 1) {
        std::vector<double> next((line.size() + 1) / 2);
        for (std::size_t k = 0; k < next.size(); ++k)
            next[k] = line[2 * k] + (2 * k + 1 < line.size() ? line[2 * k + 1] : 0.0);
        line.swap(next);
    }
    return 0.5 * line[0] / static_cast<double>(g.ys.size());
}

} // namespace detail

/// ∫ (ψ*β − β) along the straight segment from a to b.
inline double line_integral(const ActionContext& ctx, const AnnulusPoint& a, const AnnulusPoint& b) {
    return detail::segment_integral(detail::LiftEvaluator{&ctx.map, ctx.quad.fd_step}, standard_primitive, a, b,
                                    ctx.quad, ctx.map.x_breakpoints());
}

/// F = y₊ + y₋ − ∫_c (ψ*β − β), c the segment from (−1, 0) to (1, 0).
inline double flux(const ActionContext& ctx) {
    return ctx.y_plus() + ctx.y_minus() - line_integral(ctx, {-1.0, 0.0}, {1.0, 0.0});
}

/// f(p) = y₊ + N + ∫ (ψ*β − β) along the horizontal segment from (1, y_p).
inline double action_function(const ActionContext& ctx, const AnnulusPoint& p) {
    detail::check_domain(p);
    if (p.x == 1.0) return ctx.y_plus();
    return ctx.y_plus() + line_integral(ctx, {1.0, p.y}, p);
}

/// f along an arbitrary polyline starting on the outer boundary circle.
inline double action_along_path(const ActionContext& ctx, const std::vector<AnnulusPoint>& path) {
    if (path.empty() || path.front().x != 1.0) throw DomainError("action path must start on x = 1");
    double f = ctx.y_plus();
    for (std::size_t i = 0; i + 1 < path.size(); ++i) f += line_integral(ctx, path[i], path[i + 1]);
    return f;
}

/// f on the area grid (see QuadratureConfig).
inline detail::SweepGrid action_grid(const ActionContext& ctx) {
    return detail::sweep(detail::LiftEvaluator{&ctx.map, ctx.quad.fd_step}, standard_primitive, ctx.y_plus(),
                         ctx.quad, ctx.map.x_breakpoints());
}

inline double calabi(const ActionContext& ctx) { return detail::omega_average(action_grid(ctx)); }

struct ActionRange {
    double min = 0.0;
    double max = 0.0;
};

inline ActionRange action_range(const detail::SweepGrid& g) {
    const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
    return {*lo, *hi};
}

/// A scalar field with gradient; used to change the primitive by an exact form.
struct GaugeField {
    std::function<double(const AnnulusPoint&)> value;
    std::function<AnnulusPoint(const AnnulusPoint&)> gradient;
};

struct IndependenceReport {
    double v_beta = 0.0;
    double v_beta_prime = 0.0;
    double diff = 0.0;
};

/// 𝒱 recomputed with β' = β + dg, integrating ψ*β' − β' directly.
inline IndependenceReport calabi_independence_check(const ActionContext& ctx, const GaugeField& g) {
    for (int j = 0; j < 64; ++j) {
        const double y = kTwoPi * j / 64.0;
        for (double x : {-1.0, 1.0}) {
            if (std::abs(g.value({x, y}) - g.value({x, 0.0})) > 1e-12)
                throw DomainError("gauge field must be constant on each boundary circle");
        }
    }
    IndependenceReport r;
    const detail::LiftEvaluator eval{&ctx.map, ctx.quad.fd_step};
    r.v_beta = detail::omega_average(detail::sweep(eval, standard_primitive, ctx.y_plus(), ctx.quad, ctx.map.x_breakpoints()));
    auto lambda = [&g](const AnnulusPoint& p) {
        const AnnulusPoint dg = g.gradient(p);
        return AnnulusPoint{dg.x, p.x / kTwoPi + dg.y};
    };
    r.v_beta_prime = detail::omega_average(detail::sweep(eval, lambda, ctx.y_plus(), ctx.quad, ctx.map.x_breakpoints()));
    r.diff = std::abs(r.v_beta - r.v_beta_prime);
    return r;
}

/// Periodic orbit of a lifted map: one period of points in the lift, the
/// last mapping to the first translated by 2πk.
struct OrbitRecord {
    std::vector<AnnulusPoint> points;
    int period = 0;
    int winding = 0;
    double total_action = 0.0;
    double mean_action = 0.0;
    double residual = 0.0;
    bool family_suspected = false;
};

inline double total_action(const ActionContext& ctx, const OrbitRecord& orbit) {
    double s = 0.0;
    for (const auto& p : orbit.points) s += action_function(ctx, p);
    return s;
}

inline double mean_action(const ActionContext& ctx, const OrbitRecord& orbit) {
    if (orbit.points.empty()) throw DomainError("mean_action of an empty orbit");
    return total_action(ctx, orbit) / static_cast<double>(orbit.points.size());
}

struct OrbitScaling {
    double mean_base = 0.0;  ///< mean action of the ψ-orbit
    double mean_power = 0.0; ///< mean action of the covered ψ^q-orbit, computed on ψ^q
    double diff = 0.0;       ///< |mean_power − q·mean_base|
};

struct PowerScalingReport {
    int q = 1;
    double calabi_base = 0.0;
    double calabi_power = 0.0;
    double ratio = 0.0;
    double diff = 0.0; ///< |calabi_power − q·calabi_base|
    std::vector<OrbitScaling> orbits;
};

/// Compares 𝒱 and orbit mean actions of (ψ^q, q(y₊+N)) with q times those of (ψ, y₊+N).
inline PowerScalingReport power_map_scaling_check(const ActionContext& ctx, int q,
                                                  const std::vector<OrbitRecord>& orbits = {}) {
    if (q < 1) throw DomainError("power_map_scaling_check: q must be >= 1");
    PowerScalingReport r;
    r.q = q;
    ActionContext pc = ctx;
    if (q > 1) pc.map = power(ctx.map, q);
    pc.offset = q * ctx.offset;
    r.calabi_base = calabi(ctx);
    r.calabi_power = q == 1 ? r.calabi_base : calabi(pc);
    r.ratio = r.calabi_base != 0.0 ? r.calabi_power / r.calabi_base : 0.0;
    r.diff = std::abs(r.calabi_power - q * r.calabi_base);

    for (const auto& orb : orbits) {
        OrbitScaling s;
        s.mean_base = mean_action(ctx, orb);
        // ψ^q-orbit through points[0]: every q-th point, period ℓ / gcd(ℓ, q).
        const int l = static_cast<int>(orb.points.size());
        const int lq = l / std::gcd(l, q);
        double acc = 0.0;
        for (int i = 0; i < lq; ++i) acc += action_function(pc, orb.points[(static_cast<long>(i) * q) % l]);
        s.mean_power = acc / lq;
        s.diff = std::abs(s.mean_power - q * s.mean_base);
        r.orbits.push_back(s);
    }
    return r;
}

/// Calabi invariant of the disk obtained by collapsing the inner boundary,
/// computed by quadrature with the primitive β' = β/2 + dy/(4π). When −y₋ + F
/// exceeds y₊ the roles of the boundaries are exchanged by σ(x, y) = (−x, −y).
struct DiskCollapseQuadrature {
    double calabi_kappa = 0.0;
    double f_kappa_origin = 0.0; ///< f' on the collapsed circle x = −1
    bool swapped = false;
};

inline DiskCollapseQuadrature disk_collapse_quadrature(const ActionContext& ctx) {
    const double F = flux(ctx);
    const double yp = ctx.y_plus(), ym = ctx.y_minus();
    auto lambda = [](const AnnulusPoint& p) { return AnnulusPoint{0.0, (p.x + 1.0) / (2.0 * kTwoPi)}; };
    DiskCollapseQuadrature out;
    out.swapped = yp < -ym + F;
    std::vector<double> breaks = ctx.map.x_breakpoints();
    if (out.swapped)
        for (double& b : breaks) b = -b;
    auto run = [&](const auto& eval, double f_plus) {
        out.calabi_kappa = detail::omega_average(detail::sweep(eval, lambda, f_plus, ctx.quad, breaks));
        out.f_kappa_origin = f_plus + detail::segment_integral(eval, lambda, {1.0, 0.0}, {-1.0, 0.0}, ctx.quad, breaks);
    };
    if (!out.swapped)
        run(detail::LiftEvaluator{&ctx.map, ctx.quad.fd_step}, yp);
    else
        run(detail::ConjugatedEvaluator{&ctx.map, ctx.quad.fd_step}, -ym);
    return out;
}

} // namespace meanaction
