#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "action.hpp"
#include "annulus_map.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "profile.hpp"
#include "quadrature.hpp"
#include "rational.hpp"

namespace meanaction {

/// η(θ) = −c·w·I((θ−a0)/w) + (1+c)·w·I((θ−a1)/w) + drift·θ, with I the
/// smoothstep antiderivative: a dip of depth c, then a rise to slope 1.
/// a1 is placed so that η(1) = 0; `drift` is zero for valid profiles.
class EtaProfile {
public:
    EtaProfile() = default;

    /// Dip depth c > 0; throws InfeasibleEta if the blend does not fit in [0, 1].
    static EtaProfile with_dip(double c, double a0 = 0.05) {
        if (!(c > 0.0)) throw InfeasibleEta("eta dip depth must be positive");
        EtaProfile e;
        e.c_ = c;
        e.a0_ = a0;
        // η(1) = 0 forces a1 + w < 1 only when w/2 < c(1 − a0 − w); keep half of that room.
        e.w_ = std::min({0.1, 0.4 / (1.0 + c), c * (1.0 - a0) / (1.0 + 2.0 * c)});
        e.a1_ = (1.0 + c * a0 - 0.5 * e.w_) / (1.0 + c);
        if (!(a0 > 0.0 && a0 + e.w_ <= e.a1_ && e.a1_ + e.w_ < 1.0))
            throw InfeasibleEta("eta blend windows do not fit in [0, 1] for dip depth " + std::to_string(c));
        return e;
    }

    /// Same profile plus drift·θ (violates η(1) = 0; test fixtures only).
    EtaProfile with_drift(double drift) const {
        EtaProfile e = *this;
        e.drift_ = drift;
        return e;
    }

    double value(double t) const {
        return -c_ * w_ * smoothstep::integral((t - a0_) / w_) + (1.0 + c_) * w_ * smoothstep::integral((t - a1_) / w_) +
               drift_ * t;
    }

    double derivative(double t) const {
        return -c_ * smoothstep::value((t - a0_) / w_) + (1.0 + c_) * smoothstep::value((t - a1_) / w_) + drift_;
    }

    double dip() const { return c_; }
    /// First θ at which η′ = −c.
    double dip_start() const { return a0_ + w_; }
    double drift() const { return drift_; }
    /// Blend region [θ_a, θ_b] outside which η is 0 or θ − 1.
    std::pair<double, double> blend_region() const { return {a0_, a1_ + w_}; }
    double min_derivative() const { return -c_ + drift_; }
    double max_derivative() const { return 1.0 + drift_; }

private:
    double c_ = 0.5, a0_ = 0.05, w_ = 0.1, a1_ = 0.0, drift_ = 0.0;
};

/// λ₀ on [0,1] × A built from an action context (map, offset, quadrature) and η.
struct MappingTorusForm {
    ActionContext ctx;
    EtaProfile eta;
    double f_min = 0.0; ///< on the action grid, offset included
    double f_max = 0.0;
};

struct EtaReport {
    EtaProfile eta;
    double f_min = 0.0;
    double f_max = 0.0;
    double lower_bound = 0.0;  ///< −min f / max f
    double lower_margin = 0.0; ///< min η′ − lower_bound
    double upper_margin = 0.0; ///< 1 − max η′
    double eta_at_one = 0.0;
};

/// Chooses η with dip depth 0.5 × 0.95 × min f / max f, the 5% being a safety
/// margin for the grid estimate of min f.
inline EtaReport build_eta(const ActionContext& ctx) {
    const auto range = action_range(action_grid(ctx));
    if (!(range.min > 0.0))
        throw InfeasibleEta("action function must be positive; min f + N = " + std::to_string(range.min));
    EtaReport r;
    r.f_min = range.min;
    r.f_max = range.max;
    r.lower_bound = -range.min / range.max;
    r.eta = EtaProfile::with_dip(0.5 * 0.95 * range.min / range.max);
    r.lower_margin = r.eta.min_derivative() - r.lower_bound;
    r.upper_margin = 1.0 - r.eta.max_derivative();
    r.eta_at_one = r.eta.value(1.0);
    return r;
}

inline MappingTorusForm make_form(const ActionContext& ctx) {
    const EtaReport r = build_eta(ctx);
    return {ctx, r.eta, r.f_min, r.f_max};
}

namespace detail {

/// f and f∘ψ at p.
inline std::pair<double, double> action_pair(const ActionContext& ctx, const AnnulusPoint& p) {
    AnnulusPoint q = evaluate_lift(ctx.map, p);
    q.x = std::clamp(q.x, -1.0, 1.0);
    return {action_function(ctx, p), action_function(ctx, q)};
}

inline std::vector<double> theta_grid(const EtaProfile& eta, int n) {
    std::vector<double> t;
    for (int i = 0; i <= n; ++i) t.push_back(static_cast<double>(i) / n);
    // Include the extremes of η′ exactly.
    t.push_back(eta.dip_start());
    t.push_back(eta.blend_region().second);
    std::sort(t.begin(), t.end());
    return t;
}

} // namespace detail

/// λ₀ = A_θ dθ + A_x dx + A_y dy at (θ, p).
struct FormCoefficients {
    double theta = 0.0, x = 0.0, y = 0.0;
};

inline FormCoefficients lambda0(const MappingTorusForm& form, double theta, const AnnulusPoint& p) {
    const ActionContext& ctx = form.ctx;
    const LiftedValue v = evaluate_with_jacobian(ctx.map, p, ctx.quad.fd_step);
    AnnulusPoint q = v.point;
    q.x = std::clamp(q.x, -1.0, 1.0);
    const LiftedValue vq = evaluate_with_jacobian(ctx.map, q, ctx.quad.fd_step);
    const AnnulusPoint df_p = detail::pullback_difference(standard_primitive, p, v);
    const AnnulusPoint df_q = detail::pullback_difference(standard_primitive, q, vq);
    // ψ*df at p = Jᵀ df(ψ(p))
    const AnnulusPoint pull{v.jac.a * df_q.x + v.jac.c * df_q.y, v.jac.b * df_q.x + v.jac.d * df_q.y};
    const double e = form.eta.value(theta), ep = form.eta.derivative(theta);
    const double f = action_function(ctx, p), fpsi = action_function(ctx, q);
    return {(1.0 - ep) * f + ep * fpsi, (theta - e) * df_p.x + e * pull.x, p.x / kTwoPi + (theta - e) * df_p.y + e * pull.y};
}

struct ContactReport {
    double min_wedge_coeff = std::numeric_limits<double>::infinity();
    double theta_at_min = 0.0;
    AnnulusPoint point_at_min;
};

/// Minimum of (1 − η′) f + η′ f∘ψ over a (θ, x, y) grid; positive means contact.
inline ContactReport verify_contact(const MappingTorusForm& form, int n_theta = 64, int n_x = 33, int n_y = 16) {
    std::vector<AnnulusPoint> pts;
    for (int i = 0; i < n_x; ++i)
        for (int j = 0; j < n_y; ++j) pts.push_back({-1.0 + 2.0 * i / (n_x - 1), kTwoPi * j / n_y});
    std::vector<std::pair<double, double>> fv(pts.size());
    parallel_for(pts.size(), [&](std::size_t k) { fv[k] = detail::action_pair(form.ctx, pts[k]); });
    const auto thetas = detail::theta_grid(form.eta, n_theta);
    ContactReport r;
    for (double t : thetas) {
        const double ep = form.eta.derivative(t);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const double w = (1.0 - ep) * fv[k].first + ep * fv[k].second;
            if (w < r.min_wedge_coeff) {
                r.min_wedge_coeff = w;
                r.theta_at_min = t;
                r.point_at_min = pts[k];
            }
        }
    }
    return r;
}

/// max over points of |∫₀¹ ((1 − η′) f + η′ f∘ψ) dθ − f|.
inline double verify_return_time(const MappingTorusForm& form, const std::vector<AnnulusPoint>& points) {
    std::vector<double> dev(points.size());
    parallel_for(points.size(), [&](std::size_t k) {
        const auto [f, fpsi] = detail::action_pair(form.ctx, points[k]);
        auto integrand = [&](double t) {
            const double ep = form.eta.derivative(t);
            return (1.0 - ep) * f + ep * fpsi;
        };
        const double flow_time = quad::adaptive_gauss(integrand, 0.0, 1.0, 1e-13, 16).value;
        dev[k] = std::abs(flow_time - f);
    });
    return points.empty() ? 0.0 : *std::max_element(dev.begin(), dev.end());
}

struct VolumeReport {
    double volume = 0.0;
    double two_calabi = 0.0;
    double diff = 0.0;
};

/// ∫ λ₀ ∧ dλ₀ over the mapping torus on a θ × x × y grid, against 2(𝒱 + N).
inline VolumeReport verify_volume(const MappingTorusForm& form, int n_x = 96, int n_y = 32, int n_theta_panels = 16) {
    ActionContext grid_ctx = form.ctx;
    grid_ctx.quad.rule = AreaRule::Simpson;
    grid_ctx.quad.nx = n_x;
    grid_ctx.quad.ny = n_y;
    std::vector<double> xs, wx;
    detail::area_nodes(grid_ctx.quad, xs, wx, grid_ctx.map.x_breakpoints());

    const auto& gl = quad::gauss_legendre(8);
    std::vector<double> th, wth;
    for (int k = 0; k < n_theta_panels; ++k) {
        const double lo = static_cast<double>(k) / n_theta_panels, h = 1.0 / n_theta_panels;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            th.push_back(lo + 0.5 * h * (1.0 + gl.nodes[i]));
            wth.push_back(0.5 * h * gl.weights[i]);
        }
    }
    std::vector<double> line(n_y);
    parallel_for(static_cast<std::size_t>(n_y), [&](std::size_t j) {
        const double y = kTwoPi * static_cast<double>(j) / n_y;
        double s = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto [f, fpsi] = detail::action_pair(form.ctx, {xs[i], y});
            double col = 0.0;
            for (std::size_t t = 0; t < th.size(); ++t) {
                const double ep = form.eta.derivative(th[t]);
                col += wth[t] * ((1.0 - ep) * f + ep * fpsi);
            }
            s += wx[i] * col;
        }
        line[j] = s;
    });
    VolumeReport r;
    double total = 0.0;
    for (double v : line) total += v;
    // ∫ ω = ∫∫ dx dy / 2π; the y-sum is the periodic trapezoid rule.
    r.volume = total / n_y;
    r.two_calabi = 2.0 * calabi(form.ctx);
    r.diff = std::abs(r.volume - r.two_calabi);
    return r;
}

struct ExteriorCheck {
    double max_theta_terms = 0.0; ///< max |(dλ₀)_{θx}|, |(dλ₀)_{θy}|
    double max_omega_defect = 0.0; ///< max |(dλ₀)_{xy} − 1/2π|
};

/// dλ₀ = ω by fourth-order central differences at step h; sample points
/// should keep x ± 2h inside the annulus.
inline ExteriorCheck verify_d_lambda(const MappingTorusForm& form, const std::vector<std::pair<double, AnnulusPoint>>& samples,
                                     double h = 1e-4) {
    std::vector<ExteriorCheck> per(samples.size());
    parallel_for(samples.size(), [&](std::size_t k) {
        const auto [t, p] = samples[k];
        const auto at = [&](double dt, double dx, double dy) { return lambda0(form, t + dt, {p.x + dx, p.y + dy}); };
        // fourth-order central differences
        const auto d = [&](auto get, double sx, double sy, double sz) {
            return (8 * (get(at(h * sx, h * sy, h * sz)) - get(at(-h * sx, -h * sy, -h * sz))) -
                    (get(at(2 * h * sx, 2 * h * sy, 2 * h * sz)) - get(at(-2 * h * sx, -2 * h * sy, -2 * h * sz)))) /
                   (12 * h);
        };
        const auto cx = [](const FormCoefficients& c) { return c.x; };
        const auto cy = [](const FormCoefficients& c) { return c.y; };
        const auto ct = [](const FormCoefficients& c) { return c.theta; };
        const double d_theta_x = d(cx, 1, 0, 0) - d(ct, 0, 1, 0);
        const double d_theta_y = d(cy, 1, 0, 0) - d(ct, 0, 0, 1);
        const double d_xy = d(cy, 0, 1, 0) - d(cx, 0, 0, 1);
        per[k].max_theta_terms = std::max(std::abs(d_theta_x), std::abs(d_theta_y));
        per[k].max_omega_defect = std::abs(d_xy - 1.0 / kTwoPi);
    });
    ExteriorCheck r;
    for (const auto& c : per) {
        r.max_theta_terms = std::max(r.max_theta_terms, c.max_theta_terms);
        r.max_omega_defect = std::max(r.max_omega_defect, c.max_omega_defect);
    }
    return r;
}

/// max over points of |λ₀(1, p) − ψ*λ₀(0, ·)(p)|, where the pullback of the
/// θ = 0 slice is λ₀(0, ψ(p)) with dθ kept and (dx, dy) pulled back by Jᵀ.
inline double verify_gluing(const MappingTorusForm& form, const std::vector<AnnulusPoint>& points) {
    std::vector<double> dev(points.size());
    parallel_for(points.size(), [&](std::size_t k) {
        const AnnulusPoint& p = points[k];
        const LiftedValue v = evaluate_with_jacobian(form.ctx.map, p, form.ctx.quad.fd_step);
        AnnulusPoint q = v.point;
        q.x = std::clamp(q.x, -1.0, 1.0);
        const FormCoefficients one = lambda0(form, 1.0, p);
        const FormCoefficients zero = lambda0(form, 0.0, q);
        const double px = v.jac.a * zero.x + v.jac.c * zero.y, py = v.jac.b * zero.x + v.jac.d * zero.y;
        dev[k] = std::max({std::abs(one.theta - zero.theta), std::abs(one.x - px), std::abs(one.y - py)});
    });
    return points.empty() ? 0.0 : *std::max_element(dev.begin(), dev.end());
}

struct BindingRotationNumbers {
    int p_tilde = 0;
    std::pair<double, double> rot_page;
    std::pair<double, double> rot_seifert;
    std::pair<double, double> rot_e;
};

/// Rotation numbers of the binding orbits for a = y₊, b = −y₋ + F, p̃ = a + b.
inline BindingRotationNumbers binding_rotation_numbers(double y_plus, double y_minus, double F, double int_tol = 1e-9) {
    const double a = y_plus, b = -y_minus + F, p = a + b;
    if (!(p >= 1.0 - int_tol) || dist_to_integer(p) > int_tol)
        throw NonIntegerP("p_tilde = y_plus - y_minus + F = " + std::to_string(p) + " is not a positive integer");
    if (looks_rational(a) || looks_rational(b))
        throw RationalityGuardTripped("y_plus or -y_minus + F is within 1e-9/q of p/q for some q <= 1e6");
    BindingRotationNumbers r;
    r.p_tilde = static_cast<int>(std::lround(p));
    const double pt = r.p_tilde;
    r.rot_page = {1.0 / a, 1.0 / b};
    r.rot_seifert = {pt / a - 1.0, pt / b - 1.0};
    r.rot_e = {1.0 / a - 1.0 / pt, 1.0 / b - 1.0 / pt};
    return r;
}

} // namespace meanaction
