#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "profile.hpp"

namespace meanaction {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Point of the universal cover [-1,1] x R of the annulus.
struct AnnulusPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    double det() const { return a * d - b * c; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    static Mat2 identity() { return {}; }
};

class LiftedMap;

/// (x, y) -> (x, y + 2π θ0).
struct RigidRotation {
    double theta0 = 0.0;
};

/// (x, y) -> (x, y + 2π g(x)); never admissible, used as an oracle.
struct TwistProfile {
    Profile g;
};

/// (x, y) -> (x, y + 2π b(x)); admissible when b is flat near both ends.
struct RadialShear {
    Profile b;
};

/// Time-T flow of H = s (1 - ρ²/r²)^4 supported in a disk of radius r
/// around `center`, with y-distances taken mod 2π.
struct HamiltonianBump {
    AnnulusPoint center;
    double radius = 0.25;
    double strength = 0.1;
    double time = 1.0;
    int steps = 64;
};

/// Applies `parts` in order, first element first.
struct Composition {
    std::vector<LiftedMap> parts;
};

/// Immutable lifted annulus map with its declared boundary data.
class LiftedMap {
public:
    using Kind = std::variant<RigidRotation, TwistProfile, RadialShear, HamiltonianBump, Composition>;

    LiftedMap() : LiftedMap(Composition{}) {}
    LiftedMap(Kind kind); // NOLINT(google-explicit-constructor)

    const Kind& kind() const { return *kind_; }
    double y_plus() const { return y_plus_; }
    double y_minus() const { return y_minus_; }
    double delta_plus() const { return delta_plus_; }
    double delta_minus() const { return delta_minus_; }
    bool admissible() const { return admissible_; }
    std::string kind_name() const;
    /// x-values where the map or its derivatives lose smoothness or where a
    /// localized part begins; quadrature splits there.
    const std::vector<double>& x_breakpoints() const { return breaks_; }

private:
    std::shared_ptr<const Kind> kind_;
    double y_plus_ = 0.0, y_minus_ = 0.0;
    double delta_plus_ = 0.0, delta_minus_ = 0.0;
    bool admissible_ = false;
    std::vector<double> breaks_;
};

inline LiftedMap rigid(double theta0) { return LiftedMap(RigidRotation{theta0}); }
inline LiftedMap twist(Profile g) { return LiftedMap(TwistProfile{std::move(g)}); }
inline LiftedMap radial_shear(Profile b) { return LiftedMap(RadialShear{std::move(b)}); }
inline LiftedMap compose(std::vector<LiftedMap> parts) { return LiftedMap(Composition{std::move(parts)}); }

namespace detail {

inline double wrap_angle(double dy) { return dy - kTwoPi * std::round(dy / kTwoPi); }

inline void check_domain(const AnnulusPoint& p) {
    constexpr double slack = 1e-12;
    if (!(p.x >= -1.0 - slack && p.x <= 1.0 + slack) || !std::isfinite(p.y))
        throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") outside the annulus");
}

struct BumpField {
    const HamiltonianBump& h;

    // (ẋ, ẏ) = 2π (H_y, -H_x), with the derivative of the field in `jac`.
    AnnulusPoint operator()(const AnnulusPoint& p, Mat2* jac = nullptr) const {
        const double dx = p.x - h.center.x;
        const double dy = wrap_angle(p.y - h.center.y);
        const double r2 = h.radius * h.radius;
        const double u = 1.0 - (dx * dx + dy * dy) / r2;
        if (u <= 0.0) {
            if (jac) *jac = {0.0, 0.0, 0.0, 0.0};
            return {0.0, 0.0};
        }
        const double k = -8.0 * h.strength * u * u * u / r2; // H_x = k dx, H_y = k dy
        if (jac) {
            const double kr = 48.0 * h.strength * u * u / (r2 * r2);
            const double kx = kr * dx, ky = kr * dy;
            *jac = {kTwoPi * kx * dy, kTwoPi * (ky * dy + k), -kTwoPi * (kx * dx + k), -kTwoPi * ky * dx};
        }
        return {kTwoPi * k * dy, -kTwoPi * k * dx};
    }
};

/// Flow of the bump by implicit midpoint; if `jac` is given it receives the
/// exact derivative of the discrete flow, a product of Cayley factors
/// (I − dt/2 DF)^{-1}(I + dt/2 DF).
inline AnnulusPoint flow_bump(const HamiltonianBump& h, AnnulusPoint p, double sign, Mat2* jac = nullptr) {
    const BumpField field{h};
    if (jac) *jac = Mat2::identity();
    {
        // H is conserved, so points outside the support never move.
        const double dx = p.x - h.center.x, dy = wrap_angle(p.y - h.center.y);
        if (dx * dx + dy * dy >= h.radius * h.radius) return p;
    }
    const double dt = sign * h.time / h.steps;
    for (int s = 0; s < h.steps; ++s) {
        // Implicit midpoint z = p + dt F((p + z)/2), solved by Newton.
        AnnulusPoint z = p;
        bool converged = false;
        for (int it = 0; it < 50; ++it) {
            Mat2 df;
            const AnnulusPoint v = field({0.5 * (p.x + z.x), 0.5 * (p.y + z.y)}, &df);
            const double gx = z.x - p.x - dt * v.x, gy = z.y - p.y - dt * v.y;
            const Mat2 dg{1.0 - 0.5 * dt * df.a, -0.5 * dt * df.b, -0.5 * dt * df.c, 1.0 - 0.5 * dt * df.d};
            const double det = dg.det();
            if (!(std::abs(det) > 1e-300)) break;
            const double sx = (dg.d * gx - dg.b * gy) / det, sy = (-dg.c * gx + dg.a * gy) / det;
            z.x -= sx;
            z.y -= sy;
            if (std::abs(sx) + std::abs(sy) <= 1e-15 * (1.0 + std::abs(z.y))) {
                converged = true;
                break;
            }
        }
        if (!converged || !std::isfinite(z.x) || !std::isfinite(z.y))
            throw IntegratorDivergence("implicit midpoint step failed to converge; increase `steps`");
        if (jac) {
            Mat2 df;
            field({0.5 * (p.x + z.x), 0.5 * (p.y + z.y)}, &df);
            const double e = 0.5 * dt;
            const Mat2 minus{1.0 - e * df.a, -e * df.b, -e * df.c, 1.0 - e * df.d};
            const Mat2 plus{1.0 + e * df.a, e * df.b, e * df.c, 1.0 + e * df.d};
            const double det = minus.det();
            const Mat2 minus_inv{minus.d / det, -minus.b / det, -minus.c / det, minus.a / det};
            *jac = minus_inv * plus * *jac;
        }
        p = z;
    }
    return p;
}

} // namespace detail

/// ψ̃(p).
inline AnnulusPoint evaluate_lift(const LiftedMap& map, AnnulusPoint p) {
    detail::check_domain(p);
    return std::visit(
        [&](const auto& k) -> AnnulusPoint {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, RigidRotation>) {
                return {p.x, p.y + kTwoPi * k.theta0};
            } else if constexpr (std::is_same_v<T, TwistProfile>) {
                return {p.x, p.y + kTwoPi * k.g.value(p.x)};
            } else if constexpr (std::is_same_v<T, RadialShear>) {
                return {p.x, p.y + kTwoPi * k.b.value(p.x)};
            } else if constexpr (std::is_same_v<T, HamiltonianBump>) {
                return detail::flow_bump(k, p, 1.0);
            } else {
                for (const auto& part : k.parts) p = evaluate_lift(part, p);
                return p;
            }
        },
        map.kind());
}

/// Dψ̃(p): analytic for shears and rotations, chain rule for compositions.
/// Flows use the exact derivative of the discrete integrator when h == 0 and
/// central differences with step h otherwise.
inline Mat2 jacobian(const LiftedMap& map, AnnulusPoint p, double h = 0.0) {
    detail::check_domain(p);
    return std::visit(
        [&](const auto& k) -> Mat2 {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, RigidRotation>) {
                return Mat2::identity();
            } else if constexpr (std::is_same_v<T, TwistProfile>) {
                return {1.0, 0.0, kTwoPi * k.g.derivative(p.x), 1.0};
            } else if constexpr (std::is_same_v<T, RadialShear>) {
                return {1.0, 0.0, kTwoPi * k.b.derivative(p.x), 1.0};
            } else if constexpr (std::is_same_v<T, HamiltonianBump>) {
                if (h == 0.0) {
                    Mat2 j;
                    detail::flow_bump(k, p, 1.0, &j);
                    return j;
                }
                // One-sided near the boundary so the stencil stays in the annulus;
                // the flow is the identity there anyway.
                const double xl = std::max(-1.0, p.x - h), xr = std::min(1.0, p.x + h);
                const AnnulusPoint fxr = detail::flow_bump(k, {xr, p.y}, 1.0);
                const AnnulusPoint fxl = detail::flow_bump(k, {xl, p.y}, 1.0);
                const AnnulusPoint fyr = detail::flow_bump(k, {p.x, p.y + h}, 1.0);
                const AnnulusPoint fyl = detail::flow_bump(k, {p.x, p.y - h}, 1.0);
                const double hx = xr - xl;
                return {(fxr.x - fxl.x) / hx, (fyr.x - fyl.x) / (2 * h), (fxr.y - fxl.y) / hx, (fyr.y - fyl.y) / (2 * h)};
            } else {
                Mat2 j = Mat2::identity();
                for (const auto& part : k.parts) {
                    j = jacobian(part, p, h) * j;
                    p = evaluate_lift(part, p);
                }
                return j;
            }
        },
        map.kind());
}

/// Point and Jacobian together, sharing the intermediate evaluations of compositions.
struct LiftedValue {
    AnnulusPoint point;
    Mat2 jac;
};

inline LiftedValue evaluate_with_jacobian(const LiftedMap& map, AnnulusPoint p, double h = 0.0) {
    if (const auto* c = std::get_if<Composition>(&map.kind())) {
        Mat2 j = Mat2::identity();
        for (const auto& part : c->parts) {
            const LiftedValue v = evaluate_with_jacobian(part, p, h);
            j = v.jac * j;
            p = v.point;
        }
        return {p, j};
    }
    if (const auto* b = std::get_if<HamiltonianBump>(&map.kind()); b && h == 0.0) {
        detail::check_domain(p);
        LiftedValue v;
        v.point = detail::flow_bump(*b, p, 1.0, &v.jac);
        return v;
    }
    return {evaluate_lift(map, p), jacobian(map, p, h)};
}

/// ψ̃^q(p).
inline AnnulusPoint iterate_lift(const LiftedMap& map, int q, AnnulusPoint p) {
    if (q < 1) throw DomainError("iterate_lift: q must be >= 1");
    for (int i = 0; i < q; ++i) p = evaluate_lift(map, p);
    return p;
}

/// ψ̃^{-1}. Exact for every kind; flows are run backwards in time.
inline LiftedMap inverse(const LiftedMap& map) {
    return std::visit(
        [](const auto& k) -> LiftedMap {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, RigidRotation>) {
                return rigid(-k.theta0);
            } else if constexpr (std::is_same_v<T, TwistProfile>) {
                return twist(k.g.scaled(-1.0));
            } else if constexpr (std::is_same_v<T, RadialShear>) {
                return radial_shear(k.b.scaled(-1.0));
            } else if constexpr (std::is_same_v<T, HamiltonianBump>) {
                HamiltonianBump inv = k;
                inv.time = -k.time;
                return LiftedMap(inv);
            } else {
                std::vector<LiftedMap> parts;
                for (auto it = k.parts.rbegin(); it != k.parts.rend(); ++it) parts.push_back(inverse(*it));
                return compose(std::move(parts));
            }
        },
        map.kind());
}

/// q-fold composition as a map in its own right.
inline LiftedMap power(const LiftedMap& map, int q) {
    if (q < 1) throw DomainError("power: q must be >= 1");
    return compose(std::vector<LiftedMap>(static_cast<std::size_t>(q), map));
}

inline LiftedMap::LiftedMap(Kind kind) : kind_(std::make_shared<const Kind>(std::move(kind))) {
    std::visit(
        [this](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, RigidRotation>) {
                y_plus_ = y_minus_ = k.theta0;
                delta_plus_ = delta_minus_ = 1.0;
                admissible_ = true;
            } else if constexpr (std::is_same_v<T, TwistProfile>) {
                y_plus_ = k.g.value(1.0);
                y_minus_ = k.g.value(-1.0);
                admissible_ = false;
                if (const auto* s = std::get_if<SmoothstepProfile>(&k.g.rep())) breaks_ = s->knots;
            } else if constexpr (std::is_same_v<T, RadialShear>) {
                y_plus_ = k.b.value(1.0);
                y_minus_ = k.b.value(-1.0);
                delta_plus_ = std::min(1.0, k.b.flat_collar_plus());
                delta_minus_ = std::min(1.0, k.b.flat_collar_minus());
                admissible_ = delta_plus_ > 0.0 && delta_minus_ > 0.0;
                if (const auto* s = std::get_if<SmoothstepProfile>(&k.b.rep())) breaks_ = s->knots;
            } else if constexpr (std::is_same_v<T, HamiltonianBump>) {
                if (!(k.radius > 0.0) || k.radius >= std::numbers::pi)
                    throw DomainError("hamiltonian_bump radius must lie in (0, π)");
                if (k.center.x - k.radius <= -1.0 || k.center.x + k.radius >= 1.0)
                    throw DomainError("hamiltonian_bump disk must lie in the interior of the annulus");
                if (k.steps < 1) throw DomainError("hamiltonian_bump steps must be >= 1");
                delta_plus_ = 1.0 - (k.center.x + k.radius);
                delta_minus_ = (k.center.x - k.radius) + 1.0;
                admissible_ = true;
                breaks_ = {k.center.x - k.radius, k.center.x, k.center.x + k.radius};
            } else {
                delta_plus_ = delta_minus_ = 1.0;
                admissible_ = true;
                for (const auto& part : k.parts) {
                    y_plus_ += part.y_plus();
                    y_minus_ += part.y_minus();
                    delta_plus_ = std::min(delta_plus_, part.delta_plus());
                    delta_minus_ = std::min(delta_minus_, part.delta_minus());
                    admissible_ = admissible_ && part.admissible();
                    breaks_.insert(breaks_.end(), part.x_breakpoints().begin(), part.x_breakpoints().end());
                }
                std::sort(breaks_.begin(), breaks_.end());
                breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
                if (!admissible_) delta_plus_ = delta_minus_ = 0.0;
            }
        },
        *kind_);
}

inline std::string LiftedMap::kind_name() const {
    static constexpr const char* names[] = {"rigid", "twist", "radial_shear", "hamiltonian_bump", "compose"};
    return names[kind_->index()];
}

struct AdmissibilityReport {
    double area_defect_max = 0.0;
    bool boundary_rotation_verified = false;
    double measured_collar_plus = 0.0;
    double measured_collar_minus = 0.0;
};

/// Samples det J and the boundary rotations on a grid_n x grid_n grid.
/// Measured collars are the distance from each boundary circle to the
/// innermost sampled circle before the first failure of the rotation test.
inline AdmissibilityReport check_admissibility(const LiftedMap& map, int grid_n, double tol) {
    if (grid_n < 2) throw DomainError("check_admissibility: grid_n must be >= 2");
    AdmissibilityReport rep;
    std::vector<double> ys(grid_n);
    for (int j = 0; j < grid_n; ++j) ys[j] = kTwoPi * j / grid_n;

    for (int i = 0; i < grid_n; ++i) {
        const double x = -1.0 + 2.0 * i / (grid_n - 1);
        for (double y : ys) rep.area_defect_max = std::max(rep.area_defect_max, std::abs(jacobian(map, {x, y}).det() - 1.0));
    }

    auto circle_rotates = [&](double x, double rot) {
        for (double y : ys) {
            const AnnulusPoint q = evaluate_lift(map, {x, y});
            if (std::abs(q.x - x) > tol || std::abs(q.y - y - kTwoPi * rot) > tol) return false;
        }
        return true;
    };

    // Distances from the boundary, including the declared collar edges.
    auto measure = [&](double sign, double rot, double declared) {
        std::vector<double> dist;
        for (int i = 0; i < grid_n; ++i) dist.push_back(2.0 * i / (grid_n - 1));
        if (declared > 0.0) dist.push_back(declared);
        std::sort(dist.begin(), dist.end());
        double reached = -1.0;
        for (double d : dist) {
            if (!circle_rotates(sign * (1.0 - d), rot)) break;
            reached = d;
        }
        return reached;
    };

    if (!map.admissible()) {
        rep.boundary_rotation_verified = circle_rotates(1.0, map.y_plus()) && circle_rotates(-1.0, map.y_minus());
        return rep;
    }
    const double mp = measure(1.0, map.y_plus(), map.delta_plus());
    const double mm = measure(-1.0, map.y_minus(), map.delta_minus());
    rep.measured_collar_plus = std::clamp(mp, 0.0, 1.0);
    rep.measured_collar_minus = std::clamp(mm, 0.0, 1.0);
    rep.boundary_rotation_verified = mp >= map.delta_plus() && mm >= map.delta_minus();
    return rep;
}

} // namespace meanaction
