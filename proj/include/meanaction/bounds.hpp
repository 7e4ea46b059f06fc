#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "action.hpp"
#include "errors.hpp"
#include "profile.hpp"
#include "rational.hpp"

namespace meanaction {

struct MapInvariants {
    double y_plus = 0.0;
    double y_minus = 0.0;
    double F = 0.0;
    double calabi = 0.0;
    double p_tilde() const { return y_plus - y_minus + F; }
};

inline MapInvariants map_invariants(const ActionContext& ctx) {
    return {ctx.y_plus(), ctx.y_minus(), flux(ctx), calabi(ctx)};
}

inline double harmonic_mean(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw NonPositiveInput("harmonic mean needs positive arguments");
    return 2.0 * a * b / (a + b);
}

struct PenultimateBound {
    int N = 0;
    double hm = 0.0;
    double bound = 0.0;
    double gap = 0.0;       ///< bound − (𝒱 + N)
    double gap_limit = 0.0; ///< N → ∞ limit of gap: ((y₊ − y₋ + F)/2 − 𝒱)/2
};

/// √(hm(y₊+N, −y₋+F+N)·(𝒱+N)).
inline PenultimateBound penultimate_bound(const MapInvariants& inv, int N) {
    const double a = inv.y_plus + N, b = -inv.y_minus + inv.F + N, v = inv.calabi + N;
    if (!(v > 0.0)) throw NonPositiveInput("calabi + N must be positive");
    PenultimateBound r;
    r.N = N;
    r.hm = harmonic_mean(a, b);
    r.bound = std::sqrt(r.hm * v);
    r.gap = r.bound - v;
    // hm(a+N, b+N) = N + (a+b)/2 − O(1/N), so the geometric mean with 𝒱+N
    // sits half way between the shifts.
    r.gap_limit = (0.5 * (inv.y_plus - inv.y_minus + inv.F) - inv.calabi) / 2.0;
    return r;
}

struct RationalFlags {
    std::optional<bool> y_plus_rational;
    std::optional<bool> y_minus_rational;
};

struct Classification {
    std::string label;      ///< "1a", "1b", "2a(i)", "2a(ii)", "2a(iii)", "2a(iv)", "2b"
    double m = 0.0;
    double M = 0.0;
    double hm = 0.0;
    bool y_m_is_plus = true; ///< y_m = y₊ (else y₋); ties pick y₊
    bool y_m_rational = false;
    bool hypothesis_holds = false;
    std::string hypothesis_reason;
    std::string confidence; ///< "asserted" when every flag used was supplied, else "heuristic"
};

/// Case split of the main theorem's proof. Comparisons between 𝒱 and the
/// slopes treat values within `tol` as equal.
inline Classification hypothesis_classifier(const MapInvariants& inv, const RationalFlags& flags = {},
                                            double tol = 1e-9) {
    const double a = inv.y_plus, b = -inv.y_minus + inv.F, V = inv.calabi;
    Classification c;
    c.m = std::min(a, b);
    c.M = std::max(a, b);
    const bool equal = std::abs(a - b) <= tol;
    c.y_m_is_plus = a <= b || equal;
    bool heuristic = false;
    auto rational = [&](const std::optional<bool>& flag, double y) {
        if (flag) return *flag;
        heuristic = true;
        return looks_rational(y);
    };
    const bool plus_rational = rational(flags.y_plus_rational, inv.y_plus);
    const bool minus_rational = rational(flags.y_minus_rational, inv.y_minus);
    c.y_m_rational = c.y_m_is_plus ? plus_rational : minus_rational;

    const bool below_max = V < c.M - tol;
    c.hypothesis_holds = below_max || plus_rational || minus_rational;
    if (below_max)
        c.hypothesis_reason = "calabi < max{y_plus, -y_minus+F}";
    else if (plus_rational || minus_rational)
        c.hypothesis_reason = plus_rational ? "y_plus rational" : "y_minus rational";
    else
        c.hypothesis_reason = "calabi >= max{y_plus, -y_minus+F} with irrational boundary rotations";

    if (c.m > 0.0 && c.M > 0.0) c.hm = harmonic_mean(c.m, c.M);
    const bool below_m = V < c.m - tol;
    if (c.y_m_rational) {
        c.label = below_m ? "1a" : "1b";
    } else if (c.m > 0.0 && V < c.hm - tol) {
        if (equal)
            c.label = "2a(i)";
        else if (below_m)
            c.label = "2a(ii)";
        else
            c.label = c.y_m_is_plus ? "2a(iv)" : "2a(iii)";
    } else {
        c.label = "2b";
    }
    c.confidence = heuristic ? "heuristic" : "asserted";
    return c;
}

struct DiskCollapseStats {
    double f_kappa_origin = 0.0;
    double calabi_kappa = 0.0;
    bool criterion_12fv = false; ///< F/2 ≤ 𝒱
    std::string classification;  ///< "NewForAnnulus" or "MaybeReducible"
    bool swapped = false;        ///< roles exchanged so that y₊ is the larger slope
    MapInvariants used;          ///< invariants after the swap
};

/// Values of the fixed disk collapse. When y₊ < −y₋ + F the conjugate by
/// (x, y) ↦ (−x, −y) is used: (y₊, y₋, F, 𝒱) ↦ (−y₋, −y₊, −F, 𝒱 − F).
inline DiskCollapseStats disk_collapse_stats(const MapInvariants& inv, double tol = 1e-12) {
    DiskCollapseStats s;
    s.used = inv;
    s.swapped = inv.y_plus < -inv.y_minus + inv.F;
    if (s.swapped) s.used = {-inv.y_minus, -inv.y_plus, -inv.F, inv.calabi - inv.F};
    s.f_kappa_origin = s.used.F / 2.0;
    s.calabi_kappa = s.used.calabi / 2.0 + s.used.F / 4.0;
    s.criterion_12fv = s.used.F / 2.0 <= s.used.calabi + tol;
    s.classification = s.criterion_12fv ? "NewForAnnulus" : "MaybeReducible";
    return s;
}

struct AppendixFamilyReport {
    double c = 0.0;
    int n = 0;
    double F = 0.0;
    double calabi = 0.0;
    double lhs = 0.0; ///< ∫ g
    double rhs = 0.0; ///< ∫ (x g + ∫_x^1 g)
    bool criterion = false;
};

/// g(x) = c xⁿ: F = ∫g, 𝒱 = ∫x g + F/2 in closed form.
inline AppendixFamilyReport appendix_family_report(double c, int n) {
    if (!(c > 0.0)) throw DomainError("c must be positive");
    if (n < 0) throw DomainError("n must be nonnegative (negative powers are singular at x = 0)");
    AppendixFamilyReport r;
    r.c = c;
    r.n = n;
    const auto moment = [](int k) { return k % 2 == 0 ? 2.0 / (k + 1) : 0.0; }; // ∫_{-1}^{1} x^k
    r.F = c * moment(n);
    r.calabi = c * moment(n + 1) + r.F / 2.0;
    r.lhs = r.F;
    r.rhs = 2.0 * r.calabi;
    r.criterion = r.lhs <= r.rhs + 1e-15 * (1.0 + std::abs(r.rhs));
    return r;
}

/// Nonincreasing radial-shear profile with value L ≥ 0 near x = −1, zero in
/// the middle and R ≤ 0 near x = 1. A collar of width w is flat on half of
/// it and back to zero by 0.9 w, so the side integrals are 0.7 L w_l and 0.7 R w_r.
struct CollarShear {
    Profile b = Profile::constant(0.0);
    double left_value = 0.0;
    double right_value = 0.0;
    double left_width = 0.0;
    double right_width = 0.0;
    double integral = 0.0;
};

inline CollarShear collar_shear(double left_value, double right_value, double delta_left, double delta_right,
                                std::optional<double> target_integral = std::nullopt) {
    if (left_value < 0.0 || right_value > 0.0) throw DomainError("collar shear must be nonincreasing");
    if (!(delta_left > 0.0) || !(delta_right > 0.0) || delta_left + delta_right > 2.0)
        throw DomainError("collar widths must be positive and fit in [-1, 1]");
    constexpr double k = 0.7;
    double wl = left_value > 0.0 ? delta_left : 0.0;
    double wr = right_value < 0.0 ? delta_right : 0.0;
    if (target_integral) {
        const double B = *target_integral / k;
        auto fits = [](double w, double cap) { return w > 0.0 && w <= cap * (1.0 + 1e-12); };
        if (left_value == 0.0 && right_value == 0.0) {
            if (B != 0.0) throw DomainError("zero profile cannot reach a nonzero integral");
        } else if (left_value == 0.0) {
            wr = B / right_value;
            if (!fits(wr, delta_right)) throw DomainError("target integral not reachable inside the right collar");
        } else if (right_value == 0.0) {
            wl = B / left_value;
            if (!fits(wl, delta_left)) throw DomainError("target integral not reachable inside the left collar");
        } else {
            wl = delta_left;
            wr = (B - left_value * wl) / right_value;
            if (!fits(wr, delta_right)) {
                wr = delta_right;
                wl = (B - right_value * wr) / left_value;
                if (!fits(wl, delta_left)) throw DomainError("target integral not reachable inside the collars");
            }
        }
        wl = std::min(wl, delta_left);
        wr = std::min(wr, delta_right);
    }
    CollarShear s;
    s.left_value = left_value;
    s.right_value = right_value;
    s.left_width = wl;
    s.right_width = wr;
    std::vector<double> plateaus, knots;
    if (wl > 0.0) {
        plateaus.push_back(left_value);
        knots.insert(knots.end(), {-1.0 + 0.5 * wl, -1.0 + 0.9 * wl});
    }
    plateaus.push_back(0.0);
    if (wr > 0.0) {
        plateaus.push_back(right_value);
        knots.insert(knots.end(), {1.0 - 0.9 * wr, 1.0 - 0.5 * wr});
    }
    s.b = knots.empty() ? Profile::constant(0.0) : Profile::smoothstep(plateaus, knots);
    s.integral = s.b.integral(-1.0, 1.0);
    return s;
}

/// Offset B in the open interval (lo, hi), closest to zero, for which F + B
/// is a fraction with denominator 10³…10⁶.
inline double rational_flux_offset(double F, double lo, double hi) {
    for (double den = 1e3; den <= 1e6; den *= 10) {
        double best = std::numeric_limits<double>::infinity();
        const double k0 = std::ceil((F + lo) * den), k1 = std::floor((F + hi) * den);
        for (double k : {k0, k0 + 1, std::round(F * den), k1 - 1, k1}) {
            const double B = k / den - F;
            if (B > lo && B < hi && std::abs(B) < std::abs(best)) best = B;
        }
        if (std::isfinite(best)) return best;
    }
    throw DomainError("no rational flux reachable inside the collars");
}

struct CasePerturbation {
    std::string label;
    CollarShear shear;
    double epsilon = 0.0;
    double D = 0.0;
    double delta = 0.0;       ///< right collar
    double delta_prime = 0.0; ///< left collar
};

/// Shear profiles used to move a map into a case the penultimate bound
/// covers. `delta` and `delta_prime` are the right and left collars where
/// the map is a rotation.
inline CasePerturbation case_perturbation(const MapInvariants& inv, const std::string& label, double epsilon,
                                          double delta, double delta_prime) {
    const double a = inv.y_plus, b = -inv.y_minus + inv.F, V = inv.calabi;
    const double m = std::min(a, b), M = std::max(a, b);
    const bool plus_is_max = a >= b;
    CasePerturbation p;
    p.label = label;
    p.epsilon = epsilon;
    p.delta = delta;
    p.delta_prime = delta_prime;
    // reachable integrals 0.7 (L w_l + R w_r) with w_l ≤ δ′, w_r ≤ δ
    auto rational_target = [&](double L, double R) {
        return rational_flux_offset(inv.F, 0.7 * R * delta * 0.99, 0.7 * L * delta_prime * 0.99);
    };
    if (label == "1a") {
        p.D = std::floor(M - m);
        if (plus_is_max)
            p.shear = collar_shear(epsilon, -p.D - epsilon, delta_prime, delta, 0.0);
        else
            p.shear = collar_shear(p.D + epsilon, -epsilon, delta_prime, delta, 0.0);
    } else if (label == "2a(i)") {
        const double h = M - V - epsilon;
        if (!(h > 0.0)) throw DomainError("case 2a(i) needs calabi + epsilon < M");
        p.shear = collar_shear(h, -h, delta_prime, delta, rational_target(h, -h));
    } else if (label == "2a(ii)") {
        if (plus_is_max)
            p.shear = collar_shear(0.0, m - M, delta_prime, delta, rational_target(0.0, m - M));
        else
            p.shear = collar_shear(M - m, 0.0, delta_prime, delta, rational_target(M - m, 0.0));
    } else if (label == "2a(iii)") {
        const double R = -inv.y_plus + V + epsilon;
        p.shear = collar_shear(0.0, R, delta_prime, delta, rational_target(0.0, R));
    } else if (label == "2a(iv)") {
        const double L = -inv.y_minus + inv.F - V - epsilon;
        p.shear = collar_shear(L, 0.0, delta_prime, delta, rational_target(L, 0.0));
    } else if (label == "2b") {
        if (plus_is_max)
            p.shear = collar_shear(0.0, -epsilon, delta_prime, delta, rational_target(0.0, -epsilon));
        else
            p.shear = collar_shear(epsilon, 0.0, delta_prime, delta, rational_target(epsilon, 0.0));
    } else {
        throw DomainError("no perturbation for case " + label);
    }
    return p;
}

/// Action shift on the middle region where b vanishes: ∫_{1−δ}^1 b.
inline double middle_region_shift(const Profile& b, double delta) { return b.integral(1.0 - delta, 1.0); }

/// Calabi shift of τ_b ∘ ψ when ψ is a rotation wherever b ≠ 0: the action
/// changes by x b(x) + ∫_x^1 b, whose ω-average is ∫ x b + ½ ∫ b.
inline double exact_calabi_shift(const Profile& b) { return b.first_moment() + 0.5 * b.integral(-1.0, 1.0); }

/// Case (1a) shift of 𝒱, summed region by region: the two collars
/// contribute ∫ x b and ∫∫_x^1 b, the middle (2 − δ − δ′) ∫_{1−δ}^1 b.
/// Needs b = 0 on [−1 + δ′, 1 − δ]; agrees with exact_calabi_shift.
inline double collar_calabi_shift(const Profile& b, double delta, double delta_prime) {
    const auto tail = [&b](double x) { return b.integral(x, 1.0); };
    const auto xb = [&b](double x) { return x * b.value(x); };
    const double left = quad::adaptive_gauss(tail, -1.0, -1.0 + delta_prime, 1e-13, 16).value;
    const double right = quad::adaptive_gauss(tail, 1.0 - delta, 1.0, 1e-13, 16).value;
    const double moment = quad::adaptive_gauss(xb, -1.0, -1.0 + delta_prime, 1e-13, 16).value +
                          quad::adaptive_gauss(xb, 1.0 - delta, 1.0, 1e-13, 16).value;
    return 0.5 * (moment + left + right + (2.0 - delta - delta_prime) * b.integral(1.0 - delta, 1.0));
}

/// Upper bound used in case 2a(i): δ(M − 𝒱 − ε). Not the shift itself.
inline double calabi_shift_bound_2ai(double M, double calabi, double epsilon, double delta) {
    return delta * (M - calabi - epsilon);
}

} // namespace meanaction
