#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace meanaction {

/// Quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3 clamped to [0, 1], with
/// derivative and antiderivative I(u) = ∫_0^u S.
namespace smoothstep {

inline double value(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

inline double derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double s = t * (1.0 - t);
    return 30.0 * s * s;
}

inline double integral(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 0.5 + (u - 1.0);
    const double u3 = u * u * u;
    return u3 * u * (u * (u - 3.0) + 2.5);
}

} // namespace smoothstep

/// g(x) = Σ c_k x^k.
struct PolynomialProfile {
    std::vector<double> coeffs;
};

/// Constant plateaus joined by quintic smoothsteps; transition i runs from
/// plateaus[i] to plateaus[i+1] over [knots[2i], knots[2i+1]].
struct SmoothstepProfile {
    std::vector<double> plateaus;
    std::vector<double> knots;
};

struct ConstantProfile {
    double c = 0.0;
};

/// A real function on [-1, 1] with exact derivative and integral.
class Profile {
public:
    using Rep = std::variant<PolynomialProfile, SmoothstepProfile, ConstantProfile>;

    Profile() : rep_(ConstantProfile{0.0}) {}
    Profile(Rep rep) : rep_(std::move(rep)) { validate(); } // NOLINT(google-explicit-constructor)

    static Profile constant(double c) { return Profile(ConstantProfile{c}); }
    static Profile polynomial(std::vector<double> coeffs) { return Profile(PolynomialProfile{std::move(coeffs)}); }
    static Profile smoothstep(std::vector<double> plateaus, std::vector<double> knots) {
        return Profile(SmoothstepProfile{std::move(plateaus), std::move(knots)});
    }

    const Rep& rep() const { return rep_; }

    double value(double x) const {
        return std::visit(
            [x](const auto& r) -> double {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantProfile>) {
                    return r.c;
                } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
                    double acc = 0.0;
                    for (auto it = r.coeffs.rbegin(); it != r.coeffs.rend(); ++it) acc = acc * x + *it;
                    return acc;
                } else {
                    double v = r.plateaus.front();
                    for (std::size_t i = 0; i + 1 < r.plateaus.size(); ++i) {
                        const double k0 = r.knots[2 * i], k1 = r.knots[2 * i + 1];
                        v += (r.plateaus[i + 1] - r.plateaus[i]) * smoothstep::value((x - k0) / (k1 - k0));
                    }
                    return v;
                }
            },
            rep_);
    }

    double derivative(double x) const {
        return std::visit(
            [x](const auto& r) -> double {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantProfile>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
                    double acc = 0.0;
                    for (std::size_t k = r.coeffs.size(); k-- > 1;) acc = acc * x + static_cast<double>(k) * r.coeffs[k];
                    return acc;
                } else {
                    double d = 0.0;
                    for (std::size_t i = 0; i + 1 < r.plateaus.size(); ++i) {
                        const double k0 = r.knots[2 * i], k1 = r.knots[2 * i + 1];
                        d += (r.plateaus[i + 1] - r.plateaus[i]) * smoothstep::derivative((x - k0) / (k1 - k0)) /
                             (k1 - k0);
                    }
                    return d;
                }
            },
            rep_);
    }

    /// Exact ∫_a^b g.
    double integral(double a, double b) const { return antiderivative(b) - antiderivative(a); }

    /// Exact ∫_{-1}^1 x g(x) dx.
    double first_moment() const {
        return std::visit(
            [this](const auto& r) -> double {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantProfile>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
                    double m = 0.0;
                    for (std::size_t k = 0; k < r.coeffs.size(); ++k)
                        if ((k + 1) % 2 == 0) m += r.coeffs[k] * 2.0 / static_cast<double>(k + 2);
                    return m;
                } else {
                    // ∫ x g = [x G] - ∫ G, with ∫ G by integrating the pieces twice.
                    return antiderivative(1.0) - second_antiderivative(1.0);
                }
            },
            rep_);
    }

    /// Largest d with g constant on [1-d, 1] (capped at 2).
    double flat_collar_plus() const {
        if (const auto* s = std::get_if<SmoothstepProfile>(&rep_)) return s->knots.empty() ? 2.0 : 1.0 - s->knots.back();
        return is_constant() ? 2.0 : 0.0;
    }

    /// Largest d with g constant on [-1, -1+d] (capped at 2).
    double flat_collar_minus() const {
        if (const auto* s = std::get_if<SmoothstepProfile>(&rep_)) return s->knots.empty() ? 2.0 : s->knots.front() + 1.0;
        return is_constant() ? 2.0 : 0.0;
    }

    Profile scaled(double s) const {
        return std::visit(
            [s](auto r) -> Profile {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantProfile>) {
                    r.c *= s;
                } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
                    for (auto& c : r.coeffs) c *= s;
                } else {
                    for (auto& v : r.plateaus) v *= s;
                }
                return Profile(std::move(r));
            },
            rep_);
    }

private:
    bool is_constant() const {
        if (std::holds_alternative<ConstantProfile>(rep_)) return true;
        if (const auto* p = std::get_if<PolynomialProfile>(&rep_))
            return std::all_of(p->coeffs.begin() + std::min<std::size_t>(1, p->coeffs.size()), p->coeffs.end(),
                               [](double c) { return c == 0.0; });
        return false;
    }

    // G(x) = ∫_{-1}^x g.
    double antiderivative(double x) const {
        return std::visit(
            [x](const auto& r) -> double {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, ConstantProfile>) {
                    return r.c * (x + 1.0);
                } else if constexpr (std::is_same_v<T, PolynomialProfile>) {
                    double acc = 0.0, acc_m1 = 0.0;
                    for (std::size_t k = r.coeffs.size(); k-- > 0;) {
                        acc = acc * x + r.coeffs[k] / static_cast<double>(k + 1);
                        acc_m1 = acc_m1 * -1.0 + r.coeffs[k] / static_cast<double>(k + 1);
                    }
                    return x * acc + acc_m1;
                } else {
                    double v = r.plateaus.front() * (x + 1.0);
                    for (std::size_t i = 0; i + 1 < r.plateaus.size(); ++i) {
                        const double k0 = r.knots[2 * i], w = r.knots[2 * i + 1] - k0;
                        v += (r.plateaus[i + 1] - r.plateaus[i]) * w * smoothstep::integral((x - k0) / w);
                    }
                    return v;
                }
            },
            rep_);
    }

    // ∫_{-1}^x G, only needed for the smoothstep moment.
    double second_antiderivative(double x) const {
        const auto& r = std::get<SmoothstepProfile>(rep_);
        double v = 0.5 * r.plateaus.front() * (x + 1.0) * (x + 1.0);
        for (std::size_t i = 0; i + 1 < r.plateaus.size(); ++i) {
            const double k0 = r.knots[2 * i], w = r.knots[2 * i + 1] - k0;
            const double u = (x - k0) / w;
            // ∫_0^u I = u^7/7 - u^6/2 + u^5/2 on [0,1]; beyond, I(u) = u - 1/2.
            double j;
            if (u <= 0.0) {
                j = 0.0;
            } else if (u < 1.0) {
                j = std::pow(u, 7) / 7.0 - std::pow(u, 6) / 2.0 + std::pow(u, 5) / 2.0;
            } else {
                j = 1.0 / 7.0 + 0.5 * (u * u - 1.0) - 0.5 * (u - 1.0);
            }
            v += (r.plateaus[i + 1] - r.plateaus[i]) * w * w * j;
        }
        return v;
    }

    void validate() const {
        if (const auto* s = std::get_if<SmoothstepProfile>(&rep_)) {
            if (s->plateaus.empty()) throw DomainError("smoothstep profile needs at least one plateau");
            if (s->knots.size() != 2 * (s->plateaus.size() - 1))
                throw DomainError("smoothstep profile needs 2*(plateaus-1) knots, got " + std::to_string(s->knots.size()));
            for (std::size_t i = 0; i < s->knots.size(); ++i) {
                if (s->knots[i] < -1.0 || s->knots[i] > 1.0) throw DomainError("smoothstep knot outside [-1, 1]");
                if (i > 0 && s->knots[i] < s->knots[i - 1]) throw DomainError("smoothstep knots must be nondecreasing");
                if (i % 2 == 1 && s->knots[i] <= s->knots[i - 1])
                    throw DomainError("smoothstep transition must have positive width");
            }
        }
    }

    Rep rep_;
};

} // namespace meanaction
