#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

namespace meanaction {

struct RationalApprox {
    std::int64_t p = 0;
    std::int64_t q = 1;
    double defect = 0.0; ///< |q x − p|
};

/// Looks for p/q with q ≤ max_den and |q x − p| ≤ tol among the continued
/// fraction convergents of x, which minimise |q x − p| for their size.
inline std::optional<RationalApprox> detect_rational(double x, std::int64_t max_den = 1'000'000, double tol = 1e-9) {
    if (!std::isfinite(x)) return std::nullopt;
    // Convergent recurrences h_n = a_n h_{n-1} + h_{n-2}, k_n likewise.
    long double h_prev = 1, h = std::floor(static_cast<long double>(x));
    long double k_prev = 0, k = 1;
    long double rest = static_cast<long double>(x) - h;
    for (int iter = 0; iter < 64 && k <= max_den; ++iter) {
        const double defect = static_cast<double>(std::fabs(k * static_cast<long double>(x) - h));
        if (defect <= tol) return RationalApprox{static_cast<std::int64_t>(h), static_cast<std::int64_t>(k), defect};
        if (rest == 0) break;
        const long double inv = 1 / rest;
        const long double a = std::floor(inv);
        rest = inv - a;
        const long double h_next = a * h + h_prev, k_next = a * k + k_prev;
        h_prev = h;
        k_prev = k;
        h = h_next;
        k = k_next;
    }
    return std::nullopt;
}

inline bool looks_rational(double x, std::int64_t max_den = 1'000'000, double tol = 1e-9) {
    return detect_rational(x, max_den, tol).has_value();
}

/// Distance from x to the nearest integer.
inline double dist_to_integer(double x) { return std::abs(x - std::round(x)); }

} // namespace meanaction
