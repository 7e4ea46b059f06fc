#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"

namespace meanaction::ech {

inline constexpr double kDefaultGuardEps = 1e-9;

/// Slopes a = y₊, b = −y₋ + F with integer p = a + b. `Real` selects the
/// working precision (double, or long double for large index ranges).
template <class Real = double>
struct SlopeData {
    Real a = 1;
    Real b = 1;
    std::int64_t p = 2;
    Real guard_eps = static_cast<Real>(kDefaultGuardEps);
};

template <class Real = double>
SlopeData<Real> make_slopes(Real a, Real b, std::int64_t p, Real guard_eps = static_cast<Real>(kDefaultGuardEps)) {
    if (!(a > 0) || !(b > 0)) throw DomainError("slopes a and b must be positive");
    if (p < 1) throw DomainError("p must be a positive integer");
    if (std::abs(a + b - static_cast<Real>(p)) > static_cast<Real>(1e-12))
        throw DomainError("a + b must equal p within 1e-12");
    if (!(guard_eps > 0)) throw DomainError("guard_eps must be positive");
    return {a, b, p, guard_eps};
}

struct Generator {
    std::int64_t m_plus = 0;
    std::int64_t m_minus = 0;
    std::int64_t d = 0; ///< (m₊ − m₋)/p
    friend bool operator==(const Generator&, const Generator&) = default;
};

/// Generator from exponents; m₊ − m₋ must be divisible by p.
inline Generator make_generator(std::int64_t m_plus, std::int64_t m_minus, std::int64_t p) {
    if (m_plus < 0 || m_minus < 0) throw DomainError("generator exponents must be nonnegative");
    if ((m_plus - m_minus) % p != 0) throw DomainError("m_plus - m_minus must be divisible by p");
    return {m_plus, m_minus, (m_plus - m_minus) / p};
}

/// Generator for the lattice point V = (d, m₊) of the northwest quadrant.
inline Generator from_lattice(std::int64_t d, std::int64_t m_plus, std::int64_t p) {
    return make_generator(m_plus, m_plus - p * d, p);
}

inline std::string describe(const Generator& g) {
    if (g.m_plus == 0 && g.m_minus == 0) return "empty";
    std::ostringstream os;
    if (g.m_plus > 0) os << "e+^" << g.m_plus;
    if (g.m_plus > 0 && g.m_minus > 0) os << " ";
    if (g.m_minus > 0) os << "e-^" << g.m_minus;
    return os.str();
}

namespace detail {

/// ⌊x⌋, refusing values within eps of an integer.
template <class Real>
std::int64_t guarded_floor(Real x, Real eps, const char* what) {
    const Real r = std::round(x);
    if (std::abs(x - r) <= eps) {
        std::ostringstream os;
        os.precision(17);
        os << what << " = " << static_cast<long double>(x) << " is within guard_eps of an integer";
        throw FloorGuardTripped(os.str());
    }
    return static_cast<std::int64_t>(std::floor(x));
}

/// Σ_{i=1}^{m} (2⌊i/s⌋ + 1).
template <class Real>
std::int64_t cz_sum(std::int64_t m, Real s, Real eps) {
    std::int64_t total = 0;
    for (std::int64_t i = 1; i <= m; ++i) total += 2 * guarded_floor(static_cast<Real>(i) / s, eps, "i/slope") + 1;
    return total;
}

template <class Real>
Real sweep_key(const SlopeData<Real>& s, std::int64_t d, std::int64_t m) {
    return static_cast<Real>(m) - s.a * static_cast<Real>(d);
}

} // namespace detail

/// 2⌊kθ⌋ + 1 for the k-fold cover of an elliptic orbit with rotation θ.
template <class Real = double>
std::int64_t cz_elliptic(Real theta, std::int64_t k, Real guard_eps = static_cast<Real>(kDefaultGuardEps)) {
    if (k < 1) throw DomainError("cover multiplicity k must be positive");
    return 2 * detail::guarded_floor(static_cast<Real>(k) * theta, guard_eps, "k*theta") + 1;
}

template <class Real>
std::int64_t ech_index(const SlopeData<Real>& s, const Generator& g) {
    return -s.p * g.d * g.d + detail::cz_sum(g.m_plus, s.a, s.guard_eps) + detail::cz_sum(g.m_minus, s.b, s.guard_eps);
}

/// Brute-force count over the bounding box of the triangle cut from the
/// northwest quadrant by the line of slope a through V = (d, m₊).
template <class Real>
std::int64_t ech_index_oracle(const SlopeData<Real>& s, const Generator& g) {
    const Real key = detail::sweep_key(s, g.d, g.m_plus);
    // vertices: origin, (d − m₊/a, 0) on the horizontal axis, key/b · (1, p) on the skew axis
    const Real d_lo = static_cast<Real>(g.d) - static_cast<Real>(g.m_plus) / s.a;
    const Real d_hi = key / s.b;
    const auto x0 = static_cast<std::int64_t>(std::floor(std::min<Real>(d_lo, 0))) - 1;
    const auto x1 = static_cast<std::int64_t>(std::ceil(std::max<Real>(d_hi, 0))) + 1;
    const auto y1 = static_cast<std::int64_t>(std::ceil(std::max<Real>(static_cast<Real>(s.p) * d_hi, 0))) + 1;
    std::int64_t count = 0;
    for (std::int64_t x = x0; x <= x1; ++x)
        for (std::int64_t y = 0; y <= y1; ++y) {
            if (y < s.p * x) continue;
            if (x == g.d && y == g.m_plus) {
                ++count;
                continue;
            }
            const Real gap = key - detail::sweep_key(s, x, y);
            if (std::abs(gap) <= s.guard_eps)
                throw FloorGuardTripped("lattice point on the slanted edge besides V; slope looks rational");
            if (gap > 0) ++count;
        }
    return 2 * count - 2;
}

/// The first max_index/2 + 1 generators in sweep order, each checked to have
/// ECH index twice its rank.
template <class Real>
std::vector<Generator> generators_by_index(const SlopeData<Real>& s, std::int64_t max_index) {
    if (max_index < 0 || max_index % 2 != 0) throw DomainError("max_index must be even and nonnegative");
    const std::size_t want = static_cast<std::size_t>(max_index / 2 + 1);

    struct Item {
        Real key;
        std::int64_t d, m;
    };
    std::vector<Item> items;
    // Points with key ≤ T: d in [−T/a, T/b], m in [max(0, p d), T + a d].
    for (Real T = 1;; T *= 2) {
        items.clear();
        const auto dmin = static_cast<std::int64_t>(std::ceil(-T / s.a));
        const auto dmax = static_cast<std::int64_t>(std::floor(T / s.b));
        for (std::int64_t d = dmin; d <= dmax; ++d) {
            const auto mmax = static_cast<std::int64_t>(std::floor(T + s.a * static_cast<Real>(d)));
            for (std::int64_t m = std::max<std::int64_t>(0, s.p * d); m <= mmax; ++m)
                items.push_back({detail::sweep_key(s, d, m), d, m});
        }
        if (items.size() >= want) break;
    }
    std::sort(items.begin(), items.end(), [](const Item& l, const Item& r) { return l.key < r.key; });
    // Neighbours in the cut must be separated; a tie means a rational slope.
    for (std::size_t n = 1; n < std::min(items.size(), want + 1); ++n)
        if (items[n].key - items[n - 1].key <= s.guard_eps)
            throw FloorGuardTripped("two lattice points share a sweep key within guard_eps");

    std::vector<Generator> out(want);
    for (std::size_t n = 0; n < want; ++n) out[n] = from_lattice(items[n].d, items[n].m, s.p);
    std::vector<std::int64_t> index(want);
    parallel_for(want, [&](std::size_t n) { index[n] = ech_index(s, out[n]); });
    for (std::size_t n = 0; n < want; ++n)
        if (index[n] != static_cast<std::int64_t>(2 * n)) {
            std::ostringstream os;
            os << "sweep rank " << n << " (" << describe(out[n]) << ") has ECH index " << index[n];
            throw OrderingMismatch(os.str());
        }
    return out;
}

template <class Real>
Real width(const SlopeData<Real>& s, const Generator& g) {
    return static_cast<Real>(g.m_plus) / s.a + static_cast<Real>(g.m_minus) / s.b;
}

template <class Real>
struct KnotFiltrations {
    Real f_plus = 0;
    Real f_minus = 0;
    Real sum = 0;
};

template <class Real>
KnotFiltrations<Real> knot_filtrations(const SlopeData<Real>& s, const Generator& g) {
    const Real p = static_cast<Real>(s.p), mp = static_cast<Real>(g.m_plus), mm = static_cast<Real>(g.m_minus);
    KnotFiltrations<Real> k;
    k.f_plus = mp * (1 / s.a - 1 / p) + mm / p;
    k.f_minus = mp / p + mm * (1 / s.b - 1 / p);
    k.sum = width(s, g);
    return k;
}

/// Entry of the sorted multiset {i α + j β}, with its coefficients.
template <class Real>
struct NEntry {
    Real value = 0;
    std::int64_t i = 0;
    std::int64_t j = 0;
};

namespace detail {

/// Heap merge over rows i α + j β; every pair (i, j) is pushed once: (i, j+1)
/// always, (i+1, 0) only from the head of row i. Stops after `count` entries
/// or once the next value exceeds `limit`.
template <class Real>
std::vector<NEntry<Real>> merge_rows(Real alpha, Real beta, std::size_t count, Real limit) {
    if (!(alpha > 0) || !(beta > 0)) throw DomainError("alpha and beta must be positive");
    auto later = [](const NEntry<Real>& l, const NEntry<Real>& r) {
        return std::tie(l.value, l.i) > std::tie(r.value, r.i);
    };
    std::priority_queue<NEntry<Real>, std::vector<NEntry<Real>>, decltype(later)> heap(later);
    heap.push({0, 0, 0});
    std::vector<NEntry<Real>> out;
    while (out.size() < count && heap.top().value <= limit) {
        const NEntry<Real> e = heap.top();
        heap.pop();
        out.push_back(e);
        heap.push({static_cast<Real>(e.i) * alpha + static_cast<Real>(e.j + 1) * beta, e.i, e.j + 1});
        if (e.j == 0) heap.push({static_cast<Real>(e.i + 1) * alpha, e.i + 1, 0});
    }
    return out;
}

} // namespace detail

template <class Real>
std::vector<NEntry<Real>> n_sequence_entries(Real alpha, Real beta, std::size_t count) {
    if (count < 1) throw DomainError("count must be at least 1");
    return detail::merge_rows(alpha, beta, count, std::numeric_limits<Real>::infinity());
}

/// First `count` values N₀ = 0 ≤ N₁ ≤ … of the nonnegative combinations of α and β.
template <class Real>
std::vector<Real> n_sequence(Real alpha, Real beta, std::size_t count) {
    std::vector<Real> v;
    for (const auto& e : n_sequence_entries(alpha, beta, count)) v.push_back(e.value);
    return v;
}

/// w(0..k_max): rank of the width of generator k in n_sequence(1/a, 1/b).
template <class Real>
std::vector<std::int64_t> w_sequence(const SlopeData<Real>& s, std::int64_t k_max) {
    if (k_max < 0) throw DomainError("k must be nonnegative");
    const auto gens = generators_by_index(s, 2 * k_max);
    std::vector<Real> widths(gens.size());
    for (std::size_t k = 0; k < gens.size(); ++k) widths[k] = width(s, gens[k]);
    const Real top = *std::max_element(widths.begin(), widths.end()) + s.guard_eps;
    const auto seq =
        detail::merge_rows(1 / s.a, 1 / s.b, std::numeric_limits<std::size_t>::max(), top);
    std::vector<std::int64_t> w(gens.size());
    for (std::size_t k = 0; k < gens.size(); ++k) {
        const Real target = widths[k];
        auto it = std::lower_bound(seq.begin(), seq.end(), target - s.guard_eps,
                                   [](const NEntry<Real>& e, Real v) { return e.value < v; });
        const bool hit = it != seq.end() && std::abs(it->value - target) <= s.guard_eps;
        const bool unique = hit && (std::next(it) == seq.end() || std::next(it)->value - target > s.guard_eps);
        if (!hit || !unique) {
            std::ostringstream os;
            os.precision(17);
            os << "width " << static_cast<long double>(target) << " of generator " << k
               << (hit ? " matches several N values" : " not found in the N sequence");
            throw RankNotFound(os.str());
        }
        w[k] = static_cast<std::int64_t>(it - seq.begin());
    }
    return w;
}

template <class Real>
std::int64_t w_of_k(const SlopeData<Real>& s, std::int64_t k) {
    return w_sequence(s, k).back();
}

template <class Real>
struct NkRow {
    std::int64_t k = 0;
    std::int64_t w = 0;
    Real N = 0;           ///< N_{w(k)}(1/a, 1/b)
    Real lhs = 0;         ///< 2k(a+b)/(ab)
    Real quadratic = 0;   ///< N² + c₀ N
    Real nk_rhs = 0;      ///< 2k(a+b)/(ab) − c₁ √k + c₂
    bool quadratic_ok = false;
    bool nk_ok = false;
};

template <class Real>
struct NkReport {
    Real c0 = 0;
    Real c1 = 0;
    Real c2 = 0;
    Real c0_empirical = 0; ///< sup over k ≥ 1 of (2k(a+b)/(ab) − N²)/N
    bool all_pass = true;
    std::vector<NkRow<Real>> rows;
};

/// Constants of the lower bound N_{w(k)}² ≥ 2k(a+b)/(ab) − c₁√k + c₂.
/// With N = m₊/a + m₋/b, (a+b)/(ab)·(m₊(1+1/a) + m₋(1+1/b)) ≤ c₀ N for
/// c₀ = (a+b)(max(a,b)+1)/(ab). Completing the square and using
/// √(X + c₀²/4) ≤ √X + c₀/2 gives N² ≥ X − c₀√X, so c₁ = c₀√(2(a+b)/(ab)), c₂ = 0.
template <class Real>
std::tuple<Real, Real, Real> nk_constants(const SlopeData<Real>& s) {
    const Real ab = s.a * s.b, apb = s.a + s.b;
    const Real c0 = apb * (std::max(s.a, s.b) + 1) / ab;
    return {c0, c0 * std::sqrt(2 * apb / ab), Real(0)};
}

template <class Real>
NkReport<Real> nk_lower_bound_check(const SlopeData<Real>& s, std::int64_t k_max, bool throw_on_violation = true) {
    const auto w = w_sequence(s, k_max);
    const auto gens = generators_by_index(s, 2 * k_max);
    NkReport<Real> r;
    std::tie(r.c0, r.c1, r.c2) = nk_constants(s);
    const Real scale = 2 * (s.a + s.b) / (s.a * s.b);
    for (std::int64_t k = 0; k <= k_max; ++k) {
        NkRow<Real> row;
        row.k = k;
        row.w = w[k];
        row.N = width(s, gens[k]);
        row.lhs = scale * static_cast<Real>(k);
        row.quadratic = row.N * row.N + r.c0 * row.N;
        row.nk_rhs = row.lhs - r.c1 * std::sqrt(static_cast<Real>(k)) + r.c2;
        const Real slack = static_cast<Real>(1e-12) * (1 + row.lhs);
        row.quadratic_ok = row.lhs <= row.quadratic + slack;
        row.nk_ok = row.N * row.N + slack >= row.nk_rhs;
        if (k > 0) r.c0_empirical = std::max(r.c0_empirical, (row.lhs - row.N * row.N) / row.N);
        r.all_pass = r.all_pass && row.quadratic_ok && row.nk_ok;
        if (throw_on_violation && !(row.quadratic_ok && row.nk_ok)) {
            std::ostringstream os;
            os << "lower bound fails at k = " << k;
            throw BoundViolated(os.str());
        }
        r.rows.push_back(row);
    }
    return r;
}

/// Relative first Chern class and self-intersection terms entering the index
/// formula, for the trivialization used there.
struct RelativeInvariants {
    std::int64_t c_A0 = 0;
    std::int64_t Q_A0 = 0;
    std::int64_t c_dS = 0;
    std::int64_t Q_dS = 0;
};

inline RelativeInvariants relative_invariant_constants(std::int64_t p, std::int64_t d) {
    if (p < 1) throw DomainError("p must be a positive integer");
    return {0, 0, 0, -p * d * d};
}

} // namespace meanaction::ech
