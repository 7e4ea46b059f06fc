#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "action.hpp"
#include "annulus_map.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rational.hpp"

namespace meanaction {

struct NewtonConfig {
    int max_iter = 50;
    double tol = 1e-10;   ///< max-norm residual of ψ̃^q(p) − (x, y + 2πk)
    double damping = 1.0; ///< initial step fraction, halved while the residual grows
};

struct SearchConfig {
    int q_max = 1;
    std::optional<std::pair<int, int>> winding_range; ///< per unit period; scaled by q when unset
    int seed_nx = 64;
    int seed_ny = 64;
    NewtonConfig newton{};
    double dedupe_tol = 1e-6;
};

struct SearchResult {
    std::vector<OrbitRecord> orbits;
    std::size_t seeds_tried = 0;
    std::size_t seeds_converged = 0;
    std::size_t seeds_failed = 0;
    std::size_t family_members_dropped = 0; ///< converged family points beyond the representative cap
};

namespace detail {

struct NewtonOutcome {
    AnnulusPoint point;
    double residual = 0.0;
    bool converged = false;
    bool degenerate = false;
};

inline double wrapped_distance(const AnnulusPoint& a, const AnnulusPoint& b) {
    return std::max(std::abs(a.x - b.x), std::abs(wrap_angle(a.y - b.y)));
}

/// ψ̃^q and its Jacobian by the chain rule.
inline LiftedValue iterate_with_jacobian(const LiftedMap& map, int q, AnnulusPoint p) {
    Mat2 j = Mat2::identity();
    for (int i = 0; i < q; ++i) {
        const LiftedValue v = evaluate_with_jacobian(map, p);
        j = v.jac * j;
        p = v.point;
    }
    return {p, j};
}

inline double residual_of(const AnnulusPoint& image, const AnnulusPoint& p, int k) {
    return std::max(std::abs(image.x - p.x), std::abs(image.y - p.y - kTwoPi * k));
}

/// Damped Newton on G(p) = ψ̃^q(p) − (x, y + 2πk). Near-singular systems are
/// solved in the least-squares sense with a small Levenberg–Marquardt shift,
/// which handles the shear-type degeneracy along invariant circles.
inline NewtonOutcome newton_solve(const LiftedMap& map, int q, int k, AnnulusPoint p, const NewtonConfig& cfg) {
    NewtonOutcome out;
    LiftedValue v = iterate_with_jacobian(map, q, p);
    double res = residual_of(v.point, p, k);
    for (int it = 0; it <= cfg.max_iter; ++it) {
        if (res <= cfg.tol) {
            out.converged = true;
            break;
        }
        if (it == cfg.max_iter) break;
        const double gx = v.point.x - p.x, gy = v.point.y - p.y - kTwoPi * k;
        const Mat2 dg{v.jac.a - 1.0, v.jac.b, v.jac.c, v.jac.d - 1.0};
        const double scale = std::abs(dg.a) + std::abs(dg.b) + std::abs(dg.c) + std::abs(dg.d);
        double sx, sy;
        if (std::abs(dg.det()) > 1e-10 * (1.0 + scale * scale)) {
            sx = -(dg.d * gx - dg.b * gy) / dg.det();
            sy = -(-dg.c * gx + dg.a * gy) / dg.det();
        } else {
            // (DGᵀDG + μI) s = −DGᵀG
            const double mu = 1e-12 * (1.0 + scale * scale);
            const double a = dg.a * dg.a + dg.c * dg.c + mu, b = dg.a * dg.b + dg.c * dg.d;
            const double d = dg.b * dg.b + dg.d * dg.d + mu;
            const double rx = -(dg.a * gx + dg.c * gy), ry = -(dg.b * gx + dg.d * gy);
            const double det = a * d - b * b;
            sx = (d * rx - b * ry) / det;
            sy = (-b * rx + a * ry) / det;
        }
        if (!std::isfinite(sx) || !std::isfinite(sy)) break;
        double lambda = cfg.damping;
        bool improved = false;
        for (int h = 0; h < 30; ++h, lambda *= 0.5) {
            const AnnulusPoint trial{std::clamp(p.x + lambda * sx, -1.0, 1.0), p.y + lambda * sy};
            const LiftedValue tv = iterate_with_jacobian(map, q, trial);
            const double tres = residual_of(tv.point, trial, k);
            if (tres < res) {
                p = trial;
                v = tv;
                res = tres;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    out.point = p;
    out.residual = res;
    const Mat2 dg{v.jac.a - 1.0, v.jac.b, v.jac.c, v.jac.d - 1.0};
    const double scale = std::abs(dg.a) + std::abs(dg.b) + std::abs(dg.c) + std::abs(dg.d);
    out.degenerate = std::abs(dg.det()) <= 1e-8 * (1.0 + scale * scale);
    return out;
}

/// Builds the record of the orbit through p at its minimal period dividing q.
inline std::optional<OrbitRecord> minimal_orbit(const LiftedMap& map, int q, int k, const AnnulusPoint& p,
                                                double close_tol) {
    std::vector<AnnulusPoint> lifted{p};
    for (int i = 1; i <= q; ++i) lifted.push_back(evaluate_lift(map, lifted.back()));
    for (int l = 1; l <= q; ++l) {
        if (q % l != 0) continue;
        const double turns = (lifted[l].y - p.y) / kTwoPi;
        if (std::abs(lifted[l].x - p.x) > close_tol || dist_to_integer(turns) * kTwoPi > close_tol) continue;
        const int kl = static_cast<int>(std::lround(turns));
        if (static_cast<long>(kl) * (q / l) != k) continue;
        OrbitRecord rec;
        rec.period = l;
        rec.winding = kl;
        rec.residual = residual_of(lifted[l], p, kl);
        for (int i = 0; i < l; ++i) {
            double y = std::fmod(lifted[i].y, kTwoPi);
            if (y < 0) y += kTwoPi;
            rec.points.push_back({lifted[i].x, y});
        }
        return rec;
    }
    return std::nullopt;
}

inline bool same_orbit(const OrbitRecord& a, const OrbitRecord& b, double tol) {
    if (a.period != b.period || a.winding != b.winding) return false;
    return std::any_of(b.points.begin(), b.points.end(),
                       [&](const AnnulusPoint& q) { return wrapped_distance(a.points.front(), q) <= tol; });
}

inline AnnulusPoint minimal_point(const OrbitRecord& r) {
    return *std::min_element(r.points.begin(), r.points.end(), [](const AnnulusPoint& a, const AnnulusPoint& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
}

} // namespace detail

/// Winding numbers searched for period q.
inline std::pair<int, int> winding_bounds(const LiftedMap& map, const SearchConfig& cfg, int q) {
    if (cfg.winding_range) return {q * cfg.winding_range->first, q * cfg.winding_range->second};
    const double lo = std::min(map.y_minus(), map.y_plus()), hi = std::max(map.y_minus(), map.y_plus());
    return {static_cast<int>(std::floor(q * lo)) - 1, static_cast<int>(std::ceil(q * hi)) + 1};
}

/// Grid-seeded Newton search for periodic orbits of period ≤ q_max. Orbits are
/// identified up to cyclic shift and 2π translation and reported at their
/// minimal period; actions use `ctx` (its map is the one searched).
inline SearchResult find_periodic_orbits(const ActionContext& ctx, const SearchConfig& cfg) {
    if (cfg.q_max < 1) throw DomainError("q_max must be >= 1");
    if (!(cfg.dedupe_tol > cfg.newton.tol)) throw DomainError("dedupe_tol must exceed newton.tol");
    if (cfg.seed_nx < 1 || cfg.seed_ny < 1) throw DomainError("seed grid must be non-empty");
    const LiftedMap& map = ctx.map;
    SearchResult result;
    std::vector<AnnulusPoint> seeds;
    for (int i = 0; i < cfg.seed_nx; ++i)
        for (int j = 0; j < cfg.seed_ny; ++j)
            seeds.push_back({-1.0 + (i + 0.5) * 2.0 / cfg.seed_nx, kTwoPi * (j + 0.5) / cfg.seed_ny});

    std::vector<OrbitRecord> kept;
    std::vector<int> family_count;
    for (int q = 1; q <= cfg.q_max; ++q) {
        const auto [k_lo, k_hi] = winding_bounds(map, cfg, q);
        for (int k = k_lo; k <= k_hi; ++k) {
            std::vector<detail::NewtonOutcome> outcomes(seeds.size());
            parallel_for(seeds.size(), [&](std::size_t s) {
                try {
                    outcomes[s] = detail::newton_solve(map, q, k, seeds[s], cfg.newton);
                } catch (const IntegratorDivergence&) {
                    outcomes[s].converged = false;
                }
            });
            result.seeds_tried += seeds.size();
            for (const auto& o : outcomes) {
                if (!o.converged) {
                    ++result.seeds_failed;
                    continue;
                }
                ++result.seeds_converged;
                auto rec = detail::minimal_orbit(map, q, k, o.point, cfg.dedupe_tol);
                if (!rec) continue;
                rec->family_suspected = o.degenerate;
                const bool dup = std::any_of(kept.begin(), kept.end(), [&](const OrbitRecord& r) {
                    return detail::same_orbit(*rec, r, cfg.dedupe_tol);
                });
                if (dup) continue;
                if (rec->family_suspected) {
                    const auto n = std::count_if(kept.begin(), kept.end(), [&](const OrbitRecord& r) {
                        return r.family_suspected && r.period == rec->period && r.winding == rec->winding;
                    });
                    if (n >= cfg.seed_nx) {
                        ++result.family_members_dropped;
                        continue;
                    }
                }
                kept.push_back(std::move(*rec));
            }
        }
    }

    parallel_for(kept.size(), [&](std::size_t i) {
        kept[i].total_action = total_action(ctx, kept[i]);
        kept[i].mean_action = kept[i].total_action / kept[i].period;
    });
    std::stable_sort(kept.begin(), kept.end(), [](const OrbitRecord& a, const OrbitRecord& b) {
        if (a.period != b.period) return a.period < b.period;
        if (a.winding != b.winding) return a.winding < b.winding;
        const AnnulusPoint pa = detail::minimal_point(a), pb = detail::minimal_point(b);
        return pa.x < pb.x || (pa.x == pb.x && pa.y < pb.y);
    });
    result.orbits = std::move(kept);
    return result;
}

inline SearchResult find_periodic_orbits(const LiftedMap& map, const SearchConfig& cfg) {
    return find_periodic_orbits(ActionContext{map}, cfg);
}

struct MainInequalityReport {
    bool hypothesis_holds = false;
    std::string hypothesis_reason; ///< which alternative of the hypothesis holds, or why none does
    double calabi = 0.0;
    double flux = 0.0;
    std::size_t orbits_found = 0;
    std::optional<double> min_found_mean_action; ///< over the orbits found, not the true infimum
    std::optional<bool> inequality_holds;        ///< min_found ≤ 𝒱 + tol when a witness exists
    std::optional<OrbitRecord> witness_orbit;
};

/// Witness-based check of inf(mean action) ≤ 𝒱 on an admissible map. `tol`
/// absorbs quadrature error in both the hypothesis and the inequality.
inline MainInequalityReport verify_main_inequality(const ActionContext& ctx, const SearchConfig& cfg, double tol) {
    if (!ctx.map.admissible()) throw NonAdmissibleMap("verify_main_inequality requires a map that rotates near the boundary");
    MainInequalityReport r;
    r.calabi = calabi(ctx);
    r.flux = flux(ctx);
    const double yp = ctx.y_plus(), ym = ctx.y_minus();
    const double big = std::max(yp, -ym + r.flux);
    if (r.calabi < big - tol) {
        r.hypothesis_holds = true;
        r.hypothesis_reason = "calabi < max(y_plus, -y_minus + F)";
    } else if (looks_rational(yp) || looks_rational(ym)) {
        r.hypothesis_holds = true;
        r.hypothesis_reason = "a boundary rotation number is rational (continued-fraction test, q <= 1e6)";
    } else {
        r.hypothesis_reason = "calabi >= max(y_plus, -y_minus + F) and both boundary rotation numbers look irrational";
    }
    const SearchResult found = find_periodic_orbits(ctx, cfg);
    r.orbits_found = found.orbits.size();
    for (const auto& o : found.orbits) {
        if (!r.min_found_mean_action || o.mean_action < *r.min_found_mean_action) {
            r.min_found_mean_action = o.mean_action;
            r.witness_orbit = o;
        }
    }
    if (r.min_found_mean_action) r.inequality_holds = *r.min_found_mean_action <= r.calabi + tol;
    return r;
}

inline MainInequalityReport verify_main_inequality(const LiftedMap& map, const SearchConfig& cfg, double tol) {
    return verify_main_inequality(ActionContext{map}, cfg, tol);
}

} // namespace meanaction
