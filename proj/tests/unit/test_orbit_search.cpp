#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "meanaction/orbit_search.hpp"

using namespace meanaction;

namespace {

constexpr double pi = std::numbers::pi;

SearchConfig small_grid(int q_max, int n = 16) {
    SearchConfig c;
    c.q_max = q_max;
    c.seed_nx = n;
    c.seed_ny = n;
    return c;
}

LiftedMap smoothed_twist() { return radial_shear(Profile::smoothstep({-0.45, 0.45}, {-0.9, 0.9})); }

// A quarter rotation disturbed by a bump in one sector.
LiftedMap bumped_quarter_rotation() {
    return compose({LiftedMap(HamiltonianBump{{0.0, 0.5}, 0.4, 0.02, 1.0, 24}), rigid(0.25)});
}

void expect_reverifies(const LiftedMap& m, const OrbitRecord& o, double tol) {
    AnnulusPoint p = o.points.front();
    for (int i = 1; i <= o.period; ++i) {
        p = evaluate_lift(m, p);
        const AnnulusPoint& next = o.points[i % o.period];
        EXPECT_NEAR(p.x, next.x, tol);
        const double turns = (p.y - next.y) / (2 * pi);
        EXPECT_NEAR(turns, std::round(turns), tol);
    }
    const auto closed = iterate_lift(m, o.period, o.points.front());
    EXPECT_NEAR(closed.y - o.points.front().y, 2 * pi * o.winding, tol);
}

} // namespace

TEST(Orbits, HalfRotationFamily) {
    const auto m = rigid(0.5);
    const auto r = find_periodic_orbits(m, small_grid(2));
    ASSERT_FALSE(r.orbits.empty());
    EXPECT_LE(r.orbits.size(), 16u);
    for (const auto& o : r.orbits) {
        EXPECT_EQ(o.period, 2);
        EXPECT_EQ(o.winding, 1);
        EXPECT_TRUE(o.family_suspected);
        EXPECT_NEAR(o.mean_action, 0.5, 1e-12);
        expect_reverifies(m, o, 1e-9);
    }
    EXPECT_GT(r.family_members_dropped, 0u);
}

TEST(Orbits, IrrationalRotationHasNone) {
    const auto r = find_periodic_orbits(rigid(1.0 / std::sqrt(2.0)), small_grid(8));
    EXPECT_TRUE(r.orbits.empty());
    EXPECT_EQ(r.seeds_converged, 0u);
    EXPECT_EQ(r.seeds_failed, r.seeds_tried);
}

TEST(Orbits, TwistFixedCircle) {
    auto cfg = small_grid(1);
    cfg.winding_range = {{0, 0}};
    const auto m = twist(Profile::polynomial({0.0, 0.5}));
    const auto r = find_periodic_orbits(m, cfg);
    ASSERT_FALSE(r.orbits.empty());
    for (const auto& o : r.orbits) {
        EXPECT_EQ(o.period, 1);
        EXPECT_NEAR(o.points[0].x, 0.0, 1e-10);
        EXPECT_NEAR(o.mean_action, 0.25, 1e-9);
        EXPECT_TRUE(o.family_suspected);
    }
}

TEST(Orbits, MinimalPeriodReportedOnce) {
    // Period-2 orbits also solve the q = 4 equation with k = 2.
    auto cfg = small_grid(4, 8);
    const auto r = find_periodic_orbits(rigid(0.5), cfg);
    for (const auto& o : r.orbits) EXPECT_EQ(o.period, 2);
}

TEST(Orbits, BumpedRotationOrbitsReverify) {
    const auto m = bumped_quarter_rotation();
    auto cfg = small_grid(4, 24);
    cfg.winding_range = {{0, 1}};
    const auto r = find_periodic_orbits(m, cfg);
    // Orbits avoiding the bump are 4-periodic with winding 1; nothing of
    // smaller period exists.
    for (const auto& o : r.orbits) {
        EXPECT_EQ(o.period, 4);
        EXPECT_EQ(o.winding, 1);
        EXPECT_LE(o.residual, cfg.newton.tol);
        expect_reverifies(m, o, 10 * cfg.newton.tol + 1e-12);
    }
    EXPECT_FALSE(r.orbits.empty());
}

TEST(Orbits, NoDuplicatesUnderShiftOrTranslation) {
    const auto r = find_periodic_orbits(rigid(0.5), small_grid(2, 12));
    for (std::size_t i = 0; i < r.orbits.size(); ++i)
        for (std::size_t j = i + 1; j < r.orbits.size(); ++j)
            EXPECT_FALSE(detail::same_orbit(r.orbits[i], r.orbits[j], 1e-6));
}

TEST(Orbits, OutputIsCanonicallySorted) {
    const auto r = find_periodic_orbits(smoothed_twist(), small_grid(2, 12));
    for (std::size_t i = 1; i < r.orbits.size(); ++i) {
        const auto& a = r.orbits[i - 1];
        const auto& b = r.orbits[i];
        EXPECT_TRUE(a.period < b.period || (a.period == b.period && a.winding <= b.winding));
    }
}

TEST(Orbits, DeterministicAcrossWorkerCounts) {
    ::setenv("MEANACTION_THREADS", "1", 1);
    const auto a = find_periodic_orbits(smoothed_twist(), small_grid(2, 10));
    ::setenv("MEANACTION_THREADS", "3", 1);
    const auto b = find_periodic_orbits(smoothed_twist(), small_grid(2, 10));
    ::unsetenv("MEANACTION_THREADS");
    ASSERT_EQ(a.orbits.size(), b.orbits.size());
    for (std::size_t i = 0; i < a.orbits.size(); ++i) {
        EXPECT_EQ(a.orbits[i].points[0].x, b.orbits[i].points[0].x);
        EXPECT_EQ(a.orbits[i].points[0].y, b.orbits[i].points[0].y);
    }
}

TEST(Orbits, ConfigValidation) {
    SearchConfig c;
    c.q_max = 0;
    EXPECT_THROW(find_periodic_orbits(rigid(0.5), c), DomainError);
    c.q_max = 1;
    c.dedupe_tol = 1e-12;
    EXPECT_THROW(find_periodic_orbits(rigid(0.5), c), DomainError);
}

TEST(MainInequality, HalfRotation) {
    const auto r = verify_main_inequality(rigid(0.5), small_grid(2), 1e-9);
    EXPECT_TRUE(r.hypothesis_holds);
    EXPECT_NE(r.hypothesis_reason.find("rational"), std::string::npos);
    ASSERT_TRUE(r.min_found_mean_action.has_value());
    EXPECT_NEAR(*r.min_found_mean_action, 0.5, 1e-12);
    EXPECT_TRUE(*r.inequality_holds);
}

TEST(MainInequality, IrrationalRotation) {
    const auto r = verify_main_inequality(rigid(1.0 / std::sqrt(2.0)), small_grid(6), 1e-9);
    EXPECT_FALSE(r.hypothesis_holds);
    EXPECT_FALSE(r.min_found_mean_action.has_value());
    EXPECT_FALSE(r.inequality_holds.has_value());
}

TEST(MainInequality, SmoothedTwistWitness) {
    ActionContext ctx{smoothed_twist()};
    ctx.quad.nx = 256;
    ctx.quad.ny = 4;
    const auto r = verify_main_inequality(ctx, small_grid(1, 16), 1e-9);
    EXPECT_TRUE(r.hypothesis_holds);
    ASSERT_TRUE(r.witness_orbit.has_value());
    EXPECT_LE(*r.min_found_mean_action, r.calabi + 0.02);
    EXPECT_NEAR(r.witness_orbit->points[0].x, 0.0, 1e-8);
}

TEST(MainInequality, RefusesNonAdmissible) {
    EXPECT_THROW(verify_main_inequality(twist(Profile::polynomial({0.0, 0.5})), small_grid(1), 1e-9), NonAdmissibleMap);
}

TEST(Rational, ContinuedFractionDetection) {
    EXPECT_TRUE(looks_rational(0.5));
    EXPECT_TRUE(looks_rational(355.0 / 113.0));
    EXPECT_TRUE(looks_rational(-7.0 / 9.0));
    EXPECT_FALSE(looks_rational(1.0 / std::sqrt(2.0)));
    EXPECT_FALSE(looks_rational(std::numbers::e / 30.0 + 1.0));
    const auto r = detect_rational(0.75);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->p, 3);
    EXPECT_EQ(r->q, 4);
}
