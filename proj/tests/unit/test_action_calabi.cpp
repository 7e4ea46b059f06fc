#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "meanaction/action.hpp"

using namespace meanaction;

namespace {

constexpr double pi = std::numbers::pi;

// Exact polynomial arithmetic for the g-family oracle: with df = x g'(x) dx,
// f(x) = x g(x) + ∫_x^1 g and 𝒱 = ½ ∫ f.
struct Poly {
    std::vector<double> c;
    double operator()(double x) const {
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
        return acc;
    }
    Poly antiderivative() const {
        Poly r{std::vector<double>(c.size() + 1, 0.0)};
        for (std::size_t k = 0; k < c.size(); ++k) r.c[k + 1] = c[k] / static_cast<double>(k + 1);
        return r;
    }
};

double oracle_f(const Poly& g, double x) {
    const Poly G = g.antiderivative();
    return x * g(x) + G(1.0) - G(x);
}

double oracle_calabi(const Poly& g) {
    // ½ ∫ (x g + G(1) − G) over [-1, 1]
    Poly h{std::vector<double>(g.c.size() + 2, 0.0)};
    const Poly G = g.antiderivative();
    for (std::size_t k = 0; k < g.c.size(); ++k) h.c[k + 1] += g.c[k];
    for (std::size_t k = 0; k < G.c.size(); ++k) h.c[k] -= G.c[k];
    h.c[0] += G(1.0);
    const Poly H = h.antiderivative();
    return 0.5 * (H(1.0) - H(-1.0));
}

ActionContext ctx_of(LiftedMap m, int nx = 256, int ny = 8) {
    ActionContext c{std::move(m)};
    c.quad.nx = nx;
    c.quad.ny = ny;
    return c;
}

LiftedMap half_twist() { return twist(Profile::polynomial({0.0, 0.5})); }

// A map that genuinely depends on y: a Hamiltonian bump between two shears.
LiftedMap wavy() {
    return compose({radial_shear(Profile::smoothstep({0.2, 0.6}, {-0.8, 0.8})),
                    LiftedMap(HamiltonianBump{{0.05, 2.0}, 0.5, 0.01, 1.0, 24}), rigid(0.1)});
}

ActionContext wavy_ctx() {
    ActionContext c{wavy()};
    c.quad.nx = 192;
    c.quad.ny = 128;
    c.quad.line_order = 6;
    c.quad.tol = 1e-11;
    return c;
}

} // namespace

TEST(Flux, Examples) {
    EXPECT_NEAR(flux(ctx_of(half_twist())), 0.0, 1e-12);
    EXPECT_NEAR(flux(ctx_of(rigid(0.5))), 1.0, 1e-15);
    EXPECT_NEAR(flux(ctx_of(twist(Profile::polynomial({0.0, 0.0, 1.0})))), 2.0 / 3.0, 1e-12);
}

TEST(Flux, OffsetAddsTwoPerUnit) {
    auto c = ctx_of(half_twist());
    c.offset = 3;
    EXPECT_NEAR(flux(c), 6.0, 1e-12);
}

TEST(ActionFunction, Examples) {
    const auto c = ctx_of(half_twist());
    for (double x : {-1.0, -0.5, 0.0, 0.3, 1.0}) EXPECT_NEAR(action_function(c, {x, 1.7}), x * x / 4 + 0.25, 1e-12);
    EXPECT_NEAR(action_function(ctx_of(rigid(0.37)), {-0.2, 4.0}), 0.37, 1e-15);
}

TEST(ActionFunction, BoundaryValuesFollowFlux) {
    auto c = wavy_ctx();
    c.offset = 2;
    const double F = flux(c);
    for (double y : {0.0, 1.3, 2.0, 5.5}) {
        EXPECT_NEAR(action_function(c, {1.0, y}), c.y_plus(), 1e-12);
        EXPECT_NEAR(action_function(c, {-1.0, y}), -c.y_minus() + F, 1e-8);
    }
}

TEST(ActionFunction, PathIndependence) {
    const auto c = wavy_ctx();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.0, 2 * pi);
    for (int i = 0; i < 100; ++i) {
        const AnnulusPoint p{ux(rng), uy(rng)};
        const double y0 = uy(rng);
        // L-shaped: along x = 1 to y0, across to x_p, then vertically to y_p.
        const double l = action_along_path(c, {{1.0, p.y}, {1.0, y0}, {p.x, y0}, p});
        EXPECT_NEAR(action_function(c, p), l, 1e-8);
    }
}

TEST(Calabi, Examples) {
    EXPECT_NEAR(calabi(ctx_of(half_twist())), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(calabi(ctx_of(rigid(0.37))), 0.37, 1e-14);
    EXPECT_NEAR(calabi(ctx_of(twist(Profile::polynomial({0.0, 0.0, 1.0})))), 1.0 / 3.0, 1e-12);
}

TEST(Calabi, GaussLegendreAreaRuleAgrees) {
    auto c = ctx_of(twist(Profile::polynomial({0.2, -0.4, 0.0, 0.9})), 64);
    c.quad.rule = AreaRule::GaussLegendre;
    EXPECT_NEAR(calabi(c), oracle_calabi({{0.2, -0.4, 0.0, 0.9}}), 1e-12);
}

TEST(Calabi, GFamilyMatchesClosedForms) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(0, 5);
    for (int trial = 0; trial < 20; ++trial) {
        Poly g{std::vector<double>(deg(rng) + 1)};
        for (auto& v : g.c) v = coef(rng);
        const auto c = ctx_of(twist(Profile::polynomial(g.c)));
        const Poly G = g.antiderivative();
        EXPECT_NEAR(flux(c), G(1.0) - G(-1.0), 1e-10);
        EXPECT_NEAR(calabi(c), oracle_calabi(g), 1e-9);
        for (double x : {-0.9, -0.1, 0.45}) EXPECT_NEAR(action_function(c, {x, 0.0}), oracle_f(g, x), 1e-10);
    }
}

TEST(Calabi, DeterministicAcrossWorkerCounts) {
    const auto c = wavy_ctx();
    ::setenv("MEANACTION_THREADS", "1", 1);
    const double a = calabi(c);
    ::setenv("MEANACTION_THREADS", "4", 1);
    const double b = calabi(c);
    ::unsetenv("MEANACTION_THREADS");
    EXPECT_EQ(a, b);
}

TEST(CalabiIndependence, ZeroGaugeIsExact) {
    const auto c = ctx_of(half_twist());
    GaugeField g{[](const AnnulusPoint&) { return 0.0; }, [](const AnnulusPoint&) { return AnnulusPoint{}; }};
    EXPECT_EQ(calabi_independence_check(c, g).diff, 0.0);
}

TEST(CalabiIndependence, BumpGaugeOnTwistAndRotation) {
    // g = s(x) with s a C² bump vanishing near ±1.
    GaugeField g{[](const AnnulusPoint& p) { return std::pow(1 - p.x * p.x, 3); },
                 [](const AnnulusPoint& p) { return AnnulusPoint{-6 * p.x * std::pow(1 - p.x * p.x, 2), 0.0}; }};
    EXPECT_LE(calabi_independence_check(ctx_of(half_twist()), g).diff, 1e-8);
    EXPECT_LE(calabi_independence_check(ctx_of(rigid(0.3)), g).diff, 1e-10);
}

TEST(CalabiIndependence, AngleDependentGaugeOnWavyMap) {
    GaugeField g{[](const AnnulusPoint& p) { return std::pow(1 - p.x * p.x, 3) * std::cos(p.y); },
                 [](const AnnulusPoint& p) {
                     const double s = std::pow(1 - p.x * p.x, 3);
                     return AnnulusPoint{-6 * p.x * std::pow(1 - p.x * p.x, 2) * std::cos(p.y), -s * std::sin(p.y)};
                 }};
    const auto r = calabi_independence_check(wavy_ctx(), g);
    EXPECT_LE(r.diff, 1e-8);
    EXPECT_GT(std::abs(r.v_beta), 0.1);
}

TEST(CalabiIndependence, RejectsGaugeVaryingOnBoundary) {
    GaugeField g{[](const AnnulusPoint& p) { return std::cos(p.y); },
                 [](const AnnulusPoint& p) { return AnnulusPoint{0.0, -std::sin(p.y)}; }};
    EXPECT_THROW(calabi_independence_check(ctx_of(rigid(0.1)), g), DomainError);
}

TEST(OrbitActions, RotationTwoPointOrbit) {
    const auto c = ctx_of(rigid(0.5));
    OrbitRecord o{{{0.2, 0.0}, {0.2, pi}}, 2, 1};
    EXPECT_NEAR(mean_action(c, o), 0.5, 1e-15);
    EXPECT_NEAR(total_action(c, o), 1.0, 1e-15);
}

TEST(OrbitActions, TwistFixedPointAndOffset) {
    auto c = ctx_of(half_twist());
    OrbitRecord o{{{0.0, 2.0}}, 1, 0};
    EXPECT_NEAR(mean_action(c, o), 0.25, 1e-12);
    c.offset = 5;
    EXPECT_NEAR(mean_action(c, o), 5.25, 1e-12);
}

TEST(PowerScaling, RotationAndTwist) {
    auto r = power_map_scaling_check(ctx_of(rigid(0.3)), 3);
    EXPECT_NEAR(r.calabi_power, 0.9, 1e-14);
    r = power_map_scaling_check(ctx_of(half_twist()), 2);
    EXPECT_NEAR(r.ratio, 2.0, 1e-7);
    r = power_map_scaling_check(ctx_of(half_twist()), 1);
    EXPECT_EQ(r.ratio, 1.0);
}

TEST(PowerScaling, OrbitMeanActionsScale) {
    // Period-2 orbits of the half rotation; ψ³ covers each with period 2.
    auto c = ctx_of(rigid(0.5));
    c.offset = 1;
    OrbitRecord o{{{0.2, 0.3}, {0.2, 0.3 + pi}}, 2, 1};
    const auto r = power_map_scaling_check(c, 3, {o});
    ASSERT_EQ(r.orbits.size(), 1u);
    EXPECT_NEAR(r.orbits[0].mean_power, 3 * 1.5, 1e-12);
    EXPECT_LE(r.orbits[0].diff, 1e-12);
}

TEST(PowerScaling, BumpedRotationOrbit) {
    // (0, 0) is the centre of the bump, and (0, π) lies outside its support,
    // so {(0,0), (0,π)} is a 2-periodic orbit of this y-dependent map.
    ActionContext c{compose({rigid(0.5), LiftedMap(HamiltonianBump{{0.0, 0.0}, 0.5, 0.01, 1.0, 24})})};
    c.quad.nx = 192;
    c.quad.ny = 128;
    c.quad.line_order = 6;
    OrbitRecord o{{{0.0, 0.0}, {0.0, pi}}, 2, 1};
    const auto r = power_map_scaling_check(c, 3, {o});
    EXPECT_LE(r.orbits[0].diff, 1e-9);
    EXPECT_LE(r.diff, 1e-7);
}

TEST(ShearComposition, MiddleRegionShift) {
    // ψ' = τ∘ψ with τ a radial shear supported in the collars of ψ.
    const double delta = 0.1;
    const Profile b = Profile::smoothstep({0.3, 0.0, -0.5}, {-0.99, -0.92, 0.92, 0.97});
    const LiftedMap psi = compose({LiftedMap(HamiltonianBump{{0.0, 1.0}, 0.5, 0.05, 1.0, 24}), rigid(0.4)});
    auto c = ctx_of(psi);
    auto cp = ctx_of(compose({psi, radial_shear(b)}));
    const double shift = b.integral(1.0 - delta, 1.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ux(-1.0 + delta, 1.0 - delta), uy(0.0, 2 * pi);
    for (int i = 0; i < 40; ++i) {
        const AnnulusPoint p{ux(rng), uy(rng)};
        EXPECT_NEAR(action_function(cp, p), action_function(c, p) + shift, 1e-8);
    }
}

TEST(DiskCollapse, QuadratureRouteOnTwist) {
    const auto r = disk_collapse_quadrature(ctx_of(half_twist()));
    EXPECT_FALSE(r.swapped);
    EXPECT_NEAR(r.f_kappa_origin, 0.0, 1e-12);
    EXPECT_NEAR(r.calabi_kappa, 1.0 / 6.0, 1e-12);
}

TEST(DiskCollapse, SwapsWhenInnerBoundaryDominates) {
    // y₊ − (−y₋ + F) = 4c₂/3 for a quadratic g, negative here.
    const Poly g{{0.1, -0.5, -0.3}};
    const auto c = ctx_of(twist(Profile::polynomial(g.c)));
    const double F = flux(c), V = calabi(c);
    ASSERT_LT(c.y_plus(), -c.y_minus() + F);
    const auto r = disk_collapse_quadrature(c);
    EXPECT_TRUE(r.swapped);
    // σ-conjugate: F' = -F, 𝒱' = 𝒱 - F.
    EXPECT_NEAR(r.f_kappa_origin, -F / 2, 1e-12);
    EXPECT_NEAR(r.calabi_kappa, (V - F) / 2 - F / 4, 1e-11);
}
