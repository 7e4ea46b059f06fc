#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "meanaction/profile.hpp"
#include "meanaction/quadrature.hpp"

using namespace meanaction;

namespace {

// Brute-force references: high-order composite rules, independent of the
// closed-form antiderivatives in the profile.
double numeric_integral(const Profile& g, double a, double b) {
    return quad::composite_gauss([&](double x) { return g.value(x); }, a, b, 400, 12);
}

double numeric_moment(const Profile& g) {
    return quad::composite_gauss([&](double x) { return x * g.value(x); }, -1.0, 1.0, 400, 12);
}

Profile sample_smoothstep() { return Profile::smoothstep({0.3, 0.0, -0.7, -0.2}, {-0.9, -0.6, 0.1, 0.4, 0.7, 0.95}); }

} // namespace

TEST(Smoothstep, EndpointsAndSymmetry) {
    EXPECT_EQ(smoothstep::value(0.0), 0.0);
    EXPECT_EQ(smoothstep::value(1.0), 1.0);
    EXPECT_NEAR(smoothstep::value(0.5), 0.5, 1e-15);
    for (double t : {0.1, 0.27, 0.8}) EXPECT_NEAR(smoothstep::value(t) + smoothstep::value(1 - t), 1.0, 1e-15);
    EXPECT_NEAR(smoothstep::integral(1.0), 0.5, 1e-15);
    EXPECT_NEAR(smoothstep::integral(3.0), 2.5, 1e-15);
}

TEST(Profile, PolynomialValueDerivativeIntegral) {
    const Profile g = Profile::polynomial({1.0, -2.0, 0.5, 3.0}); // 1 - 2x + x²/2 + 3x³
    EXPECT_NEAR(g.value(0.5), 1 - 1 + 0.125 + 0.375, 1e-15);
    EXPECT_NEAR(g.derivative(0.5), -2 + 0.5 + 9 * 0.25, 1e-15);
    EXPECT_NEAR(g.integral(-1.0, 1.0), 2.0 + 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(g.integral(-0.2, 0.7), numeric_integral(g, -0.2, 0.7), 1e-13);
    EXPECT_NEAR(g.first_moment(), -4.0 / 3.0 + 6.0 / 5.0, 1e-14);
}

TEST(Profile, SmoothstepIntegralAndMomentMatchQuadrature) {
    const Profile g = sample_smoothstep();
    for (auto [a, b] : {std::pair{-1.0, 1.0}, {-0.75, 0.2}, {0.3, 0.99}})
        EXPECT_NEAR(g.integral(a, b), numeric_integral(g, a, b), 1e-12);
    EXPECT_NEAR(g.first_moment(), numeric_moment(g), 1e-12);
}

TEST(Profile, SmoothstepPlateausAndDerivative) {
    const Profile g = sample_smoothstep();
    EXPECT_EQ(g.value(-1.0), 0.3);
    EXPECT_EQ(g.value(0.0), 0.0);
    EXPECT_EQ(g.value(1.0), -0.2);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.99, 0.99);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng), h = 1e-6;
        EXPECT_NEAR(g.derivative(x), (g.value(x + h) - g.value(x - h)) / (2 * h), 1e-7);
    }
}

TEST(Profile, SmoothstepIsC1AcrossKnots) {
    const Profile g = sample_smoothstep();
    for (double k : {-0.9, -0.6, 0.1, 0.4, 0.7, 0.95}) {
        EXPECT_NEAR(g.derivative(k - 1e-9), g.derivative(k + 1e-9), 1e-6);
        EXPECT_NEAR(g.value(k - 1e-12), g.value(k + 1e-12), 1e-10);
    }
}

TEST(Profile, FlatCollars) {
    const Profile g = sample_smoothstep();
    EXPECT_NEAR(g.flat_collar_plus(), 0.05, 1e-15);
    EXPECT_NEAR(g.flat_collar_minus(), 0.1, 1e-15);
    EXPECT_EQ(Profile::polynomial({0.0, 0.5}).flat_collar_plus(), 0.0);
    EXPECT_EQ(Profile::constant(0.4).flat_collar_minus(), 2.0);
    EXPECT_EQ(Profile::polynomial({0.4, 0.0}).flat_collar_minus(), 2.0);
}

TEST(Profile, ScaledNegatesEverything) {
    const Profile g = sample_smoothstep();
    const Profile h = g.scaled(-1.0);
    for (double x : {-0.95, -0.3, 0.25, 0.8}) {
        EXPECT_EQ(h.value(x), -g.value(x));
        EXPECT_EQ(h.derivative(x), -g.derivative(x));
    }
}

TEST(Profile, ValidationRejectsBadKnots) {
    EXPECT_THROW(Profile::smoothstep({}, {}), DomainError);
    EXPECT_THROW(Profile::smoothstep({0, 1}, {0.1}), DomainError);
    EXPECT_THROW(Profile::smoothstep({0, 1}, {0.4, 0.2}), DomainError);
    EXPECT_THROW(Profile::smoothstep({0, 1}, {0.2, 0.2}), DomainError);
    EXPECT_THROW(Profile::smoothstep({0, 1}, {-1.5, 0.2}), DomainError);
    EXPECT_NO_THROW(Profile::smoothstep({0.5}, {}));
}
