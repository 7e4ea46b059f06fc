#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "meanaction/meanaction.hpp"

using namespace meanaction;

#ifndef MEANACTION_SAMPLES_DIR
#error "MEANACTION_SAMPLES_DIR must point at samples/"
#endif

namespace {

std::string sample(const char* name) { return std::string(MEANACTION_SAMPLES_DIR) + "/" + name; }

void expect_same_map(const LiftedMap& a, const LiftedMap& b) {
    EXPECT_EQ(a.kind_name(), b.kind_name());
    EXPECT_EQ(a.y_plus(), b.y_plus());
    EXPECT_EQ(a.y_minus(), b.y_minus());
    EXPECT_EQ(a.admissible(), b.admissible());
    for (double x : {-1.0, -0.55, 0.0, 0.3, 0.97, 1.0})
        for (double y : {0.0, 1.3, 4.0}) {
            const auto p = evaluate_lift(a, {x, y}), q = evaluate_lift(b, {x, y});
            EXPECT_EQ(p.x, q.x);
            EXPECT_EQ(p.y, q.y);
        }
}

} // namespace

TEST(MapSpec, SamplesLoad) {
    for (const char* name : {"rotation_half.json", "rotation_irrational.json", "twist.json", "smoothed_twist.json",
                             "wavy.json", "square_profile.json"}) {
        EXPECT_NO_THROW(load_mapspec(sample(name))) << name;
    }
    const auto half = load_mapspec(sample("rotation_half.json"));
    EXPECT_EQ(half.ctx.map.kind_name(), "rigid");
    EXPECT_EQ(half.ctx.map.y_plus(), 0.5);
    EXPECT_TRUE(half.rational.y_plus_rational.value());
    const auto wavy = load_mapspec(sample("wavy.json"));
    EXPECT_EQ(wavy.ctx.map.kind_name(), "compose");
    EXPECT_EQ(wavy.ctx.quad.rule, AreaRule::GaussLegendre);
    EXPECT_EQ(wavy.ctx.quad.nx, 96);
    EXPECT_EQ(load_mapspec(sample("smoothed_twist.json")).ctx.offset, 1);
}

TEST(MapSpec, RoundTrip) {
    for (const char* name : {"rotation_half.json", "twist.json", "smoothed_twist.json", "wavy.json"}) {
        const auto a = load_mapspec(sample(name));
        const auto path = (std::filesystem::temp_directory_path() / ("meanaction_rt_" + std::string(name))).string();
        save_mapspec(a, path);
        const auto b = load_mapspec(path);
        std::remove(path.c_str());
        expect_same_map(a.ctx.map, b.ctx.map);
        EXPECT_EQ(a.ctx.offset, b.ctx.offset);
        EXPECT_EQ(a.name, b.name);
        EXPECT_EQ(mapspec_to_json(a), mapspec_to_json(b));
    }
}

TEST(MapSpec, Errors) {
    EXPECT_THROW(parse_mapspec("{"), SpecFormatError);
    EXPECT_THROW(parse_mapspec("[]"), SpecFormatError);
    EXPECT_THROW(parse_mapspec(R"({"offset": 1})"), SpecFormatError);
    EXPECT_THROW(parse_mapspec(R"({"map": {"kind": "spiral"}})"), SpecFormatError);
    EXPECT_THROW(parse_mapspec(R"({"map": {"kind": "rigid", "theta": 0.5}})"), SpecFormatError);
    EXPECT_THROW(parse_mapspec(R"({"map": {"kind": "rigid", "theta0": "half"}})"), SpecFormatError);
    EXPECT_THROW(parse_mapspec(R"({"map": {"kind": "rigid", "theta0": 0.5}, "offset": 0.5})"), SpecFormatError);
    EXPECT_THROW(parse_mapspec(R"({"map": {"kind": "twist", "g": {"type": "spline"}}})"), SpecFormatError);
    EXPECT_THROW(parse_mapspec(R"({"map": {"kind": "rigid", "theta0": 0.5}, "quadrature": {"nx": 7}})"),
                 SpecFormatError);
    EXPECT_THROW(parse_mapspec(R"({"map": {"kind": "hamiltonian_bump", "center": [0.0]}})"), SpecFormatError);
    EXPECT_THROW(load_mapspec("/nonexistent/map.json"), SpecFormatError);
    // well-formed JSON with a bump outside the annulus is a domain problem
    EXPECT_THROW(parse_mapspec(R"({"map": {"kind": "hamiltonian_bump", "center": [0.9, 0.0], "radius": 0.5}})"),
                 DomainError);
}
