#include "aai/errors.hpp"
#include "aai/sensors.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace aai;

namespace {

RigidPart box_part(const Vec3& pos, const Vec3& he, const Rgb& color = {0.6, 0.6, 0.6}) {
    RigidPart p;
    p.shape = Shape::box(he);
    p.position = pos;
    p.color = color;
    return p;
}

RigidPart sphere_part(const Vec3& pos, double r, const Rgb& color, Tag tag = Tag::food_green) {
    RigidPart p;
    p.shape = Shape::sphere(r);
    p.position = pos;
    p.color = color;
    p.tag = tag;
    p.solid = false;
    return p;
}

EyePose eye_at(const Vec3& pos, double heading_deg) {
    EyePose e;
    e.position = pos;
    e.heading = deg_to_rad(heading_deg);
    e.orientation = Quat::from_yaw(e.heading);
    return e;
}

}  // namespace

TEST_CASE("ray fan geometry and ordering") {
    RaycastConfig cfg;
    cfg.rays_per_side = 1;
    cfg.viewing_angle = 90;
    const auto az = ray_azimuths(cfg);
    REQUIRE(az.size() == 3);
    CHECK(az[0] == 0.0);
    CHECK(az[1] == 90.0);
    CHECK(az[2] == -90.0);

    cfg.rays_per_side = 3;
    cfg.viewing_angle = 60;
    const auto az3 = ray_azimuths(cfg);
    const std::vector<double> expect{0, 20, 40, 60, -20, -40, -60};
    REQUIRE(az3.size() == expect.size());
    for (size_t i = 0; i < expect.size(); ++i) CHECK(az3[i] == doctest::Approx(expect[i]));
}

TEST_CASE("ray count is 2n+1 for every configuration") {
    World w;
    w.ensure_ground();
    for (int n = 1; n <= 20; ++n) {
        for (const double angle : {5.0, 45.0, 90.0, 180.0}) {
            RaycastConfig cfg{angle, n, 40.0};
            const auto obs = sense_rays(w, eye_at({0, 0.5, 0}, 0), cfg);
            CHECK(obs.distances.size() == static_cast<size_t>(2 * n + 1));
            CHECK(obs.colors.size() == static_cast<size_t>(2 * n + 1));
        }
    }
}

TEST_CASE("viewing angle 180 covers the full circle") {
    for (int n = 1; n <= 20; ++n) {
        RaycastConfig cfg{180.0, n, 40.0};
        auto az = ray_azimuths(cfg);
        for (double& a : az) a = std::fmod(a + 360.0, 360.0);
        std::sort(az.begin(), az.end());
        az.erase(std::unique(az.begin(), az.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 az.end());
        double gap = 360.0 - az.back() + az.front();
        for (size_t i = 1; i < az.size(); ++i) gap = std::max(gap, az[i] - az[i - 1]);
        CHECK(gap <= 180.0 / n + 1e-9);
    }
}

TEST_CASE("wall five metres ahead reads 0.2375") {
    World w;
    w.add_static(box_part({0, 1, 5}, {2, 1, 0.25}));
    const RaycastConfig cfg{90.0, 1, 20.0};
    const auto obs = sense_rays(w, eye_at({0, 0.5, 0}, 0), cfg);
    // Analytic: near face at 5 - 0.25.
    CHECK(obs.distances[0] == doctest::Approx(4.75 / 20.0).epsilon(1e-12));
    CHECK(obs.colors[0] == Rgb{0.6, 0.6, 0.6});
    CHECK(obs.distances[1] == 1.0);
    CHECK(obs.colors[1] == Rgb{});
    CHECK(obs.part_ids[1] == -1);
}

TEST_CASE("boundary at the range limit clamps to 1") {
    World w;
    w.add_static(box_part({0, 1, 40.25}, {20, 1, 0.25}));
    const RaycastConfig cfg{90.0, 1, 40.0};
    const auto obs = sense_rays(w, eye_at({0, 0.5, 0}, 0), cfg);
    CHECK(obs.distances[0] == doctest::Approx(1.0));
    CHECK(obs.distances[0] <= 1.0);
}

TEST_CASE("rays ignore the agent's own parts and report surface color") {
    World w;
    w.ensure_ground();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    w.add_static(box_part({0, 1, -6}, {3, 1, 0.25}, {0.2, 0.3, 0.9}));
    const RaycastConfig cfg{180.0, 1, 40.0};
    const auto obs = sense_rays(w, eye_pose(w, a), cfg, a.body);
    // Backward rays (+/-180) start at the eye (head front, z = 0.4).
    CHECK(obs.distances[1] == doctest::Approx((5.75 + 0.4) / 40.0).epsilon(1e-9));
    CHECK(obs.colors[1] == Rgb{0.2, 0.3, 0.9});
    CHECK(obs.distances[0] == 1.0);
}

TEST_CASE("camera shape and value range") {
    World w;
    w.ensure_ground();
    w.add_static(box_part({0, 1, 5}, {2, 1, 0.25}, {1.0, 0.2, 0.2}));
    CameraConfig cfg;
    cfg.resolution = 8;
    cfg.grayscale = true;
    const Image img = render_camera(w, eye_at({0, 0.5, 0}, 0), cfg);
    CHECK(img.pixels.size() == 64);
    CHECK(img.channels == 1);
    for (const double v : img.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    cfg.grayscale = false;
    CHECK(render_camera(w, eye_at({0, 0.5, 0}, 0), cfg).pixels.size() == 192);
}

TEST_CASE("camera inside a one-color box sees only that color") {
    World w;
    const Rgb c{0.3, 0.7, 0.1};
    w.add_static(box_part({0, -1, 0}, {5, 0.5, 5}, c));
    w.add_static(box_part({0, 5, 0}, {5, 0.5, 5}, c));
    w.add_static(box_part({5, 2, 0}, {0.5, 4, 5}, c));
    w.add_static(box_part({-5, 2, 0}, {0.5, 4, 5}, c));
    w.add_static(box_part({0, 2, 5}, {5, 4, 0.5}, c));
    w.add_static(box_part({0, 2, -5}, {5, 4, 0.5}, c));
    CameraConfig cfg;
    cfg.resolution = 16;
    cfg.grayscale = true;
    for (const double heading : {0.0, 37.0, 200.0}) {
        const Image img = render_camera(w, eye_at({0.5, 1.0, -0.3}, heading), cfg);
        for (const double v : img.pixels) CHECK(v == doctest::Approx(luminance(c)).epsilon(1e-12));
    }
}

TEST_CASE("sphere ahead: centre pixel is the food color, corners are sky or floor") {
    World w;
    w.ensure_ground({0.4, 0.4, 0.4});
    const Rgb green{0.1, 0.9, 0.2};
    w.add_static(sphere_part({0, 0.5, 4}, 0.5, green));
    CameraConfig cfg;
    cfg.resolution = 33;
    const Image img = render_camera(w, eye_at({0, 0.5, 0}, 0), cfg);
    const auto px = [&](int r, int c) {
        const size_t i = static_cast<size_t>((r * 33 + c) * 3);
        return Rgb{img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]};
    };
    CHECK(px(16, 16) == green);
    CHECK(px(0, 0) == kSkyColor);
    CHECK(px(0, 32) == kSkyColor);
    CHECK(px(32, 0) == Rgb{0.4, 0.4, 0.4});
    CHECK(px(32, 32) == Rgb{0.4, 0.4, 0.4});

    // Independent oracle: every pixel direction classified against the
    // analytic sphere silhouette.
    const double half = std::tan(deg_to_rad(30.0));
    int mismatches = 0;
    for (int r = 0; r < 33; ++r)
        for (int c = 0; c < 33; ++c) {
            const double u = (2.0 * (c + 0.5) / 33 - 1.0) * half;
            const double v = (1.0 - 2.0 * (r + 0.5) / 33) * half;
            const Vec3 d = normalized(Vec3{-u, v, 1.0});
            const Vec3 oc{0, 0, 4};
            const double b = dot(d, oc);
            const bool hits = dot(oc, oc) - b * b < 0.25;
            if (hits != (px(r, c) == green)) ++mismatches;
        }
    CHECK(mismatches == 0);
}

TEST_CASE("transparent walls blend at 40% opacity") {
    World w;
    RigidPart glass = box_part({0, 1, 3}, {3, 3, 0.05}, {1.0, 1.0, 1.0});
    glass.transparent = true;
    w.add_static(glass);
    w.add_static(box_part({0, 1, 6}, {8, 8, 0.25}, {0.0, 0.0, 1.0}));
    CameraConfig cfg;
    cfg.resolution = 9;
    const Image img = render_camera(w, eye_at({0, 1, 0}, 0), cfg);
    const size_t centre = static_cast<size_t>((4 * 9 + 4) * 3);
    CHECK(img.pixels[centre] == doctest::Approx(0.4));
    CHECK(img.pixels[centre + 1] == doctest::Approx(0.4));
    CHECK(img.pixels[centre + 2] == doctest::Approx(1.0));
    // Rays still stop at the glass.
    const auto obs = sense_rays(w, eye_at({0, 1, 0}, 0), RaycastConfig{90, 1, 20});
    CHECK(obs.distances[0] == doctest::Approx(2.95 / 20));
}

TEST_CASE("camera centre pixel agrees with the forward ray across random scenes") {
    Rng rng(2024);
    int agree = 0;
    const int scenes = 500;
    for (int s = 0; s < scenes; ++s) {
        World w;
        w.ensure_ground();
        // Enclosed like a real arena, objects scattered around the view direction.
        w.add_static(box_part({0, 1, 20.25}, {20.5, 1, 0.25}));
        w.add_static(box_part({0, 1, -20.25}, {20.5, 1, 0.25}));
        w.add_static(box_part({20.25, 1, 0}, {0.25, 1, 20.5}));
        w.add_static(box_part({-20.25, 1, 0}, {0.25, 1, 20.5}));
        const double heading = rng.uniform(0, 360);
        const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{0, 0, heading, std::nullopt});
        const int objects = static_cast<int>(rng.uniform_int(1, 6));
        for (int k = 0; k < objects; ++k) {
            const double ang = deg_to_rad(heading) + rng.uniform(-0.5, 0.5);
            const double dist = rng.uniform(2, 15);
            const Vec3 pos{dist * std::sin(ang), rng.uniform(0.2, 1.5), dist * std::cos(ang)};
            if (rng.coin())
                w.add_static(box_part(pos, {rng.uniform(0.2, 2), rng.uniform(0.2, 1.5), rng.uniform(0.2, 2)}));
            else
                w.add_static(sphere_part(pos, rng.uniform(0.2, 1.0), {0.9, 0.8, 0.1}));
        }
        const EyePose eye = eye_pose(w, a);
        CameraConfig cfg;
        cfg.resolution = 84;
        std::vector<int> hits;
        render_camera(w, eye, cfg, a.body, &hits);
        const auto rays = sense_rays(w, eye, RaycastConfig{90, 1, 40}, a.body);
        const int centre = hits[static_cast<size_t>(42 * 84 + 42)];
        if (centre == rays.part_ids[0]) ++agree;
    }
    MESSAGE("centre agreement " << agree << "/" << scenes);
    CHECK(agree >= 475);
}

TEST_CASE("blackout schedule") {
    CHECK(BlackoutSchedule::period_for(0) == 200);
    CHECK(BlackoutSchedule::duration_for(0) == 10);
    CHECK(BlackoutSchedule::period_for(10) == 50);
    CHECK(BlackoutSchedule::duration_for(10) == 50);

    Rng rng(1);
    const BlackoutSchedule s = BlackoutSchedule::for_difficulty(3, rng);
    CHECK(s.phase >= 0);
    CHECK(s.phase < s.period);

    World w;
    w.add_static(box_part({0, 1, 5}, {2, 1, 0.25}, {1, 1, 1}));
    CameraConfig cfg;
    cfg.resolution = 8;
    const Image img = render_camera(w, eye_at({0, 1, 0}, 0), cfg);
    for (std::int64_t step = 0; step < 400; ++step) {
        Image copy = img;
        apply_blackout(copy, s, step);
        // Independent recomputation of the window.
        const bool inside = ((step + s.phase) % s.period) < s.duration;
        if (inside)
            CHECK(std::all_of(copy.pixels.begin(), copy.pixels.end(), [](double v) { return v == 0.0; }));
        else
            CHECK(copy == img);
    }
}

TEST_CASE("blackout duty cycle grows with difficulty") {
    Rng r1(11), r10(11);
    const auto s1 = BlackoutSchedule::for_difficulty(1, r1);
    const auto s10 = BlackoutSchedule::for_difficulty(10, r10);
    const double d1 = s1.duty_cycle(5000);
    const double d10 = s10.duty_cycle(5000);
    CHECK(d10 > d1);
    double prev = -1.0;
    for (int d = 0; d <= 10; ++d) {
        Rng r(3);
        const double duty = BlackoutSchedule::for_difficulty(d, r).duty_cycle(5000);
        CHECK(duty >= prev - 0.01);
        prev = duty;
    }
}

TEST_CASE("sensor config validation") {
    CHECK_THROWS_AS((RaycastConfig{4.0, 1, 40}.validate()), ConfigError);
    CHECK_THROWS_AS((RaycastConfig{90.0, 21, 40}.validate()), ConfigError);
    CHECK_NOTHROW((RaycastConfig{180.0, 20, 40}.validate()));
    CameraConfig c;
    c.resolution = 7;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.resolution = 512;
    CHECK_NOTHROW(c.validate());
}
