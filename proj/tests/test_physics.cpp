#include "aai/errors.hpp"
#include "aai/physics.hpp"
#include "aai/rng.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace aai;

namespace {

RigidPart sphere_part(const Vec3& pos, double r, double mass, Tag tag = Tag::wall) {
    RigidPart p;
    p.shape = Shape::sphere(r);
    p.mass = mass;
    p.position = pos;
    p.tag = tag;
    return p;
}

RigidPart box_part(const Vec3& pos, const Vec3& he, Tag tag = Tag::wall, const Quat& q = {}) {
    RigidPart p;
    p.shape = Shape::box(he);
    p.position = pos;
    p.orientation = q;
    p.tag = tag;
    return p;
}

// Root sphere with one capsule hanging off a two-axis joint.
World single_joint_world() {
    World w;
    RigidPart root = sphere_part({0, 5, 0}, 0.4, 0.5, Tag::agent_head);
    root.kinematic = false;
    root.id = 0;
    root.body = 0;
    w.parts.push_back(root);
    RigidPart limb;
    limb.id = 1;
    limb.shape = Shape::capsule(0.25, 0.08);
    limb.mass = 1.0;
    limb.kinematic = false;
    limb.body = 0;
    limb.tag = Tag::agent_limb;
    w.parts.push_back(limb);
    Joint2DOF j;
    j.parent = 0;
    j.child = 1;
    j.anchor = {0, 0, 0.4};
    j.rest = Quat::from_axis_angle({1, 0, 0}, -kPi / 2);  // limb points forward
    j.child_offset = {0, -0.25, 0};
    j.inertia = 0.08;
    w.joints.push_back(j);
    Body b;
    b.parts = {0, 1};
    b.joints = {0};
    w.bodies.push_back(b);
    w.sync_body(0);
    return w;
}

}  // namespace

TEST_CASE("sphere resting on the floor stays put") {
    World w;
    w.ensure_ground();
    const int id = w.add_dynamic(sphere_part({0, 0.5, 0}, 0.5, 1.0));
    const PhysicsConfig cfg;
    for (int i = 0; i < 100; ++i) step_physics(w, cfg);
    CHECK(std::abs(w.part(id).position.y - 0.5) < 1e-6);
    CHECK(std::abs(w.part(id).position.x) < 1e-6);
    CHECK(std::abs(w.part(id).position.z) < 1e-6);
}

TEST_CASE("free fall matches semi-implicit Euler closed form") {
    World w;
    const int id = w.add_dynamic(sphere_part({0, 100, 0}, 0.5, 1.0));
    const PhysicsConfig cfg;
    const int n = 50;
    for (int i = 0; i < n; ++i) step_physics(w, cfg);
    const double drop = 100.0 - w.part(id).position.y;
    // Semi-implicit Euler: y_n = -g dt^2 n(n+1)/2, which leads the exact
    // g t^2 / 2 by g dt^2 n / 2.
    const double dt = cfg.dt;
    const double discrete = cfg.gravity * dt * dt * n * (n + 1) / 2.0;
    const double exact = 0.5 * cfg.gravity * (n * dt) * (n * dt);
    CHECK(drop == doctest::Approx(discrete).epsilon(1e-12));
    CHECK(std::abs(drop - exact) <= cfg.gravity * dt * dt * n / 2.0 + 1e-9);
}

TEST_CASE("rotation motor approaches the 90 degree target monotonically") {
    World w = single_joint_world();
    PhysicsConfig cfg;
    cfg.gravity = 0.0;
    w.joints[0].target_x = 90.0;
    double prev = w.joints[0].angle_x;
    for (int i = 0; i < 300; ++i) {
        step_physics(w, cfg);
        const double a = w.joints[0].angle_x;
        CHECK(a >= prev);
        CHECK(a <= 90.0);
        prev = a;
    }
    CHECK(prev == doctest::Approx(90.0).epsilon(1e-3));
}

TEST_CASE("joint limits hold under random targets in both motor modes") {
    World w = single_joint_world();
    PhysicsConfig cfg;
    cfg.gravity = 0.0;
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        Joint2DOF& j = w.joints[0];
        j.mode = (i / 200) % 2 == 0 ? MotorMode::rotation : MotorMode::velocity;
        const double ax = rng.uniform(-1, 1);
        const double az = rng.uniform(-1, 1);
        j.target_x = j.mode == MotorMode::rotation ? 90.0 * ax : 360.0 * ax;
        j.target_z = j.mode == MotorMode::rotation ? 45.0 * az : 360.0 * az;
        step_physics(w, cfg);
        REQUIRE(std::abs(w.joints[0].angle_x) <= 90.0);
        REQUIRE(std::abs(w.joints[0].angle_z) <= 45.0);
        for (const RigidPart& p : w.parts) REQUIRE(std::abs(p.orientation.norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("velocity motor converges to the commanded rate") {
    World w = single_joint_world();
    PhysicsConfig cfg;
    cfg.gravity = 0.0;
    w.joints[0].mode = MotorMode::velocity;
    w.joints[0].target_z = 20.0;
    for (int i = 0; i < 40; ++i) step_physics(w, cfg);
    CHECK(w.joints[0].angular_velocity_z == doctest::Approx(20.0).epsilon(1e-6));
}

TEST_CASE("contact events") {
    World w;
    w.ensure_ground();
    PhysicsConfig cfg;
    cfg.gravity = 0.0;

    SUBCASE("no overlaps gives an empty list") {
        w.add_dynamic(sphere_part({0, 3, 0}, 0.4, 0.5, Tag::agent_head));
        w.add_static(box_part({5, 1, 0}, {0.25, 1, 2}));
        step_physics(w, cfg);
        CHECK(query_contacts(w).empty());
    }
    SUBCASE("head overlapping a wall box") {
        const int head = w.add_dynamic(sphere_part({0, 3, 0}, 0.4, 0.5, Tag::agent_head));
        const int wall = w.add_static(box_part({0.5, 3, 0}, {0.25, 1, 2}));
        step_physics(w, cfg);
        const auto& events = query_contacts(w);
        REQUIRE(events.size() == 1);
        CHECK(events[0].part_a == std::min(head, wall));
        CHECK(events[0].part_b == std::max(head, wall));
        CHECK(((events[0].tag_a == Tag::agent_head && events[0].tag_b == Tag::wall) ||
               (events[0].tag_a == Tag::wall && events[0].tag_b == Tag::agent_head)));
    }
    SUBCASE("limb capsule against a food sphere, checked against segment distance") {
        Rng rng(5);
        for (int trial = 0; trial < 200; ++trial) {
            World s;
            RigidPart leg;
            leg.shape = Shape::capsule(0.25, 0.08);
            leg.mass = 1.0;
            leg.tag = Tag::agent_limb;
            leg.position = {0, 3, 0};
            leg.orientation = Quat::from_axis_angle({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                                    rng.uniform(0, kPi));
            const int leg_id = s.add_dynamic(leg);
            RigidPart food = sphere_part({rng.uniform(-0.6, 0.6), 3 + rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)},
                                         0.25, 0.0, Tag::food_green);
            food.solid = false;
            s.add_static(food);
            // analytic capsule-sphere distance
            const auto [a, b] = capsule_segment(s.part(leg_id));
            const Vec3 ab = b - a;
            const double t = std::clamp(dot(food.position - a, ab) / dot(ab, ab), 0.0, 1.0);
            const double gap = norm(food.position - (a + ab * t)) - 0.25 - 0.08;
            if (std::abs(gap) < 0.02) continue;  // too close to the margin to classify
            const auto events = detect_contacts(s, 0.01);
            CHECK(events.size() == (gap < 0.01 ? 1u : 0u));
            if (!events.empty()) {
                CHECK(events[0].tag_a == Tag::agent_limb);
                CHECK(events[0].tag_b == Tag::food_green);
            }
        }
    }
}

TEST_CASE("raycast examples") {
    World w;
    SUBCASE("unit box five metres ahead") {
        w.add_static(box_part({0, 0, 5}, {0.5, 0.5, 0.5}));
        const auto hit = raycast(w, {0, 0, 0}, {0, 0, 1}, 20.0);
        REQUIRE(hit);
        CHECK(hit->distance == doctest::Approx(4.5).epsilon(1e-12));
    }
    SUBCASE("empty scene misses") {
        w.ensure_ground();
        CHECK_FALSE(raycast(w, {0, 1, 0}, {0, 1, 0}, 100.0));
    }
    SUBCASE("flat floor at 45 degrees") {
        w.ensure_ground();
        const auto hit = raycast(w, {0, 1, 0}, normalized(Vec3{0, -1, 1}), 100.0);
        REQUIRE(hit);
        CHECK(std::abs(hit->distance - std::sqrt(2.0)) < 1e-6);
        CHECK(hit->tag == Tag::floor);
    }
    SUBCASE("rays pass through holes") {
        w.ensure_ground();
        w.terrain.holes.push_back({-1, 1, 0.5, 1.5});
        CHECK_FALSE(raycast(w, {0, 1, 0}, normalized(Vec3{0, -1, 1}), 100.0));
    }
    SUBCASE("excluded body is invisible") {
        const int id = w.add_dynamic(sphere_part({0, 0, 3}, 0.5, 1.0));
        RayFilter f;
        f.exclude_body = w.part(id).body;
        CHECK(raycast(w, {0, 0, 0}, {0, 0, 1}, 20.0));
        CHECK_FALSE(raycast(w, {0, 0, 0}, {0, 0, 1}, 20.0, f));
    }
}

TEST_CASE("raycast agrees with a sphere-tracing oracle on random scenes") {
    Rng rng(2024);
    int hits = 0;
    for (int scene = 0; scene < 300; ++scene) {
        World w;
        w.ensure_ground();
        oracle::SdfScene sdf;
        sdf.plane_y = 0.0;
        const int objects = static_cast<int>(rng.uniform_int(1, 6));
        for (int k = 0; k < objects; ++k) {
            const Vec3 c{rng.uniform(-8, 8), rng.uniform(0.5, 4), rng.uniform(-8, 8)};
            const Quat q = Quat::from_axis_angle({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                                 rng.uniform(0, 2 * kPi));
            switch (rng.uniform_int(0, 2)) {
                case 0: {
                    const double r = rng.uniform(0.2, 1.5);
                    w.add_static(sphere_part(c, r, 0.0));
                    sdf.spheres.push_back({c, r});
                    break;
                }
                case 1: {
                    RigidPart p;
                    p.shape = Shape::capsule(rng.uniform(0.1, 1.0), rng.uniform(0.1, 0.6));
                    p.position = c;
                    p.orientation = q;
                    w.add_static(p);
                    const auto [a, b] = capsule_segment(w.parts.back());
                    sdf.capsules.push_back({a, b, p.shape.radius});
                    break;
                }
                default: {
                    const Vec3 he{rng.uniform(0.1, 1.5), rng.uniform(0.1, 1.5), rng.uniform(0.1, 1.5)};
                    w.add_static(box_part(c, he, Tag::wall, q));
                    sdf.boxes.push_back({c, q, he});
                    break;
                }
            }
        }
        for (int r = 0; r < 4; ++r) {
            const Vec3 o{rng.uniform(-12, 12), rng.uniform(0.2, 6), rng.uniform(-12, 12)};
            if (sdf.distance(o) <= 0.05) continue;
            const Vec3 d = normalized(Vec3{rng.uniform(-1, 1), rng.uniform(-1, 0.3), rng.uniform(-1, 1)});
            const auto got = raycast(w, o, d, 40.0);
            const auto want = sdf.trace(o, d, 40.0);
            REQUIRE(got.has_value() == want.has_value());
            if (got) {
                ++hits;
                CHECK(std::abs(got->distance - *want) <= 1e-6);
            }
        }
    }
    CHECK(hits > 500);
}

TEST_CASE("heightfield raycast agrees with a marching oracle") {
    Rng rng(77);
    for (int scene = 0; scene < 20; ++scene) {
        Heightfield hf;
        hf.resolution = 9;
        hf.cell_size = 1.0;
        hf.origin_x = -4;
        hf.origin_z = -4;
        for (int i = 0; i < 81; ++i) hf.heights.push_back(rng.uniform(-0.5, 0.5));
        World w;
        w.ensure_ground();
        w.terrain.heightfield = hf;
        const oracle::GridHeights grid{9, 1.0, -4, -4, hf.heights};
        for (int r = 0; r < 10; ++r) {
            const Vec3 o{rng.uniform(-3.5, 3.5), rng.uniform(0.8, 2.0), rng.uniform(-3.5, 3.5)};
            const Vec3 d = normalized(Vec3{rng.uniform(-1, 1), rng.uniform(-1, -0.15), rng.uniform(-1, 1)});
            // keep the probe inside the grid footprint
            const double reach = 2.0 / -d.y;
            const Vec3 far = o + d * reach;
            if (std::abs(far.x) > 3.9 || std::abs(far.z) > 3.9) continue;
            const auto got = ray_terrain(w.terrain, o, d, reach);
            const auto want = grid.trace(o, d, reach);
            REQUIRE(got.has_value() == want.has_value());
            if (got) CHECK(std::abs(*got - *want) < 1e-6);
        }
    }
}

TEST_CASE("stepping is deterministic") {
    const auto make = [] {
        World w;
        w.ensure_ground();
        w.add_dynamic(sphere_part({0, 2, 0}, 0.5, 1.0));
        RigidPart plank = box_part({0.3, 4, 0.1}, {0.2, 1.0, 0.6}, Tag::plank,
                                   Quat::from_axis_angle({1, 0, 1}, 0.3));
        plank.mass = 4.0;
        w.add_dynamic(plank);
        w.add_static(box_part({3, 1, 0}, {0.25, 1, 3}));
        return w;
    };
    World a = make();
    World b = make();
    const PhysicsConfig cfg;
    for (int i = 0; i < 300; ++i) {
        step_physics(a, cfg);
        step_physics(b, cfg);
    }
    CHECK(a == b);
    for (const RigidPart& p : a.parts) CHECK(std::abs(p.orientation.norm() - 1.0) < 1e-9);
}

TEST_CASE("dropped box settles on the floor") {
    World w;
    w.ensure_ground();
    RigidPart b = box_part({0, 2, 0}, {0.5, 0.25, 0.5}, Tag::plank, Quat::from_axis_angle({1, 0, 0.3}, 0.4));
    b.mass = 3.0;
    const int id = w.add_dynamic(b);
    const PhysicsConfig cfg;
    for (int i = 0; i < 600; ++i) step_physics(w, cfg);
    const RigidPart& p = w.part(id);
    CHECK(std::abs(p.position.y - 0.25) < 0.02);
    CHECK(norm(p.linear_velocity) < 0.05);
}

TEST_CASE("non-finite state raises simulation-diverged with the part id") {
    World w;
    const int id = w.add_dynamic(sphere_part({0, 2, 0}, 0.5, 1.0));
    w.bodies[0].velocity = {std::nan(""), 0, 0};
    try {
        step_physics(w, PhysicsConfig{});
        FAIL("expected SimulationDiverged");
    } catch (const SimulationDiverged& e) {
        CHECK(e.part_id() == id);
        CHECK(e.code() == "simulation-diverged");
    }
}

TEST_CASE("invalid physics config is rejected") {
    World w;
    PhysicsConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(step_physics(w, cfg), ConfigError);
    cfg = {};
    cfg.torque_max = -1.0;
    CHECK_THROWS_AS(step_physics(w, cfg), ConfigError);
}
