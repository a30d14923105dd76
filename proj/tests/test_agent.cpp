#include "aai/agent.hpp"
#include "aai/errors.hpp"
#include "aai/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace aai;

namespace {

World flat_world() {
    World w;
    w.ensure_ground();
    return w;
}

std::vector<double> zeros() { return std::vector<double>(kActionSize, 0.0); }

double lowest_point(const RigidPart& p) {
    if (p.shape.kind == ShapeKind::capsule) {
        const auto [a, b] = capsule_segment(p);
        return std::min(a.y, b.y) - p.shape.radius;
    }
    return p.position.y - p.shape.radius;
}

}  // namespace

TEST_CASE("default agent has nine parts, eight joints and mass 8.5") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    const Body& b = w.bodies[static_cast<size_t>(a.body)];
    CHECK(b.parts.size() == 9);
    CHECK(b.joints.size() == 8);
    double mass = 0.0;
    for (const int id : b.parts) mass += w.part(id).mass;
    CHECK(mass == doctest::Approx(8.5).epsilon(1e-12));
    CHECK(w.part(a.head).mass == 0.5);
    for (const int ji : a.joints) {
        CHECK(w.joints[static_cast<size_t>(ji)].angle_x == 0.0);
        CHECK(w.joints[static_cast<size_t>(ji)].angle_z == 0.0);
    }
    // Feet touch the floor; the head is clear of it.
    double lowest = 1e9;
    for (const int id : b.parts) lowest = std::min(lowest, lowest_point(w.part(id)));
    CHECK(std::abs(lowest) < 1e-3);
    CHECK(lowest_point(w.part(a.head)) > 0.1);
}

TEST_CASE("thighs point out at their attachment azimuths and legs hang down") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    const Vec3 head = w.part(a.head).position;
    const double az[4] = {45, 135, 225, 315};
    for (int i = 0; i < 4; ++i) {
        const Vec3 d = w.part(a.thighs[static_cast<size_t>(i)]).position - head;
        const double r = deg_to_rad(az[i]);
        CHECK(d.x == doctest::Approx(0.65 * std::sin(r)).epsilon(1e-12));
        CHECK(d.z == doctest::Approx(0.65 * std::cos(r)).epsilon(1e-12));
        CHECK(std::abs(d.y) < 1e-12);
        const Vec3 l = w.part(a.legs[static_cast<size_t>(i)]).position - head;
        CHECK(l.x == doctest::Approx(0.9 * std::sin(r)).epsilon(1e-12));
        CHECK(l.y == doctest::Approx(-0.25).epsilon(1e-12));
    }
}

TEST_CASE("heading rotates the whole agent and the eye") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{2.0, -3.0, 90.0, std::nullopt});
    const EyePose eye = eye_pose(w, a);
    CHECK(eye.heading == doctest::Approx(kPi / 2));
    CHECK(eye.position.x == doctest::Approx(2.4));
    CHECK(eye.position.z == doctest::Approx(-3.0));
    CHECK(eye.position.y == doctest::Approx(w.part(a.head).position.y));
}

TEST_CASE("spawning inside a wall is rejected") {
    World w = flat_world();
    RigidPart wall;
    wall.shape = Shape::box({0.25, 1.0, 2.0});
    wall.position = {0.0, 1.0, 0.0};
    w.add_static(wall);
    CHECK_THROWS_AS(assemble_agent(w, AgentSpec{}, SpawnPose{}), SpawnRejected);
    World clear = flat_world();
    RigidPart far = wall;
    far.position = {5.0, 1.0, 0.0};
    clear.add_static(far);
    CHECK_NOTHROW(assemble_agent(clear, AgentSpec{}, SpawnPose{}));
}

TEST_CASE("spawn on rough heightfield: feet in contact, nothing below the surface") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        World w = flat_world();
        Heightfield hf;
        hf.resolution = 21;
        hf.cell_size = 0.5;
        hf.origin_x = -5.0;
        hf.origin_z = -5.0;
        for (int i = 0; i < 21 * 21; ++i) hf.heights.push_back(rng.uniform(-0.3, 0.3));
        w.terrain.heightfield = hf;
        const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{rng.uniform(-1, 1), rng.uniform(-1, 1),
                                                                 rng.uniform(0, 360), std::nullopt});
        const Body& b = w.bodies[static_cast<size_t>(a.body)];
        double min_gap = 1e9;
        for (const int id : b.parts) {
            const RigidPart& p = w.part(id);
            if (p.shape.kind == ShapeKind::capsule) {
                // Sample the capsule's bottom along its axis against the surface.
                const auto [e0, e1] = capsule_segment(p);
                for (int k = 0; k <= 20; ++k) {
                    const Vec3 c = e0 + (e1 - e0) * (k / 20.0);
                    min_gap = std::min(min_gap, c.y - p.shape.radius - *w.terrain.height(c.x, c.z));
                }
            } else {
                min_gap = std::min(min_gap, p.position.y - p.shape.radius -
                                                *w.terrain.height(p.position.x, p.position.z));
            }
        }
        CHECK(min_gap > -1e-3);
        // The lowest foot rests on the surface.
        double foot_gap = 1e9;
        for (const int id : a.legs) {
            const auto [e0, e1] = capsule_segment(w.part(id));
            const Vec3 tip = e0.y < e1.y ? e0 : e1;
            foot_gap = std::min(foot_gap, tip.y - w.part(id).shape.radius - *w.terrain.height(tip.x, tip.z));
        }
        CHECK(std::abs(foot_gap) < 1e-3);
    }
}

TEST_CASE("rotation-mode action mapping") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    std::vector<double> act = zeros();
    apply_action(w, a, act, ActionMode{});
    for (const int ji : a.joints) {
        CHECK(w.joints[static_cast<size_t>(ji)].target_x == 0.0);
        CHECK(w.joints[static_cast<size_t>(ji)].target_z == 0.0);
    }
    act[0] = 1.0;
    act[15] = -3.0;  // clamped
    apply_action(w, a, act, ActionMode{});
    CHECK(w.joints[static_cast<size_t>(a.joints[0])].target_x == 90.0);
    CHECK(w.joints[static_cast<size_t>(a.joints[7])].target_z == -45.0);
}

TEST_CASE("velocity-mode action mapping") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    std::vector<double> act = zeros();
    act[7] = 0.5;  // joint3.z
    apply_action(w, a, act, ActionMode{MotorMode::velocity, 180.0});
    const Joint2DOF& j3 = w.joints[static_cast<size_t>(a.joints[3])];
    CHECK(j3.mode == MotorMode::velocity);
    CHECK(j3.target_z == 90.0);
    CHECK(j3.target_x == 0.0);
}

TEST_CASE("malformed actions leave joints untouched") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    std::vector<double> act = zeros();
    act[2] = 0.7;
    apply_action(w, a, act, ActionMode{});
    const World before = w;
    std::vector<double> shortv(15, 0.1);
    CHECK_THROWS_AS(apply_action(w, a, shortv, ActionMode{}), MalformedAction);
    std::vector<double> longv(17, 0.1);
    CHECK_THROWS_AS(apply_action(w, a, longv, ActionMode{}), MalformedAction);
    std::vector<double> nan = zeros();
    nan[4] = std::nan("");
    CHECK_THROWS_AS(apply_action(w, a, nan, ActionMode{}), MalformedAction);
    CHECK(w == before);
}

TEST_CASE("action mapping is odd-symmetric") {
    Rng rng(5);
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> act(kActionSize);
        for (double& v : act) v = rng.uniform(-1.5, 1.5);
        const ActionMode mode{trial % 2 ? MotorMode::velocity : MotorMode::rotation, 180.0};
        apply_action(w, a, act, mode);
        std::vector<double> pos;
        for (const int ji : a.joints) {
            pos.push_back(w.joints[static_cast<size_t>(ji)].target_x);
            pos.push_back(w.joints[static_cast<size_t>(ji)].target_z);
        }
        for (double& v : act) v = -v;
        apply_action(w, a, act, mode);
        for (int j = 0; j < kJointCount; ++j) {
            CHECK(w.joints[static_cast<size_t>(a.joints[static_cast<size_t>(j)])].target_x == -pos[2 * j]);
            CHECK(w.joints[static_cast<size_t>(a.joints[static_cast<size_t>(j)])].target_z == -pos[2 * j + 1]);
        }
    }
}

TEST_CASE("proprioception examples") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    for (const double v : proprioception(w, a)) CHECK(v == 0.0);
    w.joints[static_cast<size_t>(a.joints[0])].angle_x = 45.0;
    w.joints[static_cast<size_t>(a.joints[7])].angle_z = -45.0;
    const auto p = proprioception(w, a);
    REQUIRE(p.size() == 16);
    CHECK(p[0] == 0.5);
    CHECK(p[15] == -1.0);
    CHECK(proprioception(w, a, true).size() == 32);
}

TEST_CASE("proprioception stays in [-1, 1] under random driving") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    Rng rng(17);
    const PhysicsConfig cfg;
    std::vector<double> act(kActionSize);
    for (int s = 0; s < 400; ++s) {
        for (double& v : act) v = rng.uniform(-1, 1);
        apply_action(w, a, act, ActionMode{s < 200 ? MotorMode::rotation : MotorMode::velocity, 180.0});
        step_physics(w, cfg);
        for (const double v : proprioception(w, a, true)) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("assembly is deterministic") {
    World w1 = flat_world();
    World w2 = flat_world();
    const SpawnPose pose{1.5, 2.5, 33.0, std::nullopt};
    const Agent a1 = assemble_agent(w1, AgentSpec{}, pose);
    const Agent a2 = assemble_agent(w2, AgentSpec{}, pose);
    CHECK(a1 == a2);
    CHECK(w1 == w2);
}

TEST_CASE("resting agent keeps its centre-of-mass height") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    const double y0 = agent_center_of_mass(w, a).y;
    apply_action(w, a, zeros(), ActionMode{});
    const PhysicsConfig cfg;
    for (int s = 0; s < 500; ++s) {
        step_physics(w, cfg);
        const double y = agent_center_of_mass(w, a).y;
        REQUIRE(std::abs(y - y0) <= 0.1 * std::abs(y0));
    }
    CHECK(!w.fell);
}

TEST_CASE("a periodic gait moves the agent") {
    World w = flat_world();
    const Agent a = assemble_agent(w, AgentSpec{}, SpawnPose{});
    const Vec3 start = agent_center_of_mass(w, a);
    const PhysicsConfig cfg;
    std::vector<double> act = zeros();
    for (int s = 0; s < 500; ++s) {
        const double phase = 2.0 * kPi * s / 25.0;
        for (int j = 0; j < 4; ++j) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            act[static_cast<size_t>(2 * j)] = 0.5 * std::sin(phase + sign);    // lift
            act[static_cast<size_t>(2 * j + 1)] = 0.8 * std::cos(phase + sign);  // swing
        }
        apply_action(w, a, act, ActionMode{});
        step_physics(w, cfg);
    }
    const Vec3 end = agent_center_of_mass(w, a);
    const double moved = std::hypot(end.x - start.x, end.z - start.z);
    MESSAGE("gait displacement " << moved);
    CHECK(moved > 0.5);
}
