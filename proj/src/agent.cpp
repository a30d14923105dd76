#include "aai/agent.hpp"
#include "aai/errors.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace aai {

namespace {

// Lowest clearance of the part above the terrain; nullopt if every sample
// point is over a hole.
std::optional<double> clearance(const Terrain& t, const RigidPart& p) {
    std::optional<double> best;
    const auto sample = [&](const Vec3& c, double r) {
        const auto h = t.height(c.x, c.z);
        if (!h) return;
        const double gap = c.y - r - *h;
        if (!best || gap < *best) best = gap;
    };
    if (p.shape.kind == ShapeKind::capsule) {
        const auto [a, b] = capsule_segment(p);
        sample(a, p.shape.radius);
        sample(b, p.shape.radius);
    } else {
        sample(p.position, p.shape.radius);
    }
    return best;
}

double subtree_inertia(const World& w, const Body& b, std::span<const int> subtree, const Vec3& anchor) {
    double total = 0.0;
    for (const int id : subtree) {
        const RigidPart& p = w.part(id);
        const auto it = std::find(b.parts.begin(), b.parts.end(), id);
        const Vec3 c = b.local[static_cast<size_t>(it - b.parts.begin())].position;
        const Vec3 d = c - anchor;
        const Mat3 own = shape_inertia(p.shape, p.mass);
        total += p.mass * dot(d, d) + own(0, 0);
    }
    return total;
}

}  // namespace

Agent assemble_agent(World& world, const AgentSpec& spec, const SpawnPose& pose) {
    World& w = world;
    Agent agent;
    agent.spec = spec;
    agent.body = static_cast<int>(w.bodies.size());

    const auto add_part = [&](const Shape& shape, double mass, Tag tag, const Rgb& color) {
        RigidPart p;
        p.id = static_cast<int>(w.parts.size());
        p.shape = shape;
        p.mass = mass;
        p.tag = tag;
        p.color = color;
        p.kinematic = false;
        p.body = agent.body;
        w.parts.push_back(p);
        return p.id;
    };

    Body body;
    agent.head = add_part(Shape::sphere(spec.head_radius), spec.head_mass, Tag::agent_head, spec.head_color);
    body.parts.push_back(agent.head);
    for (int i = 0; i < 4; ++i) {
        agent.thighs[static_cast<size_t>(i)] = add_part(Shape::capsule(0.5 * spec.thigh_length, spec.thigh_radius),
                                                        spec.limb_mass, Tag::agent_limb, spec.limb_color);
        body.parts.push_back(agent.thighs[static_cast<size_t>(i)]);
    }
    for (int i = 0; i < 4; ++i) {
        agent.legs[static_cast<size_t>(i)] = add_part(Shape::capsule(0.5 * spec.leg_length, spec.leg_radius),
                                                      spec.limb_mass, Tag::agent_limb, spec.limb_color);
        body.parts.push_back(agent.legs[static_cast<size_t>(i)]);
    }

    std::array<double, 4> azimuths = spec.attachment_azimuths;
    std::sort(azimuths.begin(), azimuths.end());
    const Vec3 up{0, 1, 0};
    for (int i = 0; i < 4; ++i) {
        const double az = deg_to_rad(azimuths[static_cast<size_t>(i)]);
        const Vec3 out{std::sin(az), 0.0, std::cos(az)};
        const Vec3 tangent = cross(up, out);
        // Thigh frame: X tangent (up/down hinge), -Y outward along the limb, Z up.
        Joint2DOF hip;
        hip.parent = agent.head;
        hip.child = agent.thighs[static_cast<size_t>(i)];
        hip.anchor = out * spec.head_radius;
        hip.rest = Quat::from_matrix(Mat3::from_columns(tangent, -out, up));
        hip.child_offset = {0.0, -0.5 * spec.thigh_length, 0.0};
        agent.joints[static_cast<size_t>(i)] = static_cast<int>(w.joints.size());
        w.joints.push_back(hip);
    }
    for (int i = 0; i < 4; ++i) {
        // Leg hangs straight down from the thigh tip at rest.
        Joint2DOF knee;
        knee.parent = agent.thighs[static_cast<size_t>(i)];
        knee.child = agent.legs[static_cast<size_t>(i)];
        knee.anchor = {0.0, -0.5 * spec.thigh_length, 0.0};
        knee.rest = Quat::from_axis_angle({1, 0, 0}, 0.5 * kPi);
        knee.child_offset = {0.0, -0.5 * spec.leg_length, 0.0};
        agent.joints[static_cast<size_t>(4 + i)] = static_cast<int>(w.joints.size());
        w.joints.push_back(knee);
    }
    for (const int j : agent.joints) body.joints.push_back(j);
    w.bodies.push_back(body);

    RigidPart& head = w.part(agent.head);
    head.orientation = Quat::from_yaw(deg_to_rad(pose.heading_deg));
    head.position = {pose.x, pose.y.value_or(0.0), pose.z};
    w.sync_body(agent.body);

    // Effective inertia seen by each joint motor, from the rest layout.
    const Body& placed = w.bodies[static_cast<size_t>(agent.body)];
    for (int i = 0; i < 4; ++i) {
        Joint2DOF& hip = w.joints[static_cast<size_t>(agent.joints[static_cast<size_t>(i)])];
        const std::array<int, 2> sub{agent.thighs[static_cast<size_t>(i)], agent.legs[static_cast<size_t>(i)]};
        hip.inertia = subtree_inertia(w, placed, sub, hip.anchor);
        Joint2DOF& knee = w.joints[static_cast<size_t>(agent.joints[static_cast<size_t>(4 + i)])];
        const auto it = std::find(placed.parts.begin(), placed.parts.end(), agent.thighs[static_cast<size_t>(i)]);
        const PartPose& thigh_pose = placed.local[static_cast<size_t>(it - placed.parts.begin())];
        const Vec3 knee_anchor = thigh_pose.position + thigh_pose.orientation.rotate(knee.anchor);
        const std::array<int, 1> leg{agent.legs[static_cast<size_t>(i)]};
        knee.inertia = subtree_inertia(w, placed, leg, knee_anchor);
    }

    if (!pose.y) {
        std::optional<double> lowest;
        for (const int id : placed.parts) {
            const auto c = clearance(w.terrain, w.part(id));
            if (c && (!lowest || *c < *lowest)) lowest = c;
        }
        if (!lowest) throw SpawnRejected("no terrain under spawn pose");
        w.part(agent.head).position.y -= *lowest - 1e-6;
        w.sync_body(agent.body);
    }

    for (const int id : placed.parts) {
        const RigidPart& p = w.part(id);
        for (const RigidPart& s : w.parts) {
            if (s.body >= 0 || !s.active || !s.solid || s.shape.kind == ShapeKind::ground) continue;
            if (auto c = part_contact(p, s, 0.0); c && c->penetration > 0.0)
                throw SpawnRejected("agent part " + std::to_string(p.id) + " overlaps part " + std::to_string(s.id));
        }
    }
    return agent;
}

void apply_action(World& world, const Agent& agent, std::span<const double> action, const ActionMode& mode) {
    if (action.size() != static_cast<size_t>(kActionSize))
        throw MalformedAction("expected " + std::to_string(kActionSize) + " action components, got " +
                              std::to_string(action.size()));
    for (const double a : action)
        if (!std::isfinite(a)) throw MalformedAction("non-finite action component");
    for (int j = 0; j < kJointCount; ++j) {
        Joint2DOF& joint = world.joints[static_cast<size_t>(agent.joints[static_cast<size_t>(j)])];
        const double ax = std::clamp(action[static_cast<size_t>(2 * j)], -1.0, 1.0);
        const double az = std::clamp(action[static_cast<size_t>(2 * j + 1)], -1.0, 1.0);
        joint.mode = mode.mode;
        if (mode.mode == MotorMode::rotation) {
            joint.target_x = ax * kJointLimitX;
            joint.target_z = az * kJointLimitZ;
        } else {
            joint.target_x = ax * mode.omega_max;
            joint.target_z = az * mode.omega_max;
        }
    }
}

std::vector<double> proprioception(const World& world, const Agent& agent, bool with_velocities,
                                   double omega_max) {
    std::vector<double> out;
    out.reserve(with_velocities ? 2 * kActionSize : kActionSize);
    for (const int ji : agent.joints) {
        const Joint2DOF& j = world.joints[static_cast<size_t>(ji)];
        out.push_back(std::clamp(j.angle_x / kJointLimitX, -1.0, 1.0));
        out.push_back(std::clamp(j.angle_z / kJointLimitZ, -1.0, 1.0));
    }
    if (with_velocities) {
        for (const int ji : agent.joints) {
            const Joint2DOF& j = world.joints[static_cast<size_t>(ji)];
            out.push_back(std::clamp(j.angular_velocity_x / omega_max, -1.0, 1.0));
            out.push_back(std::clamp(j.angular_velocity_z / omega_max, -1.0, 1.0));
        }
    }
    return out;
}

EyePose eye_pose(const World& world, const Agent& agent) {
    const RigidPart& head = world.part(agent.head);
    EyePose eye;
    eye.heading = heading_of(head.orientation);
    eye.orientation = head.orientation;
    const Vec3 forward{std::sin(eye.heading), 0.0, std::cos(eye.heading)};
    eye.position = head.position + forward * head.shape.radius;
    return eye;
}

Vec3 agent_center_of_mass(const World& world, const Agent& agent) {
    const Body& b = world.bodies[static_cast<size_t>(agent.body)];
    Vec3 sum;
    double mass = 0.0;
    for (const int id : b.parts) {
        const RigidPart& p = world.part(id);
        sum += p.position * p.mass;
        mass += p.mass;
    }
    return sum / mass;
}

void teleport_agent(World& world, const Agent& agent, const Vec3& position) {
    Body& b = world.bodies[static_cast<size_t>(agent.body)];
    const Vec3 delta = position - world.part(agent.head).position;
    for (const int id : b.parts) {
        RigidPart& p = world.part(id);
        p.position += delta;
        p.linear_velocity = {};
        p.angular_velocity = {};
    }
    b.velocity = {};
    b.angular_velocity = {};
}

}  // namespace aai
