#pragma once

#include "aai/physics.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace aai {

inline constexpr int kJointCount = 8;
inline constexpr int kActionSize = 2 * kJointCount;

/// Morphology of the four-legged agent: a spherical head with four thighs
/// attached around its equator and a leg hanging from the end of each thigh.
struct AgentSpec {
    double head_mass = 0.5;
    double limb_mass = 1.0;
    double head_radius = 0.4;
    double thigh_length = 0.5;
    double thigh_radius = 0.10;
    double leg_length = 0.5;
    double leg_radius = 0.08;
    // Degrees, counter-clockwise seen from above, 0 = straight ahead.
    std::array<double, 4> attachment_azimuths{45.0, 135.0, 225.0, 315.0};
    Rgb head_color{0.85, 0.55, 0.35};
    Rgb limb_color{0.75, 0.45, 0.30};

    double total_mass() const { return head_mass + 8.0 * limb_mass; }
    bool operator==(const AgentSpec&) const = default;
};

struct SpawnPose {
    double x = 0.0;
    double z = 0.0;
    double heading_deg = 0.0;
    /// Head centre height. When absent the agent is lowered onto the terrain.
    std::optional<double> y;

    bool operator==(const SpawnPose&) const = default;
};

struct ActionMode {
    MotorMode mode = MotorMode::rotation;
    double omega_max = 180.0;  // deg/s, velocity mode

    bool operator==(const ActionMode&) const = default;
};

/// Handles to an assembled agent. Joints 0-3 connect head and thighs,
/// joints 4-7 thighs and legs, each group ordered by attachment azimuth.
struct Agent {
    AgentSpec spec;
    int body = -1;
    int head = -1;
    std::array<int, 4> thighs{};
    std::array<int, 4> legs{};
    std::array<int, kJointCount> joints{};

    bool operator==(const Agent&) const = default;
};

/// Registers the agent in `world` with all joint angles at zero. Throws
/// SpawnRejected when the pose overlaps a solid static part or has no
/// terrain underneath.
Agent assemble_agent(World& world, const AgentSpec& spec, const SpawnPose& pose);

/// Maps a 16-component action in [-1, 1] onto joint targets. Components are
/// clamped; wrong length or non-finite entries throw MalformedAction without
/// touching the joints.
void apply_action(World& world, const Agent& agent, std::span<const double> action, const ActionMode& mode);

/// Joint angles normalized to [-1, 1] (x / 90, z / 45) in action order,
/// followed by joint rates / omega_max when `with_velocities` is set.
std::vector<double> proprioception(const World& world, const Agent& agent, bool with_velocities = false,
                                   double omega_max = 180.0);

struct EyePose {
    Vec3 position;
    double heading = 0.0;  // radians
    Quat orientation;      // head orientation
};

/// The eye sits on the head surface at head-centre height, facing along the
/// horizontal heading.
EyePose eye_pose(const World& world, const Agent& agent);

/// Centre of mass of the agent's parts.
Vec3 agent_center_of_mass(const World& world, const Agent& agent);

/// Moves the whole agent rigidly so its head centre lands at `position`
/// (debug helper for scripted policies); velocities are cleared.
void teleport_agent(World& world, const Agent& agent, const Vec3& position);

}  // namespace aai
