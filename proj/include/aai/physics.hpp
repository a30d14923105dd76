#pragma once

// Minimal rigid-body dynamics for the arena: primitive shapes, articulated
// bodies driven by two-axis joint motors, projection-based contacts, a
// terrain with rectangular holes, and ray queries.
//
// A Body is a group of parts that move as one composite rigid body. The
// agent is a single Body whose part layout is re-derived from joint angles
// every step; joint motion shows up as a relative velocity at contact points,
// which is what lets friction propel the body.

#include "aai/math.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace aai {

enum class ShapeKind : std::uint8_t { sphere, capsule, box, ground };

/// Capsules run along their local Y axis.
struct Shape {
    ShapeKind kind = ShapeKind::sphere;
    double radius = 0.0;       // sphere, capsule
    double half_length = 0.0;  // capsule segment half-length
    Vec3 half_extents{};       // box

    static Shape sphere(double r) { return {ShapeKind::sphere, r, 0.0, {}}; }
    static Shape capsule(double half_len, double r) { return {ShapeKind::capsule, r, half_len, {}}; }
    static Shape box(const Vec3& he) { return {ShapeKind::box, 0.0, 0.0, he}; }
    static Shape ground() { return {ShapeKind::ground, 0.0, 0.0, {}}; }

    bool operator==(const Shape&) const = default;
};

enum class Tag : std::uint8_t {
    agent_head,
    agent_limb,
    wall,
    food_green,
    food_yellow,
    plank,
    pillar,
    floor,
    arena_bound,
};

std::string_view to_string(Tag tag);
inline bool is_agent(Tag t) { return t == Tag::agent_head || t == Tag::agent_limb; }
inline bool is_food(Tag t) { return t == Tag::food_green || t == Tag::food_yellow; }

struct RigidPart {
    int id = -1;
    Shape shape;
    double mass = 0.0;
    Vec3 position;
    Quat orientation;
    Vec3 linear_velocity;
    Vec3 angular_velocity;
    Rgb color;
    Tag tag = Tag::wall;

    bool kinematic = true;     // never integrated; scripts may move it
    bool solid = true;         // takes part in collision response
    bool active = true;        // inactive parts are invisible to every query
    bool transparent = false;  // rendering hint only; rays still stop here
    int body = -1;             // owning dynamic body, -1 for kinematic parts

    bool operator==(const RigidPart&) const = default;
};

enum class MotorMode : std::uint8_t { rotation, velocity };

inline constexpr double kJointLimitX = 90.0;
inline constexpr double kJointLimitZ = 45.0;

/// Two-axis motorized joint. The child's orientation relative to the parent
/// is rest * Rx(angle_x) * Rz(angle_z). Angles are degrees, rates deg/s.
struct Joint2DOF {
    int parent = -1;
    int child = -1;
    Vec3 anchor;        // in parent frame
    Quat rest;          // child rest orientation in parent frame
    Vec3 child_offset;  // child centre relative to the anchor, child frame
    double inertia = 1.0;  // effective moment of inertia about the joint, kg m^2

    double angle_x = 0.0;
    double angle_z = 0.0;
    double angular_velocity_x = 0.0;
    double angular_velocity_z = 0.0;

    MotorMode mode = MotorMode::rotation;
    double target_x = 0.0;  // degrees (rotation) or deg/s (velocity)
    double target_z = 0.0;

    bool operator==(const Joint2DOF&) const = default;
};

struct PhysicsConfig {
    double dt = 0.02;
    double gravity = 9.81;
    double motor_kp = 60.0;   // N m / rad
    double motor_kd = 5.0;    // N m s / rad
    double motor_kv = 10.0;   // N m s / rad
    double torque_max = 20.0;
    double friction = 0.8;
    double restitution = 0.1;
    double restitution_threshold = 0.5;  // m/s of approach speed
    double joint_armature = 0.2;         // added to each joint's inertia, kg m^2
    double angular_damping = 0.5;        // 1/s
    int solver_iterations = 4;     // position projection passes
    int velocity_iterations = 8;
    double contact_margin = 0.01;   // distance under which parts count as touching
    double fall_depth = 1.0;        // agent centre this far below the floor -> fell

    void validate() const;
    bool operator==(const PhysicsConfig&) const = default;
};

struct HoleRect {
    double min_x = 0.0;
    double max_x = 0.0;
    double min_z = 0.0;
    double max_z = 0.0;

    bool contains(double x, double z) const {
        return x > min_x && x < max_x && z > min_z && z < max_z;
    }
    bool operator==(const HoleRect&) const = default;
};

/// Bilinear height grid. Vertex (ix, iz) sits at (origin_x + ix*cell_size,
/// origin_z + iz*cell_size); heights are stored row-major by z.
struct Heightfield {
    int resolution = 0;
    double cell_size = 1.0;
    double origin_x = 0.0;
    double origin_z = 0.0;
    std::vector<double> heights;

    double at(int ix, int iz) const { return heights[static_cast<size_t>(iz * resolution + ix)]; }
    double extent() const { return cell_size * (resolution - 1); }
    double height(double x, double z) const;
    Vec3 normal(double x, double z) const;

    bool operator==(const Heightfield&) const = default;
};

struct Terrain {
    double floor_height = 0.0;
    std::optional<Heightfield> heightfield;
    std::vector<HoleRect> holes;

    bool over_hole(double x, double z) const;
    /// Surface height, or nullopt above a hole.
    std::optional<double> height(double x, double z) const;
    Vec3 normal(double x, double z) const;

    bool operator==(const Terrain&) const = default;
};

struct PartPose {
    Vec3 position;
    Quat orientation;
    bool operator==(const PartPose&) const = default;
};

/// Composite rigid body. `parts[0]` is the root; `local` holds each part's
/// pose in the root frame as of the last step.
struct Body {
    std::vector<int> parts;
    std::vector<int> joints;  // topological order, parents first
    std::vector<PartPose> local;
    Vec3 com_local;
    double mass = 0.0;
    Vec3 velocity;          // of the centre of mass
    Vec3 angular_velocity;

    bool operator==(const Body&) const = default;
};

struct ContactEvent {
    Tag tag_a = Tag::wall;
    Tag tag_b = Tag::wall;
    int part_a = -1;  // part_a < part_b
    int part_b = -1;

    bool operator==(const ContactEvent&) const = default;
};

struct World {
    std::vector<RigidPart> parts;
    std::vector<Joint2DOF> joints;
    std::vector<Body> bodies;
    Terrain terrain;
    int ground_part = -1;

    std::vector<ContactEvent> contacts;  // from the last step
    bool fell = false;                   // set by the last step
    std::int64_t step_count = 0;

    /// Adds the floor pseudo-part (shape ground, tag floor) if missing.
    int ensure_ground(const Rgb& color = {0.45, 0.45, 0.45});
    int add_static(RigidPart part);
    /// Single-part dynamic body.
    int add_dynamic(RigidPart part);

    const RigidPart& part(int id) const { return parts[static_cast<size_t>(id)]; }
    RigidPart& part(int id) { return parts[static_cast<size_t>(id)]; }

    /// Recomputes body layouts (local poses, COM) from joint angles and
    /// places every part of the body accordingly, keeping the root fixed.
    void sync_body(int body);

    bool operator==(const World&) const = default;
};

/// Advances the world by config.dt. Throws SimulationDiverged.
void step_physics(World& world, const PhysicsConfig& config);

/// Contact events recorded by the last step_physics call.
const std::vector<ContactEvent>& query_contacts(const World& world);

/// Recomputes the overlap set for the current state without stepping.
std::vector<ContactEvent> detect_contacts(const World& world, double margin);

struct RayHit {
    double distance = 0.0;
    Rgb color;
    Tag tag = Tag::floor;
    int part_id = -1;
};

struct RayFilter {
    int exclude_body = -1;
    std::vector<int> skip_parts;
};

std::optional<RayHit> raycast(const World& world, const Vec3& origin, const Vec3& direction,
                              double max_range, const RayFilter& filter = {});

// Primitive queries, exposed for tests and the arena validator.

/// Signed penetration of two parts (positive = overlapping) with the
/// contact normal pointing from b toward a. nullopt when farther apart than
/// `margin` or the pair is unsupported.
struct ContactGeometry {
    Vec3 point;
    Vec3 normal;
    double penetration = 0.0;
};
std::optional<ContactGeometry> part_contact(const RigidPart& a, const RigidPart& b, double margin);

std::optional<double> ray_sphere(const Vec3& o, const Vec3& d, const Vec3& c, double r);
std::optional<double> ray_capsule(const Vec3& o, const Vec3& d, const Vec3& p0, const Vec3& p1, double r);
std::optional<double> ray_box(const Vec3& o, const Vec3& d, const Vec3& center, const Quat& q,
                              const Vec3& he);
std::optional<double> ray_terrain(const Terrain& terrain, const Vec3& o, const Vec3& d, double max_range);

/// World-space endpoints of a capsule part's segment.
std::pair<Vec3, Vec3> capsule_segment(const RigidPart& p);

Mat3 shape_inertia(const Shape& s, double mass);

}  // namespace aai
