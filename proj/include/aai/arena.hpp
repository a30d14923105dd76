#pragma once

// Declarative arena description, its canonical JSON form, and the runtime
// that turns it into a World and drives scripted (kinematic) objects.

#include "aai/agent.hpp"
#include "aai/sensors.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aai {

inline constexpr int kArenaSchemaVersion = 1;

inline constexpr Rgb kGreenFoodColor{0.1, 0.85, 0.2};
inline constexpr Rgb kYellowFoodColor{0.95, 0.85, 0.1};
inline constexpr Rgb kWallColor{0.6, 0.6, 0.6};
inline constexpr Rgb kTransparentColor{0.8, 0.9, 1.0};
inline constexpr Rgb kBoundColor{0.35, 0.35, 0.4};
inline constexpr Rgb kFloorColor{0.45, 0.42, 0.38};

enum class WallRole : std::uint8_t { solid, pillar, plank, gate };
enum class FoodKind : std::uint8_t { green, yellow };
enum class ScriptKind : std::uint8_t { linear_move, descend_pillar, close_gate_on_entry, bounce_in_region };

std::string to_string(WallRole r);
std::string to_string(FoodKind k);
std::string to_string(ScriptKind k);

/// Axis-aligned rectangle on the floor plane.
struct Rect {
    double min_x = 0.0;
    double max_x = 0.0;
    double min_z = 0.0;
    double max_z = 0.0;

    bool contains(double x, double z) const { return x >= min_x && x <= max_x && z >= min_z && z <= max_z; }
    bool operator==(const Rect&) const = default;
};

/// Box obstacle rotated about Y. Planks are dynamic (mass > 0); gates start
/// inactive and are switched on by a close_gate_on_entry script.
struct WallSpec {
    Vec3 center;
    Vec3 half_extents;
    double yaw = 0.0;  // degrees
    Rgb color = kWallColor;
    bool transparent = false;
    WallRole role = WallRole::solid;
    double mass = 0.0;
    bool active = true;

    bool operator==(const WallSpec&) const = default;
};

struct FoodSpec {
    FoodKind kind = FoodKind::green;
    double scale = 1.0;  // sphere diameter
    Vec3 position;
    Rgb color = kGreenFoodColor;

    double value() const { return kind == FoodKind::green ? scale : 0.5 * scale; }
    bool operator==(const FoodSpec&) const = default;
};

struct ObjectRef {
    enum class Kind : std::uint8_t { food, wall };
    Kind kind = Kind::food;
    int index = 0;

    bool operator==(const ObjectRef&) const = default;
};

/// linear_move: targets follow `waypoints` (centre positions) at `speed`.
/// descend_pillar: targets sink at `speed` until they have dropped `drop` m.
/// close_gate_on_entry: targets (gates) activate once the head is in `region`.
/// bounce_in_region: targets move with `speed` along `direction`, reflecting
/// off the borders of `region`.
struct ScriptSpec {
    ScriptKind kind = ScriptKind::linear_move;
    std::vector<ObjectRef> targets;
    double speed = 0.0;
    std::vector<Vec3> waypoints;
    Rect region;
    Vec3 direction;
    double drop = 0.0;

    bool operator==(const ScriptSpec&) const = default;
};

/// A walled room whose foods count toward the "clear the sector" ending.
struct SectorSpec {
    Rect region;
    std::vector<int> foods;
    int gate = -1;  // wall index

    bool operator==(const SectorSpec&) const = default;
};

struct ArenaSpec {
    std::string task = "L0";
    std::string base_task = "L0";
    int difficulty = 0;
    std::uint64_t seed = 0;

    double arena_size = 40.0;
    double wall_height = 2.0;
    Rgb floor_color = kFloorColor;
    SpawnPose spawn;

    std::vector<WallSpec> walls;
    std::vector<FoodSpec> foods;
    std::vector<Rect> holes;
    std::vector<ScriptSpec> scripts;
    std::vector<SectorSpec> sectors;
    std::optional<Heightfield> terrain;
    std::optional<BlackoutSchedule> blackout;

    bool operator==(const ArenaSpec&) const = default;
};

/// Throws InvalidSpec naming the first violated rule.
void validate(const ArenaSpec& spec);

/// Canonical JSON: fixed key order, shortest round-trip numbers.
std::string serialize(const ArenaSpec& spec, int indent = -1);
/// Throws InvalidSpec on malformed input.
ArenaSpec parse_arena(const std::string& text);

struct ScriptState {
    int waypoint = 0;  // next waypoint index (linear_move)
    double dropped = 0.0;
    bool triggered = false;
    Vec3 velocity;  // bounce_in_region

    bool operator==(const ScriptState&) const = default;
};

struct Arena {
    ArenaSpec spec;
    World world;
    Agent agent;
    std::vector<int> food_parts;  // per FoodSpec
    std::vector<int> wall_parts;  // per WallSpec
    std::vector<int> bound_parts;
    std::vector<ScriptState> scripts;

    bool operator==(const Arena&) const = default;
};

/// Validates, builds the world (floor, bounds, walls, foods, terrain) and
/// assembles the agent at the spawn pose. SpawnRejected propagates.
Arena instantiate(const ArenaSpec& spec, const AgentSpec& agent_spec = {});

/// Advances every script by one step of length dt.
void tick_scripts(Arena& arena, std::int64_t step, double dt);

/// Penetration depth between two walls' boxes (0 when disjoint).
double wall_overlap(const WallSpec& a, const WallSpec& b);

/// Floor-plane corners of a wall's footprint.
std::array<Vec3, 4> wall_footprint(const WallSpec& w);

}  // namespace aai
