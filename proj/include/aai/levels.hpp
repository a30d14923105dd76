#pragma once

// Seeded procedural generators for the cognition tasks. Every random choice
// comes from streams derived from the seed ("layout", "colors", "scripts",
// "wrapper", "blackout"), so a (task, difficulty, seed) triple always yields
// the same arena.

#include "aai/arena.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace aai {

enum class TaskId : std::uint8_t { L0, L1, L2Y, L2D, L3, L4, L5, L6, L7, L8, L9, L10, L11 };

inline constexpr std::array<TaskId, 13> kAllTasks{TaskId::L0, TaskId::L1,  TaskId::L2Y, TaskId::L2D, TaskId::L3,
                                                  TaskId::L4, TaskId::L5,  TaskId::L6,  TaskId::L7,  TaskId::L8,
                                                  TaskId::L9, TaskId::L10, TaskId::L11};
/// Tasks the L6/L7 wrappers may delegate to.
inline constexpr std::array<TaskId, 11> kBaseTasks{TaskId::L0, TaskId::L1, TaskId::L2Y, TaskId::L2D,
                                                   TaskId::L3, TaskId::L4, TaskId::L5,  TaskId::L8,
                                                   TaskId::L9, TaskId::L10, TaskId::L11};

std::string to_string(TaskId t);
std::optional<TaskId> parse_task(std::string_view name);

struct GenParams {
    TaskId task = TaskId::L0;
    int difficulty = 0;
    std::uint64_t seed = 0;

    bool operator==(const GenParams&) const = default;
};

/// Difficulty schedules; value = base + step * d unless noted.
struct LevelTuning {
    double l0_distance_base = 3.0, l0_distance_step = 1.5;
    double l0_lateral_step = 0.5;
    double l0_scale_base = 1.5, l0_scale_step = 0.1;
    int l1_bounce_from = 4;
    double l1_bounce_speed_base = 0.2, l1_bounce_speed_step = 0.1;
    double l2d_descent_base = 10.0, l2d_descent_step = 8.0;  // seconds
    double l3_side_base = 2.0, l3_side_step = 0.4;
    double l4_hole_base = 2.0, l4_hole_step = 0.6;
    int l4_third_hole_above = 5;
    double l5_cell = 4.0;
    double l8_speed_base = 0.5, l8_speed_step = 0.3;
    double l10_trench_base = 1.5, l10_trench_step = 0.25;
    double l11_amplitude_step = 0.05;
    double l11_lattice_base = 8.0, l11_lattice_step = 0.5, l11_lattice_min = 2.0;
};

/// Throws ConfigError for difficulty outside [0, 10], GenerationFailed when
/// no valid arena is found within 100 attempts.
ArenaSpec generate(const GenParams& params, const LevelTuning& tuning = {});

/// The task's principal hardness scalar at difficulty d (distance, hole side,
/// trench width, descent time, blackout duty cycle, terrain amplitude, ...).
double hardness(TaskId task, int difficulty, const LevelTuning& tuning = {});

inline constexpr int kMaxGenerationAttempts = 100;

}  // namespace aai
