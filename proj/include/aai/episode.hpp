#pragma once

// reset/step lifecycle over one generated arena: rewards, termination and
// observation assembly.

#include "aai/arena.hpp"
#include "aai/errors.hpp"
#include "aai/levels.hpp"
#include "aai/physics.hpp"
#include "aai/sensors.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace aai {

struct EpisodeConfig {
    GenParams gen;
    int maxsteps = 2000;
    ActionMode action_mode;
    std::optional<RaycastConfig> raycast = RaycastConfig{};
    std::optional<CameraConfig> camera;
    bool observe_joint_velocities = false;
    PhysicsConfig physics;

    /// Throws ConfigError.
    void validate() const;
    bool operator==(const EpisodeConfig&) const = default;
};

struct Observation {
    std::vector<double> joints;
    std::optional<RayObservation> rays;
    std::optional<Image> camera;

    bool operator==(const Observation&) const = default;
};

enum class Termination : std::uint8_t { none, green_consumed, fell, all_sector_food_consumed, timeout };
std::string to_string(Termination t);
std::optional<Termination> parse_termination(std::string_view s);

/// One step's reward split by source. total() is the step reward.
struct RewardLedger {
    double food = 0.0;
    double wall = 0.0;
    double head_ground = 0.0;
    double time = 0.0;
    double fall = 0.0;
    std::vector<int> consumed;  // FoodSpec indices eaten this step
    int wall_events = 0;

    double total() const { return food + wall + head_ground + time + fall; }
    bool operator==(const RewardLedger&) const = default;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    std::int64_t step = 0;  // 1-based index of this step
    Termination reason = Termination::none;
    double cumulative = 0.0;
    RewardLedger ledger;

    bool operator==(const StepResult&) const = default;
};

inline constexpr int kWallRefractorySteps = 20;
inline constexpr double kFallPenalty = -1.0;
inline constexpr double kWallPenalty = -1.0;

class Episode {
public:
    /// Generates the arena and returns the initial observation.
    /// ConfigError, GenerationFailed propagate.
    Observation reset(const EpisodeConfig& config);
    /// Same, over a given arena instead of config.gen (scripted scenarios).
    Observation reset(const EpisodeConfig& config, const ArenaSpec& spec);

    /// MalformedAction leaves the episode untouched; EpisodeFinished after
    /// done or before reset.
    StepResult step(std::span<const double> action);

    bool started() const { return arena_.has_value(); }
    bool done() const { return done_; }
    std::int64_t steps_taken() const { return step_; }
    double cumulative_reward() const { return cumulative_; }
    const EpisodeConfig& config() const { return config_; }
    const Arena& arena() const { return *arena_; }
    /// Mutable access for debug policies (teleport). Not for agents.
    Arena& arena_mut() { return *arena_; }

    Observation observe() const;

private:
    RewardLedger score(bool& green_eaten);
    Termination terminate(bool green_eaten) const;

    EpisodeConfig config_;
    std::optional<Arena> arena_;
    std::int64_t step_ = 0;
    bool done_ = false;
    double cumulative_ = 0.0;
    std::set<int> wall_touching_;                  // wall parts in contact after the last step
    std::map<int, std::int64_t> wall_penalized_;   // part -> step of last penalty
    std::vector<bool> eaten_;                      // per FoodSpec
};

using Policy = std::function<std::vector<double>(const Observation&, Episode&)>;

struct Trajectory {
    std::vector<StepResult> steps;
    double total_reward = 0.0;
    Termination reason = Termination::none;
};

/// A policy threw; carries what was recorded before the failure.
class EpisodeAborted : public Error {
public:
    EpisodeAborted(const std::string& why, Trajectory partial)
        : Error("episode-aborted", why), partial_(std::move(partial)) {}
    const Trajectory& partial() const noexcept { return partial_; }

private:
    Trajectory partial_;
};

/// Runs reset then step until done. `on_step` sees every result as it is
/// produced (trajectory logging).
Trajectory run_episode(const EpisodeConfig& config, const Policy& policy,
                       const std::function<void(const StepResult&)>& on_step = {});

Policy zero_policy();
/// Uniform actions in [-1, 1] from its own stream.
Policy random_policy(std::uint64_t seed);
/// Debug policy: each step teleports the agent onto the nearest uneaten
/// food that can end the episode, then idles.
Policy teleport_policy();

// Trajectory log: one JSON object per line, a config header then one line
// per StepResult.
std::string trajectory_header(const EpisodeConfig& config);
std::string trajectory_line(const StepResult& result);

}  // namespace aai
