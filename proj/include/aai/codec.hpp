#pragma once

// JSON forms of episode-level types, shared by the trajectory log and the
// wire protocol. Decoders throw ConfigError naming the offending field.

#include "aai/episode.hpp"

#include <json.hpp>

namespace aai {

using Json = nlohmann::ordered_json;

Json encode(const GenParams& gen);
Json encode(const ActionMode& mode);
Json encode(const RaycastConfig& config);
Json encode(const CameraConfig& config);
/// Flat object: task, difficulty, seed, maxsteps, action_mode, raycast,
/// camera (null when off), observe_joint_velocities.
Json encode(const EpisodeConfig& config);
/// {"joints":[...], "rays":{"distances":[...], "colors":[r,g,b,...]},
///  "camera":{"res":R, "channels":C, "pixels":[...]}}, absent sensors omitted.
Json encode(const Observation& obs);
Json encode(const RewardLedger& ledger);
/// {"observation", "reward", "done", "info":{"step", "reason", "cumulative", "components"}}
Json encode(const StepResult& result);

/// Missing fields take their defaults; present fields must be well typed.
EpisodeConfig decode_episode_config(const Json& j, const EpisodeConfig& defaults = {});
GenParams decode_gen(const Json& j);
Observation decode_observation(const Json& j);
StepResult decode_step_result(const Json& j);

/// Reads a required field of the given JSON type, or throws ConfigError.
const Json& require(const Json& j, const char* key);
double number_field(const Json& j, const char* key);
std::int64_t integer_field(const Json& j, const char* key);
std::uint64_t unsigned_field(const Json& j, const char* key);
bool bool_field(const Json& j, const char* key);
std::string string_field(const Json& j, const char* key);

}  // namespace aai
