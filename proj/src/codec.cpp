#include "aai/codec.hpp"

#include <limits>

namespace aai {

const Json& require(const Json& j, const char* key) {
    if (!j.is_object()) throw ConfigError("expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string("missing field '") + key + "'");
    return *it;
}

double number_field(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::int64_t integer_field(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (v.is_number_unsigned()) {
        if (v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            throw ConfigError(std::string("field '") + key + "' out of range");
        return static_cast<std::int64_t>(v.get<std::uint64_t>());
    }
    if (!v.is_number_integer()) throw ConfigError(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t unsigned_field(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
}

bool bool_field(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_boolean()) throw ConfigError(std::string("field '") + key + "' must be a boolean");
    return v.get<bool>();
}

std::string string_field(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

namespace {

int int_field(const Json& j, const char* key) {
    const std::int64_t v = integer_field(j, key);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(std::string("field '") + key + "' out of range");
    return static_cast<int>(v);
}

std::vector<double> number_array(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_array()) throw ConfigError(std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const Json& x : v) {
        if (!x.is_number()) throw ConfigError(std::string("field '") + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Json doubles(const std::vector<double>& v) {
    Json a = Json::array();
    for (const double x : v) a.push_back(x);
    return a;
}

std::string motor_mode_name(MotorMode m) { return m == MotorMode::rotation ? "rotation" : "velocity"; }

}  // namespace

Json encode(const GenParams& gen) {
    Json j;
    j["task"] = to_string(gen.task);
    j["difficulty"] = gen.difficulty;
    j["seed"] = gen.seed;
    return j;
}

Json encode(const ActionMode& mode) {
    Json j;
    j["mode"] = motor_mode_name(mode.mode);
    j["omega_max"] = mode.omega_max;
    return j;
}

Json encode(const RaycastConfig& c) {
    Json j;
    j["viewing_angle"] = c.viewing_angle;
    j["rays_per_side"] = c.rays_per_side;
    j["max_range"] = c.max_range;
    return j;
}

Json encode(const CameraConfig& c) {
    Json j;
    j["resolution"] = c.resolution;
    j["grayscale"] = c.grayscale;
    j["vertical_fov"] = c.vertical_fov;
    j["max_range"] = c.max_range;
    return j;
}

Json encode(const EpisodeConfig& c) {
    Json j = encode(c.gen);
    j["maxsteps"] = c.maxsteps;
    j["action_mode"] = encode(c.action_mode);
    j["raycast"] = c.raycast ? encode(*c.raycast) : Json(nullptr);
    j["camera"] = c.camera ? encode(*c.camera) : Json(nullptr);
    j["observe_joint_velocities"] = c.observe_joint_velocities;
    return j;
}

GenParams decode_gen(const Json& j) {
    GenParams g;
    const auto task = parse_task(string_field(j, "task"));
    if (!task) throw ConfigError("unknown task '" + string_field(j, "task") + "'");
    g.task = *task;
    g.difficulty = int_field(j, "difficulty");
    if (g.difficulty < 0 || g.difficulty > 10) throw ConfigError("difficulty must lie in [0, 10]");
    g.seed = unsigned_field(j, "seed");
    return g;
}

EpisodeConfig decode_episode_config(const Json& j, const EpisodeConfig& defaults) {
    if (!j.is_object()) throw ConfigError("episode config must be an object");
    EpisodeConfig c = defaults;
    c.gen = decode_gen(j);
    if (j.contains("maxsteps")) c.maxsteps = int_field(j, "maxsteps");
    if (j.contains("action_mode")) {
        const Json& m = j["action_mode"];
        if (!m.is_object()) throw ConfigError("action_mode must be an object");
        if (m.contains("mode")) {
            const std::string name = string_field(m, "mode");
            if (name == "rotation") c.action_mode.mode = MotorMode::rotation;
            else if (name == "velocity") c.action_mode.mode = MotorMode::velocity;
            else throw ConfigError("unknown action mode '" + name + "'");
        }
        if (m.contains("omega_max")) c.action_mode.omega_max = number_field(m, "omega_max");
    }
    if (j.contains("raycast")) {
        const Json& r = j["raycast"];
        if (r.is_null() || r == false) {
            c.raycast.reset();
        } else {
            RaycastConfig rc;
            if (r.is_object()) {
                if (r.contains("viewing_angle")) rc.viewing_angle = number_field(r, "viewing_angle");
                if (r.contains("rays_per_side")) rc.rays_per_side = int_field(r, "rays_per_side");
                if (r.contains("max_range")) rc.max_range = number_field(r, "max_range");
            } else if (r != true) {
                throw ConfigError("raycast must be an object, boolean or null");
            }
            c.raycast = rc;
        }
    }
    if (j.contains("camera")) {
        const Json& r = j["camera"];
        if (r.is_null() || r == false) {
            c.camera.reset();
        } else {
            CameraConfig cc;
            if (r.is_object()) {
                if (r.contains("resolution")) cc.resolution = int_field(r, "resolution");
                if (r.contains("grayscale")) cc.grayscale = bool_field(r, "grayscale");
                if (r.contains("vertical_fov")) cc.vertical_fov = number_field(r, "vertical_fov");
                if (r.contains("max_range")) cc.max_range = number_field(r, "max_range");
            } else if (r != true) {
                throw ConfigError("camera must be an object, boolean or null");
            }
            c.camera = cc;
        }
    }
    if (j.contains("observe_joint_velocities")) c.observe_joint_velocities = bool_field(j, "observe_joint_velocities");
    c.validate();
    return c;
}

Json encode(const Observation& obs) {
    Json j;
    j["joints"] = doubles(obs.joints);
    if (obs.rays) {
        Json colors = Json::array();
        for (const Rgb& c : obs.rays->colors) {
            colors.push_back(c.r);
            colors.push_back(c.g);
            colors.push_back(c.b);
        }
        j["rays"] = Json{{"distances", doubles(obs.rays->distances)}, {"colors", std::move(colors)}};
    }
    if (obs.camera)
        j["camera"] = Json{{"res", obs.camera->resolution},
                           {"channels", obs.camera->channels},
                           {"pixels", doubles(obs.camera->pixels)}};
    return j;
}

Observation decode_observation(const Json& j) {
    Observation o;
    o.joints = number_array(j, "joints");
    if (j.contains("rays")) {
        const Json& r = j["rays"];
        RayObservation rays;
        rays.distances = number_array(r, "distances");
        const std::vector<double> flat = number_array(r, "colors");
        if (flat.size() != 3 * rays.distances.size()) throw ConfigError("rays.colors must hold 3 values per ray");
        for (size_t i = 0; i < flat.size(); i += 3) rays.colors.push_back({flat[i], flat[i + 1], flat[i + 2]});
        o.rays = std::move(rays);
    }
    if (j.contains("camera")) {
        const Json& c = j["camera"];
        Image img;
        img.resolution = int_field(c, "res");
        img.channels = int_field(c, "channels");
        img.pixels = number_array(c, "pixels");
        if (img.resolution < 0 || img.channels < 0 ||
            img.pixels.size() != static_cast<size_t>(img.resolution) * static_cast<size_t>(img.resolution) *
                                     static_cast<size_t>(img.channels))
            throw ConfigError("camera.pixels size does not match res and channels");
        o.camera = std::move(img);
    }
    return o;
}

Json encode(const RewardLedger& l) {
    Json j;
    j["food"] = l.food;
    j["wall"] = l.wall;
    j["head_ground"] = l.head_ground;
    j["time"] = l.time;
    j["fall"] = l.fall;
    j["consumed"] = l.consumed;
    j["wall_events"] = l.wall_events;
    return j;
}

Json encode(const StepResult& r) {
    Json j;
    j["observation"] = encode(r.observation);
    j["reward"] = r.reward;
    j["done"] = r.done;
    j["info"] = Json{{"step", r.step},
                     {"reason", to_string(r.reason)},
                     {"cumulative", r.cumulative},
                     {"components", encode(r.ledger)}};
    return j;
}

StepResult decode_step_result(const Json& j) {
    StepResult r;
    r.observation = decode_observation(require(j, "observation"));
    r.reward = number_field(j, "reward");
    r.done = bool_field(j, "done");
    const Json& info = require(j, "info");
    r.step = integer_field(info, "step");
    const auto reason = parse_termination(string_field(info, "reason"));
    if (!reason) throw ConfigError("unknown termination reason");
    r.reason = *reason;
    r.cumulative = number_field(info, "cumulative");
    const Json& c = require(info, "components");
    r.ledger.food = number_field(c, "food");
    r.ledger.wall = number_field(c, "wall");
    r.ledger.head_ground = number_field(c, "head_ground");
    r.ledger.time = number_field(c, "time");
    r.ledger.fall = number_field(c, "fall");
    const Json& consumed = require(c, "consumed");
    if (!consumed.is_array()) throw ConfigError("field 'consumed' must be an array");
    for (const Json& x : consumed) {
        if (!x.is_number_integer()) throw ConfigError("field 'consumed' must hold integers");
        r.ledger.consumed.push_back(x.get<int>());
    }
    r.ledger.wall_events = int_field(c, "wall_events");
    return r;
}

}  // namespace aai
