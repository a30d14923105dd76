#include "aai/episode.hpp"
#include "aai/codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace aai {

namespace {

constexpr const char* kTerminationNames[] = {"none", "green-consumed", "fell", "all-sector-food-consumed", "timeout"};

bool is_wall_like(Tag t) { return t == Tag::wall || t == Tag::pillar || t == Tag::arena_bound; }

// Head clearance used by the teleport policy: a little above the resting height.
constexpr double kTeleportHeadHeight = 0.6;

}  // namespace

std::string to_string(Termination t) { return kTerminationNames[static_cast<int>(t)]; }

std::optional<Termination> parse_termination(std::string_view s) {
    for (int i = 0; i < 5; ++i)
        if (s == kTerminationNames[i]) return static_cast<Termination>(i);
    return std::nullopt;
}

void EpisodeConfig::validate() const {
    if (gen.difficulty < 0 || gen.difficulty > 10) throw ConfigError("difficulty must lie in [0, 10]");
    if (maxsteps < 1) throw ConfigError("maxsteps must be >= 1");
    if (!raycast && !camera) throw ConfigError("at least one of raycast and camera must be enabled");
    if (raycast) raycast->validate();
    if (camera) camera->validate();
    if (!(std::isfinite(action_mode.omega_max) && action_mode.omega_max > 0.0))
        throw ConfigError("omega_max must be > 0");
    physics.validate();
}

Observation Episode::reset(const EpisodeConfig& config) {
    config.validate();
    return reset(config, generate(config.gen));
}

Observation Episode::reset(const EpisodeConfig& config, const ArenaSpec& spec) {
    config.validate();
    Arena arena = instantiate(spec);
    config_ = config;
    arena_ = std::move(arena);
    step_ = 0;
    done_ = false;
    cumulative_ = 0.0;
    wall_touching_.clear();
    wall_penalized_.clear();
    eaten_.assign(arena_->spec.foods.size(), false);
    return observe();
}

Observation Episode::observe() const {
    const Arena& a = *arena_;
    Observation o;
    o.joints = proprioception(a.world, a.agent, config_.observe_joint_velocities, config_.action_mode.omega_max);
    const EyePose eye = eye_pose(a.world, a.agent);
    if (config_.raycast) {
        o.rays = sense_rays(a.world, eye, *config_.raycast, a.agent.body);
        o.rays->part_ids.clear();
    }
    if (config_.camera) {
        o.camera = render_camera(a.world, eye, *config_.camera, a.agent.body);
        if (a.spec.blackout) apply_blackout(*o.camera, *a.spec.blackout, step_);
    }
    return o;
}

RewardLedger Episode::score(bool& green_eaten) {
    Arena& a = *arena_;
    RewardLedger l;
    green_eaten = false;
    bool head_on_ground = false;
    std::set<int> touching;

    for (const ContactEvent& e : query_contacts(a.world)) {
        const RigidPart& pa = a.world.part(e.part_a);
        const RigidPart& pb = a.world.part(e.part_b);
        const bool a_agent = pa.body == a.agent.body && is_agent(pa.tag);
        const bool b_agent = pb.body == a.agent.body && is_agent(pb.tag);
        if (a_agent == b_agent) continue;
        const RigidPart& self = a_agent ? pa : pb;
        const RigidPart& other = a_agent ? pb : pa;

        if (is_food(other.tag)) {
            const auto it = std::find(a.food_parts.begin(), a.food_parts.end(), other.id);
            const size_t idx = static_cast<size_t>(it - a.food_parts.begin());
            if (it == a.food_parts.end() || eaten_[idx]) continue;
            eaten_[idx] = true;
            a.world.part(other.id).active = false;
            const FoodSpec& f = a.spec.foods[idx];
            l.food += f.value();
            l.consumed.push_back(static_cast<int>(idx));
            if (f.kind == FoodKind::green) green_eaten = true;
        } else if (is_wall_like(other.tag)) {
            touching.insert(other.id);
        } else if (other.tag == Tag::floor && self.tag == Tag::agent_head) {
            head_on_ground = true;
        }
    }

    for (const int id : touching) {
        if (wall_touching_.count(id)) continue;
        const auto last = wall_penalized_.find(id);
        if (last != wall_penalized_.end() && step_ - last->second < kWallRefractorySteps) continue;
        wall_penalized_[id] = step_;
        l.wall += kWallPenalty;
        ++l.wall_events;
    }
    wall_touching_ = std::move(touching);

    const double tick = -0.5 / static_cast<double>(config_.maxsteps);
    if (head_on_ground) l.head_ground = tick;
    l.time = tick;
    if (a.world.fell) l.fall = kFallPenalty;
    return l;
}

Termination Episode::terminate(bool green_eaten) const {
    const Arena& a = *arena_;
    if (a.world.fell) return Termination::fell;
    if (a.spec.sectors.empty()) {
        if (green_eaten) return Termination::green_consumed;
    } else {
        for (const SectorSpec& s : a.spec.sectors) {
            const bool entered = a.world.part(a.wall_parts[static_cast<size_t>(s.gate)]).active;
            if (!entered) continue;
            const bool cleared = std::all_of(s.foods.begin(), s.foods.end(),
                                             [&](int f) { return eaten_[static_cast<size_t>(f)]; });
            if (cleared) return Termination::all_sector_food_consumed;
        }
    }
    if (step_ >= config_.maxsteps) return Termination::timeout;
    return Termination::none;
}

StepResult Episode::step(std::span<const double> action) {
    if (!arena_ || done_) throw EpisodeFinished();
    Arena& a = *arena_;
    apply_action(a.world, a.agent, action, config_.action_mode);
    tick_scripts(a, step_, config_.physics.dt);
    try {
        step_physics(a.world, config_.physics);
    } catch (...) {
        done_ = true;
        throw;
    }
    ++step_;

    bool green_eaten = false;
    StepResult r;
    r.ledger = score(green_eaten);
    r.reward = r.ledger.total();
    cumulative_ += r.reward;
    r.cumulative = cumulative_;
    r.step = step_;
    r.reason = terminate(green_eaten);
    r.done = r.reason != Termination::none;
    done_ = r.done;
    r.observation = observe();
    return r;
}

Trajectory run_episode(const EpisodeConfig& config, const Policy& policy,
                       const std::function<void(const StepResult&)>& on_step) {
    Episode ep;
    Observation obs = ep.reset(config);
    Trajectory t;
    while (!ep.done()) {
        std::vector<double> action;
        try {
            action = policy(obs, ep);
        } catch (const std::exception& e) {
            throw EpisodeAborted(std::string("policy failed: ") + e.what(), t);
        }
        StepResult r;
        try {
            r = ep.step(action);
        } catch (const std::exception& e) {
            throw EpisodeAborted(std::string("step failed: ") + e.what(), t);
        }
        obs = r.observation;
        t.total_reward = r.cumulative;
        t.reason = r.reason;
        if (on_step) on_step(r);
        t.steps.push_back(std::move(r));
    }
    return t;
}

Policy zero_policy() {
    return [](const Observation&, Episode&) { return std::vector<double>(kActionSize, 0.0); };
}

Policy random_policy(std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(derive_rng(seed, "policy"));
    return [rng](const Observation&, Episode&) {
        std::vector<double> a(kActionSize);
        for (double& x : a) x = rng->uniform(-1.0, 1.0);
        return a;
    };
}

Policy teleport_policy() {
    return [](const Observation&, Episode& ep) {
        Arena& a = ep.arena_mut();
        const Vec3 head = a.world.part(a.agent.head).position;
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < a.food_parts.size(); ++i) {
            const RigidPart& f = a.world.part(a.food_parts[i]);
            if (!f.active || a.spec.foods[i].kind != FoodKind::green) continue;
            const double d = norm(f.position - head);
            if (d < best_d) {
                best_d = d;
                best = f.id;
            }
        }
        if (best >= 0) {
            const Vec3 f = a.world.part(best).position;
            const double ground = a.world.terrain.height(f.x, f.z).value_or(a.world.terrain.floor_height);
            teleport_agent(a.world, a.agent, {f.x, std::max(f.y, ground + kTeleportHeadHeight), f.z});
        }
        return std::vector<double>(kActionSize, 0.0);
    };
}

std::string trajectory_header(const EpisodeConfig& config) {
    Json j;
    j["schema_version"] = 1;
    j["type"] = "header";
    j["config"] = encode(config);
    return j.dump();
}

std::string trajectory_line(const StepResult& result) {
    Json body = encode(result);
    Json j;
    j["type"] = "step";
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = std::move(it.value());
    return j.dump();
}

}  // namespace aai
