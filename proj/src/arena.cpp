#include "aai/arena.hpp"
#include "aai/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace aai {

using ojson = nlohmann::ordered_json;

std::string to_string(WallRole r) {
    switch (r) {
        case WallRole::solid: return "solid";
        case WallRole::pillar: return "pillar";
        case WallRole::plank: return "plank";
        case WallRole::gate: return "gate";
    }
    return "solid";
}

std::string to_string(FoodKind k) { return k == FoodKind::green ? "green" : "yellow"; }

std::string to_string(ScriptKind k) {
    switch (k) {
        case ScriptKind::linear_move: return "linear_move";
        case ScriptKind::descend_pillar: return "descend_pillar";
        case ScriptKind::close_gate_on_entry: return "close_gate_on_entry";
        case ScriptKind::bounce_in_region: return "bounce_in_region";
    }
    return "linear_move";
}

namespace {

WallRole wall_role_from(const std::string& s) {
    if (s == "solid") return WallRole::solid;
    if (s == "pillar") return WallRole::pillar;
    if (s == "plank") return WallRole::plank;
    if (s == "gate") return WallRole::gate;
    throw InvalidSpec("unknown wall role '" + s + "'");
}

FoodKind food_kind_from(const std::string& s) {
    if (s == "green") return FoodKind::green;
    if (s == "yellow") return FoodKind::yellow;
    throw InvalidSpec("unknown food kind '" + s + "'");
}

ScriptKind script_kind_from(const std::string& s) {
    for (const ScriptKind k : {ScriptKind::linear_move, ScriptKind::descend_pillar, ScriptKind::close_gate_on_entry,
                               ScriptKind::bounce_in_region})
        if (to_string(k) == s) return k;
    throw InvalidSpec("unknown script kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// JSON

ojson vec_json(const Vec3& v) { return ojson::array({v.x, v.y, v.z}); }
ojson rgb_json(const Rgb& c) { return ojson::array({c.r, c.g, c.b}); }
ojson rect_json(const Rect& r) {
    ojson j;
    j["min_x"] = r.min_x;
    j["max_x"] = r.max_x;
    j["min_z"] = r.min_z;
    j["max_z"] = r.max_z;
    return j;
}

Vec3 json_vec(const ojson& j) {
    if (!j.is_array() || j.size() != 3) throw InvalidSpec("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
Rgb json_rgb(const ojson& j) {
    if (!j.is_array() || j.size() != 3) throw InvalidSpec("expected an RGB triple");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
Rect json_rect(const ojson& j) {
    return {j.at("min_x").get<double>(), j.at("max_x").get<double>(), j.at("min_z").get<double>(),
            j.at("max_z").get<double>()};
}

ojson to_ojson(const ArenaSpec& s) {
    ojson j;
    j["schema_version"] = kArenaSchemaVersion;
    j["task"] = s.task;
    j["base_task"] = s.base_task;
    j["difficulty"] = s.difficulty;
    j["seed"] = s.seed;
    j["arena_size"] = s.arena_size;
    j["wall_height"] = s.wall_height;
    j["floor_color"] = rgb_json(s.floor_color);
    ojson spawn;
    spawn["x"] = s.spawn.x;
    spawn["z"] = s.spawn.z;
    spawn["heading"] = s.spawn.heading_deg;
    j["spawn"] = spawn;

    ojson walls = ojson::array();
    for (const WallSpec& w : s.walls) {
        ojson o;
        o["center"] = vec_json(w.center);
        o["half_extents"] = vec_json(w.half_extents);
        o["yaw"] = w.yaw;
        o["color"] = rgb_json(w.color);
        o["transparent"] = w.transparent;
        o["role"] = to_string(w.role);
        o["mass"] = w.mass;
        o["active"] = w.active;
        walls.push_back(o);
    }
    j["walls"] = walls;

    ojson foods = ojson::array();
    for (const FoodSpec& f : s.foods) {
        ojson o;
        o["kind"] = to_string(f.kind);
        o["scale"] = f.scale;
        o["position"] = vec_json(f.position);
        o["color"] = rgb_json(f.color);
        foods.push_back(o);
    }
    j["foods"] = foods;

    ojson holes = ojson::array();
    for (const Rect& h : s.holes) holes.push_back(rect_json(h));
    j["holes"] = holes;

    ojson scripts = ojson::array();
    for (const ScriptSpec& sc : s.scripts) {
        ojson o;
        o["kind"] = to_string(sc.kind);
        ojson targets = ojson::array();
        for (const ObjectRef& r : sc.targets) {
            ojson t;
            t["type"] = r.kind == ObjectRef::Kind::food ? "food" : "wall";
            t["index"] = r.index;
            targets.push_back(t);
        }
        o["targets"] = targets;
        o["speed"] = sc.speed;
        ojson wps = ojson::array();
        for (const Vec3& p : sc.waypoints) wps.push_back(vec_json(p));
        o["waypoints"] = wps;
        o["region"] = rect_json(sc.region);
        o["direction"] = vec_json(sc.direction);
        o["drop"] = sc.drop;
        scripts.push_back(o);
    }
    j["scripts"] = scripts;

    ojson sectors = ojson::array();
    for (const SectorSpec& sec : s.sectors) {
        ojson o;
        o["region"] = rect_json(sec.region);
        o["foods"] = sec.foods;
        o["gate"] = sec.gate;
        sectors.push_back(o);
    }
    j["sectors"] = sectors;

    if (s.terrain) {
        ojson t;
        t["resolution"] = s.terrain->resolution;
        t["cell_size"] = s.terrain->cell_size;
        t["origin_x"] = s.terrain->origin_x;
        t["origin_z"] = s.terrain->origin_z;
        t["heights"] = s.terrain->heights;
        j["terrain"] = t;
    } else {
        j["terrain"] = nullptr;
    }
    if (s.blackout) {
        ojson b;
        b["period"] = s.blackout->period;
        b["duration"] = s.blackout->duration;
        b["phase"] = s.blackout->phase;
        j["blackout"] = b;
    } else {
        j["blackout"] = nullptr;
    }
    return j;
}

ArenaSpec from_ojson(const ojson& j) {
    if (!j.is_object()) throw InvalidSpec("arena spec must be a JSON object");
    if (j.at("schema_version").get<int>() != kArenaSchemaVersion) throw InvalidSpec("unsupported schema_version");
    ArenaSpec s;
    s.task = j.at("task").get<std::string>();
    s.base_task = j.at("base_task").get<std::string>();
    s.difficulty = j.at("difficulty").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.arena_size = j.at("arena_size").get<double>();
    s.wall_height = j.at("wall_height").get<double>();
    s.floor_color = json_rgb(j.at("floor_color"));
    const ojson& spawn = j.at("spawn");
    s.spawn.x = spawn.at("x").get<double>();
    s.spawn.z = spawn.at("z").get<double>();
    s.spawn.heading_deg = spawn.at("heading").get<double>();

    for (const ojson& o : j.at("walls")) {
        WallSpec w;
        w.center = json_vec(o.at("center"));
        w.half_extents = json_vec(o.at("half_extents"));
        w.yaw = o.at("yaw").get<double>();
        w.color = json_rgb(o.at("color"));
        w.transparent = o.at("transparent").get<bool>();
        w.role = wall_role_from(o.at("role").get<std::string>());
        w.mass = o.at("mass").get<double>();
        w.active = o.at("active").get<bool>();
        s.walls.push_back(w);
    }
    for (const ojson& o : j.at("foods")) {
        FoodSpec f;
        f.kind = food_kind_from(o.at("kind").get<std::string>());
        f.scale = o.at("scale").get<double>();
        f.position = json_vec(o.at("position"));
        f.color = json_rgb(o.at("color"));
        s.foods.push_back(f);
    }
    for (const ojson& o : j.at("holes")) s.holes.push_back(json_rect(o));
    for (const ojson& o : j.at("scripts")) {
        ScriptSpec sc;
        sc.kind = script_kind_from(o.at("kind").get<std::string>());
        for (const ojson& t : o.at("targets")) {
            ObjectRef r;
            const std::string type = t.at("type").get<std::string>();
            if (type == "food") r.kind = ObjectRef::Kind::food;
            else if (type == "wall") r.kind = ObjectRef::Kind::wall;
            else throw InvalidSpec("unknown script target type '" + type + "'");
            r.index = t.at("index").get<int>();
            sc.targets.push_back(r);
        }
        sc.speed = o.at("speed").get<double>();
        for (const ojson& p : o.at("waypoints")) sc.waypoints.push_back(json_vec(p));
        sc.region = json_rect(o.at("region"));
        sc.direction = json_vec(o.at("direction"));
        sc.drop = o.at("drop").get<double>();
        s.scripts.push_back(sc);
    }
    for (const ojson& o : j.at("sectors")) {
        SectorSpec sec;
        sec.region = json_rect(o.at("region"));
        sec.foods = o.at("foods").get<std::vector<int>>();
        sec.gate = o.at("gate").get<int>();
        s.sectors.push_back(sec);
    }
    if (const ojson& t = j.at("terrain"); !t.is_null()) {
        Heightfield hf;
        hf.resolution = t.at("resolution").get<int>();
        hf.cell_size = t.at("cell_size").get<double>();
        hf.origin_x = t.at("origin_x").get<double>();
        hf.origin_z = t.at("origin_z").get<double>();
        hf.heights = t.at("heights").get<std::vector<double>>();
        s.terrain = hf;
    }
    if (const ojson& b = j.at("blackout"); !b.is_null()) {
        BlackoutSchedule bs;
        bs.period = b.at("period").get<int>();
        bs.duration = b.at("duration").get<int>();
        bs.phase = b.at("phase").get<int>();
        s.blackout = bs;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Geometry helpers

Quat wall_rotation(const WallSpec& w) { return Quat::from_yaw(deg_to_rad(w.yaw)); }

bool finite(const Vec3& v) { return is_finite(v); }

}  // namespace

std::array<Vec3, 4> wall_footprint(const WallSpec& w) {
    const Quat q = wall_rotation(w);
    const double hx = w.half_extents.x;
    const double hz = w.half_extents.z;
    return {w.center + q.rotate({hx, 0, hz}), w.center + q.rotate({-hx, 0, hz}),
            w.center + q.rotate({-hx, 0, -hz}), w.center + q.rotate({hx, 0, -hz})};
}

double wall_overlap(const WallSpec& a, const WallSpec& b) {
    const double y_overlap = std::min(a.center.y + a.half_extents.y, b.center.y + b.half_extents.y) -
                             std::max(a.center.y - a.half_extents.y, b.center.y - b.half_extents.y);
    if (y_overlap <= 0.0) return 0.0;
    const auto ca = wall_footprint(a);
    const auto cb = wall_footprint(b);
    const Quat qa = wall_rotation(a);
    const Quat qb = wall_rotation(b);
    const std::array<Vec3, 4> axes{qa.rotate({1, 0, 0}), qa.rotate({0, 0, 1}), qb.rotate({1, 0, 0}),
                                   qb.rotate({0, 0, 1})};
    double depth = y_overlap;
    for (const Vec3& axis : axes) {
        double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
        for (const Vec3& p : ca) {
            const double d = p.x * axis.x + p.z * axis.z;
            amin = std::min(amin, d);
            amax = std::max(amax, d);
        }
        for (const Vec3& p : cb) {
            const double d = p.x * axis.x + p.z * axis.z;
            bmin = std::min(bmin, d);
            bmax = std::max(bmax, d);
        }
        const double o = std::min(amax, bmax) - std::max(amin, bmin);
        if (o <= 0.0) return 0.0;
        depth = std::min(depth, o);
    }
    return depth;
}

void validate(const ArenaSpec& s) {
    const auto fail = [](const std::string& rule) { throw InvalidSpec(rule); };
    if (!(std::isfinite(s.arena_size) && s.arena_size > 0.0)) fail("arena_size must be positive");
    if (!(std::isfinite(s.wall_height) && s.wall_height > 0.0)) fail("wall_height must be positive");
    if (s.difficulty < 0 || s.difficulty > 10) fail("difficulty must be in [0, 10]");
    const double half = 0.5 * s.arena_size;
    const double tol = 1e-9;
    const auto inside = [&](double x, double z) {
        return std::isfinite(x) && std::isfinite(z) && std::abs(x) <= half + tol && std::abs(z) <= half + tol;
    };
    if (!inside(s.spawn.x, s.spawn.z) || !std::isfinite(s.spawn.heading_deg)) fail("spawn must lie inside the arena");
    if (s.foods.empty()) fail("arena must contain at least one food");

    for (size_t i = 0; i < s.foods.size(); ++i) {
        const FoodSpec& f = s.foods[i];
        if (!(std::isfinite(f.scale) && f.scale > 0.0)) fail("food " + std::to_string(i) + ": scale must be > 0");
        if (!finite(f.position) || !inside(f.position.x, f.position.z))
            fail("food " + std::to_string(i) + " outside arena bounds");
    }
    for (size_t i = 0; i < s.walls.size(); ++i) {
        const WallSpec& w = s.walls[i];
        const std::string name = "wall " + std::to_string(i);
        if (!finite(w.center) || !finite(w.half_extents) || !std::isfinite(w.yaw)) fail(name + ": non-finite geometry");
        if (!(w.half_extents.x > 0 && w.half_extents.y > 0 && w.half_extents.z > 0))
            fail(name + ": half extents must be positive");
        if (w.role == WallRole::plank && !(w.mass > 0.0)) fail(name + ": plank needs positive mass");
        for (const Vec3& c : wall_footprint(w))
            if (!inside(c.x, c.z)) fail(name + " outside arena bounds");
    }
    for (size_t i = 0; i < s.walls.size(); ++i)
        for (size_t k = i + 1; k < s.walls.size(); ++k)
            if (wall_overlap(s.walls[i], s.walls[k]) > 1e-3)
                fail("walls " + std::to_string(i) + " and " + std::to_string(k) + " interpenetrate");
    for (size_t i = 0; i < s.holes.size(); ++i) {
        const Rect& h = s.holes[i];
        if (!(h.min_x < h.max_x && h.min_z < h.max_z)) fail("hole " + std::to_string(i) + " is empty");
        if (!inside(h.min_x, h.min_z) || !inside(h.max_x, h.max_z))
            fail("hole " + std::to_string(i) + " outside arena bounds");
    }
    const auto check_ref = [&](const ObjectRef& r, const std::string& name) {
        const size_t n = r.kind == ObjectRef::Kind::food ? s.foods.size() : s.walls.size();
        if (r.index < 0 || static_cast<size_t>(r.index) >= n) fail(name + ": target index out of range");
    };
    for (size_t i = 0; i < s.scripts.size(); ++i) {
        const ScriptSpec& sc = s.scripts[i];
        const std::string name = "script " + std::to_string(i);
        if (sc.targets.empty()) fail(name + ": no targets");
        for (const ObjectRef& r : sc.targets) {
            check_ref(r, name);
            if (r.kind == ObjectRef::Kind::wall && s.walls[static_cast<size_t>(r.index)].role == WallRole::plank)
                fail(name + ": dynamic planks cannot be scripted");
        }
        if (!std::isfinite(sc.speed) || sc.speed < 0.0) fail(name + ": speed must be >= 0");
        switch (sc.kind) {
            case ScriptKind::linear_move:
                if (sc.waypoints.empty()) fail(name + ": linear_move needs waypoints");
                for (const Vec3& p : sc.waypoints)
                    if (!finite(p) || !inside(p.x, p.z)) fail(name + ": waypoint outside arena bounds");
                break;
            case ScriptKind::descend_pillar:
                if (!(std::isfinite(sc.drop) && sc.drop >= 0.0)) fail(name + ": drop must be >= 0");
                break;
            case ScriptKind::close_gate_on_entry:
                for (const ObjectRef& r : sc.targets)
                    if (r.kind != ObjectRef::Kind::wall || s.walls[static_cast<size_t>(r.index)].role != WallRole::gate)
                        fail(name + ": close_gate_on_entry targets must be gates");
                [[fallthrough]];
            case ScriptKind::bounce_in_region:
                if (!(sc.region.min_x <= sc.region.max_x && sc.region.min_z <= sc.region.max_z))
                    fail(name + ": empty region");
                break;
        }
    }
    for (size_t i = 0; i < s.sectors.size(); ++i) {
        const SectorSpec& sec = s.sectors[i];
        for (const int f : sec.foods)
            if (f < 0 || static_cast<size_t>(f) >= s.foods.size())
                fail("sector " + std::to_string(i) + ": food index out of range");
        if (sec.gate < 0 || static_cast<size_t>(sec.gate) >= s.walls.size())
            fail("sector " + std::to_string(i) + ": gate index out of range");
    }
    if (s.terrain) {
        const Heightfield& hf = *s.terrain;
        if (hf.resolution < 2 || !(hf.cell_size > 0.0)) fail("terrain grid must be at least 2x2 with positive spacing");
        if (hf.heights.size() != static_cast<size_t>(hf.resolution) * static_cast<size_t>(hf.resolution))
            fail("terrain height count does not match resolution");
        for (const double h : hf.heights)
            if (!std::isfinite(h)) fail("terrain heights must be finite");
    }
    if (s.blackout && (s.blackout->period <= 0 || s.blackout->duration < 0)) fail("blackout period must be positive");
}

std::string serialize(const ArenaSpec& spec, int indent) { return to_ojson(spec).dump(indent); }

ArenaSpec parse_arena(const std::string& text) {
    try {
        return from_ojson(ojson::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("malformed arena JSON: ") + e.what());
    }
}

Arena instantiate(const ArenaSpec& spec, const AgentSpec& agent_spec) {
    validate(spec);
    Arena a;
    a.spec = spec;
    World& w = a.world;
    w.terrain.floor_height = 0.0;
    w.terrain.heightfield = spec.terrain;
    for (const Rect& h : spec.holes) w.terrain.holes.push_back({h.min_x, h.max_x, h.min_z, h.max_z});
    w.ensure_ground(spec.floor_color);

    const double half = 0.5 * spec.arena_size;
    const double t = 0.25;
    const double hy = 0.5 * spec.wall_height;
    const auto bound = [&](const Vec3& c, const Vec3& he) {
        RigidPart p;
        p.shape = Shape::box(he);
        p.position = c;
        p.tag = Tag::arena_bound;
        p.color = kBoundColor;
        a.bound_parts.push_back(w.add_static(p));
    };
    bound({0, hy, half + t}, {half + 2 * t, hy, t});
    bound({0, hy, -half - t}, {half + 2 * t, hy, t});
    bound({half + t, hy, 0}, {t, hy, half});
    bound({-half - t, hy, 0}, {t, hy, half});

    for (const WallSpec& ws : spec.walls) {
        RigidPart p;
        p.shape = Shape::box(ws.half_extents);
        p.position = ws.center;
        p.orientation = wall_rotation(ws);
        p.color = ws.color;
        p.transparent = ws.transparent;
        p.active = ws.active;
        switch (ws.role) {
            case WallRole::solid:
            case WallRole::gate: p.tag = Tag::wall; break;
            case WallRole::pillar: p.tag = Tag::pillar; break;
            case WallRole::plank: p.tag = Tag::plank; break;
        }
        if (ws.role == WallRole::plank) {
            p.mass = ws.mass;
            a.wall_parts.push_back(w.add_dynamic(p));
        } else {
            a.wall_parts.push_back(w.add_static(p));
        }
    }
    for (const FoodSpec& fs : spec.foods) {
        RigidPart p;
        p.shape = Shape::sphere(0.5 * fs.scale);
        p.position = fs.position;
        p.color = fs.color;
        p.tag = fs.kind == FoodKind::green ? Tag::food_green : Tag::food_yellow;
        p.solid = false;
        a.food_parts.push_back(w.add_static(p));
    }
    for (const ScriptSpec& sc : spec.scripts) {
        ScriptState st;
        if (sc.kind == ScriptKind::bounce_in_region) st.velocity = normalized(sc.direction) * sc.speed;
        a.scripts.push_back(st);
    }
    a.agent = assemble_agent(w, agent_spec, spec.spawn);
    return a;
}

namespace {

int target_part(const Arena& a, const ObjectRef& r) {
    return r.kind == ObjectRef::Kind::food ? a.food_parts[static_cast<size_t>(r.index)]
                                           : a.wall_parts[static_cast<size_t>(r.index)];
}

void move_targets(Arena& a, const ScriptSpec& sc, const Vec3& delta, double dt) {
    for (const ObjectRef& r : sc.targets) {
        RigidPart& p = a.world.part(target_part(a, r));
        p.position += delta;
        p.linear_velocity = delta / dt;
    }
}

// Moves `from` toward the remaining waypoints by at most `budget` metres.
Vec3 follow_waypoints(const std::vector<Vec3>& wps, int& next, Vec3 from, double budget) {
    const Vec3 start = from;
    while (next < static_cast<int>(wps.size()) && budget > 0.0) {
        const Vec3 to = wps[static_cast<size_t>(next)];
        const Vec3 d = to - from;
        const double len = norm(d);
        if (len <= budget) {
            from = to;
            budget -= len;
            ++next;
        } else {
            from += d * (budget / len);
            budget = 0.0;
        }
    }
    return from - start;
}

double reflect(double& x, double& v, double lo, double hi) {
    if (hi <= lo) {
        x = lo;
        v = 0.0;
        return x;
    }
    // Fold back into [lo, hi]; repeated folds cover steps longer than the region.
    for (int i = 0; i < 8 && (x < lo || x > hi); ++i) {
        if (x < lo) {
            x = 2.0 * lo - x;
            v = -v;
        } else if (x > hi) {
            x = 2.0 * hi - x;
            v = -v;
        }
    }
    x = std::clamp(x, lo, hi);
    return x;
}

}  // namespace

void tick_scripts(Arena& a, [[maybe_unused]] std::int64_t step, double dt) {
    for (size_t i = 0; i < a.spec.scripts.size(); ++i) {
        const ScriptSpec& sc = a.spec.scripts[i];
        ScriptState& st = a.scripts[i];
        for (const ObjectRef& r : sc.targets) a.world.part(target_part(a, r)).linear_velocity = {};
        switch (sc.kind) {
            case ScriptKind::linear_move: {
                const Vec3 lead = a.world.part(target_part(a, sc.targets.front())).position;
                const Vec3 delta = follow_waypoints(sc.waypoints, st.waypoint, lead, sc.speed * dt);
                if (delta != Vec3{}) move_targets(a, sc, delta, dt);
                break;
            }
            case ScriptKind::descend_pillar: {
                const double d = std::min(sc.speed * dt, sc.drop - st.dropped);
                if (d > 0.0) {
                    st.dropped += d;
                    move_targets(a, sc, {0.0, -d, 0.0}, dt);
                }
                break;
            }
            case ScriptKind::close_gate_on_entry: {
                if (st.triggered) break;
                const Vec3 head = a.world.part(a.agent.head).position;
                if (sc.region.contains(head.x, head.z)) {
                    st.triggered = true;
                    for (const ObjectRef& r : sc.targets) a.world.part(target_part(a, r)).active = true;
                }
                break;
            }
            case ScriptKind::bounce_in_region: {
                const Vec3 lead = a.world.part(target_part(a, sc.targets.front())).position;
                double x = lead.x + st.velocity.x * dt;
                double z = lead.z + st.velocity.z * dt;
                reflect(x, st.velocity.x, sc.region.min_x, sc.region.max_x);
                reflect(z, st.velocity.z, sc.region.min_z, sc.region.max_z);
                move_targets(a, sc, {x - lead.x, 0.0, z - lead.z}, dt);
                break;
            }
        }
    }
}

}  // namespace aai
