#include "aai/levels.hpp"
#include "aai/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace aai {

std::string to_string(TaskId t) {
    switch (t) {
        case TaskId::L0: return "L0";
        case TaskId::L1: return "L1";
        case TaskId::L2Y: return "L2Y";
        case TaskId::L2D: return "L2D";
        case TaskId::L3: return "L3";
        case TaskId::L4: return "L4";
        case TaskId::L5: return "L5";
        case TaskId::L6: return "L6";
        case TaskId::L7: return "L7";
        case TaskId::L8: return "L8";
        case TaskId::L9: return "L9";
        case TaskId::L10: return "L10";
        case TaskId::L11: return "L11";
    }
    return "L0";
}

std::optional<TaskId> parse_task(std::string_view name) {
    for (const TaskId t : kAllTasks)
        if (to_string(t) == name) return t;
    return std::nullopt;
}

double hardness(TaskId task, int d, const LevelTuning& t) {
    switch (task) {
        case TaskId::L0: return t.l0_distance_base + t.l0_distance_step * d;
        case TaskId::L1: return 1.0 + std::round(4.0 * d / 10.0);
        case TaskId::L2Y: return d > 5 ? 2.0 : 1.0;
        case TaskId::L2D: return t.l2d_descent_base + t.l2d_descent_step * d;
        case TaskId::L3: return t.l3_side_base + t.l3_side_step * d;
        case TaskId::L4: return t.l4_hole_base + t.l4_hole_step * d;
        case TaskId::L5: return 4.0 + std::ceil(d / 3.0);
        case TaskId::L6: return 0.0;
        case TaskId::L7:
            return static_cast<double>(std::min(BlackoutSchedule::duration_for(d), BlackoutSchedule::period_for(d))) /
                   BlackoutSchedule::period_for(d);
        case TaskId::L8: return t.l8_speed_base + t.l8_speed_step * d;
        case TaskId::L9: return 2.0 + std::ceil(d / 2.0);
        case TaskId::L10: return t.l10_trench_base + t.l10_trench_step * d;
        case TaskId::L11: return t.l11_amplitude_step * d;
    }
    return 0.0;
}

namespace {

// Thrown by a builder when a random placement does not work out; the whole
// arena is then resampled from where the streams left off.
struct Retry {};

struct Streams {
    Rng layout;
    Rng colors;
    Rng scripts;
};

constexpr double kHalf = 20.0;
constexpr double kInnerWallHeight = 1.5;

Vec3 forward_of(double heading_deg) {
    const double h = deg_to_rad(heading_deg);
    return {std::sin(h), 0.0, std::cos(h)};
}
Vec3 left_of(double heading_deg) {
    const double h = deg_to_rad(heading_deg);
    return {std::cos(h), 0.0, -std::sin(h)};
}

WallSpec box_wall(double cx, double cz, double hx, double hz, double height = kInnerWallHeight,
                  double yaw = 0.0) {
    WallSpec w;
    w.center = {cx, 0.5 * height, cz};
    w.half_extents = {hx, 0.5 * height, hz};
    w.yaw = yaw;
    return w;
}

FoodSpec food(FoodKind kind, double scale, double x, double z, double ground = 0.0) {
    FoodSpec f;
    f.kind = kind;
    f.scale = scale;
    f.position = {x, ground + 0.5 * scale, z};
    f.color = kind == FoodKind::green ? kGreenFoodColor : kYellowFoodColor;
    return f;
}

bool in_arena(double x, double z, double margin) {
    return std::abs(x) <= kHalf - margin && std::abs(z) <= kHalf - margin;
}

double horizontal_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.z - b.z); }

double footprint_radius(const WallSpec& w) { return std::hypot(w.half_extents.x, w.half_extents.z); }

template <typename F>
auto with_retries(F&& attempt) {
    for (int i = 0; i < kMaxGenerationAttempts; ++i)
        if (auto r = attempt()) return *r;
    throw Retry{};
}

// ---------------------------------------------------------------------------
// Individual tasks

ArenaSpec build_l0(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    a.spawn = {0.0, 0.0, s.layout.uniform(0.0, 360.0), std::nullopt};
    const double dist = t.l0_distance_base + t.l0_distance_step * d;
    const double lateral = s.layout.uniform(-1.0, 1.0) * t.l0_lateral_step * d;
    const double scale = t.l0_scale_base - t.l0_scale_step * d;
    const Vec3 p = forward_of(a.spawn.heading_deg) * dist + left_of(a.spawn.heading_deg) * lateral;
    a.foods.push_back(food(FoodKind::green, scale, p.x, p.z));
    return a;
}

ArenaSpec build_l1(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    a.spawn = {s.layout.uniform(-12.0, 12.0), s.layout.uniform(-12.0, 12.0), s.layout.uniform(0.0, 360.0),
               std::nullopt};
    const int count = 1 + static_cast<int>(std::round(4.0 * d / 10.0));
    const Vec3 spawn{a.spawn.x, 0.0, a.spawn.z};
    for (int i = 0; i < count; ++i) {
        const FoodKind kind = i == 0 ? FoodKind::green : (s.layout.coin() ? FoodKind::green : FoodKind::yellow);
        const double scale = s.layout.uniform(0.5, 1.5);
        a.foods.push_back(with_retries([&]() -> std::optional<FoodSpec> {
            const FoodSpec f = food(kind, scale, s.layout.uniform(-17.0, 17.0), s.layout.uniform(-17.0, 17.0));
            if (horizontal_distance(f.position, spawn) < 3.0) return std::nullopt;
            for (const FoodSpec& o : a.foods)
                if (horizontal_distance(f.position, o.position) < 2.0) return std::nullopt;
            return f;
        }));
    }
    if (d >= t.l1_bounce_from) {
        const double speed = t.l1_bounce_speed_base + t.l1_bounce_speed_step * d;
        for (size_t i = 0; i < a.foods.size(); ++i) {
            const Vec3 p = a.foods[i].position;
            ScriptSpec sc;
            sc.kind = ScriptKind::bounce_in_region;
            sc.targets = {{ObjectRef::Kind::food, static_cast<int>(i)}};
            sc.speed = speed;
            const double ang = s.scripts.uniform(0.0, 2.0 * kPi);
            sc.direction = {std::sin(ang), 0.0, std::cos(ang)};
            sc.region = {std::max(p.x - 3.0, -18.0), std::min(p.x + 3.0, 18.0), std::max(p.z - 3.0, -18.0),
                         std::min(p.z + 3.0, 18.0)};
            a.scripts.push_back(sc);
        }
    }
    return a;
}

// Rectangular fork: a 3 m stem opening into a chamber split by a divider.
ArenaSpec build_l2y(Streams& s, int d, const LevelTuning&) {
    ArenaSpec a;
    a.spawn = {0.0, -13.0, s.layout.uniform(-15.0, 15.0), std::nullopt};
    for (const double sign : {1.0, -1.0}) {
        a.walls.push_back(box_wall(sign * 1.75, -11.0, 0.25, 5.0));   // stem side
        a.walls.push_back(box_wall(sign * 5.25, -6.25, 3.25, 0.25));  // chamber back
        a.walls.push_back(box_wall(sign * 8.25, 0.0, 0.25, 6.0));     // chamber side
    }
    a.walls.push_back(box_wall(0.0, -16.25, 2.0, 0.25));  // stem end
    a.walls.push_back(box_wall(0.0, 6.25, 8.5, 0.25));    // chamber front
    a.walls.push_back(box_wall(0.0, 2.0, 0.15, 4.0));     // divider
    const double arm = s.layout.coin() ? 1.0 : -1.0;
    a.foods.push_back(food(FoodKind::green, 1.0, arm * s.layout.uniform(3.0, 6.0), s.layout.uniform(1.0, 4.0)));
    if (d > 5)
        a.foods.push_back(
            food(FoodKind::green, 0.5, -arm * s.layout.uniform(3.0, 6.0), s.layout.uniform(1.0, 4.0)));
    return a;
}

ArenaSpec build_l2d(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    a.spawn = {0.0, 0.0, s.layout.uniform(0.0, 360.0), std::nullopt};
    const Vec3 fwd = forward_of(a.spawn.heading_deg);
    const Vec3 left = left_of(a.spawn.heading_deg);
    const Vec3 g = fwd * 2.5 + left * s.layout.uniform(-0.5, 0.5);
    a.foods.push_back(food(FoodKind::green, 0.5, g.x, g.z));
    const double side = s.layout.coin() ? 1.0 : -1.0;
    const Vec3 p = fwd * 6.0 + left * (side * 2.5);
    const double pillar_height = 3.0;
    WallSpec pillar = box_wall(p.x, p.z, 0.75, 0.75, pillar_height, a.spawn.heading_deg);
    pillar.role = WallRole::pillar;
    pillar.color = {0.55, 0.5, 0.45};
    a.walls.push_back(pillar);
    a.foods.push_back(food(FoodKind::yellow, 2.0, p.x, p.z, pillar_height));
    ScriptSpec sc;
    sc.kind = ScriptKind::descend_pillar;
    sc.targets = {{ObjectRef::Kind::wall, 0}, {ObjectRef::Kind::food, 1}};
    sc.drop = pillar_height;
    sc.speed = pillar_height / (t.l2d_descent_base + t.l2d_descent_step * d);
    a.scripts.push_back(sc);
    return a;
}

// Transparent U around the food, closed toward the agent so it has to detour.
ArenaSpec build_l3(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    a.spawn = {s.layout.uniform(-12.0, 12.0), s.layout.uniform(-12.0, 12.0), 0.0, std::nullopt};
    const Vec3 spawn{a.spawn.x, 0.0, a.spawn.z};
    const double side = t.l3_side_base + t.l3_side_step * d;
    const double th = 0.1;
    const Vec3 fpos = with_retries([&]() -> std::optional<Vec3> {
        const double ang = s.layout.uniform(0.0, 2.0 * kPi);
        const double dist = s.layout.uniform(5.0, 9.0);
        const Vec3 p = spawn + Vec3{std::sin(ang), 0.0, std::cos(ang)} * dist;
        if (!in_arena(p.x, p.z, 0.5 * side + 3.0)) return std::nullopt;
        return p;
    });
    // Face the food, give or take.
    const Vec3 to_food = fpos - spawn;
    a.spawn.heading_deg = rad_to_deg(std::atan2(to_food.x, to_food.z)) + s.layout.uniform(-30.0, 30.0);
    a.foods.push_back(food(FoodKind::green, 1.0, fpos.x, fpos.z));

    const Vec3 toward = normalized(spawn - fpos);
    const double yaw = rad_to_deg(std::atan2(toward.x, toward.z));
    const Vec3 lat = left_of(yaw);
    const Vec3 front = fpos + toward * (0.5 * side + th);
    WallSpec fw = box_wall(front.x, front.z, 0.5 * side + 2 * th, th, kInnerWallHeight, yaw);
    fw.transparent = true;
    fw.color = kTransparentColor;
    a.walls.push_back(fw);
    for (const double sgn : {1.0, -1.0}) {
        const Vec3 c = fpos + lat * (sgn * (0.5 * side + th));
        WallSpec sw = box_wall(c.x, c.z, th, 0.5 * side, kInnerWallHeight, yaw);
        sw.transparent = true;
        sw.color = kTransparentColor;
        a.walls.push_back(sw);
    }

    const int extra = 1 + d / 2;
    for (int i = 0; i < extra; ++i) {
        a.walls.push_back(with_retries([&]() -> std::optional<WallSpec> {
            const double len = s.layout.uniform(1.0, 2.0 + 0.4 * d);
            const double height = s.layout.uniform(0.8, 1.5 + 0.1 * d);
            WallSpec w = box_wall(s.layout.uniform(-17.0, 17.0), s.layout.uniform(-17.0, 17.0), 0.5 * len, 0.15,
                                  height, s.layout.uniform(0.0, 180.0));
            w.color = {s.colors.uniform(0.3, 0.8), s.colors.uniform(0.3, 0.8), s.colors.uniform(0.3, 0.8)};
            const double r = footprint_radius(w);
            if (!in_arena(w.center.x, w.center.z, r + 0.5)) return std::nullopt;
            if (horizontal_distance(w.center, spawn) < r + 2.5) return std::nullopt;
            if (horizontal_distance(w.center, fpos) < r + 0.5 * side * std::sqrt(2.0) + 2.5) return std::nullopt;
            for (const WallSpec& o : a.walls)
                if (horizontal_distance(w.center, o.center) < r + footprint_radius(o) + 0.5) return std::nullopt;
            return w;
        }));
    }
    return a;
}

ArenaSpec build_l4(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    a.spawn = {0.0, -12.0, 0.0, std::nullopt};
    const double side = t.l4_hole_base + t.l4_hole_step * d;
    const int count = d > t.l4_third_hole_above ? 3 : 2;
    for (int i = 0; i < count; ++i) {
        a.holes.push_back(with_retries([&]() -> std::optional<Rect> {
            const double cx = s.layout.uniform(-kHalf + 0.5 * side + 1.0, kHalf - 0.5 * side - 1.0);
            const double cz = s.layout.uniform(-8.0 + 0.5 * side, 6.0 - 0.5 * side);
            const Rect r{cx - 0.5 * side, cx + 0.5 * side, cz - 0.5 * side, cz + 0.5 * side};
            for (const Rect& o : a.holes) {
                const double gap_x = std::max(o.min_x - r.max_x, r.min_x - o.max_x);
                const double gap_z = std::max(o.min_z - r.max_z, r.min_z - o.max_z);
                if (std::max(gap_x, gap_z) < 2.5) return std::nullopt;
            }
            return r;
        }));
    }
    a.foods.push_back(food(FoodKind::green, 1.0, s.layout.uniform(-8.0, 8.0), s.layout.uniform(8.0, 12.0)));
    return a;
}

// Recursive-division maze over an n x n grid of square cells.
ArenaSpec build_l5(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    const int n = 4 + static_cast<int>(std::ceil(d / 3.0));
    const double cell = t.l5_cell;
    const double origin = -0.5 * n * cell;
    const double th = 0.3;
    const double height = kInnerWallHeight;

    // h[k][i]: wall on grid line z = k between x cells i and i+1 (k in 1..n-1).
    std::vector<std::vector<bool>> h(static_cast<size_t>(n + 1), std::vector<bool>(static_cast<size_t>(n), false));
    std::vector<std::vector<bool>> v(static_cast<size_t>(n + 1), std::vector<bool>(static_cast<size_t>(n), false));
    std::function<void(int, int, int, int)> divide = [&](int x0, int z0, int w, int hgt) {
        if (w < 2 || hgt < 2) return;
        const bool horizontal = hgt > w ? true : (w > hgt ? false : s.layout.coin());
        if (horizontal) {
            const int k = static_cast<int>(s.layout.uniform_int(1, hgt - 1));
            const int gap = static_cast<int>(s.layout.uniform_int(0, w - 1));
            for (int i = 0; i < w; ++i)
                if (i != gap) h[static_cast<size_t>(z0 + k)][static_cast<size_t>(x0 + i)] = true;
            divide(x0, z0, w, k);
            divide(x0, z0 + k, w, hgt - k);
        } else {
            const int k = static_cast<int>(s.layout.uniform_int(1, w - 1));
            const int gap = static_cast<int>(s.layout.uniform_int(0, hgt - 1));
            for (int i = 0; i < hgt; ++i)
                if (i != gap) v[static_cast<size_t>(x0 + k)][static_cast<size_t>(z0 + i)] = true;
            divide(x0, z0, k, hgt);
            divide(x0 + k, z0, w - k, hgt);
        }
    };
    divide(0, 0, n, n);

    // Outer frame: north/south run full width, east/west fit between them.
    const double span = n * cell;
    a.walls.push_back(box_wall(0.0, origin, 0.5 * span + 0.5 * th, 0.5 * th, height));
    a.walls.push_back(box_wall(0.0, origin + span, 0.5 * span + 0.5 * th, 0.5 * th, height));
    a.walls.push_back(box_wall(origin, 0.0, 0.5 * th, 0.5 * span - 0.5 * th, height));
    a.walls.push_back(box_wall(origin + span, 0.0, 0.5 * th, 0.5 * span - 0.5 * th, height));

    // Merge collinear edges and pull segment ends back so they meet crossing
    // walls face to face.
    const auto emit_runs = [&](const std::vector<bool>& line, double fixed, bool along_x) {
        int i = 0;
        while (i < n) {
            if (!line[static_cast<size_t>(i)]) {
                ++i;
                continue;
            }
            int j = i;
            while (j + 1 < n && line[static_cast<size_t>(j + 1)]) ++j;
            const double lo = origin + i * cell + 0.5 * th;
            const double hi = origin + (j + 1) * cell - 0.5 * th;
            const double mid = 0.5 * (lo + hi);
            const double half_len = 0.5 * (hi - lo);
            if (along_x)
                a.walls.push_back(box_wall(mid, fixed, half_len, 0.5 * th, height));
            else
                a.walls.push_back(box_wall(fixed, mid, 0.5 * th, half_len, height));
            i = j + 1;
        }
    };
    for (int k = 1; k < n; ++k) emit_runs(h[static_cast<size_t>(k)], origin + k * cell, true);
    for (int k = 1; k < n; ++k) emit_runs(v[static_cast<size_t>(k)], origin + k * cell, false);
    for (WallSpec& w : a.walls)
        w.color = {s.colors.uniform(0.4, 0.7), s.colors.uniform(0.4, 0.7), s.colors.uniform(0.4, 0.7)};

    const int cells = n * n;
    const int start = static_cast<int>(s.layout.uniform_int(0, cells - 1));
    int goal = static_cast<int>(s.layout.uniform_int(0, cells - 2));
    if (goal >= start) ++goal;
    const auto centre = [&](int c) {
        return Vec3{origin + (c % n + 0.5) * cell, 0.0, origin + (c / n + 0.5) * cell};
    };
    const Vec3 sp = centre(start);
    a.spawn = {sp.x, sp.z, s.layout.uniform(0.0, 360.0), std::nullopt};
    const Vec3 fp = centre(goal);
    a.foods.push_back(food(FoodKind::green, 1.0, fp.x + s.layout.uniform(-0.8, 0.8), fp.z + s.layout.uniform(-0.8, 0.8)));
    return a;
}

ArenaSpec build_l8(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    a.spawn = {0.0, -6.0, 0.0, std::nullopt};
    a.walls.push_back(box_wall(0.0, 2.25, 3.0, 0.25, 2.0));   // front wall
    a.walls.push_back(box_wall(0.0, 5.25, 0.15, 2.75, 2.0));  // barrier
    const double side = s.layout.coin() ? 1.0 : -1.0;
    const double start_z = s.layout.uniform(0.0, 1.5);
    const double end_x = side * s.layout.uniform(1.3, 2.0);
    FoodSpec f = food(FoodKind::green, 1.0, side * 6.0, start_z);
    a.foods.push_back(f);
    ScriptSpec sc;
    sc.kind = ScriptKind::linear_move;
    sc.targets = {{ObjectRef::Kind::food, 0}};
    sc.speed = t.l8_speed_base + t.l8_speed_step * d;
    sc.waypoints = {{side * 6.0, f.position.y, 5.0}, {end_x, f.position.y, 5.0}};
    a.scripts.push_back(sc);
    // The empty side of the barrier hides a hole.
    const double lo = -side > 0 ? 0.4 : -3.5;
    a.holes.push_back({lo, lo + 3.1, 3.0, 7.0});
    return a;
}

// Four 8x8 rooms around the spawn; each entrance closes behind the agent.
ArenaSpec build_l9(Streams& s, int d, const LevelTuning&) {
    ArenaSpec a;
    a.spawn = {0.0, 0.0, s.layout.uniform(0.0, 360.0), std::nullopt};
    const int hi = 2 + static_cast<int>(std::ceil(d / 2.0));
    std::array<int, 4> counts{};
    for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxGenerationAttempts) throw Retry{};
        for (int& c : counts) c = static_cast<int>(s.layout.uniform_int(1, hi));
        const int mx = *std::max_element(counts.begin(), counts.end());
        if (std::count(counts.begin(), counts.end(), mx) == 1) break;
    }
    // Quarter turns about the origin, exact for the axis-aligned layout.
    const auto rot = [](int k, double x, double z) {
        switch (k & 3) {
            case 0: return std::pair{x, z};
            case 1: return std::pair{z, -x};
            case 2: return std::pair{-x, -z};
            default: return std::pair{-z, x};
        }
    };
    const auto rot_wall = [&](int k, double cx, double cz, double hx, double hz) {
        const auto [x, z] = rot(k, cx, cz);
        return (k & 1) ? box_wall(x, z, hz, hx, 2.0) : box_wall(x, z, hx, hz, 2.0);
    };
    const auto rot_rect = [&](int k, const Rect& r) {
        const auto [x0, z0] = rot(k, r.min_x, r.min_z);
        const auto [x1, z1] = rot(k, r.max_x, r.max_z);
        return Rect{std::min(x0, x1), std::max(x0, x1), std::min(z0, z1), std::max(z0, z1)};
    };
    for (int k = 0; k < 4; ++k) {
        a.walls.push_back(rot_wall(k, 0.0, 16.25, 4.5, 0.25));
        a.walls.push_back(rot_wall(k, 4.25, 12.0, 0.25, 4.0));
        a.walls.push_back(rot_wall(k, -4.25, 12.0, 0.25, 4.0));
        a.walls.push_back(rot_wall(k, 3.0, 7.75, 1.5, 0.25));
        a.walls.push_back(rot_wall(k, -3.0, 7.75, 1.5, 0.25));
        WallSpec gate = rot_wall(k, 0.0, 7.75, 1.5, 0.25);
        gate.role = WallRole::gate;
        gate.active = false;
        gate.color = {0.5, 0.35, 0.3};
        const int gate_index = static_cast<int>(a.walls.size());
        a.walls.push_back(gate);

        SectorSpec sec;
        sec.region = rot_rect(k, {-4.0, 4.0, 8.0, 16.0});
        sec.gate = gate_index;
        std::vector<Vec3> placed;
        for (int i = 0; i < counts[static_cast<size_t>(k)]; ++i) {
            const Vec3 p = with_retries([&]() -> std::optional<Vec3> {
                const Vec3 q{s.layout.uniform(-3.2, 3.2), 0.0, s.layout.uniform(10.5, 15.2)};
                for (const Vec3& o : placed)
                    if (horizontal_distance(q, o) < 0.9) return std::nullopt;
                return q;
            });
            placed.push_back(p);
            const auto [x, z] = rot(k, p.x, p.z);
            sec.foods.push_back(static_cast<int>(a.foods.size()));
            a.foods.push_back(food(FoodKind::green, 0.5, x, z));
        }
        ScriptSpec sc;
        sc.kind = ScriptKind::close_gate_on_entry;
        sc.targets = {{ObjectRef::Kind::wall, gate_index}};
        sc.region = rot_rect(k, {-4.0, 4.0, 9.5, 16.0});
        a.scripts.push_back(sc);
        a.sectors.push_back(sec);
    }
    return a;
}

ArenaSpec build_l10(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    const double width = t.l10_trench_base + t.l10_trench_step * d;
    a.spawn = {s.layout.uniform(-4.0, 4.0), -7.0, s.layout.uniform(-20.0, 20.0), std::nullopt};
    a.holes.push_back({-kHalf, kHalf, 0.0, width});
    const double px = s.layout.uniform(-3.0, 3.0);
    const double plank_height = width + 1.5;
    WallSpec plank = box_wall(px, -0.15, 0.75, 0.1, plank_height);
    plank.role = WallRole::plank;
    plank.mass = 1.5;
    plank.color = {0.6, 0.45, 0.25};
    a.walls.push_back(plank);
    if (d >= 3) {
        const double sgn = s.layout.coin() ? 1.0 : -1.0;
        WallSpec glass = box_wall(px + sgn * 3.0, -0.15, 0.75, 0.1, plank_height);
        glass.transparent = true;
        glass.color = kTransparentColor;
        a.walls.push_back(glass);
        WallSpec slab = box_wall(px - sgn * 3.0, -0.15, 0.75, 0.1, plank_height);
        slab.color = plank.color;
        a.walls.push_back(slab);
    }
    a.foods.push_back(food(FoodKind::green, 1.0, px + s.layout.uniform(-2.0, 2.0), width + 4.0));
    return a;
}

double smoothstep(double f) { return f * f * (3.0 - 2.0 * f); }

ArenaSpec build_l11(Streams& s, int d, const LevelTuning& t) {
    ArenaSpec a;
    const double amp = t.l11_amplitude_step * d;
    const double lattice = std::max(t.l11_lattice_min, t.l11_lattice_base - t.l11_lattice_step * d);
    const int m = static_cast<int>(std::ceil(2.0 * kHalf / lattice)) + 2;
    std::vector<double> values(static_cast<size_t>(m * m));
    for (double& v : values) v = s.layout.uniform(-1.0, 1.0);
    const auto noise = [&](double x, double z) {
        const double gx = (x + kHalf) / lattice;
        const double gz = (z + kHalf) / lattice;
        const int ix = std::min(static_cast<int>(std::floor(gx)), m - 2);
        const int iz = std::min(static_cast<int>(std::floor(gz)), m - 2);
        const double u = smoothstep(gx - ix);
        const double w = smoothstep(gz - iz);
        const auto at = [&](int i, int k) { return values[static_cast<size_t>(k * m + i)]; };
        return at(ix, iz) * (1 - u) * (1 - w) + at(ix + 1, iz) * u * (1 - w) + at(ix, iz + 1) * (1 - u) * w +
               at(ix + 1, iz + 1) * u * w;
    };
    Heightfield hf;
    hf.resolution = 81;
    hf.cell_size = 0.5;
    hf.origin_x = -kHalf;
    hf.origin_z = -kHalf;
    hf.heights.resize(81 * 81);
    for (int iz = 0; iz < 81; ++iz)
        for (int ix = 0; ix < 81; ++ix)
            hf.heights[static_cast<size_t>(iz * 81 + ix)] = amp * noise(-kHalf + 0.5 * ix, -kHalf + 0.5 * iz);

    a.spawn = {s.layout.uniform(-10.0, 10.0), s.layout.uniform(-10.0, 10.0), s.layout.uniform(0.0, 360.0),
               std::nullopt};
    // Level pad under the spawn so every foot rests on the ground.
    const double pad = hf.height(a.spawn.x, a.spawn.z);
    for (int iz = 0; iz < 81; ++iz)
        for (int ix = 0; ix < 81; ++ix)
            if (std::hypot(-kHalf + 0.5 * ix - a.spawn.x, -kHalf + 0.5 * iz - a.spawn.z) <= 1.6)
                hf.heights[static_cast<size_t>(iz * 81 + ix)] = pad;

    const Vec3 fp = with_retries([&]() -> std::optional<Vec3> {
        const double ang = s.layout.uniform(0.0, 2.0 * kPi);
        const Vec3 p{a.spawn.x + 8.0 * std::sin(ang), 0.0, a.spawn.z + 8.0 * std::cos(ang)};
        if (!in_arena(p.x, p.z, 2.0)) return std::nullopt;
        return p;
    });
    a.foods.push_back(food(FoodKind::green, 1.0, fp.x, fp.z, hf.height(fp.x, fp.z)));
    a.terrain = hf;
    return a;
}

ArenaSpec build(TaskId task, Streams& s, int d, const LevelTuning& t) {
    switch (task) {
        case TaskId::L0: return build_l0(s, d, t);
        case TaskId::L1: return build_l1(s, d, t);
        case TaskId::L2Y: return build_l2y(s, d, t);
        case TaskId::L2D: return build_l2d(s, d, t);
        case TaskId::L3: return build_l3(s, d, t);
        case TaskId::L4: return build_l4(s, d, t);
        case TaskId::L5: return build_l5(s, d, t);
        case TaskId::L8: return build_l8(s, d, t);
        case TaskId::L9: return build_l9(s, d, t);
        case TaskId::L10: return build_l10(s, d, t);
        case TaskId::L11: return build_l11(s, d, t);
        case TaskId::L6:
        case TaskId::L7: break;
    }
    throw GenerationFailed("wrapper task has no layout of its own");
}

void repaint(ArenaSpec& a, Rng& colors) {
    std::array<Rgb, 5> palette;
    for (Rgb& c : palette) c = {colors.uniform(), colors.uniform(), colors.uniform()};
    const auto pick = [&]() { return palette[static_cast<size_t>(colors.uniform_int(0, 4))]; };
    for (WallSpec& w : a.walls) w.color = pick();
    for (FoodSpec& f : a.foods) f.color = pick();
}

}  // namespace

ArenaSpec generate(const GenParams& p, const LevelTuning& tuning) {
    if (p.difficulty < 0 || p.difficulty > 10) throw ConfigError("difficulty must be in [0, 10]");
    TaskId base = p.task;
    if (p.task == TaskId::L6 || p.task == TaskId::L7) {
        Rng wrapper = derive_rng(p.seed, "wrapper");
        base = kBaseTasks[static_cast<size_t>(wrapper.uniform_int(0, kBaseTasks.size() - 1))];
    }
    Streams s{derive_rng(p.seed, "layout"), derive_rng(p.seed, "colors"), derive_rng(p.seed, "scripts")};
    std::string last_error = "placement constraints";
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        try {
            ArenaSpec a = build(base, s, p.difficulty, tuning);
            a.task = to_string(p.task);
            a.base_task = to_string(base);
            a.difficulty = p.difficulty;
            a.seed = p.seed;
            if (p.task == TaskId::L6) repaint(a, s.colors);
            if (p.task == TaskId::L7) {
                Rng b = derive_rng(p.seed, "blackout");
                a.blackout = BlackoutSchedule::for_difficulty(p.difficulty, b);
            }
            instantiate(a);  // validates and checks the spawn pose
            return a;
        } catch (const Retry&) {
            last_error = "placement constraints";
        } catch (const InvalidSpec& e) {
            last_error = e.what();
        } catch (const SpawnRejected& e) {
            last_error = e.what();
        }
    }
    throw GenerationFailed("task " + to_string(p.task) + " difficulty " + std::to_string(p.difficulty) + " seed " +
                           std::to_string(p.seed) + ": " + last_error);
}

}  // namespace aai
