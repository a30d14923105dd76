#include "aai/errors.hpp"
#include "aai/levels.hpp"
#include "support/oracles.hpp"
#include "support/walker.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace aai;

namespace {

double spawn_distance(const ArenaSpec& a, const FoodSpec& f) {
    return std::hypot(f.position.x - a.spawn.x, f.position.z - a.spawn.z);
}

int green_count(const ArenaSpec& a) {
    int n = 0;
    for (const FoodSpec& f : a.foods) n += f.kind == FoodKind::green ? 1 : 0;
    return n;
}

// Hardness actually realized in a generated arena.
double measured_hardness(const ArenaSpec& a, TaskId task) {
    switch (task) {
        case TaskId::L0: return std::hypot(3.0 + 1.5 * a.difficulty, 0.0) <= spawn_distance(a, a.foods[0]) + 1e-9
                                    ? spawn_distance(a, a.foods[0])
                                    : -1.0;
        case TaskId::L1: return static_cast<double>(a.foods.size());
        case TaskId::L2Y: return static_cast<double>(a.foods.size());
        case TaskId::L2D: return a.scripts[0].drop / a.scripts[0].speed;
        case TaskId::L3: return 2.0 * a.walls[1].half_extents.z;
        case TaskId::L4: return a.holes[0].max_x - a.holes[0].min_x;
        case TaskId::L5: return std::round(2.0 * a.walls[0].half_extents.x / 4.0);
        case TaskId::L7: return a.blackout->duty_cycle(10000);
        case TaskId::L8: return a.scripts[0].speed;
        case TaskId::L9: {
            double mx = 0;
            for (const SectorSpec& s : a.sectors) mx = std::max(mx, static_cast<double>(s.foods.size()));
            return mx;
        }
        case TaskId::L10: return a.holes[0].max_z - a.holes[0].min_z;
        case TaskId::L11: {
            double mx = 0;
            for (const double h : a.terrain->heights) mx = std::max(mx, std::abs(h));
            return mx;
        }
        default: return 0.0;
    }
}

}  // namespace

TEST_CASE("task names round-trip") {
    for (const TaskId t : kAllTasks) CHECK(parse_task(to_string(t)) == t);
    CHECK(!parse_task("L12").has_value());
    CHECK(!parse_task("l0").has_value());
}

TEST_CASE("derive_rng matches the splitmix64 reference") {
    std::uint64_t x = 0;
    CHECK(oracle::splitmix64_next(x) == 0xe220a8397b1dcdafULL);  // published first output for state 0

    std::uint64_t state = 0ULL ^ oracle::fnv1a("layout");
    Rng r = derive_rng(0, "layout");
    for (int i = 0; i < 100; ++i) CHECK(r.next() == oracle::splitmix64_next(state));

    Rng a = derive_rng(42, "layout"), b = derive_rng(42, "layout");
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng c = derive_rng(42, "layout"), d = derive_rng(42, "colors");
    int same = 0;
    for (int i = 0; i < 100; ++i) same += c.next() == d.next() ? 1 : 0;
    CHECK(same == 0);
}

TEST_CASE("L0 at difficulty 0 places one food straight ahead at 3 m") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ArenaSpec a = generate({TaskId::L0, 0, seed});
        REQUIRE(a.foods.size() == 1);
        CHECK(a.foods[0].kind == FoodKind::green);
        CHECK(a.foods[0].scale == doctest::Approx(1.5));
        CHECK(spawn_distance(a, a.foods[0]) == doctest::Approx(3.0).epsilon(1e-12));
        // Lateral offset zero: the food lies on the heading ray.
        const double h = deg_to_rad(a.spawn.heading_deg);
        const double lateral = (a.foods[0].position.x - a.spawn.x) * std::cos(h) -
                               (a.foods[0].position.z - a.spawn.z) * std::sin(h);
        CHECK(std::abs(lateral) < 1e-12);
    }
}

TEST_CASE("L0 distance, lateral spread and scale follow difficulty") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L0, d, 9});
        const double h = deg_to_rad(a.spawn.heading_deg);
        const Vec3 rel = a.foods[0].position - Vec3{a.spawn.x, 0, a.spawn.z};
        const double ahead = rel.x * std::sin(h) + rel.z * std::cos(h);
        const double lateral = rel.x * std::cos(h) - rel.z * std::sin(h);
        CHECK(ahead == doctest::Approx(3.0 + 1.5 * d));
        CHECK(std::abs(lateral) <= 0.5 * d + 1e-12);
        CHECK(a.foods[0].scale == doctest::Approx(1.5 - 0.1 * d));
    }
}

TEST_CASE("L1 food count and bounce scripts") {
    const int expected[11] = {1, 1, 2, 2, 3, 3, 3, 4, 4, 5, 5};
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L1, d, 4});
        CHECK(static_cast<int>(a.foods.size()) == expected[d]);
        CHECK(a.foods[0].kind == FoodKind::green);
        for (const FoodSpec& f : a.foods) {
            CHECK(f.scale >= 0.5);
            CHECK(f.scale <= 1.5);
        }
        if (d >= 4) {
            CHECK(a.scripts.size() == a.foods.size());
            for (const ScriptSpec& s : a.scripts) {
                CHECK(s.kind == ScriptKind::bounce_in_region);
                CHECK(s.speed == doctest::Approx(0.2 + 0.1 * d));
            }
        } else {
            CHECK(a.scripts.empty());
        }
    }
}

TEST_CASE("L2Y puts food in one arm and a smaller one in the other above difficulty 5") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L2Y, d, 11});
        CHECK(a.foods[0].scale == 1.0);
        if (d > 5) {
            REQUIRE(a.foods.size() == 2);
            CHECK(a.foods[1].scale == 0.5);
            CHECK(a.foods[0].position.x * a.foods[1].position.x < 0.0);
        } else {
            CHECK(a.foods.size() == 1);
        }
    }
}

TEST_CASE("L2D has a near small green and a yellow on a descending pillar") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L2D, d, 5});
        REQUIRE(a.foods.size() == 2);
        CHECK(a.foods[0].kind == FoodKind::green);
        CHECK(a.foods[0].scale == 0.5);
        CHECK(a.foods[1].kind == FoodKind::yellow);
        CHECK(a.foods[1].scale == 2.0);
        CHECK(a.walls[0].role == WallRole::pillar);
        CHECK(a.scripts[0].kind == ScriptKind::descend_pillar);
        CHECK(a.scripts[0].drop / a.scripts[0].speed == doctest::Approx(10.0 + 8.0 * d));
        // Food rests on the pillar top.
        CHECK(a.foods[1].position.y - 1.0 == doctest::Approx(a.walls[0].center.y + a.walls[0].half_extents.y));
        const Arena arena = instantiate(a);
        CHECK(arena.world.part(arena.wall_parts[0]).kinematic);
    }
}

TEST_CASE("L3 encloses the food in a transparent U plus extra opaque walls") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L3, d, 21});
        const double side = 2.0 + 0.4 * d;
        int transparent = 0, opaque = 0;
        for (const WallSpec& w : a.walls) (w.transparent ? transparent : opaque)++;
        CHECK(transparent == 3);
        CHECK(opaque == 1 + d / 2);
        CHECK(2.0 * a.walls[1].half_extents.z == doctest::Approx(side));
        // The closed side faces the spawn.
        const Vec3 to_wall = a.walls[0].center - a.foods[0].position;
        const Vec3 to_spawn = Vec3{a.spawn.x, 0, a.spawn.z} - a.foods[0].position;
        CHECK(to_wall.x * to_spawn.x + to_wall.z * to_spawn.z > 0.0);
    }
}

TEST_CASE("L4 hole count is 2 up to difficulty 5 and 3 above") {
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        for (int d = 0; d <= 10; ++d) {
            const ArenaSpec a = generate({TaskId::L4, d, seed});
            CHECK(a.holes.size() == (d > 5 ? 3u : 2u));
            for (const Rect& h : a.holes) CHECK(h.max_x - h.min_x == doctest::Approx(2.0 + 0.6 * d));
        }
}

TEST_CASE("L5 maze grows with difficulty and separates spawn from food") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L5, d, 33});
        const int n = 4 + static_cast<int>(std::ceil(d / 3.0));
        CHECK(measured_hardness(a, TaskId::L5) == n);
        // A spanning tree of n*n cells has n*n - 1 passages; total walls exceed the frame.
        CHECK(a.walls.size() > 4u);
        const double origin = -2.0 * n;
        const int sc = static_cast<int>(std::floor((a.spawn.x - origin) / 4.0)) +
                       n * static_cast<int>(std::floor((a.spawn.z - origin) / 4.0));
        const int fc = static_cast<int>(std::floor((a.foods[0].position.x - origin) / 4.0)) +
                       n * static_cast<int>(std::floor((a.foods[0].position.z - origin) / 4.0));
        CHECK(sc != fc);
    }
}

TEST_CASE("L6 repaints with five colors over a base task") {
    std::set<std::string> bases;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const ArenaSpec a = generate({TaskId::L6, 4, seed});
        CHECK(a.task == "L6");
        CHECK(a.base_task != "L6");
        CHECK(a.base_task != "L7");
        bases.insert(a.base_task);
        std::set<std::tuple<double, double, double>> colors;
        for (const WallSpec& w : a.walls) colors.insert({w.color.r, w.color.g, w.color.b});
        for (const FoodSpec& f : a.foods) colors.insert({f.color.r, f.color.g, f.color.b});
        CHECK(colors.size() <= 5);
        CHECK(green_count(a) >= 1);
    }
    CHECK(bases.size() == 11);
}

TEST_CASE("L7 attaches the blackout schedule") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L7, d, 8});
        REQUIRE(a.blackout.has_value());
        CHECK(a.blackout->period == std::max(50, 200 - 15 * d));
        CHECK(a.blackout->duration == 10 + 4 * d);
        CHECK(a.blackout->phase >= 0);
        CHECK(a.blackout->phase < a.blackout->period);
    }
}

TEST_CASE("L8 food slides behind the wall; the other side hides a hole") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L8, d, 13});
        REQUIRE(a.scripts.size() == 1);
        CHECK(a.scripts[0].kind == ScriptKind::linear_move);
        CHECK(a.scripts[0].speed == doctest::Approx(0.5 + 0.3 * d));
        const Vec3 end = a.scripts[0].waypoints.back();
        CHECK(end.z > a.walls[0].center.z);
        REQUIRE(a.holes.size() == 1);
        const double hole_mid = 0.5 * (a.holes[0].min_x + a.holes[0].max_x);
        CHECK(hole_mid * end.x < 0.0);
    }
}

TEST_CASE("L9 sectors are decidable") {
    int decidable = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const ArenaSpec a = generate({TaskId::L9, 10, seed});
        REQUIRE(a.sectors.size() == 4);
        std::vector<size_t> counts;
        for (const SectorSpec& s : a.sectors) counts.push_back(s.foods.size());
        if (!(counts[0] == counts[1] && counts[1] == counts[2] && counts[2] == counts[3])) ++decidable;
        for (const size_t c : counts) {
            CHECK(c >= 1);
            CHECK(c <= 7);
        }
    }
    CHECK(decidable >= 990);
}

TEST_CASE("L9 gates start open and foods are small greens inside their rooms") {
    const ArenaSpec a = generate({TaskId::L9, 3, 77});
    for (const SectorSpec& s : a.sectors) {
        CHECK(!a.walls[static_cast<size_t>(s.gate)].active);
        CHECK(a.walls[static_cast<size_t>(s.gate)].role == WallRole::gate);
        for (const int f : s.foods) {
            const FoodSpec& food = a.foods[static_cast<size_t>(f)];
            CHECK(food.kind == FoodKind::green);
            CHECK(food.scale == 0.5);
            CHECK(s.region.contains(food.position.x, food.position.z));
        }
    }
}

TEST_CASE("L10 trench, plank and decoys") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L10, d, 17});
        const double w = 1.5 + 0.25 * d;
        REQUIRE(a.holes.size() == 1);
        CHECK(a.holes[0].max_z - a.holes[0].min_z == doctest::Approx(w));
        CHECK(a.holes[0].max_x - a.holes[0].min_x == doctest::Approx(40.0));
        CHECK(a.walls[0].role == WallRole::plank);
        CHECK(2.0 * a.walls[0].half_extents.y > w);
        CHECK(a.walls.size() == (d >= 3 ? 3u : 1u));
        CHECK(a.foods[0].position.z > a.holes[0].max_z);
    }
}

TEST_CASE("L11 terrain amplitude and a level spawn") {
    for (int d = 0; d <= 10; ++d) {
        const ArenaSpec a = generate({TaskId::L11, d, 3});
        REQUIRE(a.terrain.has_value());
        CHECK(measured_hardness(a, TaskId::L11) <= 0.05 * d + 1e-12);
        CHECK(spawn_distance(a, a.foods[0]) == doctest::Approx(8.0));
    }
    const ArenaSpec a = generate({TaskId::L11, 10, 3});
    const Arena arena = instantiate(a);
    for (const double p : proprioception(arena.world, arena.agent)) CHECK(p == 0.0);
    for (const int leg : arena.agent.legs) {
        const auto [e0, e1] = capsule_segment(arena.world.part(leg));
        const Vec3 tip = e0.y < e1.y ? e0 : e1;
        const double gap = tip.y - arena.world.part(leg).shape.radius - *arena.world.terrain.height(tip.x, tip.z);
        CHECK(std::abs(gap) < 1e-3);
    }
    for (const int id : arena.world.bodies[static_cast<size_t>(arena.agent.body)].parts) {
        const RigidPart& p = arena.world.part(id);
        CHECK(p.position.y - *arena.world.terrain.height(p.position.x, p.position.z) > 0.0);
    }
}

TEST_CASE("hardness scalars are monotone in difficulty") {
    for (const TaskId t : kAllTasks) {
        for (int d = 0; d < 10; ++d) CHECK(hardness(t, d + 1) >= hardness(t, d));
    }
    const TaskId measured[] = {TaskId::L0, TaskId::L1, TaskId::L2D, TaskId::L3, TaskId::L4,
                               TaskId::L5, TaskId::L7, TaskId::L8, TaskId::L10, TaskId::L11};
    for (const TaskId t : measured)
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            double prev = -1.0;
            for (int d = 0; d <= 10; ++d) {
                const double h = measured_hardness(generate({t, d, seed}), t);
                CHECK_MESSAGE(h >= prev - 1e-12, to_string(t) << " d" << d << " seed " << seed);
                prev = h;
            }
        }
}

TEST_CASE("regeneration is byte-identical") {
    for (const TaskId t : kAllTasks)
        for (std::uint64_t seed : {0ULL, 1ULL, 123456789ULL, 0xffffffffffffffffULL}) {
            const std::string a = serialize(generate({t, 7, seed}));
            const std::string b = serialize(generate({t, 7, seed}));
            CHECK(a == b);
            CHECK(serialize(parse_arena(a)) == a);
        }
}

TEST_CASE("every arena has green food and is walkable") {
    int unreachable = 0, total = 0;
    for (const TaskId t : kAllTasks)
        for (int d = 0; d <= 10; ++d)
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                const ArenaSpec a = generate({t, d, seed});
                CHECK(green_count(a) >= 1);
                CHECK_NOTHROW(validate(a));
                ++total;
                if (!testing::oracle_walk(a).reachable) {
                    ++unreachable;
                    MESSAGE("unreachable " << to_string(t) << " d" << d << " seed " << seed);
                }
            }
    CHECK(unreachable * 100 <= total);
}

TEST_CASE("invalid difficulty is a config error") {
    CHECK_THROWS_AS(generate({TaskId::L0, 11, 0}), ConfigError);
    CHECK_THROWS_AS(generate({TaskId::L0, -1, 0}), ConfigError);
}
