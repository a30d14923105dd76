#include "aai/physics.hpp"

#include <algorithm>
#include <array>
#include <limits>

namespace aai {

std::string_view to_string(Tag tag) {
    switch (tag) {
        case Tag::agent_head: return "agent-head";
        case Tag::agent_limb: return "agent-limb";
        case Tag::wall: return "wall";
        case Tag::food_green: return "food-green";
        case Tag::food_yellow: return "food-yellow";
        case Tag::plank: return "plank";
        case Tag::pillar: return "pillar";
        case Tag::floor: return "floor";
        case Tag::arena_bound: return "arena-bound";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Terrain

double Heightfield::height(double x, double z) const {
    const double fx = (x - origin_x) / cell_size;
    const double fz = (z - origin_z) / cell_size;
    const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, resolution - 2);
    const int iz = std::clamp(static_cast<int>(std::floor(fz)), 0, resolution - 2);
    const double u = std::clamp(fx - ix, 0.0, 1.0);
    const double v = std::clamp(fz - iz, 0.0, 1.0);
    const double h00 = at(ix, iz);
    const double h10 = at(ix + 1, iz);
    const double h01 = at(ix, iz + 1);
    const double h11 = at(ix + 1, iz + 1);
    return h00 * (1 - u) * (1 - v) + h10 * u * (1 - v) + h01 * (1 - u) * v + h11 * u * v;
}

Vec3 Heightfield::normal(double x, double z) const {
    const double fx = (x - origin_x) / cell_size;
    const double fz = (z - origin_z) / cell_size;
    const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, resolution - 2);
    const int iz = std::clamp(static_cast<int>(std::floor(fz)), 0, resolution - 2);
    const double u = std::clamp(fx - ix, 0.0, 1.0);
    const double v = std::clamp(fz - iz, 0.0, 1.0);
    const double h00 = at(ix, iz);
    const double h10 = at(ix + 1, iz);
    const double h01 = at(ix, iz + 1);
    const double h11 = at(ix + 1, iz + 1);
    const double dhdx = ((h10 - h00) * (1 - v) + (h11 - h01) * v) / cell_size;
    const double dhdz = ((h01 - h00) * (1 - u) + (h11 - h10) * u) / cell_size;
    return normalized(Vec3{-dhdx, 1.0, -dhdz});
}

bool Terrain::over_hole(double x, double z) const {
    return std::any_of(holes.begin(), holes.end(), [&](const HoleRect& h) { return h.contains(x, z); });
}

std::optional<double> Terrain::height(double x, double z) const {
    if (over_hole(x, z)) return std::nullopt;
    return heightfield ? heightfield->height(x, z) : floor_height;
}

Vec3 Terrain::normal(double x, double z) const {
    return heightfield ? heightfield->normal(x, z) : Vec3{0, 1, 0};
}

// ---------------------------------------------------------------------------
// Closest points and contact geometry

namespace {

double closest_param_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 <= 0.0) return 0.0;
    return std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
}

// Closest points between segments p1q1 and p2q2 (Ericson, RTCD 5.1.9).
std::pair<Vec3, Vec3> closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                                              const Vec3& q2) {
    const Vec3 d1 = q1 - p1;
    const Vec3 d2 = q2 - p2;
    const Vec3 r = p1 - p2;
    const double a = dot(d1, d1);
    const double e = dot(d2, d2);
    const double f = dot(d2, r);
    double s = 0.0;
    double t = 0.0;
    constexpr double eps = 1e-12;
    if (a <= eps && e <= eps) return {p1, p2};
    if (a <= eps) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = dot(d1, r);
        if (e <= eps) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = dot(d1, d2);
            const double denom = a * e - b * b;
            s = denom != 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    return {p1 + d1 * s, p2 + d2 * t};
}

// Signed distance from a point to an oriented box, with the outward normal
// of the nearest feature.
struct BoxDistance {
    double distance;  // negative inside
    Vec3 normal;
};

BoxDistance box_distance(const Vec3& p, const Vec3& center, const Quat& q, const Vec3& he) {
    const Vec3 local = q.conjugate().rotate(p - center);
    const Vec3 d{std::abs(local.x) - he.x, std::abs(local.y) - he.y, std::abs(local.z) - he.z};
    if (d.x > 0.0 || d.y > 0.0 || d.z > 0.0) {
        const Vec3 clamped{std::clamp(local.x, -he.x, he.x), std::clamp(local.y, -he.y, he.y),
                           std::clamp(local.z, -he.z, he.z)};
        const Vec3 delta = local - clamped;
        const double dist = norm(delta);
        return {dist, q.rotate(delta / dist)};
    }
    int axis = 0;
    if (d.y > d[axis]) axis = 1;
    if (d.z > d[axis]) axis = 2;
    Vec3 n{};
    n[axis] = local[axis] >= 0.0 ? 1.0 : -1.0;
    return {d[axis], q.rotate(n)};
}

std::optional<ContactGeometry> sphere_sphere(const Vec3& pa, double ra, const Vec3& pb, double rb,
                                             double margin) {
    const Vec3 delta = pa - pb;
    const double dist = norm(delta);
    const double pen = ra + rb - dist;
    if (pen <= -margin) return std::nullopt;
    const Vec3 n = dist > 0.0 ? delta / dist : Vec3{0, 1, 0};
    return ContactGeometry{pb + n * rb, n, pen};
}

std::optional<ContactGeometry> sphere_box(const Vec3& p, double r, const RigidPart& box, double margin) {
    const BoxDistance bd = box_distance(p, box.position, box.orientation, box.shape.half_extents);
    const double pen = r - bd.distance;
    if (pen <= -margin) return std::nullopt;
    return ContactGeometry{p - bd.normal * r, bd.normal, pen};
}

// Segment point that penetrates the box deepest (or comes closest). The
// negated signed distance along a segment is concave, so a ternary search
// finds its maximum.
Vec3 deepest_segment_point(const Vec3& a, const Vec3& b, const RigidPart& box) {
    const auto depth = [&](double t) {
        return -box_distance(a + (b - a) * t, box.position, box.orientation, box.shape.half_extents)
                    .distance;
    };
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 48; ++i) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (depth(m1) < depth(m2)) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    return a + (b - a) * (0.5 * (lo + hi));
}

std::array<Vec3, 8> box_corners(const RigidPart& p) {
    std::array<Vec3, 8> out{};
    const Vec3& he = p.shape.half_extents;
    for (int i = 0; i < 8; ++i) {
        const Vec3 local{(i & 1) ? he.x : -he.x, (i & 2) ? he.y : -he.y, (i & 4) ? he.z : -he.z};
        out[static_cast<size_t>(i)] = p.position + p.orientation.rotate(local);
    }
    return out;
}

std::optional<ContactGeometry> box_box(const RigidPart& a, const RigidPart& b, double margin) {
    std::optional<ContactGeometry> best;
    for (const Vec3& c : box_corners(a)) {
        const BoxDistance bd = box_distance(c, b.position, b.orientation, b.shape.half_extents);
        const double pen = -bd.distance;
        if (pen > -margin && (!best || pen > best->penetration)) best = ContactGeometry{c, bd.normal, pen};
    }
    for (const Vec3& c : box_corners(b)) {
        const BoxDistance bd = box_distance(c, a.position, a.orientation, a.shape.half_extents);
        const double pen = -bd.distance;
        if (pen > -margin && (!best || pen > best->penetration)) best = ContactGeometry{c, -bd.normal, pen};
    }
    return best;
}

std::optional<ContactGeometry> flipped(std::optional<ContactGeometry> c) {
    if (c) c->normal = -c->normal;
    return c;
}

}  // namespace

std::pair<Vec3, Vec3> capsule_segment(const RigidPart& p) {
    const Vec3 axis = p.orientation.rotate({0.0, p.shape.half_length, 0.0});
    return {p.position - axis, p.position + axis};
}

std::optional<ContactGeometry> part_contact(const RigidPart& a, const RigidPart& b, double margin) {
    const ShapeKind ka = a.shape.kind;
    const ShapeKind kb = b.shape.kind;
    if (ka == ShapeKind::ground || kb == ShapeKind::ground) return std::nullopt;

    if (ka == ShapeKind::sphere) {
        if (kb == ShapeKind::sphere)
            return sphere_sphere(a.position, a.shape.radius, b.position, b.shape.radius, margin);
        if (kb == ShapeKind::capsule) {
            const auto [p0, p1] = capsule_segment(b);
            const Vec3 q = p0 + (p1 - p0) * closest_param_on_segment(a.position, p0, p1);
            return sphere_sphere(a.position, a.shape.radius, q, b.shape.radius, margin);
        }
        return sphere_box(a.position, a.shape.radius, b, margin);
    }
    if (ka == ShapeKind::capsule) {
        const auto [a0, a1] = capsule_segment(a);
        if (kb == ShapeKind::sphere) {
            const Vec3 q = a0 + (a1 - a0) * closest_param_on_segment(b.position, a0, a1);
            return sphere_sphere(q, a.shape.radius, b.position, b.shape.radius, margin);
        }
        if (kb == ShapeKind::capsule) {
            const auto [b0, b1] = capsule_segment(b);
            const auto [qa, qb] = closest_segment_segment(a0, a1, b0, b1);
            return sphere_sphere(qa, a.shape.radius, qb, b.shape.radius, margin);
        }
        return sphere_box(deepest_segment_point(a0, a1, b), a.shape.radius, b, margin);
    }
    // a is a box
    if (kb == ShapeKind::box) return box_box(a, b, margin);
    return flipped(part_contact(b, a, margin));
}

Mat3 shape_inertia(const Shape& s, double mass) {
    switch (s.kind) {
        case ShapeKind::sphere: {
            const double i = 0.4 * mass * s.radius * s.radius;
            return Mat3::diagonal({i, i, i});
        }
        case ShapeKind::capsule: {
            const double h = 2.0 * s.half_length + s.radius;
            const double r2 = s.radius * s.radius;
            const double perp = mass * (3.0 * r2 + h * h) / 12.0;
            return Mat3::diagonal({perp, 0.5 * mass * r2, perp});
        }
        case ShapeKind::box: {
            const Vec3 f = s.half_extents * 2.0;
            const double k = mass / 12.0;
            return Mat3::diagonal({k * (f.y * f.y + f.z * f.z), k * (f.x * f.x + f.z * f.z),
                                   k * (f.x * f.x + f.y * f.y)});
        }
        case ShapeKind::ground: break;
    }
    return Mat3{};
}

// ---------------------------------------------------------------------------
// Rays

std::optional<double> ray_sphere(const Vec3& o, const Vec3& d, const Vec3& c, double r) {
    const Vec3 oc = o - c;
    const double b = dot(oc, d);
    const double cc = dot(oc, oc) - r * r;
    const double disc = b * b - cc;
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    const double t0 = -b - s;
    if (t0 >= 0.0) return t0;
    const double t1 = -b + s;
    if (t1 >= 0.0) return t1;
    return std::nullopt;
}

std::optional<double> ray_capsule(const Vec3& o, const Vec3& d, const Vec3& p0, const Vec3& p1, double r) {
    std::optional<double> best;
    const auto consider = [&](std::optional<double> t) {
        if (t && (!best || *t < *best)) best = t;
    };
    consider(ray_sphere(o, d, p0, r));
    consider(ray_sphere(o, d, p1, r));

    const Vec3 axis_v = p1 - p0;
    const double len = norm(axis_v);
    if (len > 0.0) {
        const Vec3 axis = axis_v / len;
        const Vec3 op = o - p0;
        const Vec3 d_perp = d - axis * dot(d, axis);
        const Vec3 o_perp = op - axis * dot(op, axis);
        const double a = dot(d_perp, d_perp);
        if (a > 0.0) {
            const double b = dot(o_perp, d_perp);
            const double c = dot(o_perp, o_perp) - r * r;
            const double disc = b * b - a * c;
            if (disc >= 0.0) {
                const double s = std::sqrt(disc);
                for (const double t : {(-b - s) / a, (-b + s) / a}) {
                    if (t < 0.0) continue;
                    const double along = dot(op + d * t, axis);
                    if (along >= 0.0 && along <= len) {
                        consider(t);
                        break;
                    }
                }
            }
        }
    }
    return best;
}

std::optional<double> ray_box(const Vec3& o, const Vec3& d, const Vec3& center, const Quat& q,
                              const Vec3& he) {
    const Quat inv = q.conjugate();
    const Vec3 lo = inv.rotate(o - center);
    const Vec3 ld = inv.rotate(d);
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        if (ld[i] == 0.0) {
            if (lo[i] < -he[i] || lo[i] > he[i]) return std::nullopt;
            continue;
        }
        double t1 = (-he[i] - lo[i]) / ld[i];
        double t2 = (he[i] - lo[i]) / ld[i];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
        if (tmin > tmax) return std::nullopt;
    }
    if (tmax < 0.0) return std::nullopt;
    return tmin >= 0.0 ? tmin : tmax;
}

namespace {

// First downward crossing of the bilinear patch of cell (ix, iz) by the ray
// within [t0, t1], skipping crossings over holes.
std::optional<double> ray_cell(const Terrain& terrain, const Heightfield& hf, int ix, int iz, const Vec3& o,
                               const Vec3& d, double t0, double t1) {
    const double cs = hf.cell_size;
    const double x0 = hf.origin_x + ix * cs;
    const double z0 = hf.origin_z + iz * cs;
    const double h00 = hf.at(ix, iz);
    const double b = hf.at(ix + 1, iz) - h00;
    const double c = hf.at(ix, iz + 1) - h00;
    const double e = hf.at(ix + 1, iz + 1) - hf.at(ix + 1, iz) - hf.at(ix, iz + 1) + h00;
    const double u0 = (o.x - x0) / cs;
    const double v0 = (o.z - z0) / cs;
    const double du = d.x / cs;
    const double dv = d.z / cs;
    // f(t) = ray height - surface height = A t^2 + B t + C
    const double A = -e * du * dv;
    const double B = d.y - b * du - c * dv - e * (u0 * dv + v0 * du);
    const double C = o.y - h00 - b * u0 - c * v0 - e * u0 * v0;

    std::array<double, 2> roots{};
    int count = 0;
    if (std::abs(A) < 1e-14) {
        if (B != 0.0) roots[static_cast<size_t>(count++)] = -C / B;
    } else {
        const double disc = B * B - 4.0 * A * C;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            const double qv = -0.5 * (B + (B >= 0.0 ? s : -s));
            double r0 = qv / A;
            double r1 = qv != 0.0 ? C / qv : r0;
            if (r0 > r1) std::swap(r0, r1);
            roots = {r0, r1};
            count = 2;
        }
    }
    for (int i = 0; i < count; ++i) {
        const double t = roots[static_cast<size_t>(i)];
        if (t < t0 || t > t1) continue;
        // Only crossings from above to below count as hits.
        const double slope = 2.0 * A * t + B;
        if (slope > 0.0) continue;
        const Vec3 p = o + d * t;
        if (terrain.over_hole(p.x, p.z)) continue;
        return t;
    }
    return std::nullopt;
}

std::optional<double> ray_heightfield(const Terrain& terrain, const Heightfield& hf, const Vec3& o,
                                      const Vec3& d, double max_range) {
    const double lo_x = hf.origin_x;
    const double lo_z = hf.origin_z;
    const double hi_x = hf.origin_x + hf.extent();
    const double hi_z = hf.origin_z + hf.extent();

    // Clip to the grid footprint.
    double t_enter = 0.0;
    double t_exit = max_range;
    const std::array<std::array<double, 3>, 2> slabs{{{o.x, d.x, 0}, {o.z, d.z, 0}}};
    const std::array<std::pair<double, double>, 2> bounds{{{lo_x, hi_x}, {lo_z, hi_z}}};
    for (size_t i = 0; i < 2; ++i) {
        const double oi = slabs[i][0];
        const double di = slabs[i][1];
        if (di == 0.0) {
            if (oi < bounds[i].first || oi > bounds[i].second) return std::nullopt;
            continue;
        }
        double a = (bounds[i].first - oi) / di;
        double b = (bounds[i].second - oi) / di;
        if (a > b) std::swap(a, b);
        t_enter = std::max(t_enter, a);
        t_exit = std::min(t_exit, b);
    }
    if (t_enter > t_exit) return std::nullopt;

    const int n = hf.resolution - 1;
    const double cs = hf.cell_size;
    const Vec3 start = o + d * t_enter;
    int ix = std::clamp(static_cast<int>(std::floor((start.x - lo_x) / cs)), 0, n - 1);
    int iz = std::clamp(static_cast<int>(std::floor((start.z - lo_z) / cs)), 0, n - 1);
    const int step_x = d.x > 0.0 ? 1 : -1;
    const int step_z = d.z > 0.0 ? 1 : -1;
    const auto next_boundary = [&](int cell, int step, double origin, double od, double dd) {
        if (dd == 0.0) return std::numeric_limits<double>::infinity();
        const double edge = origin + (step > 0 ? cell + 1 : cell) * cs;
        return (edge - od) / dd;
    };
    double t = t_enter;
    while (t <= t_exit) {
        const double tx = next_boundary(ix, step_x, lo_x, o.x, d.x);
        const double tz = next_boundary(iz, step_z, lo_z, o.z, d.z);
        const double t_cell_end = std::min({tx, tz, t_exit});
        if (auto hit = ray_cell(terrain, hf, ix, iz, o, d, t, t_cell_end)) return hit;
        if (t_cell_end >= t_exit) break;
        if (tx <= tz) ix += step_x;
        if (tz <= tx) iz += step_z;
        if (ix < 0 || ix >= n || iz < 0 || iz >= n) break;
        t = t_cell_end;
    }
    return std::nullopt;
}

}  // namespace

std::optional<double> ray_terrain(const Terrain& terrain, const Vec3& o, const Vec3& d, double max_range) {
    if (terrain.heightfield) return ray_heightfield(terrain, *terrain.heightfield, o, d, max_range);
    if (d.y >= 0.0) return std::nullopt;
    const double t = (terrain.floor_height - o.y) / d.y;
    if (t < 0.0 || t > max_range) return std::nullopt;
    const Vec3 p = o + d * t;
    if (terrain.over_hole(p.x, p.z)) return std::nullopt;
    return t;
}

std::optional<RayHit> raycast(const World& world, const Vec3& origin, const Vec3& direction,
                              double max_range, const RayFilter& filter) {
    std::optional<RayHit> best;
    for (const RigidPart& p : world.parts) {
        if (!p.active) continue;
        if (filter.exclude_body >= 0 && p.body == filter.exclude_body) continue;
        if (std::find(filter.skip_parts.begin(), filter.skip_parts.end(), p.id) != filter.skip_parts.end())
            continue;
        std::optional<double> t;
        switch (p.shape.kind) {
            case ShapeKind::sphere: t = ray_sphere(origin, direction, p.position, p.shape.radius); break;
            case ShapeKind::capsule: {
                const auto [p0, p1] = capsule_segment(p);
                t = ray_capsule(origin, direction, p0, p1, p.shape.radius);
                break;
            }
            case ShapeKind::box:
                t = ray_box(origin, direction, p.position, p.orientation, p.shape.half_extents);
                break;
            case ShapeKind::ground: t = ray_terrain(world.terrain, origin, direction, max_range); break;
        }
        if (!t || *t > max_range) continue;
        if (!best || *t < best->distance) best = RayHit{*t, p.color, p.tag, p.id};
    }
    return best;
}

}  // namespace aai
