#include "aai/errors.hpp"
#include "aai/physics.hpp"

#include <algorithm>
#include <limits>

namespace aai {

void PhysicsConfig::validate() const {
    const auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!finite_positive(dt)) throw ConfigError("physics dt must be > 0");
    if (!finite_positive(torque_max)) throw ConfigError("physics torque_max must be > 0");
    if (!std::isfinite(gravity) || !std::isfinite(motor_kp) || !std::isfinite(motor_kd) ||
        !std::isfinite(motor_kv) || !std::isfinite(friction) || !std::isfinite(restitution))
        throw ConfigError("physics constants must be finite");
    if (joint_armature < 0.0 || angular_damping < 0.0 || friction < 0.0 || restitution < 0.0)
        throw ConfigError("physics constants must be non-negative");
    if (solver_iterations < 1 || velocity_iterations < 1) throw ConfigError("solver iterations must be >= 1");
}

int World::ensure_ground(const Rgb& color) {
    if (ground_part >= 0) return ground_part;
    RigidPart g;
    g.shape = Shape::ground();
    g.tag = Tag::floor;
    g.color = color;
    ground_part = add_static(g);
    return ground_part;
}

int World::add_static(RigidPart part) {
    part.id = static_cast<int>(parts.size());
    part.kinematic = true;
    part.body = -1;
    parts.push_back(part);
    return part.id;
}

int World::add_dynamic(RigidPart part) {
    if (!(part.mass > 0.0)) throw InvalidSpec("dynamic part needs positive mass");
    part.id = static_cast<int>(parts.size());
    part.kinematic = false;
    part.body = static_cast<int>(bodies.size());
    parts.push_back(part);
    Body b;
    b.parts = {part.id};
    bodies.push_back(b);
    sync_body(part.body);
    return part.id;
}

namespace {

struct Layout {
    std::vector<PartPose> local;
    Vec3 com_local;
    double mass = 0.0;
    Mat3 inertia_local;  // about the COM, root frame
};

size_t index_in_body(const Body& b, int part_id) {
    const auto it = std::find(b.parts.begin(), b.parts.end(), part_id);
    return static_cast<size_t>(it - b.parts.begin());
}

Quat joint_rotation(const Joint2DOF& j) {
    const Quat rx = Quat::from_axis_angle({1, 0, 0}, deg_to_rad(j.angle_x));
    const Quat rz = Quat::from_axis_angle({0, 0, 1}, deg_to_rad(j.angle_z));
    return j.rest * rx * rz;
}

Layout compute_layout(const World& w, const Body& b) {
    Layout lay;
    lay.local.assign(b.parts.size(), PartPose{});
    for (const int ji : b.joints) {
        const Joint2DOF& j = w.joints[static_cast<size_t>(ji)];
        const PartPose& parent = lay.local[index_in_body(b, j.parent)];
        const Quat rel = joint_rotation(j);
        PartPose& child = lay.local[index_in_body(b, j.child)];
        child.orientation = (parent.orientation * rel).normalized();
        child.position = parent.position + parent.orientation.rotate(j.anchor + rel.rotate(j.child_offset));
    }
    Vec3 weighted{};
    for (size_t i = 0; i < b.parts.size(); ++i) {
        const double m = w.part(b.parts[i]).mass;
        lay.mass += m;
        weighted += lay.local[i].position * m;
    }
    lay.com_local = weighted / lay.mass;
    for (size_t i = 0; i < b.parts.size(); ++i) {
        const RigidPart& p = w.part(b.parts[i]);
        const Mat3 r = lay.local[i].orientation.to_matrix();
        const Mat3 own = r * shape_inertia(p.shape, p.mass) * r.transposed();
        const Vec3 d = lay.local[i].position - lay.com_local;
        Mat3 shift = Mat3::identity() * dot(d, d);
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < 3; ++c) shift(a, c) -= d[a] * d[c];
        lay.inertia_local = lay.inertia_local + own + shift * p.mass;
    }
    return lay;
}

void place_parts(World& w, const Body& b) {
    const RigidPart& root = w.part(b.parts[0]);
    const Vec3 origin = root.position;
    const Quat q = root.orientation;
    for (size_t i = 1; i < b.parts.size(); ++i) {
        RigidPart& p = w.part(b.parts[i]);
        p.position = origin + q.rotate(b.local[i].position);
        p.orientation = (q * b.local[i].orientation).normalized();
    }
}

void update_joint_axis(double& angle, double& omega, double target, double limit, MotorMode mode,
                       double inertia, const PhysicsConfig& cfg) {
    const double th = deg_to_rad(angle);
    double w = deg_to_rad(omega);
    double torque = mode == MotorMode::rotation ? cfg.motor_kp * (deg_to_rad(target) - th) - cfg.motor_kd * w
                                                : cfg.motor_kv * (deg_to_rad(target) - w);
    torque = std::clamp(torque, -cfg.torque_max, cfg.torque_max);
    w += torque / inertia * cfg.dt;
    angle = rad_to_deg(th + w * cfg.dt);
    omega = rad_to_deg(w);
    if (angle > limit) {
        angle = limit;
        omega = 0.0;
    } else if (angle < -limit) {
        angle = -limit;
        omega = 0.0;
    }
}

void update_joint(Joint2DOF& j, const PhysicsConfig& cfg) {
    const double inertia = j.inertia + cfg.joint_armature;
    update_joint_axis(j.angle_x, j.angular_velocity_x, j.target_x, kJointLimitX, j.mode, inertia, cfg);
    update_joint_axis(j.angle_z, j.angular_velocity_z, j.target_z, kJointLimitZ, j.mode, inertia, cfg);
}

struct Aabb {
    Vec3 lo;
    Vec3 hi;
    bool overlaps(const Aabb& o, double margin) const {
        return lo.x <= o.hi.x + margin && o.lo.x <= hi.x + margin && lo.y <= o.hi.y + margin &&
               o.lo.y <= hi.y + margin && lo.z <= o.hi.z + margin && o.lo.z <= hi.z + margin;
    }
};

Aabb part_aabb(const RigidPart& p) {
    switch (p.shape.kind) {
        case ShapeKind::sphere: {
            const Vec3 r{p.shape.radius, p.shape.radius, p.shape.radius};
            return {p.position - r, p.position + r};
        }
        case ShapeKind::capsule: {
            const auto [a, b] = capsule_segment(p);
            const Vec3 r{p.shape.radius, p.shape.radius, p.shape.radius};
            return {Vec3{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)} - r,
                    Vec3{std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)} + r};
        }
        case ShapeKind::box: {
            const Mat3 r = p.orientation.to_matrix();
            const Vec3& he = p.shape.half_extents;
            Vec3 ext;
            for (int i = 0; i < 3; ++i)
                ext[i] = std::abs(r(i, 0)) * he.x + std::abs(r(i, 1)) * he.y + std::abs(r(i, 2)) * he.z;
            return {p.position - ext, p.position + ext};
        }
        case ShapeKind::ground: break;
    }
    const double inf = std::numeric_limits<double>::infinity();
    return {{-inf, -inf, -inf}, {inf, inf, inf}};
}

struct Contact {
    int body_a = -1;
    int body_b = -1;  // -1: kinematic / static
    int part_a = -1;
    int part_b = -1;
    ContactGeometry geo;
};

template <typename Emit>
void ground_contacts(const World& w, const RigidPart& p, double margin, Emit&& emit) {
    const Terrain& t = w.terrain;
    const auto sphere = [&](const Vec3& c, double r) {
        const auto h = t.height(c.x, c.z);
        if (!h) return;
        const Vec3 n = t.normal(c.x, c.z);
        const double pen = (*h - c.y) * n.y + r;
        if (pen > -margin) emit(ContactGeometry{c - n * r, n, pen});
    };
    switch (p.shape.kind) {
        case ShapeKind::sphere: sphere(p.position, p.shape.radius); break;
        case ShapeKind::capsule: {
            const auto [a, b] = capsule_segment(p);
            sphere(a, p.shape.radius);
            sphere(b, p.shape.radius);
            break;
        }
        case ShapeKind::box: {
            const Vec3& he = p.shape.half_extents;
            for (int i = 0; i < 8; ++i) {
                const Vec3 c = p.position + p.orientation.rotate({(i & 1) ? he.x : -he.x, (i & 2) ? he.y : -he.y,
                                                                  (i & 4) ? he.z : -he.z});
                const auto h = t.height(c.x, c.z);
                if (!h) continue;
                const Vec3 n = t.normal(c.x, c.z);
                const double pen = (*h - c.y) * n.y;
                if (pen > -margin) emit(ContactGeometry{c, n, pen});
            }
            break;
        }
        case ShapeKind::ground: break;
    }
}

// Enumerates every (dynamic part, other part) pair once. `include_passive`
// also visits non-solid parts (food triggers).
template <typename Visit>
void for_each_pair(const World& w, bool include_passive, double margin, Visit&& visit) {
    std::vector<Aabb> boxes(w.parts.size());
    for (const RigidPart& p : w.parts)
        if (p.active) boxes[static_cast<size_t>(p.id)] = part_aabb(p);

    for (size_t bi = 0; bi < w.bodies.size(); ++bi) {
        const Body& body = w.bodies[bi];
        for (const int pa_id : body.parts) {
            const RigidPart& pa = w.part(pa_id);
            if (!pa.active || !pa.solid) continue;
            for (const RigidPart& pb : w.parts) {
                if (!pb.active || pb.body == static_cast<int>(bi)) continue;
                if (pb.body >= 0 && pb.body < static_cast<int>(bi)) continue;
                if (!pb.solid && !include_passive) continue;
                if (pb.shape.kind != ShapeKind::ground &&
                    !boxes[static_cast<size_t>(pa.id)].overlaps(boxes[static_cast<size_t>(pb.id)], margin))
                    continue;
                visit(static_cast<int>(bi), pa, pb);
            }
        }
    }
}

std::vector<Contact> gather_contacts(const World& w, double margin) {
    std::vector<Contact> out;
    for_each_pair(w, false, margin, [&](int bi, const RigidPart& pa, const RigidPart& pb) {
        if (pb.shape.kind == ShapeKind::ground) {
            ground_contacts(w, pa, margin, [&](const ContactGeometry& g) {
                out.push_back({bi, -1, pa.id, pb.id, g});
            });
            return;
        }
        if (auto g = part_contact(pa, pb, margin)) out.push_back({bi, pb.body, pa.id, pb.id, *g});
    });
    return out;
}

struct BodyDynamics {
    Vec3 com;
    Mat3 inv_inertia;
    double inv_mass = 0.0;
    std::vector<Vec3> rel_velocity;  // joint-driven velocity per part
};

Vec3 point_velocity(const Body& b, const BodyDynamics& d, size_t part_index, const Vec3& p) {
    return b.velocity + cross(b.angular_velocity, p - d.com) + d.rel_velocity[part_index];
}

void apply_impulse(Body& b, const BodyDynamics& d, const Vec3& p, const Vec3& j) {
    b.velocity += j * d.inv_mass;
    b.angular_velocity += d.inv_inertia * cross(p - d.com, j);
}

double impulse_denominator(const BodyDynamics& d, const Vec3& p, const Vec3& dir) {
    const Vec3 rn = cross(p - d.com, dir);
    return d.inv_mass + dot(rn, d.inv_inertia * rn);
}

void translate_body(World& w, BodyDynamics& d, const Body& b, const Vec3& delta) {
    for (const int id : b.parts) w.part(id).position += delta;
    d.com += delta;
}

// Positional projection along the contact normal, split by inverse mass.
// `moved` accumulates each body's translation since the contacts were
// gathered, so several contacts against one surface do not overshoot.
void project(World& w, std::vector<BodyDynamics>& dyn, std::vector<Vec3>& moved, const Contact& c) {
    const Vec3 n = c.geo.normal;
    const size_t a = static_cast<size_t>(c.body_a);
    Vec3 rel = moved[a];
    if (c.body_b >= 0) rel -= moved[static_cast<size_t>(c.body_b)];
    const double pen = c.geo.penetration - dot(n, rel);
    if (pen <= 0.0) return;
    if (c.body_b < 0) {
        translate_body(w, dyn[a], w.bodies[a], n * pen);
        moved[a] += n * pen;
        return;
    }
    const size_t b = static_cast<size_t>(c.body_b);
    const double wa = dyn[a].inv_mass / (dyn[a].inv_mass + dyn[b].inv_mass);
    translate_body(w, dyn[a], w.bodies[a], n * (pen * wa));
    translate_body(w, dyn[b], w.bodies[b], n * (-pen * (1.0 - wa)));
    moved[a] += n * (pen * wa);
    moved[b] -= n * (pen * (1.0 - wa));
}

// Sequential-impulse row for one contact with accumulated, clamped normal
// and Coulomb friction impulses.
struct VelocityRow {
    Contact c;
    size_t index_a = 0;
    size_t index_b = 0;
    Vec3 t1;
    Vec3 t2;
    double k_normal = 0.0;
    double k_t1 = 0.0;
    double k_t2 = 0.0;
    double target_vn = 0.0;
    double jn = 0.0;
    double jt1 = 0.0;
    double jt2 = 0.0;
};

Vec3 relative_velocity(const World& w, const std::vector<BodyDynamics>& dyn, const VelocityRow& r) {
    const Body& ba = w.bodies[static_cast<size_t>(r.c.body_a)];
    Vec3 v = point_velocity(ba, dyn[static_cast<size_t>(r.c.body_a)], r.index_a, r.c.geo.point);
    if (r.c.body_b >= 0) {
        const Body& bb = w.bodies[static_cast<size_t>(r.c.body_b)];
        v -= point_velocity(bb, dyn[static_cast<size_t>(r.c.body_b)], r.index_b, r.c.geo.point);
    } else {
        v -= w.part(r.c.part_b).linear_velocity;
    }
    return v;
}

void push(World& w, std::vector<BodyDynamics>& dyn, const VelocityRow& r, const Vec3& j) {
    apply_impulse(w.bodies[static_cast<size_t>(r.c.body_a)], dyn[static_cast<size_t>(r.c.body_a)], r.c.geo.point, j);
    if (r.c.body_b >= 0)
        apply_impulse(w.bodies[static_cast<size_t>(r.c.body_b)], dyn[static_cast<size_t>(r.c.body_b)], r.c.geo.point,
                      -j);
}

VelocityRow make_row(const World& w, const std::vector<BodyDynamics>& dyn, const Contact& c,
                     const PhysicsConfig& cfg) {
    VelocityRow r;
    r.c = c;
    const Body& ba = w.bodies[static_cast<size_t>(c.body_a)];
    r.index_a = index_in_body(ba, c.part_a);
    if (c.body_b >= 0) r.index_b = index_in_body(w.bodies[static_cast<size_t>(c.body_b)], c.part_b);
    const Vec3 n = c.geo.normal;
    const Vec3 helper = std::abs(n.x) < 0.57 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    r.t1 = normalized(cross(n, helper));
    r.t2 = cross(n, r.t1);
    const auto k = [&](const Vec3& dir) {
        double v = impulse_denominator(dyn[static_cast<size_t>(c.body_a)], c.geo.point, dir);
        if (c.body_b >= 0) v += impulse_denominator(dyn[static_cast<size_t>(c.body_b)], c.geo.point, dir);
        return v;
    };
    r.k_normal = k(n);
    r.k_t1 = k(r.t1);
    r.k_t2 = k(r.t2);
    const double vn = dot(relative_velocity(w, dyn, r), n);
    r.target_vn = -vn > cfg.restitution_threshold ? -cfg.restitution * vn : 0.0;
    return r;
}

void solve_row(World& w, std::vector<BodyDynamics>& dyn, VelocityRow& r, const PhysicsConfig& cfg) {
    const Vec3 n = r.c.geo.normal;
    const double vn = dot(relative_velocity(w, dyn, r), n);
    const double old_jn = r.jn;
    r.jn = std::max(0.0, old_jn + (r.target_vn - vn) / r.k_normal);
    push(w, dyn, r, n * (r.jn - old_jn));

    const Vec3 v = relative_velocity(w, dyn, r);
    double jt1 = r.jt1 - dot(v, r.t1) / r.k_t1;
    double jt2 = r.jt2 - dot(v, r.t2) / r.k_t2;
    const double limit = cfg.friction * r.jn;
    const double mag = std::sqrt(jt1 * jt1 + jt2 * jt2);
    if (mag > limit) {
        const double s = mag > 0.0 ? limit / mag : 0.0;
        jt1 *= s;
        jt2 *= s;
    }
    push(w, dyn, r, r.t1 * (jt1 - r.jt1) + r.t2 * (jt2 - r.jt2));
    r.jt1 = jt1;
    r.jt2 = jt2;
}

void check_finite(const World& w) {
    for (const RigidPart& p : w.parts) {
        if (!is_finite(p.position) || !p.orientation.is_finite() || !is_finite(p.linear_velocity) ||
            !is_finite(p.angular_velocity))
            throw SimulationDiverged(p.id);
    }
}

}  // namespace

void World::sync_body(int body_index) {
    Body& b = bodies[static_cast<size_t>(body_index)];
    const Layout lay = compute_layout(*this, b);
    b.local = lay.local;
    b.com_local = lay.com_local;
    b.mass = lay.mass;
    place_parts(*this, b);
}

void step_physics(World& w, const PhysicsConfig& cfg) {
    cfg.validate();
    const double dt = cfg.dt;
    w.contacts.clear();
    w.fell = false;

    for (Joint2DOF& j : w.joints) update_joint(j, cfg);

    std::vector<BodyDynamics> dyn(w.bodies.size());
    for (size_t bi = 0; bi < w.bodies.size(); ++bi) {
        Body& b = w.bodies[bi];
        const std::vector<PartPose> old_local = b.local;
        const Vec3 old_com = b.com_local;
        const Layout lay = compute_layout(w, b);

        RigidPart& root = w.part(b.parts[0]);
        // Joint motion keeps the centre of mass in place and moves the root.
        Vec3 com = root.position + root.orientation.rotate(old_com);
        b.velocity.y -= cfg.gravity * dt;
        b.angular_velocity *= std::max(0.0, 1.0 - cfg.angular_damping * dt);
        com += b.velocity * dt;
        root.orientation = integrate_rotation(root.orientation, b.angular_velocity, dt);
        root.position = com - root.orientation.rotate(lay.com_local);
        b.local = lay.local;
        b.com_local = lay.com_local;
        b.mass = lay.mass;
        place_parts(w, b);

        BodyDynamics& d = dyn[bi];
        d.com = com;
        d.inv_mass = 1.0 / lay.mass;
        const Mat3 r = root.orientation.to_matrix();
        d.inv_inertia = (r * lay.inertia_local * r.transposed()).inverse();
        d.rel_velocity.resize(b.parts.size());
        for (size_t i = 0; i < b.parts.size(); ++i) {
            const Vec3 now = lay.local[i].position - lay.com_local;
            const Vec3 before = old_local.empty() ? now : old_local[i].position - old_com;
            d.rel_velocity[i] = root.orientation.rotate((now - before) / dt);
        }
    }

    for (int it = 0; it < cfg.solver_iterations; ++it) {
        const std::vector<Contact> contacts = gather_contacts(w, 0.0);
        std::vector<Vec3> moved(w.bodies.size());
        bool any = false;
        for (const Contact& c : contacts) {
            if (c.geo.penetration > 0.0) any = true;
            project(w, dyn, moved, c);
        }
        if (!any) break;
    }
    {
        std::vector<VelocityRow> rows;
        for (const Contact& c : gather_contacts(w, cfg.contact_margin)) rows.push_back(make_row(w, dyn, c, cfg));
        for (int it = 0; it < cfg.velocity_iterations; ++it)
            for (VelocityRow& r : rows) solve_row(w, dyn, r, cfg);
    }

    for (size_t bi = 0; bi < w.bodies.size(); ++bi) {
        const Body& b = w.bodies[bi];
        for (size_t i = 0; i < b.parts.size(); ++i) {
            RigidPart& p = w.part(b.parts[i]);
            p.linear_velocity = point_velocity(b, dyn[bi], i, p.position);
            p.angular_velocity = b.angular_velocity;
        }
    }

    check_finite(w);
    w.contacts = detect_contacts(w, cfg.contact_margin);
    const double fall_level = w.terrain.floor_height - cfg.fall_depth;
    for (const RigidPart& p : w.parts)
        if (p.active && is_agent(p.tag) && p.position.y < fall_level) w.fell = true;
    ++w.step_count;
}

const std::vector<ContactEvent>& query_contacts(const World& world) { return world.contacts; }

std::vector<ContactEvent> detect_contacts(const World& w, double margin) {
    std::vector<ContactEvent> events;
    const auto record = [&](const RigidPart& a, const RigidPart& b) {
        ContactEvent e;
        if (a.id < b.id) {
            e = {a.tag, b.tag, a.id, b.id};
        } else {
            e = {b.tag, a.tag, b.id, a.id};
        }
        events.push_back(e);
    };
    for_each_pair(w, true, margin, [&](int, const RigidPart& pa, const RigidPart& pb) {
        if (pb.shape.kind == ShapeKind::ground) {
            bool touching = false;
            ground_contacts(w, pa, margin, [&](const ContactGeometry&) { touching = true; });
            if (touching) record(pa, pb);
            return;
        }
        if (part_contact(pa, pb, margin)) record(pa, pb);
    });
    std::sort(events.begin(), events.end(), [](const ContactEvent& x, const ContactEvent& y) {
        return x.part_a != y.part_a ? x.part_a < y.part_a : x.part_b < y.part_b;
    });
    events.erase(std::unique(events.begin(), events.end()), events.end());
    return events;
}

}  // namespace aai
