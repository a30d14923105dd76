#include "aai/math.hpp"

namespace aai {

Quat Quat::from_matrix(const Mat3& r) {
    // Shepperd's method: pick the largest diagonal term for stability.
    const double trace = r(0, 0) + r(1, 1) + r(2, 2);
    Quat q;
    if (trace > 0.0) {
        const double s = std::sqrt(trace + 1.0) * 2.0;
        q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
        const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
        q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
    } else if (r(1, 1) > r(2, 2)) {
        const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
        q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
    } else {
        const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
        q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
    }
    return q.normalized();
}

Quat integrate_rotation(const Quat& q, const Vec3& w, double dt) {
    const Quat spin{0.0, w.x, w.y, w.z};
    const Quat dq = spin * q;
    const double h = 0.5 * dt;
    return Quat{q.w + dq.w * h, q.x + dq.x * h, q.y + dq.y * h, q.z + dq.z * h}.normalized();
}

double heading_of(const Quat& q) {
    const Vec3 f = q.rotate({0, 0, 1});
    if (f.x == 0.0 && f.z == 0.0) return 0.0;
    return std::atan2(f.x, f.z);
}

}  // namespace aai
