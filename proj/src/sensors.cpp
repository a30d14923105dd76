#include "aai/sensors.hpp"
#include "aai/errors.hpp"

#include <algorithm>
#include <string>

namespace aai {

void RaycastConfig::validate() const {
    if (!(viewing_angle >= 5.0 && viewing_angle <= 180.0))
        throw ConfigError("viewing_angle must be in [5, 180]");
    if (rays_per_side < 1 || rays_per_side > 20) throw ConfigError("rays_per_side must be in [1, 20]");
    if (!(max_range > 0.0)) throw ConfigError("max_range must be positive");
}

void CameraConfig::validate() const {
    if (resolution < 8 || resolution > 512) throw ConfigError("camera resolution must be in [8, 512]");
    if (!(vertical_fov > 0.0 && vertical_fov < 180.0)) throw ConfigError("vertical_fov must be in (0, 180)");
    if (!(max_range > 0.0)) throw ConfigError("camera max_range must be positive");
}

std::vector<double> ray_azimuths(const RaycastConfig& config) {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(config.ray_count()));
    out.push_back(0.0);
    const double step = config.viewing_angle / config.rays_per_side;
    for (int k = 1; k <= config.rays_per_side; ++k) out.push_back(k * step);
    for (int k = 1; k <= config.rays_per_side; ++k) out.push_back(-k * step);
    return out;
}

RayObservation sense_rays(const World& world, const EyePose& eye, const RaycastConfig& config, int exclude_body) {
    RayObservation obs;
    RayFilter filter;
    filter.exclude_body = exclude_body;
    for (const double az : ray_azimuths(config)) {
        const double a = eye.heading + deg_to_rad(az);
        const Vec3 dir{std::sin(a), 0.0, std::cos(a)};
        const auto hit = raycast(world, eye.position, dir, config.max_range, filter);
        if (hit) {
            obs.distances.push_back(std::min(hit->distance / config.max_range, 1.0));
            obs.colors.push_back(hit->color);
            obs.part_ids.push_back(hit->part_id);
        } else {
            obs.distances.push_back(1.0);
            obs.colors.push_back({});
            obs.part_ids.push_back(-1);
        }
    }
    return obs;
}

namespace {

Rgb floor_color(const World& world) {
    return world.ground_part >= 0 ? world.part(world.ground_part).color : Rgb{0.45, 0.45, 0.45};
}

Rgb shade(const World& world, const Vec3& origin, const Vec3& dir, double range, RayFilter& filter, int depth,
          int* first_hit) {
    const auto hit = raycast(world, origin, dir, range, filter);
    if (first_hit) *first_hit = hit ? hit->part_id : -1;
    if (!hit) return dir.y > 0.0 ? kSkyColor : floor_color(world);
    const RigidPart& p = world.part(hit->part_id);
    if (!p.transparent || depth >= 4) return hit->color;
    filter.skip_parts.push_back(p.id);
    const Rgb behind = shade(world, origin, dir, range, filter, depth + 1, nullptr);
    filter.skip_parts.pop_back();
    return blend(hit->color, behind, kTransparentOpacity);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Image render_camera(const World& world, const EyePose& eye, const CameraConfig& config, int exclude_body,
                    std::vector<int>* hit_parts) {
    const int n = config.resolution;
    Image img;
    img.resolution = n;
    img.channels = config.channels();
    img.pixels.reserve(static_cast<size_t>(n * n * img.channels));
    if (hit_parts) hit_parts->assign(static_cast<size_t>(n * n), -1);

    const Vec3 forward = eye.orientation.rotate({0, 0, 1});
    const Vec3 up = eye.orientation.rotate({0, 1, 0});
    const Vec3 right = cross(forward, up);
    const double half = std::tan(0.5 * deg_to_rad(config.vertical_fov));
    RayFilter filter;
    filter.exclude_body = exclude_body;

    for (int row = 0; row < n; ++row) {
        const double v = (1.0 - 2.0 * (row + 0.5) / n) * half;
        for (int col = 0; col < n; ++col) {
            const double u = (2.0 * (col + 0.5) / n - 1.0) * half;
            const Vec3 dir = normalized(forward + right * u + up * v);
            int first = -1;
            const Rgb c = shade(world, eye.position, dir, config.max_range, filter, 0, &first);
            if (hit_parts) (*hit_parts)[static_cast<size_t>(row * n + col)] = first;
            if (config.grayscale) {
                img.pixels.push_back(clamp01(luminance(c)));
            } else {
                img.pixels.push_back(clamp01(c.r));
                img.pixels.push_back(clamp01(c.g));
                img.pixels.push_back(clamp01(c.b));
            }
        }
    }
    return img;
}

int BlackoutSchedule::period_for(int difficulty) { return std::max(50, 200 - 15 * difficulty); }
int BlackoutSchedule::duration_for(int difficulty) { return 10 + 4 * difficulty; }

BlackoutSchedule BlackoutSchedule::for_difficulty(int difficulty, Rng& rng) {
    BlackoutSchedule s;
    s.period = period_for(difficulty);
    s.duration = duration_for(difficulty);
    s.phase = static_cast<int>(rng.uniform_int(0, s.period - 1));
    return s;
}

bool BlackoutSchedule::active(std::int64_t step) const {
    if (period <= 0) return false;
    return (step + phase) % period < duration;
}

double BlackoutSchedule::duty_cycle(std::int64_t steps) const {
    if (steps <= 0) return 0.0;
    std::int64_t on = 0;
    for (std::int64_t s = 0; s < steps; ++s) on += active(s) ? 1 : 0;
    return static_cast<double>(on) / static_cast<double>(steps);
}

void apply_blackout(Image& image, const BlackoutSchedule& schedule, std::int64_t step) {
    if (schedule.active(step)) std::fill(image.pixels.begin(), image.pixels.end(), 0.0);
}

}  // namespace aai
