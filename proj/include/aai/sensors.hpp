#pragma once

#include "aai/agent.hpp"
#include "aai/rng.hpp"

#include <cstdint>
#include <vector>

namespace aai {

struct RaycastConfig {
    double viewing_angle = 90.0;  // degrees each side of forward
    int rays_per_side = 3;
    double max_range = 40.0;

    void validate() const;
    int ray_count() const { return 2 * rays_per_side + 1; }
    bool operator==(const RaycastConfig&) const = default;
};

struct CameraConfig {
    int resolution = 84;
    bool grayscale = false;
    double vertical_fov = 60.0;
    double max_range = 100.0;

    void validate() const;
    int channels() const { return grayscale ? 1 : 3; }
    bool operator==(const CameraConfig&) const = default;
};

inline constexpr Rgb kSkyColor{0.53, 0.81, 0.92};
inline constexpr double kTransparentOpacity = 0.4;

struct RayObservation {
    std::vector<double> distances;  // normalized, 1.0 on miss
    std::vector<Rgb> colors;        // zeros on miss
    std::vector<int> part_ids;      // -1 on miss

    bool operator==(const RayObservation&) const = default;
};

/// Row-major image, channels interleaved, values in [0, 1].
struct Image {
    int resolution = 0;
    int channels = 0;
    std::vector<double> pixels;

    bool operator==(const Image&) const = default;
};

/// Ray azimuths in degrees (positive = left): 0, then +k*a/n, then -k*a/n.
std::vector<double> ray_azimuths(const RaycastConfig& config);

RayObservation sense_rays(const World& world, const EyePose& eye, const RaycastConfig& config,
                          int exclude_body = -1);

/// Pinhole render from the eye. When `hit_parts` is given it receives the
/// first part struck by each pixel's primary ray (-1 for sky).
Image render_camera(const World& world, const EyePose& eye, const CameraConfig& config, int exclude_body = -1,
                    std::vector<int>* hit_parts = nullptr);

/// Periodic camera blackouts: active while (step + phase) mod period < duration.
struct BlackoutSchedule {
    int period = 0;
    int duration = 0;
    int phase = 0;

    static BlackoutSchedule for_difficulty(int difficulty, Rng& rng);
    static int period_for(int difficulty);
    static int duration_for(int difficulty);

    bool active(std::int64_t step) const;
    double duty_cycle(std::int64_t steps) const;

    bool operator==(const BlackoutSchedule&) const = default;
};

/// Zeroes the image while a blackout is in progress.
void apply_blackout(Image& image, const BlackoutSchedule& schedule, std::int64_t step);

}  // namespace aai
