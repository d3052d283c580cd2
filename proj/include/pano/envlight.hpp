#pragma once

#include <array>
#include <string>
#include <vector>

#include "pano/core.hpp"
#include "pano/image.hpp"
#include "pano/stereo.hpp"

namespace pano {

// Near-field environment light: one point light per observed pixel.
struct PointLight {
    Vec3 position;                   // meters, reference camera frame
    std::array<float, 3> intensity;  // RGB radiance
};

struct PointLightSet {
    std::vector<PointLight> lights;
    size_t size() const { return lights.size(); }
};

// Equirectangular radiance + source distance panorama centered at `center`.
// filled records which pixels received a direct light projection; the rest
// were extrapolated by nearest-neighbor fill.
struct IlluminationMap {
    Image radiance;  // 3 channels
    Image depth;     // 1 channel, meters from center
    Mask filled;
    Vec3 center;
};

struct Splat {
    int64_t pixel;   // target pixel index (v*W + u)
    int64_t source;  // light index, used for deterministic tie-breaking
    float distance;
    std::array<float, 3> intensity;
};

inline constexpr double kEpsNear = 1e-4;  // meters; lights closer than this are skipped

// One light per pixel: position = depth * ray, intensity = pixel RGB.
// Requires dense depth (valid mask all true).
PointLightSet build_light_field(const Image& img, const DepthMap& depth,
                                const CameraRig& rig);

// Projects every light onto an equirectangular grid around `query`
// (nearest-pixel rounding). Lights within kEpsNear of the query are skipped.
std::vector<Splat> project_lights(const PointLightSet& lights, const Vec3& query,
                                  int height, int width);

// Keeps the minimum-distance splat per pixel; ties go to the lowest source
// index. Unhit pixels stay at zero with filled = false.
IlluminationMap resolve_zbuffer(const std::vector<Splat>& splats, int height,
                                int width);

// Copies radiance and depth into every unfilled pixel from the nearest
// filled one under great-circle distance; the filled mask is preserved as
// provenance. Throws std::domain_error when nothing is filled.
IlluminationMap fill_holes_nearest(const IlluminationMap& partial);

// w = r . g : project, z-buffer, hole-fill. Equivalent to composing the
// three operations above but without materializing the splat list.
IlluminationMap reconstruct_illumination(const PointLightSet& lights,
                                         const Vec3& query, int height,
                                         int width);

// Binary table: "PLF1", uint32 count, then count * 6 little-endian float32
// (x, y, z, r, g, b). The text form is one light per line, same order.
void write_light_field(const std::string& path, const PointLightSet& lights,
                       bool text = false);
PointLightSet read_light_field(const std::string& path);

}  // namespace pano
