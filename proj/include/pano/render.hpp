#pragma once

#include <array>

#include "pano/core.hpp"
#include "pano/envlight.hpp"
#include "pano/geometry.hpp"
#include "pano/image.hpp"

namespace pano {

enum class ShadeWeighting {
    solid_angle,    // per-pixel solid angle; converges to the irradiance integral
    uniform_pixel,  // uniform 4*pi/(H*W) weight per map pixel
};

struct RenderConfig {
    int illum_height = 128;  // illumination maps used inside render_shading
    ShadeWeighting weighting = ShadeWeighting::solid_angle;
    int stride = 1;          // shade every stride-th pixel, interpolate the rest

    void validate() const;
};

// Diffuse shading at one point: sum over map pixels of
// c_j * max(l_j . n, 0) * w_j.
std::array<double, 3> shade_point(const IlluminationMap& illum, const Vec3& normal,
                                  const RenderConfig& cfg = {});

// Full-frame shading: per pixel, reconstruct the illumination map at the
// pixel's 3D point and integrate against its normal.
Image render_shading(const PointLightSet& lights, const DepthMap& depth,
                     const NormalMap& normals, const CameraRig& rig,
                     const RenderConfig& cfg = {});

// s = sum(a*b) / sum(a*a) over masked pixels, channels pooled.
double least_squares_scale(const Image& a, const Image& b, const Mask& mask);
double least_squares_scale(const Image& a, const Image& b);

// I' = s * (R hadamard S)
Image reconstruct_image(const Image& reflectance, const Image& shading, double s);

// Orthographic render of a perfect mirror sphere looked up in the
// illumination map reconstructed at `center`.
struct ProbeRender {
    Image patch;  // 3 channels
    Mask coverage;
};
ProbeRender render_mirror_probe(const PointLightSet& lights, const Vec3& center,
                                double radius, const Vec3& view_dir,
                                int out_height, int out_width,
                                int illum_height = 256);

}  // namespace pano
