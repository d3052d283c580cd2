#pragma once

#include "pano/core.hpp"
#include "pano/image.hpp"
#include "pano/stereo.hpp"

namespace pano {

// Unit surface normals in the reference camera frame, oriented toward the
// camera (n . p <= 0 for the pixel's 3D point p).
struct NormalMap {
    Image normals;  // 3 channels
    Mask valid;
};

inline constexpr double kDepthJumpFrac = 0.2;   // discontinuity invalidation
inline constexpr double kShadingFloor = 1e-3;   // eps_S in R = I / max(S, eps)
inline constexpr double kReflectanceMax = 4.0;  // R_max clamp

// Cross product of central-difference tangents of the lifted 3D surface.
// Pixels whose 4-neighborhood spans a >20% relative depth jump are marked
// invalid and filled from the nearest valid pixel.
NormalMap normals_from_depth(const DepthMap& depth, const CameraRig& rig);

// R = I / max(S, eps) per channel, clamped to [0, R_max].
Image reflectance_init(const Image& img, const Image& shading,
                       double eps = kShadingFloor, double r_max = kReflectanceMax);

}  // namespace pano
