#pragma once

#include <array>
#include <string>
#include <vector>

#include "pano/core.hpp"
#include "pano/envlight.hpp"
#include "pano/geometry.hpp"
#include "pano/image.hpp"
#include "pano/stereo.hpp"

namespace pano {

// Axis-aligned box faces: +x, -x, +y, -y, +z, -z.
enum Face : int { face_px = 0, face_nx, face_py, face_ny, face_pz, face_nz };

const char* face_name(int face);
int face_from_name(const std::string& name);

// Rectangular emissive patch on one face, in normalized face coordinates
// ([0,1]^2 over the face extent).
struct Emitter {
    int face = face_py;
    double a0 = 0.0, b0 = 0.0, a1 = 1.0, b1 = 1.0;
    Vec3 radiance;  // RGB, >= 0
};

struct BoxScene {
    Vec3 half_extents{2.0, 2.0, 2.0};
    std::array<Vec3, 6> face_albedo;
    std::vector<Emitter> emitters;
    Vec3 ambient;
    Vec3 camera_top;
    bool checker = false;       // per-face checkerboard albedo modulation
    double checker_cell = 0.25; // meters
    double checker_contrast = 0.3;

    BoxScene() { face_albedo.fill({0.6, 0.6, 0.6}); }
    void validate() const;
    bool inside(const Vec3& p) const;
};

struct BoxHit {
    double distance = 0.0;
    int face = 0;
    Vec3 point;
    Vec3 normal;  // inward
};

// Nearest face intersection from a strictly interior origin.
BoxHit raycast_box(const Vec3& origin, const Vec3& dir, const BoxScene& scene);

// Normalized face coordinates of a point lying on `face`.
void face_coords(const BoxScene& scene, int face, const Vec3& p, double& a,
                 double& b);

// Emitted radiance at a surface point (zero off the emitter patches).
Vec3 emission_at(const BoxScene& scene, int face, const Vec3& p);

struct GroundTruth {
    Image image;        // emission + reflectance (.) shading
    DepthMap depth;
    NormalMap normal;
    Image reflectance;  // albedo (checker-modulated when enabled)
    Image shading;      // ambient + direct emitter irradiance
};

// Analytic render with exact depth/normals and adaptive patch quadrature
// for the emitter irradiance (visibility is 1 inside a convex room).
GroundTruth render_ground_truth(const BoxScene& scene, const Vec3& camera,
                                int height, int width);

struct StereoBundle {
    GroundTruth top;       // full ground truth in the top camera frame
    Image bottom;          // radiance from camera_top - (0, baseline, 0)
    DisparityMap disparity_gt;
};

StereoBundle generate_stereo_pair(const BoxScene& scene, const CameraRig& rig,
                                  int height, int width);

// Plain-text key-value grammar or JSON (detected by a leading '{').
BoxScene parse_scene(const std::string& text);
BoxScene load_scene(const std::string& path);

}  // namespace pano
