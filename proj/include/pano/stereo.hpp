#pragma once

#include <optional>

#include "pano/core.hpp"
#include "pano/image.hpp"

namespace pano {

// Vertical angular disparity in radians (1 channel).
struct DisparityMap {
    Image delta;  // radians
    Mask valid;
};

// Distance in meters from the reference (top) camera center.
struct DepthMap {
    Image depth;
    Mask valid;
};

enum class MatchCost { SAD, ZNCC };

struct MatchConfig {
    int window = 9;                   // odd, >= 3
    int max_disparity = 64;           // pixels
    MatchCost cost = MatchCost::ZNCC;
    bool subpixel = true;
    double lr_check_threshold = 1.0;  // pixels
    double pole_band = 0.05;          // fraction of H invalidated at each pole

    void validate() const;
};

inline constexpr double kEpsDisparity = 1e-6;  // radians; smaller means "at infinity"

// Delta-theta between the top and bottom projections of one scene point.
// Under the v=0=zenith convention a nearer point sits at a larger row in the
// top image than in the bottom one, so the difference is (v_t - v_b).
double angular_disparity(double v_top, double v_bottom, int height);

// Triangulated distance from the top camera: b*(sin(t)/tan(d) + cos(t)).
// theta_top is measured from the top->bottom baseline direction (the nadir).
// Returns nullopt when the disparity is below kEpsDisparity or the result is
// not a positive finite depth.
std::optional<double> depth_from_disparity(double theta_top, double delta,
                                           double baseline);

// Winner-take-all vertical block matching with optional parabolic sub-pixel
// refinement and a left-right consistency check. Pole bands are invalidated.
DisparityMap match_vertical(const Image& top, const Image& bottom,
                            const MatchConfig& cfg = {});

// Per-pixel triangulation; propagates the validity mask.
DepthMap disparity_to_depth(const DisparityMap& disp, const CameraRig& rig);

// Nearest-valid-neighbor inpainting (great-circle metric) producing the
// dense depth the light-field stage needs.
DepthMap fill_depth_nearest(const DepthMap& depth);

// Exact inverse of the triangulation formula, used to derive ground-truth
// disparity from analytic depth.
double disparity_from_depth(double theta_top, double depth, double baseline);

}  // namespace pano
