#pragma once

#include <utility>

#include "pano/core.hpp"
#include "pano/image.hpp"

namespace pano {

// Equirectangular conventions used everywhere in this project:
//   - full sphere, width == 2 * height, pixel centers at half-integers;
//   - row v=0 is the zenith; polar angle from zenith  theta(v) = pi*(v+0.5)/H;
//   - azimuth phi(u) = 2*pi*(u+0.5)/W, zero at +X, increasing toward +Z;
//   - direction = (sin t cos p, cos t, sin t sin p), +Y up.

// Pixel coordinate (u,v) to unit direction. Accepts real coordinates with
// u in [-0.5, W) and v in [-0.5, H-0.5]; throws std::domain_error outside.
Vec3 pixel_to_dir(double u, double v, int height, int width);

// Inverse mapping. Azimuth wraps into [0, W); v is clamped to [0, H-1]
// (the poles map to v = -0.5 / H - 0.5 with arbitrary u, so the clamp puts
// them on the first/last row).
std::pair<double, double> dir_to_pixel(const Vec3& dir, int height, int width);

// Solid angle of one pixel in row v: (2*pi/W) * (pi/H) * sin(theta(v)).
double pixel_solid_angle(int v, int height, int width);

enum class SampleMode { nearest, bilinear };

// Samples at continuous pixel coordinates; wraps horizontally across the
// u = 0/W seam, clamps vertically at the poles. Writes `channels` floats.
void sample(const Image& img, double u, double v, SampleMode mode, float* out);

// In-place nearest-neighbor fill: every pixel where `filled` is false copies
// all channels from the filled pixel with minimum great-circle distance
// (ties broken by lowest row, then column). Throws std::domain_error when no
// pixel is filled. `filled` itself is left untouched.
void fill_nearest_angular(Image& img, const Mask& filled);

// Same fill applied to several images sharing one mask (all copy from the
// same source pixel).
void fill_nearest_angular(Image* imgs[], int n, const Mask& filled);

void require_equirect(const Image& img);

}  // namespace pano
