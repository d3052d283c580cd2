#pragma once

#include <string>
#include <vector>

#include "pano/geometry.hpp"
#include "pano/image.hpp"

namespace pano {

struct MetricReport {
    std::string name;
    double value = 0.0;
    bool infinite = false;  // PSNR of identical images
    size_t pixel_count = 0;
    double mask_coverage = 0.0;
};

// Scale-invariant MSE: mean over masked pixels/channels of (s*pred - gt)^2
// with s the least-squares fit of pred to gt.
double smse(const Image& pred, const Image& gt, const Mask& mask);
double smse(const Image& pred, const Image& gt);

// Mean angular error between normal fields, degrees.
double mae_degrees(const NormalMap& pred, const NormalMap& gt, const Mask& mask);
double mae_degrees(const NormalMap& pred, const NormalMap& gt);

// 10*log10(peak^2 / MSE). peak <= 0 means "use max of gt on mask".
MetricReport psnr(const Image& pred, const Image& gt, const Mask& mask,
                  double peak = 0.0);

// Scale-invariant reflectance loss: ||s*R - R*||^2 + ||s*grad R - grad R*||_1,
// spherical-wrapped gradients, summed over pixels and channels.
double loss_reflectance(const Image& pred, const Image& gt);

// Normal loss: sum over pixels of -n.n* plus the l1 gradient difference.
double loss_normal(const Image& pred, const Image& gt);

std::string reports_csv(const std::vector<MetricReport>& reports);

}  // namespace pano
