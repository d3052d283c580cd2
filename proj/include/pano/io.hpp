#pragma once

#include <string>

#include "pano/image.hpp"

namespace pano {

// PFM (portable float map), little-endian, scale header -1.0.
// 1-channel images are written as "Pf", 3-channel as "PF". Rows are stored
// bottom-to-top per the format; this round-trips through read_pfm.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);

// 8-bit PNG. Float data is gamma-2.2 encoded after clamping to [0,1] unless
// gamma == 1. Channels: 1 -> gray, 3 -> RGB, 4 -> RGBA.
void write_png(const std::string& path, const Image& img, double gamma = 2.2);

// Mask as a 0/255 gray PNG (no gamma).
void write_mask_png(const std::string& path, const Mask& mask);
Mask read_mask_png(const std::string& path);

// Writes `contents` to path atomically (temp file in the same directory,
// then rename).
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace pano
