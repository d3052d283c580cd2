#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pano {

// Row-major, channel-interleaved float image. Used for radiance, depth,
// normals and masks alike; the channel count carries the role.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c, float fill = 0.f)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {
        if (h <= 0 || w <= 0 || c < 1 || c > 4)
            throw std::invalid_argument("bad image dimensions");
    }

    size_t index(int v, int u, int c = 0) const {
        return (static_cast<size_t>(v) * width + u) * channels + c;
    }
    float& at(int v, int u, int c = 0) { return data[index(v, u, c)]; }
    float at(int v, int u, int c = 0) const { return data[index(v, u, c)]; }

    size_t pixel_count() const { return static_cast<size_t>(height) * width; }
    bool same_dims(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
    bool is_equirect() const { return width == 2 * height; }
};

// Per-pixel boolean mask.
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    Mask() = default;
    Mask(int h, int w, bool fill = false)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill ? 1 : 0) {}

    size_t index(int v, int u) const { return static_cast<size_t>(v) * width + u; }
    bool at(int v, int u) const { return data[index(v, u)] != 0; }
    void set(int v, int u, bool b) { data[index(v, u)] = b ? 1 : 0; }

    size_t count() const {
        size_t n = 0;
        for (uint8_t b : data) n += (b != 0);
        return n;
    }
    bool all() const { return count() == data.size(); }
    bool none() const { return count() == 0; }
};

inline Mask full_mask(const Image& img) { return Mask(img.height, img.width, true); }

}  // namespace pano
