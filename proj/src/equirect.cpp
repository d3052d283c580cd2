#include "pano/equirect.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pano/parallel.hpp"

namespace pano {

void require_equirect(const Image& img) {
    if (!img.is_equirect())
        throw std::invalid_argument("equirectangular image requires width == 2*height");
}

Vec3 pixel_to_dir(double u, double v, int height, int width) {
    if (height <= 0 || width != 2 * height)
        throw std::invalid_argument("bad equirect dims");
    if (!(u >= -0.5 && u < width) || !(v >= -0.5 && v <= height - 0.5))
        throw std::domain_error("pixel coordinate out of range");
    const double theta = kPi * (v + 0.5) / height;
    const double phi = kTwoPi * (u + 0.5) / width;
    const double st = std::sin(theta);
    return {st * std::cos(phi), std::cos(theta), st * std::sin(phi)};
}

std::pair<double, double> dir_to_pixel(const Vec3& dir, int height, int width) {
    if (height <= 0 || width != 2 * height)
        throw std::invalid_argument("bad equirect dims");
    const double y = std::clamp(dir.y, -1.0, 1.0);
    const double theta = std::acos(y);
    double phi = std::atan2(dir.z, dir.x);
    if (phi < 0.0) phi += kTwoPi;
    double u = phi * width / kTwoPi - 0.5;
    if (u < 0.0) u += width;
    if (u >= width) u -= width;
    double v = theta * height / kPi - 0.5;
    v = std::clamp(v, 0.0, static_cast<double>(height - 1));
    return {u, v};
}

double pixel_solid_angle(int v, int height, int width) {
    if (v < 0 || v >= height)
        throw std::domain_error("row out of range");
    const double theta = kPi * (v + 0.5) / height;
    return (kTwoPi / width) * (kPi / height) * std::sin(theta);
}

namespace {

inline int wrap_col(int u, int w) {
    u %= w;
    return u < 0 ? u + w : u;
}

}  // namespace

void sample(const Image& img, double u, double v, SampleMode mode, float* out) {
    const int w = img.width, h = img.height, c = img.channels;
    if (mode == SampleMode::nearest) {
        int ui = wrap_col(static_cast<int>(std::lround(u)), w);
        int vi = std::clamp(static_cast<int>(std::lround(v)), 0, h - 1);
        for (int k = 0; k < c; ++k) out[k] = img.at(vi, ui, k);
        return;
    }
    v = std::clamp(v, 0.0, static_cast<double>(h - 1));
    const double uf = std::floor(u);
    const double vf = std::floor(v);
    const double fu = u - uf;
    const double fv = v - vf;
    const int u0 = wrap_col(static_cast<int>(uf), w);
    const int u1 = wrap_col(u0 + 1, w);
    const int v0 = std::clamp(static_cast<int>(vf), 0, h - 1);
    const int v1 = std::clamp(v0 + 1, 0, h - 1);
    for (int k = 0; k < c; ++k) {
        const double top = (1.0 - fu) * img.at(v0, u0, k) + fu * img.at(v0, u1, k);
        const double bot = (1.0 - fu) * img.at(v1, u0, k) + fu * img.at(v1, u1, k);
        out[k] = static_cast<float>((1.0 - fv) * top + fv * bot);
    }
}

namespace {

// For every unfilled pixel, the index of its angular-nearest filled pixel.
// Rows are scanned outward from the hole in order of the lower bound
// |theta - theta0|; within a row the cyclically nearest column in azimuth is
// optimal, so a binary search over the row's sorted filled columns suffices.
std::vector<int64_t> nearest_filled_map(const Mask& filled) {
    const int h = filled.height, w = filled.width;
    std::vector<std::vector<int>> cols(h);
    bool any = false;
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            if (filled.at(v, u)) {
                cols[v].push_back(u);
                any = true;
            }
    if (!any) throw std::domain_error("nearest fill requires at least one filled pixel");

    std::vector<double> st(h), ct(h);
    for (int v = 0; v < h; ++v) {
        const double t = kPi * (v + 0.5) / h;
        st[v] = std::sin(t);
        ct[v] = std::cos(t);
    }
    std::vector<double> cdphi(w);
    for (int k = 0; k < w; ++k) cdphi[k] = std::cos(kTwoPi * k / w);

    std::vector<int64_t> src(static_cast<size_t>(h) * w, -1);
    parallel_for(0, h, [&](int v0) {
        for (int u0 = 0; u0 < w; ++u0) {
            if (filled.at(v0, u0)) {
                src[filled.index(v0, u0)] = filled.index(v0, u0);
                continue;
            }
            double best_cos = -2.0;  // maximize cos(distance)
            int bv = -1, bu = -1;
            const double t0 = kPi * (v0 + 0.5) / h;
            auto try_row = [&](int v) {
                if (cols[v].empty()) return;
                const auto& cs = cols[v];
                auto it = std::lower_bound(cs.begin(), cs.end(), u0);
                // candidates: neighbors of the insertion point, cyclic
                const int n = static_cast<int>(cs.size());
                int i1 = static_cast<int>(it - cs.begin()) % n;
                int i0 = (i1 + n - 1) % n;
                for (int idx : {i0, i1}) {
                    const int u = cs[idx];
                    const int du = wrap_col(u - u0, w);
                    const double cd = ct[v0] * ct[v] + st[v0] * st[v] * cdphi[du];
                    if (cd > best_cos ||
                        (cd == best_cos && (v < bv || (v == bv && u < bu)))) {
                        best_cos = cd;
                        bv = v;
                        bu = u;
                    }
                }
            };
            // outward row sweep with pruning on the polar lower bound
            for (int d = 0; d < h; ++d) {
                bool advanced = false;
                for (int v : {v0 - d, v0 + d}) {
                    if (v < 0 || v >= h || (d == 0 && v != v0 - d)) continue;
                    const double t = kPi * (v + 0.5) / h;
                    if (bv >= 0 && std::cos(std::abs(t - t0)) <= best_cos) continue;
                    advanced = true;
                    try_row(v);
                }
                if (!advanced && bv >= 0) break;
            }
            src[filled.index(v0, u0)] = filled.index(bv, bu);
        }
    });
    return src;
}

}  // namespace

void fill_nearest_angular(Image* imgs[], int n, const Mask& filled) {
    for (int i = 0; i < n; ++i)
        if (imgs[i]->height != filled.height || imgs[i]->width != filled.width)
            throw std::invalid_argument("mask/image dimension mismatch");
    const auto src = nearest_filled_map(filled);
    for (int i = 0; i < n; ++i) {
        Image& img = *imgs[i];
        const Image copy = img;
        const int c = img.channels;
        parallel_for(0, img.height, [&](int v) {
            for (int u = 0; u < img.width; ++u) {
                const int64_t s = src[filled.index(v, u)];
                if (s == static_cast<int64_t>(filled.index(v, u))) continue;
                for (int k = 0; k < c; ++k)
                    img.data[img.index(v, u, k)] = copy.data[s * c + k];
            }
        });
    }
}

void fill_nearest_angular(Image& img, const Mask& filled) {
    Image* p[] = {&img};
    fill_nearest_angular(p, 1, filled);
}

}  // namespace pano
