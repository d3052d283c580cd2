#include "pano/render.hpp"

#include <cmath>
#include <vector>

#include "pano/equirect.hpp"
#include "pano/parallel.hpp"

namespace pano {

void RenderConfig::validate() const {
    if (illum_height < 1)
        throw std::invalid_argument("illum_height must be positive");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
}

std::array<double, 3> shade_point(const IlluminationMap& illum, const Vec3& normal,
                                  const RenderConfig& cfg) {
    cfg.validate();
    if (std::abs(normal.norm() - 1.0) > 1e-6)
        throw std::domain_error("shade_point requires a unit normal");
    const int h = illum.radiance.height, w = illum.radiance.width;
    std::vector<double> cphi(w), sphi(w);
    for (int u = 0; u < w; ++u) {
        const double phi = kTwoPi * (u + 0.5) / w;
        cphi[u] = std::cos(phi);
        sphi[u] = std::sin(phi);
    }
    const double w_uniform = 4.0 * kPi / (static_cast<double>(h) * w);
    std::array<double, 3> s{0.0, 0.0, 0.0};
    for (int v = 0; v < h; ++v) {
        const double theta = kPi * (v + 0.5) / h;
        const double st = std::sin(theta), ct = std::cos(theta);
        const double wj = cfg.weighting == ShadeWeighting::solid_angle
                              ? pixel_solid_angle(v, h, w)
                              : w_uniform;
        const double ct_ny = ct * normal.y;
        for (int u = 0; u < w; ++u) {
            const double cosine =
                st * (cphi[u] * normal.x + sphi[u] * normal.z) + ct_ny;
            if (cosine <= 0.0) continue;
            const double f = cosine * wj;
            for (int k = 0; k < 3; ++k) s[k] += f * illum.radiance.at(v, u, k);
        }
    }
    return s;
}

namespace {

Vec3 normal_at(const NormalMap& normals, int v, int u) {
    return {normals.normals.at(v, u, 0), normals.normals.at(v, u, 1),
            normals.normals.at(v, u, 2)};
}

// sampled positions along one axis: multiples of stride plus the last index
std::vector<int> stride_samples(int n, int stride) {
    std::vector<int> s;
    for (int i = 0; i < n; i += stride) s.push_back(i);
    if (s.back() != n - 1) s.push_back(n - 1);
    return s;
}

}  // namespace

Image render_shading(const PointLightSet& lights, const DepthMap& depth,
                     const NormalMap& normals, const CameraRig& rig,
                     const RenderConfig& cfg) {
    (void)rig;
    cfg.validate();
    require_equirect(depth.depth);
    if (depth.depth.height != normals.normals.height ||
        depth.depth.width != normals.normals.width)
        throw std::invalid_argument("depth/normal dimension mismatch");
    const int h = depth.depth.height, w = depth.depth.width;
    const int mh = cfg.illum_height, mw = 2 * cfg.illum_height;

    const auto rows = stride_samples(h, cfg.stride);
    const auto cols = stride_samples(w, cfg.stride);
    const int nr = static_cast<int>(rows.size());
    const int nc = static_cast<int>(cols.size());

    std::vector<std::array<double, 3>> grid(static_cast<size_t>(nr) * nc);
    parallel_for(0, nr, [&](int ri) {
        const int v = rows[ri];
        for (int ci = 0; ci < nc; ++ci) {
            const int u = cols[ci];
            const Vec3 x = pixel_to_dir(u, v, h, w) *
                           static_cast<double>(depth.depth.at(v, u));
            const IlluminationMap m = reconstruct_illumination(lights, x, mh, mw);
            const Vec3 n = normal_at(normals, v, u).normalized();
            grid[static_cast<size_t>(ri) * nc + ci] = shade_point(m, n, cfg);
        }
    });

    Image out(h, w, 3);
    if (cfg.stride == 1) {
        for (int v = 0; v < h; ++v)
            for (int u = 0; u < w; ++u)
                for (int k = 0; k < 3; ++k)
                    out.at(v, u, k) = static_cast<float>(
                        grid[static_cast<size_t>(v) * nc + u][k]);
        return out;
    }

    // bilinear fill between sampled positions; columns wrap in azimuth
    parallel_for(0, h, [&](int v) {
        int ri = 0;
        while (ri + 1 < nr && rows[ri + 1] <= v) ++ri;
        const int r1 = std::min(ri + 1, nr - 1);
        const double fv = rows[r1] == rows[ri]
                              ? 0.0
                              : static_cast<double>(v - rows[ri]) / (rows[r1] - rows[ri]);
        for (int u = 0; u < w; ++u) {
            int ci = 0;
            while (ci + 1 < nc && cols[ci + 1] <= u) ++ci;
            int c1 = ci + 1;
            double span, du;
            if (c1 >= nc) {  // wrap to column 0
                c1 = 0;
                span = w - cols[ci];
                du = u - cols[ci];
            } else {
                span = cols[c1] - cols[ci];
                du = u - cols[ci];
            }
            const double fu = span > 0.0 ? du / span : 0.0;
            for (int k = 0; k < 3; ++k) {
                const double top =
                    (1.0 - fu) * grid[static_cast<size_t>(ri) * nc + ci][k] +
                    fu * grid[static_cast<size_t>(ri) * nc + c1][k];
                const double bot =
                    (1.0 - fu) * grid[static_cast<size_t>(r1) * nc + ci][k] +
                    fu * grid[static_cast<size_t>(r1) * nc + c1][k];
                out.at(v, u, k) = static_cast<float>((1.0 - fv) * top + fv * bot);
            }
        }
    });
    return out;
}

double least_squares_scale(const Image& a, const Image& b, const Mask& mask) {
    if (!a.same_dims(b) || a.height != mask.height || a.width != mask.width)
        throw std::invalid_argument("least_squares_scale dimension mismatch");
    double sab = 0.0, saa = 0.0;
    for (int v = 0; v < a.height; ++v)
        for (int u = 0; u < a.width; ++u) {
            if (!mask.at(v, u)) continue;
            for (int k = 0; k < a.channels; ++k) {
                const double av = a.at(v, u, k), bv = b.at(v, u, k);
                sab += av * bv;
                saa += av * av;
            }
        }
    if (!(saa > 0.0))
        throw std::domain_error("least_squares_scale: zero denominator");
    return sab / saa;
}

double least_squares_scale(const Image& a, const Image& b) {
    return least_squares_scale(a, b, Mask(a.height, a.width, true));
}

Image reconstruct_image(const Image& reflectance, const Image& shading, double s) {
    if (!reflectance.same_dims(shading))
        throw std::invalid_argument("reconstruct_image dimension mismatch");
    Image out(reflectance.height, reflectance.width, reflectance.channels);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = static_cast<float>(s * reflectance.data[i] * shading.data[i]);
    return out;
}

ProbeRender render_mirror_probe(const PointLightSet& lights, const Vec3& center,
                                double radius, const Vec3& view_dir,
                                int out_height, int out_width, int illum_height) {
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    const Vec3 d = view_dir.normalized();
    const Vec3 up0 = std::abs(d.y) < 0.99 ? Vec3(0, 1, 0) : Vec3(1, 0, 0);
    const Vec3 right = up0.cross(d).normalized();
    const Vec3 up = d.cross(right);

    const IlluminationMap m =
        reconstruct_illumination(lights, center, illum_height, 2 * illum_height);

    ProbeRender out;
    out.patch = Image(out_height, out_width, 3);
    out.coverage = Mask(out_height, out_width, false);
    parallel_for(0, out_height, [&](int i) {
        for (int j = 0; j < out_width; ++j) {
            const double a = 2.0 * (j + 0.5) / out_width - 1.0;
            const double b = 1.0 - 2.0 * (i + 0.5) / out_height;
            const double rr = a * a + b * b;
            if (rr > 1.0) continue;
            const Vec3 n = right * a + up * b - d * std::sqrt(1.0 - rr);
            const Vec3 refl = d - n * (2.0 * d.dot(n));
            const auto [u, v] =
                dir_to_pixel(refl, m.radiance.height, m.radiance.width);
            float rgb[3];
            sample(m.radiance, u, v, SampleMode::bilinear, rgb);
            for (int k = 0; k < 3; ++k) out.patch.at(i, j, k) = rgb[k];
            out.coverage.set(i, j, true);
        }
    });
    return out;
}

}  // namespace pano
