#include "pano/geometry.hpp"

#include <cmath>

#include "pano/equirect.hpp"
#include "pano/parallel.hpp"

namespace pano {

NormalMap normals_from_depth(const DepthMap& depth, const CameraRig& rig) {
    (void)rig;
    require_equirect(depth.depth);
    if (!depth.valid.all())
        throw std::invalid_argument("normals require dense depth (fill invalids first)");
    const int h = depth.depth.height, w = depth.depth.width;

    // lift to 3D once
    std::vector<Vec3> points(static_cast<size_t>(h) * w);
    parallel_for(0, h, [&](int v) {
        for (int u = 0; u < w; ++u)
            points[static_cast<size_t>(v) * w + u] =
                pixel_to_dir(u, v, h, w) * static_cast<double>(depth.depth.at(v, u));
    });

    NormalMap out;
    out.normals = Image(h, w, 3);
    out.valid = Mask(h, w, false);
    parallel_for(0, h, [&](int v) {
        for (int u = 0; u < w; ++u) {
            const int ul = (u + w - 1) % w, ur = (u + 1) % w;
            const int vu = std::max(v - 1, 0), vd = std::min(v + 1, h - 1);
            const double d0 = depth.depth.at(v, u);
            bool jump = false;
            for (double dn : {depth.depth.at(v, ul), depth.depth.at(v, ur),
                              depth.depth.at(vu, u), depth.depth.at(vd, u)})
                if (std::abs(dn - d0) > kDepthJumpFrac * d0) jump = true;
            if (jump || vu == vd) continue;

            const Vec3 tu = points[static_cast<size_t>(v) * w + ur] -
                            points[static_cast<size_t>(v) * w + ul];
            const Vec3 tv = points[static_cast<size_t>(vd) * w + u] -
                            points[static_cast<size_t>(vu) * w + u];
            Vec3 n = tu.cross(tv);
            const double len = n.norm();
            if (!(len > 1e-15) || !n.finite()) continue;
            n = n / len;
            if (n.dot(points[static_cast<size_t>(v) * w + u]) > 0.0) n = -n;
            out.normals.at(v, u, 0) = static_cast<float>(n.x);
            out.normals.at(v, u, 1) = static_cast<float>(n.y);
            out.normals.at(v, u, 2) = static_cast<float>(n.z);
            out.valid.set(v, u, true);
        }
    });

    fill_nearest_angular(out.normals, out.valid);
    return out;
}

Image reflectance_init(const Image& img, const Image& shading, double eps,
                       double r_max) {
    if (!img.same_dims(shading))
        throw std::invalid_argument("image/shading dimension mismatch");
    Image out(img.height, img.width, img.channels);
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double s = std::max(static_cast<double>(shading.data[i]), eps);
        out.data[i] = static_cast<float>(
            std::clamp(static_cast<double>(img.data[i]) / s, 0.0, r_max));
    }
    return out;
}

}  // namespace pano
