#include "pano/envlight.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "pano/equirect.hpp"
#include "pano/io.hpp"
#include "pano/parallel.hpp"

namespace pano {

PointLightSet build_light_field(const Image& img, const DepthMap& depth,
                                const CameraRig& rig) {
    (void)rig;  // positions are expressed in the reference (top) camera frame
    require_equirect(img);
    if (img.height != depth.depth.height || img.width != depth.depth.width)
        throw std::invalid_argument("image/depth dimension mismatch");
    if (img.channels != 3)
        throw std::invalid_argument("light field expects a 3-channel radiance image");
    if (!depth.valid.all())
        throw std::invalid_argument("light field requires dense depth (fill invalids first)");

    PointLightSet out;
    out.lights.resize(img.pixel_count());
    const int h = img.height, w = img.width;
    parallel_for(0, h, [&](int v) {
        for (int u = 0; u < w; ++u) {
            const Vec3 dir = pixel_to_dir(u, v, h, w);
            PointLight& l = out.lights[static_cast<size_t>(v) * w + u];
            l.position = dir * static_cast<double>(depth.depth.at(v, u));
            for (int k = 0; k < 3; ++k) l.intensity[k] = img.at(v, u, k);
        }
    });
    return out;
}

std::vector<Splat> project_lights(const PointLightSet& lights, const Vec3& query,
                                  int height, int width) {
    if (!query.finite()) throw std::invalid_argument("query must be finite");
    std::vector<Splat> splats;
    splats.reserve(lights.size());
    for (size_t i = 0; i < lights.lights.size(); ++i) {
        const PointLight& l = lights.lights[i];
        const Vec3 rel = l.position - query;
        const double dist = rel.norm();
        if (dist < kEpsNear) continue;
        const auto [u, v] = dir_to_pixel(rel / dist, height, width);
        const int ui = std::min(static_cast<int>(std::lround(u)) % width, width - 1);
        const int vi = std::clamp(static_cast<int>(std::lround(v)), 0, height - 1);
        splats.push_back({static_cast<int64_t>(vi) * width + ui,
                          static_cast<int64_t>(i), static_cast<float>(dist),
                          l.intensity});
    }
    return splats;
}

namespace {

IlluminationMap empty_map(int height, int width, const Vec3& center) {
    IlluminationMap m;
    m.radiance = Image(height, width, 3);
    m.depth = Image(height, width, 1);
    m.filled = Mask(height, width, false);
    m.center = center;
    return m;
}

inline bool splat_wins(float dist, int64_t source, float best_dist,
                       int64_t best_source) {
    return dist < best_dist || (dist == best_dist && source < best_source);
}

void commit_splat(IlluminationMap& m, std::vector<int64_t>& winner,
                  int64_t pixel, int64_t source, float dist,
                  const std::array<float, 3>& intensity) {
    const int v = static_cast<int>(pixel / m.radiance.width);
    const int u = static_cast<int>(pixel % m.radiance.width);
    if (m.filled.at(v, u) &&
        !splat_wins(dist, source, m.depth.at(v, u), winner[pixel]))
        return;
    m.filled.set(v, u, true);
    m.depth.at(v, u) = dist;
    winner[pixel] = source;
    for (int k = 0; k < 3; ++k) m.radiance.at(v, u, k) = intensity[k];
}

}  // namespace

IlluminationMap resolve_zbuffer(const std::vector<Splat>& splats, int height,
                                int width) {
    IlluminationMap m = empty_map(height, width, Vec3());
    std::vector<int64_t> winner(static_cast<size_t>(height) * width, -1);
    for (const Splat& s : splats)
        commit_splat(m, winner, s.pixel, s.source, s.distance, s.intensity);
    return m;
}

IlluminationMap fill_holes_nearest(const IlluminationMap& partial) {
    IlluminationMap out = partial;
    Image* planes[] = {&out.radiance, &out.depth};
    fill_nearest_angular(planes, 2, partial.filled);
    return out;
}

IlluminationMap reconstruct_illumination(const PointLightSet& lights,
                                         const Vec3& query, int height,
                                         int width) {
    if (!query.finite()) throw std::invalid_argument("query must be finite");
    if (width != 2 * height || height < 1)
        throw std::invalid_argument("illumination map requires width == 2*height");
    IlluminationMap m = empty_map(height, width, query);
    std::vector<int64_t> winner(static_cast<size_t>(height) * width, -1);
    for (size_t i = 0; i < lights.lights.size(); ++i) {
        const PointLight& l = lights.lights[i];
        const Vec3 rel = l.position - query;
        const double dist = rel.norm();
        if (dist < kEpsNear) continue;
        const auto [u, v] = dir_to_pixel(rel / dist, height, width);
        const int ui = std::min(static_cast<int>(std::lround(u)) % width, width - 1);
        const int vi = std::clamp(static_cast<int>(std::lround(v)), 0, height - 1);
        commit_splat(m, winner, static_cast<int64_t>(vi) * width + ui,
                     static_cast<int64_t>(i), static_cast<float>(dist),
                     l.intensity);
    }
    return fill_holes_nearest(m);
}

void write_light_field(const std::string& path, const PointLightSet& lights,
                       bool text) {
    std::ostringstream out(std::ios::binary);
    out.precision(17);  // text form round-trips doubles exactly
    if (text) {
        for (const PointLight& l : lights.lights) {
            out << l.position.x << " " << l.position.y << " " << l.position.z
                << " " << l.intensity[0] << " " << l.intensity[1] << " "
                << l.intensity[2] << "\n";
        }
    } else {
        out.write("PLF1", 4);
        const uint32_t count = static_cast<uint32_t>(lights.size());
        out.write(reinterpret_cast<const char*>(&count), 4);
        for (const PointLight& l : lights.lights) {
            const float rec[6] = {
                static_cast<float>(l.position.x), static_cast<float>(l.position.y),
                static_cast<float>(l.position.z), l.intensity[0], l.intensity[1],
                l.intensity[2]};
            out.write(reinterpret_cast<const char*>(rec), sizeof(rec));
        }
    }
    write_file_atomic(path, out.str());
}

PointLightSet read_light_field(const std::string& path) {
    const std::string buf = read_file(path);
    PointLightSet out;
    if (buf.size() < 4 || std::memcmp(buf.data(), "PLF1", 4) != 0) {
        std::istringstream in(buf);
        PointLight l;
        while (in >> l.position.x >> l.position.y >> l.position.z >>
               l.intensity[0] >> l.intensity[1] >> l.intensity[2])
            out.lights.push_back(l);
        return out;
    }
    if (buf.size() < 8) throw std::runtime_error("truncated light field " + path);
    uint32_t count;
    std::memcpy(&count, buf.data() + 4, 4);
    if (buf.size() < 8 + static_cast<size_t>(count) * 24)
        throw std::runtime_error("truncated light field " + path);
    out.lights.resize(count);
    for (uint32_t i = 0; i < count; ++i) {
        float rec[6];
        std::memcpy(rec, buf.data() + 8 + i * 24, 24);
        out.lights[i].position = {rec[0], rec[1], rec[2]};
        out.lights[i].intensity = {rec[3], rec[4], rec[5]};
    }
    return out;
}

}  // namespace pano
