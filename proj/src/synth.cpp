#include "pano/synth.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pano/equirect.hpp"
#include "pano/io.hpp"
#include "pano/parallel.hpp"

namespace pano {

namespace {

const char* kFaceNames[6] = {"+x", "-x", "+y", "-y", "+z", "-z"};

inline int face_axis(int f) { return f / 2; }
inline double face_sign(int f) { return f % 2 == 0 ? 1.0 : -1.0; }

// tangent axes spanning the face, in (a, b) order
inline void face_tangents(int f, int& t0, int& t1) {
    switch (face_axis(f)) {
        case 0: t0 = 1; t1 = 2; break;  // x face: (y, z)
        case 1: t0 = 0; t1 = 2; break;  // y face: (x, z)
        default: t0 = 0; t1 = 1; break; // z face: (x, y)
    }
}

inline double comp(const Vec3& v, int axis) {
    return axis == 0 ? v.x : (axis == 1 ? v.y : v.z);
}
inline void set_comp(Vec3& v, int axis, double x) {
    (axis == 0 ? v.x : (axis == 1 ? v.y : v.z)) = x;
}

Vec3 point_on_face(const BoxScene& scene, int f, double a, double b) {
    int t0, t1;
    face_tangents(f, t0, t1);
    Vec3 p;
    set_comp(p, face_axis(f), face_sign(f) * comp(scene.half_extents, face_axis(f)));
    set_comp(p, t0, (2.0 * a - 1.0) * comp(scene.half_extents, t0));
    set_comp(p, t1, (2.0 * b - 1.0) * comp(scene.half_extents, t1));
    return p;
}

Vec3 inward_normal(int f) {
    Vec3 n;
    set_comp(n, face_axis(f), -face_sign(f));
    return n;
}

double checker_factor(const BoxScene& scene, int f, const Vec3& p) {
    if (!scene.checker) return 1.0;
    int t0, t1;
    face_tangents(f, t0, t1);
    const long ia = std::lround(std::floor(
        (comp(p, t0) + comp(scene.half_extents, t0)) / scene.checker_cell));
    const long ib = std::lround(std::floor(
        (comp(p, t1) + comp(scene.half_extents, t1)) / scene.checker_cell));
    const bool odd = ((ia + ib) % 2 + 2) % 2 == 1;
    return odd ? 1.0 - scene.checker_contrast : 1.0 + scene.checker_contrast;
}

Vec3 albedo_at(const BoxScene& scene, int f, const Vec3& p) {
    return scene.face_albedo[f] * checker_factor(scene, f, p);
}

constexpr double kMaxSubpatchSr = 1e-3;
constexpr int kMaxSubdivDepth = 12;

// irradiance at p (normal n) from one emitter patch; adaptive quadrature
// with the cos/r^2 kernel, subdividing until each sub-patch subtends less
// than kMaxSubpatchSr. Visibility inside the convex room is 1.
Vec3 patch_irradiance(const BoxScene& scene, const Emitter& em, const Vec3& p,
                      const Vec3& n) {
    int t0, t1;
    face_tangents(em.face, t0, t1);
    const double face_area =
        4.0 * comp(scene.half_extents, t0) * comp(scene.half_extents, t1);
    const Vec3 ne = inward_normal(em.face);

    struct Rect { double a0, b0, a1, b1; int depth; };
    std::vector<Rect> stack{{em.a0, em.b0, em.a1, em.b1, 0}};
    Vec3 total;
    while (!stack.empty()) {
        const Rect r = stack.back();
        stack.pop_back();
        const Vec3 c = point_on_face(scene, em.face,
                                     0.5 * (r.a0 + r.a1), 0.5 * (r.b0 + r.b1));
        const Vec3 to_p = p - c;
        const double d2 = to_p.dot(to_p);
        if (d2 < 1e-12) continue;  // receiver sits on the patch
        const double area = (r.a1 - r.a0) * (r.b1 - r.b0) * face_area;
        if (area / d2 > kMaxSubpatchSr && r.depth < kMaxSubdivDepth) {
            const double am = 0.5 * (r.a0 + r.a1), bm = 0.5 * (r.b0 + r.b1);
            stack.push_back({r.a0, r.b0, am, bm, r.depth + 1});
            stack.push_back({am, r.b0, r.a1, bm, r.depth + 1});
            stack.push_back({r.a0, bm, am, r.b1, r.depth + 1});
            stack.push_back({am, bm, r.a1, r.b1, r.depth + 1});
            continue;
        }
        const double d = std::sqrt(d2);
        const double cos_e = std::max(ne.dot(to_p) / d, 0.0);
        const double cos_r = std::max(n.dot(-to_p) / d, 0.0);
        if (cos_e <= 0.0 || cos_r <= 0.0) continue;
        total += em.radiance * (cos_e * cos_r * area / d2);
    }
    return total;
}

Vec3 shading_at(const BoxScene& scene, const Vec3& p, const Vec3& n) {
    Vec3 s = scene.ambient;
    for (const Emitter& em : scene.emitters) s += patch_irradiance(scene, em, p, n);
    return s;
}

void put_rgb(Image& img, int v, int u, const Vec3& c) {
    img.at(v, u, 0) = static_cast<float>(c.x);
    img.at(v, u, 1) = static_cast<float>(c.y);
    img.at(v, u, 2) = static_cast<float>(c.z);
}

}  // namespace

void face_coords(const BoxScene& scene, int face, const Vec3& p, double& a,
                 double& b) {
    int t0, t1;
    face_tangents(face, t0, t1);
    a = (comp(p, t0) / comp(scene.half_extents, t0) + 1.0) * 0.5;
    b = (comp(p, t1) / comp(scene.half_extents, t1) + 1.0) * 0.5;
}

Vec3 emission_at(const BoxScene& scene, int face, const Vec3& p) {
    Vec3 e;
    double a, b;
    for (const Emitter& em : scene.emitters) {
        if (em.face != face) continue;
        face_coords(scene, face, p, a, b);
        if (a >= em.a0 && a <= em.a1 && b >= em.b0 && b <= em.b1)
            e += em.radiance;
    }
    return e;
}

const char* face_name(int face) {
    if (face < 0 || face > 5) throw std::invalid_argument("bad face id");
    return kFaceNames[face];
}

int face_from_name(const std::string& name) {
    for (int f = 0; f < 6; ++f)
        if (name == kFaceNames[f]) return f;
    throw std::invalid_argument("unknown face '" + name + "'");
}

bool BoxScene::inside(const Vec3& p) const {
    return std::abs(p.x) < half_extents.x && std::abs(p.y) < half_extents.y &&
           std::abs(p.z) < half_extents.z;
}

void BoxScene::validate() const {
    if (!(half_extents.x > 0 && half_extents.y > 0 && half_extents.z > 0))
        throw std::invalid_argument("half extents must be positive");
    for (const Vec3& a : face_albedo)
        if (a.x < 0 || a.y < 0 || a.z < 0 || a.x > 1 || a.y > 1 || a.z > 1)
            throw std::invalid_argument("albedo must lie in [0,1]");
    for (const Emitter& e : emitters) {
        if (e.face < 0 || e.face > 5) throw std::invalid_argument("bad emitter face");
        if (!(e.a0 >= 0 && e.a0 < e.a1 && e.a1 <= 1 && e.b0 >= 0 && e.b0 < e.b1 &&
              e.b1 <= 1))
            throw std::invalid_argument("emitter patch must be a non-empty sub-rect of its face");
        if (e.radiance.x < 0 || e.radiance.y < 0 || e.radiance.z < 0)
            throw std::invalid_argument("emitter radiance must be non-negative");
    }
    if (ambient.x < 0 || ambient.y < 0 || ambient.z < 0)
        throw std::invalid_argument("ambient must be non-negative");
    if (emitters.empty() && ambient.x == 0 && ambient.y == 0 && ambient.z == 0)
        throw std::invalid_argument("scene needs an emitter or positive ambient");
    if (!inside(camera_top))
        throw std::invalid_argument("camera must be strictly inside the box");
    if (checker && !(checker_cell > 0))
        throw std::invalid_argument("checker cell must be positive");
}

BoxHit raycast_box(const Vec3& origin, const Vec3& dir, const BoxScene& scene) {
    if (!scene.inside(origin))
        throw std::domain_error("raycast origin must be strictly inside the box");
    double best_t = std::numeric_limits<double>::infinity();
    int best_face = -1;
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double h[3] = {scene.half_extents.x, scene.half_extents.y,
                         scene.half_extents.z};
    for (int axis = 0; axis < 3; ++axis) {
        if (d[axis] == 0.0) continue;
        const double sign = d[axis] > 0.0 ? 1.0 : -1.0;
        const double t = (sign * h[axis] - o[axis]) / d[axis];
        if (t > 0.0 && t < best_t) {
            best_t = t;
            best_face = 2 * axis + (sign > 0.0 ? 0 : 1);
        }
    }
    if (best_face < 0) throw std::domain_error("degenerate ray");
    BoxHit hit;
    hit.distance = best_t;
    hit.face = best_face;
    hit.point = origin + dir * best_t;
    hit.normal = inward_normal(best_face);
    return hit;
}

GroundTruth render_ground_truth(const BoxScene& scene, const Vec3& camera,
                                int height, int width) {
    scene.validate();
    if (!scene.inside(camera))
        throw std::domain_error("render camera must be inside the box");
    if (width != 2 * height) throw std::invalid_argument("need width == 2*height");

    GroundTruth gt;
    gt.image = Image(height, width, 3);
    gt.depth.depth = Image(height, width, 1);
    gt.depth.valid = Mask(height, width, true);
    gt.normal.normals = Image(height, width, 3);
    gt.normal.valid = Mask(height, width, true);
    gt.reflectance = Image(height, width, 3);
    gt.shading = Image(height, width, 3);

    parallel_for(0, height, [&](int v) {
        for (int u = 0; u < width; ++u) {
            const Vec3 ray = pixel_to_dir(u, v, height, width);
            const BoxHit hit = raycast_box(camera, ray, scene);
            gt.depth.depth.at(v, u) = static_cast<float>(hit.distance);
            put_rgb(gt.normal.normals, v, u, hit.normal);
            const Vec3 alb = albedo_at(scene, hit.face, hit.point);
            put_rgb(gt.reflectance, v, u, alb);
            const Vec3 sh = shading_at(scene, hit.point, hit.normal);
            put_rgb(gt.shading, v, u, sh);
            const Vec3 emis = emission_at(scene, hit.face, hit.point);
            put_rgb(gt.image, v, u,
                    emis + Vec3(alb.x * sh.x, alb.y * sh.y, alb.z * sh.z));
        }
    });
    return gt;
}

StereoBundle generate_stereo_pair(const BoxScene& scene, const CameraRig& rig,
                                  int height, int width) {
    const Vec3 cam_bottom = scene.camera_top - Vec3(0, rig.baseline, 0);
    if (!scene.inside(cam_bottom))
        throw std::domain_error("bottom camera falls outside the box");
    StereoBundle out;
    out.top = render_ground_truth(scene, scene.camera_top, height, width);
    out.bottom = render_ground_truth(scene, cam_bottom, height, width).image;

    out.disparity_gt.delta = Image(height, width, 1);
    out.disparity_gt.valid = Mask(height, width, true);
    for (int v = 0; v < height; ++v) {
        const double theta_top = kPi - kPi * (v + 0.5) / height;
        for (int u = 0; u < width; ++u)
            out.disparity_gt.delta.at(v, u) = static_cast<float>(
                disparity_from_depth(theta_top, out.top.depth.depth.at(v, u),
                                     rig.baseline));
    }
    return out;
}

namespace {

BoxScene parse_scene_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    BoxScene s;
    auto vec3 = [](const nlohmann::json& a) {
        return Vec3(a.at(0).get<double>(), a.at(1).get<double>(),
                    a.at(2).get<double>());
    };
    if (j.contains("half_extents")) s.half_extents = vec3(j["half_extents"]);
    if (j.contains("albedo")) {
        // "all" is the default; per-face keys override it regardless of the
        // (unordered) JSON key order
        if (j["albedo"].contains("all")) s.face_albedo.fill(vec3(j["albedo"]["all"]));
        for (auto& [key, val] : j["albedo"].items())
            if (key != "all") s.face_albedo[face_from_name(key)] = vec3(val);
    }
    if (j.contains("emitters"))
        for (const auto& e : j["emitters"]) {
            Emitter em;
            em.face = face_from_name(e.at("face").get<std::string>());
            const auto& r = e.at("rect");
            em.a0 = r.at(0);
            em.b0 = r.at(1);
            em.a1 = r.at(2);
            em.b1 = r.at(3);
            em.radiance = vec3(e.at("radiance"));
            s.emitters.push_back(em);
        }
    if (j.contains("ambient")) s.ambient = vec3(j["ambient"]);
    if (j.contains("camera")) s.camera_top = vec3(j["camera"]);
    if (j.contains("checker")) {
        s.checker = true;
        s.checker_cell = j["checker"].value("cell", 0.25);
        s.checker_contrast = j["checker"].value("contrast", 0.3);
    }
    s.validate();
    return s;
}

BoxScene parse_scene_text(const std::string& text) {
    BoxScene s;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto expect = [&](bool ok) {
            if (!ok)
                throw std::invalid_argument("scene parse error at line " +
                                            std::to_string(lineno));
        };
        if (key == "half_extents") {
            expect(static_cast<bool>(ls >> s.half_extents.x >> s.half_extents.y >>
                                     s.half_extents.z));
        } else if (key == "albedo") {
            std::string face;
            Vec3 a;
            expect(static_cast<bool>(ls >> face >> a.x >> a.y >> a.z));
            if (face == "all")
                s.face_albedo.fill(a);
            else
                s.face_albedo[face_from_name(face)] = a;
        } else if (key == "emitter") {
            std::string face;
            Emitter e;
            expect(static_cast<bool>(ls >> face >> e.a0 >> e.b0 >> e.a1 >> e.b1 >>
                                     e.radiance.x >> e.radiance.y >> e.radiance.z));
            e.face = face_from_name(face);
            s.emitters.push_back(e);
        } else if (key == "ambient") {
            expect(static_cast<bool>(ls >> s.ambient.x >> s.ambient.y >> s.ambient.z));
        } else if (key == "camera") {
            expect(static_cast<bool>(ls >> s.camera_top.x >> s.camera_top.y >>
                                     s.camera_top.z));
        } else if (key == "checker") {
            s.checker = true;
            ls >> s.checker_cell >> s.checker_contrast;
        } else {
            throw std::invalid_argument("unknown scene key '" + key + "' at line " +
                                        std::to_string(lineno));
        }
    }
    s.validate();
    return s;
}

}  // namespace

BoxScene parse_scene(const std::string& text) {
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '{' ? parse_scene_json(text) : parse_scene_text(text);
    }
    throw std::invalid_argument("empty scene description");
}

BoxScene load_scene(const std::string& path) { return parse_scene(read_file(path)); }

}  // namespace pano
