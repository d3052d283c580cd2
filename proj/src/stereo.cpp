#include "pano/stereo.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pano/equirect.hpp"
#include "pano/parallel.hpp"

namespace pano {

void MatchConfig::validate() const {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("window must be odd and >= 3");
    if (max_disparity < 1)
        throw std::invalid_argument("max_disparity must be >= 1");
    if (pole_band < 0.0 || pole_band >= 0.5)
        throw std::invalid_argument("pole_band must be in [0, 0.5)");
}

double angular_disparity(double v_top, double v_bottom, int height) {
    return kPi / height * (v_top - v_bottom);
}

std::optional<double> depth_from_disparity(double theta_top, double delta,
                                           double baseline) {
    if (!(theta_top > 0.0 && theta_top < kPi))
        throw std::domain_error("theta_top must lie in (0, pi)");
    if (!(baseline > 0.0))
        throw std::domain_error("baseline must be positive");
    if (!(delta > kEpsDisparity)) return std::nullopt;  // at infinity
    const double d = baseline * (std::sin(theta_top) / std::tan(delta) +
                                 std::cos(theta_top));
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    return d;
}

double disparity_from_depth(double theta_top, double depth, double baseline) {
    // tan(delta) = sin(t) / (d/b - cos(t))
    return std::atan2(std::sin(theta_top), depth / baseline - std::cos(theta_top));
}

namespace {

std::vector<float> to_luma(const Image& img) {
    std::vector<float> out(img.pixel_count());
    const int c = img.channels;
    for (size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (int k = 0; k < c; ++k) s += img.data[i * c + k];
        out[i] = static_cast<float>(s / c);
    }
    return out;
}

struct Plane {
    const std::vector<float>* luma;
    int h, w;
    float at(int v, int u) const {
        v = std::clamp(v, 0, h - 1);
        u = ((u % w) + w) % w;
        return (*luma)[static_cast<size_t>(v) * w + u];
    }
};

// patch sums for ZNCC normalization
void patch_stats(const Plane& p, int r, std::vector<double>& sum,
                 std::vector<double>& sumsq) {
    sum.assign(static_cast<size_t>(p.h) * p.w, 0.0);
    sumsq.assign(sum.size(), 0.0);
    parallel_for(0, p.h, [&](int v) {
        for (int u = 0; u < p.w; ++u) {
            double s = 0.0, ss = 0.0;
            for (int dv = -r; dv <= r; ++dv)
                for (int du = -r; du <= r; ++du) {
                    const double x = p.at(v + dv, u + du);
                    s += x;
                    ss += x * x;
                }
            sum[static_cast<size_t>(v) * p.w + u] = s;
            sumsq[static_cast<size_t>(v) * p.w + u] = ss;
        }
    });
}

constexpr double kBadCost = std::numeric_limits<double>::infinity();

// One-direction winner-take-all matching. `sign` is the row offset direction
// in the other image (-1: match top against bottom, +1: the reverse).
// Outputs per-pixel disparity in pixels (NaN = invalid).
std::vector<float> match_one_way(const Plane& ref, const Plane& oth, int sign,
                                 const MatchConfig& cfg) {
    const int h = ref.h, w = ref.w, r = cfg.window / 2;
    const double n_patch = static_cast<double>(cfg.window) * cfg.window;
    std::vector<double> rs, rss, os, oss;
    const bool zncc = cfg.cost == MatchCost::ZNCC;
    if (zncc) {
        patch_stats(ref, r, rs, rss);
        patch_stats(oth, r, os, oss);
    }
    std::vector<float> disp(static_cast<size_t>(h) * w,
                            std::numeric_limits<float>::quiet_NaN());
    parallel_for(0, h, [&](int v) {
        std::vector<double> costs(cfg.max_disparity + 1, kBadCost);
        for (int u = 0; u < w; ++u) {
            const int kmax = sign < 0 ? std::min(cfg.max_disparity, v)
                                      : std::min(cfg.max_disparity, h - 1 - v);
            double best = kBadCost, second = kBadCost;
            int kbest = -1;
            for (int k = 0; k <= kmax; ++k) {
                const int vo = v + sign * k;
                double cost;
                if (zncc) {
                    const size_t ir = static_cast<size_t>(v) * w + u;
                    const size_t io = static_cast<size_t>(vo) * w + u;
                    double sab = 0.0;
                    for (int dv = -r; dv <= r; ++dv)
                        for (int du = -r; du <= r; ++du)
                            sab += static_cast<double>(ref.at(v + dv, u + du)) *
                                   oth.at(vo + dv, u + du);
                    const double var_r = rss[ir] - rs[ir] * rs[ir] / n_patch;
                    const double var_o = oss[io] - os[io] * os[io] / n_patch;
                    if (var_r < 1e-9 || var_o < 1e-9) {
                        cost = kBadCost;  // textureless, aperture problem
                    } else {
                        const double cov = sab - rs[ir] * os[io] / n_patch;
                        cost = 1.0 - cov / std::sqrt(var_r * var_o);
                    }
                } else {
                    double sad = 0.0;
                    for (int dv = -r; dv <= r; ++dv)
                        for (int du = -r; du <= r; ++du)
                            sad += std::abs(ref.at(v + dv, u + du) -
                                            oth.at(vo + dv, u + du));
                    cost = sad;
                }
                costs[k] = cost;
                if (cost < best) {
                    kbest = k;
                    best = cost;
                }
            }
            if (kbest < 0 || best == kBadCost) continue;
            // ambiguity: a non-neighbor candidate as good as the winner
            for (int k = 0; k <= kmax; ++k)
                if (std::abs(k - kbest) > 1 && costs[k] < second) second = costs[k];
            if (second - best <= 1e-9 * std::max(1.0, std::abs(best))) continue;
            double d = kbest;
            if (cfg.subpixel && kbest > 0 && kbest < kmax) {
                const double cm = costs[kbest - 1], c0 = costs[kbest], cp = costs[kbest + 1];
                const double denom = cm - 2.0 * c0 + cp;
                if (denom > 1e-12 && cm != kBadCost && cp != kBadCost)
                    d += 0.5 * (cm - cp) / denom;
            }
            disp[static_cast<size_t>(v) * w + u] = static_cast<float>(d);
        }
    });
    return disp;
}

}  // namespace

DisparityMap match_vertical(const Image& top, const Image& bottom,
                            const MatchConfig& cfg) {
    cfg.validate();
    if (!top.same_dims(bottom))
        throw std::invalid_argument("stereo pair dimension mismatch");
    require_equirect(top);
    const int h = top.height, w = top.width;

    const auto luma_t = to_luma(top);
    const auto luma_b = to_luma(bottom);
    const Plane pt{&luma_t, h, w}, pb{&luma_b, h, w};

    // top pixel at row v matches bottom pixel at row v - k (the point appears
    // closer to the zenith in the bottom image)
    const auto d_tb = match_one_way(pt, pb, -1, cfg);
    const auto d_bt = match_one_way(pb, pt, +1, cfg);

    DisparityMap out;
    out.delta = Image(h, w, 1);
    out.valid = Mask(h, w, false);
    const int band = static_cast<int>(std::ceil(cfg.pole_band * h));
    parallel_for(0, h, [&](int v) {
        for (int u = 0; u < w; ++u) {
            if (v < band || v >= h - band) continue;
            const float d = d_tb[static_cast<size_t>(v) * w + u];
            if (std::isnan(d)) continue;
            const int vb = std::clamp(v - static_cast<int>(std::lround(d)), 0, h - 1);
            const float back = d_bt[static_cast<size_t>(vb) * w + u];
            if (std::isnan(back) || std::abs(back - d) > cfg.lr_check_threshold)
                continue;
            out.delta.at(v, u) = static_cast<float>(angular_disparity(v, v - d, h));
            out.valid.set(v, u, true);
        }
    });
    return out;
}

DepthMap disparity_to_depth(const DisparityMap& disp, const CameraRig& rig) {
    const int h = disp.delta.height, w = disp.delta.width;
    DepthMap out;
    out.depth = Image(h, w, 1);
    out.valid = Mask(h, w, false);
    for (int v = 0; v < h; ++v) {
        const double theta_top = kPi - kPi * (v + 0.5) / h;  // from nadir
        for (int u = 0; u < w; ++u) {
            if (!disp.valid.at(v, u)) continue;
            const auto d = depth_from_disparity(theta_top, disp.delta.at(v, u),
                                                rig.baseline);
            if (!d) continue;
            out.depth.at(v, u) = static_cast<float>(*d);
            out.valid.set(v, u, true);
        }
    }
    return out;
}

DepthMap fill_depth_nearest(const DepthMap& depth) {
    DepthMap out = depth;
    fill_nearest_angular(out.depth, depth.valid);
    out.valid = Mask(depth.depth.height, depth.depth.width, true);
    return out;
}

}  // namespace pano
