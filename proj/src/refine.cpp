#include "pano/refine.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "pano/parallel.hpp"

namespace pano {

void RefineConfig::validate() const {
    if (lambda1 < 0 || lambda2 < 0 || lambda_prox < 0)
        throw std::invalid_argument("weights must be non-negative");
    if (!(learning_rate >= 0)) throw std::invalid_argument("bad learning rate");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(charbonnier_eps > 0)) throw std::invalid_argument("bad charbonnier eps");
}

namespace {

using Plane = std::vector<double>;

Plane to_plane(const Image& img) {
    return Plane(img.data.begin(), img.data.end());
}

Image to_image(const Plane& p, int h, int w, int c) {
    Image img(h, w, c);
    for (size_t i = 0; i < p.size(); ++i) img.data[i] = static_cast<float>(p[i]);
    return img;
}

struct Dims {
    int h, w, c;
    size_t idx(int v, int u, int k) const {
        return (static_cast<size_t>(v) * w + u) * c + k;
    }
    size_t size() const { return static_cast<size_t>(h) * w * c; }
};

inline double charb(double x, double eps) {
    return std::sqrt(x * x + eps * eps) - eps;
}
inline double charb_d(double x, double eps) {
    return x / std::sqrt(x * x + eps * eps);
}

double fit_scale(const Plane& img, const Plane& r, const Plane& s) {
    double sab = 0.0, saa = 0.0;
    for (size_t i = 0; i < img.size(); ++i) {
        const double p = r[i] * s[i];
        sab += p * img[i];
        saa += p * p;
    }
    if (!(saa > 0.0)) return 1.0;  // degenerate product; scale is irrelevant
    return sab / saa;
}

// energy at fixed s; anchors may be null
EnergyTerms energy(const Dims& d, const Plane& img, const Plane& r,
                   const Plane& s, double scale, const RefineConfig& cfg,
                   const Plane* r0, const Plane* s0) {
    EnergyTerms e;
    for (size_t i = 0; i < img.size(); ++i) {
        const double res = img[i] - scale * r[i] * s[i];
        e.data += res * res;
    }
    for (int v = 0; v < d.h; ++v)
        for (int u = 0; u < d.w; ++u) {
            const int ur = (u + 1) % d.w;
            for (int k = 0; k < d.c; ++k) {
                const double dhr = r[d.idx(v, ur, k)] - r[d.idx(v, u, k)];
                const double dhs = s[d.idx(v, ur, k)] - s[d.idx(v, u, k)];
                e.tv_r += charb(dhr, cfg.charbonnier_eps);
                e.tv_s += dhs * dhs;
                if (v + 1 < d.h) {
                    const double dvr = r[d.idx(v + 1, u, k)] - r[d.idx(v, u, k)];
                    const double dvs = s[d.idx(v + 1, u, k)] - s[d.idx(v, u, k)];
                    e.tv_r += charb(dvr, cfg.charbonnier_eps);
                    e.tv_s += dvs * dvs;
                }
            }
        }
    e.tv_r *= cfg.lambda1;
    e.tv_s *= cfg.lambda2;
    if (r0 && s0 && cfg.lambda_prox > 0.0) {
        double p = 0.0;
        for (size_t i = 0; i < r.size(); ++i) {
            const double dr = r[i] - (*r0)[i];
            const double ds = s[i] - (*s0)[i];
            p += dr * dr + ds * ds;
        }
        e.prox = cfg.lambda_prox * p;
    }
    e.total = e.data + e.tv_r + e.tv_s + e.prox;
    return e;
}

// analytic gradients at fixed s
void gradients(const Dims& d, const Plane& img, const Plane& r, const Plane& s,
               double scale, const RefineConfig& cfg, const Plane* r0,
               const Plane* s0, Plane& gr, Plane& gs) {
    gr.assign(d.size(), 0.0);
    gs.assign(d.size(), 0.0);
    for (size_t i = 0; i < img.size(); ++i) {
        const double res = img[i] - scale * r[i] * s[i];
        gr[i] = -2.0 * scale * s[i] * res;
        gs[i] = -2.0 * scale * r[i] * res;
        if (r0) gr[i] += 2.0 * cfg.lambda_prox * (r[i] - (*r0)[i]);
        if (s0) gs[i] += 2.0 * cfg.lambda_prox * (s[i] - (*s0)[i]);
    }
    for (int v = 0; v < d.h; ++v)
        for (int u = 0; u < d.w; ++u) {
            const int ur = (u + 1) % d.w;
            for (int k = 0; k < d.c; ++k) {
                const size_t p = d.idx(v, u, k), q = d.idx(v, ur, k);
                const double wr = cfg.lambda1 * charb_d(r[q] - r[p], cfg.charbonnier_eps);
                const double ws = 2.0 * cfg.lambda2 * (s[q] - s[p]);
                gr[q] += wr;
                gr[p] -= wr;
                gs[q] += ws;
                gs[p] -= ws;
                if (v + 1 < d.h) {
                    const size_t qv = d.idx(v + 1, u, k);
                    const double wrv =
                        cfg.lambda1 * charb_d(r[qv] - r[p], cfg.charbonnier_eps);
                    const double wsv = 2.0 * cfg.lambda2 * (s[qv] - s[p]);
                    gr[qv] += wrv;
                    gr[p] -= wrv;
                    gs[qv] += wsv;
                    gs[p] -= wsv;
                }
            }
        }
}

EnergyTerms eval_with_fit(const Dims& d, const Plane& img, const Plane& r,
                          const Plane& s, const RefineConfig& cfg,
                          const Plane* r0, const Plane* s0, double* scale_out) {
    const double scale = fit_scale(img, r, s);
    if (scale_out) *scale_out = scale;
    return energy(d, img, r, s, scale, cfg, r0, s0);
}

}  // namespace

std::pair<Image, Image> spherical_gradient(const Image& img) {
    Image gh(img.height, img.width, img.channels);
    Image gv(img.height, img.width, img.channels);
    for (int v = 0; v < img.height; ++v)
        for (int u = 0; u < img.width; ++u) {
            const int ur = (u + 1) % img.width;
            for (int k = 0; k < img.channels; ++k) {
                gh.at(v, u, k) = img.at(v, ur, k) - img.at(v, u, k);
                gv.at(v, u, k) =
                    v + 1 < img.height ? img.at(v + 1, u, k) - img.at(v, u, k) : 0.f;
            }
        }
    return {std::move(gh), std::move(gv)};
}

EnergyTerms tv_energy(const Image& img, const Image& reflectance,
                      const Image& shading, double s, const RefineConfig& cfg,
                      const Image* anchor_r, const Image* anchor_s) {
    cfg.validate();
    if (!img.same_dims(reflectance) || !img.same_dims(shading))
        throw std::invalid_argument("tv_energy dimension mismatch");
    const Dims d{img.height, img.width, img.channels};
    const Plane pi = to_plane(img), pr = to_plane(reflectance), ps = to_plane(shading);
    Plane pr0, ps0;
    if (anchor_r) pr0 = to_plane(*anchor_r);
    if (anchor_s) ps0 = to_plane(*anchor_s);
    return energy(d, pi, pr, ps, s, cfg, anchor_r ? &pr0 : nullptr,
                  anchor_s ? &ps0 : nullptr);
}

RefineResult tv_refine(const Image& img, const Image& reflectance0,
                       const Image& shading0, const RefineConfig& cfg) {
    cfg.validate();
    if (!img.same_dims(reflectance0) || !img.same_dims(shading0))
        throw std::invalid_argument("tv_refine dimension mismatch");
    const Dims d{img.height, img.width, img.channels};
    const Plane pi = to_plane(img);
    const Plane r0 = to_plane(reflectance0);
    const Plane s0 = to_plane(shading0);
    Plane r = r0, s = s0;
    Plane gr, gs, rc(d.size()), sc(d.size());

    double scale = 1.0;
    EnergyTerms cur = eval_with_fit(d, pi, r, s, cfg, &r0, &s0, &scale);

    std::vector<TraceRow> trace;
    auto log = [&](int it, const EnergyTerms& e) {
        trace.push_back({it, e.total, e.data, e.tv_r, e.tv_s, e.prox});
    };
    log(0, cur);

    for (int it = 1; it <= cfg.iterations; ++it) {
        if (!std::isfinite(cur.total))
            throw std::runtime_error("tv_refine: non-finite energy at iteration " +
                                     std::to_string(it));
        gradients(d, pi, r, s, scale, cfg, &r0, &s0, gr, gs);
        double step = cfg.learning_rate;
        bool accepted = false;
        for (int half = 0; half <= (cfg.step_halving ? cfg.max_halvings : 0); ++half) {
            parallel_for(0, d.h, [&](int v) {
                for (size_t i = static_cast<size_t>(v) * d.w * d.c,
                            end = i + static_cast<size_t>(d.w) * d.c;
                     i < end; ++i) {
                    rc[i] = std::clamp(r[i] - step * gr[i], 0.0, cfg.r_max);
                    sc[i] = std::max(s[i] - step * gs[i], 0.0);
                }
            });
            double cand_scale;
            const EnergyTerms cand =
                eval_with_fit(d, pi, rc, sc, cfg, &r0, &s0, &cand_scale);
            if (!cfg.step_halving || cand.total <= cur.total) {
                r.swap(rc);
                s.swap(sc);
                cur = cand;
                scale = cand_scale;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        (void)accepted;  // a rejected step leaves the iterate unchanged
        if (it % cfg.log_every == 0 || it == cfg.iterations) log(it, cur);
    }

    RefineResult out;
    out.reflectance = to_image(r, d.h, d.w, d.c);
    out.shading = to_image(s, d.h, d.w, d.c);
    out.trace = std::move(trace);
    return out;
}

double numeric_gradient_check(const Image& img, const Image& reflectance,
                              const Image& shading, const RefineConfig& cfg,
                              int probes, uint64_t seed) {
    cfg.validate();
    const Dims d{img.height, img.width, img.channels};
    const Plane pi = to_plane(img);
    Plane r = to_plane(reflectance), s = to_plane(shading);
    // anchors offset from the probe point so the prox gradient is exercised
    Plane r0 = r, s0 = s;
    for (size_t i = 0; i < r0.size(); ++i) {
        r0[i] += 0.1;
        s0[i] -= 0.1;
    }
    const double scale = fit_scale(pi, r, s);
    Plane gr, gs;
    gradients(d, pi, r, s, scale, cfg, &r0, &s0, gr, gs);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, d.size() - 1);
    std::bernoulli_distribution which(0.5);
    const double h = 1e-5;
    double max_err = 0.0;
    for (int p = 0; p < probes; ++p) {
        const size_t i = pick(rng);
        Plane& x = which(rng) ? r : s;
        const bool is_r = &x == &r;
        const double saved = x[i];
        x[i] = saved + h;
        const double ep = energy(d, pi, r, s, scale, cfg, &r0, &s0).total;
        x[i] = saved - h;
        const double em = energy(d, pi, r, s, scale, cfg, &r0, &s0).total;
        x[i] = saved;
        const double fd = (ep - em) / (2.0 * h);
        const double an = is_r ? gr[i] : gs[i];
        const double err =
            std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1.0});
        max_err = std::max(max_err, err);
    }
    return max_err;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream out;
    out << "iteration,total,data,tv_r,tv_s,prox\n";
    out.precision(12);
    for (const TraceRow& t : trace)
        out << t.iteration << "," << t.total << "," << t.data << "," << t.tv_r
            << "," << t.tv_s << "," << t.prox << "\n";
    return out.str();
}

}  // namespace pano
