#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pano/image.hpp"

namespace pano {

struct RefineConfig {
    double lambda1 = 0.1;          // l1 (Charbonnier) weight on grad R
    double lambda2 = 10.0;         // l2 weight on grad S
    double lambda_prox = 0.01;     // pull toward the initialization
    double learning_rate = 1e-4;
    int iterations = 1000;
    double charbonnier_eps = 1e-3;
    int log_every = 50;
    double r_max = 4.0;            // projection bound for R
    bool step_halving = true;
    int max_halvings = 5;

    void validate() const;
};

struct EnergyTerms {
    double data = 0.0;
    double tv_r = 0.0;
    double tv_s = 0.0;
    double prox = 0.0;
    double total = 0.0;
};

struct TraceRow {
    int iteration;
    double total, data, tv_r, tv_s, prox;
};

// Forward differences per channel. Horizontal wraps across the azimuth
// seam; the vertical component of the last row is zero (no wrap at poles).
std::pair<Image, Image> spherical_gradient(const Image& img);

// ||I - s*R.S||^2 + lambda1*charb(grad R) + lambda2*||grad S||^2, plus the
// proximity term when anchors are given. charb(x) = sqrt(x^2+eps^2) - eps.
EnergyTerms tv_energy(const Image& img, const Image& reflectance,
                      const Image& shading, double s, const RefineConfig& cfg,
                      const Image* anchor_r = nullptr,
                      const Image* anchor_s = nullptr);

struct RefineResult {
    Image reflectance;
    Image shading;
    std::vector<TraceRow> trace;
};

// Joint gradient descent on (R, S). Each iteration refits the scale s,
// steps both maps simultaneously and projects onto [0, r_max] / [0, inf).
// With step halving the logged energy sequence is non-increasing; a step
// that still raises the energy after max_halvings is rejected.
RefineResult tv_refine(const Image& img, const Image& reflectance0,
                       const Image& shading0, const RefineConfig& cfg);

// Central finite differences (h = 1e-5) against the analytic gradients at
// `probes` random entries of R and S, with s held fixed. Returns the max
// error relative to max(|analytic|, |numeric|, 1).
double numeric_gradient_check(const Image& img, const Image& reflectance,
                              const Image& shading, const RefineConfig& cfg,
                              int probes, uint64_t seed = 1);

std::string trace_csv(const std::vector<TraceRow>& trace);

}  // namespace pano
