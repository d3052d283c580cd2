#include <doctest.h>

#include <cmath>
#include <random>

#include "pano/metrics.hpp"
#include "pano/refine.hpp"
#include "pano/render.hpp"

using namespace pano;

namespace {

Image random_image(int h, int w, int c, float lo, float hi, uint64_t seed) {
    Image img(h, w, c);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> val(lo, hi);
    for (float& x : img.data) x = val(rng);
    return img;
}

}  // namespace

TEST_SUITE("refine") {

TEST_CASE("spherical gradient: wrap, last-row convention, constants") {
    Image img(2, 4, 1);
    for (int v = 0; v < 2; ++v)
        for (int u = 0; u < 4; ++u) img.at(v, u) = static_cast<float>(u);
    const auto [gh, gv] = spherical_gradient(img);
    CHECK(gh.at(0, 0) == 1.f);
    CHECK(gh.at(0, 2) == 1.f);
    CHECK(gh.at(0, 3) == -3.f);  // wraps back to column 0
    CHECK(gv.at(0, 1) == 0.f);   // rows identical
    CHECK(gv.at(1, 1) == 0.f);   // last row has no vertical diff

    const Image c(3, 6, 2, 1.25f);
    const auto [ch, cv] = spherical_gradient(c);
    for (float x : ch.data) CHECK(x == 0.f);
    for (float x : cv.data) CHECK(x == 0.f);
}

TEST_CASE("energy of a tiny hand-computed instance") {
    Image img(1, 2, 1), r(1, 2, 1), s(1, 2, 1);
    img.at(0, 0) = 1.f;
    img.at(0, 1) = 1.f;
    r.at(0, 0) = 1.f;
    r.at(0, 1) = 2.f;
    s.at(0, 0) = 1.f;
    s.at(0, 1) = 1.f;
    RefineConfig cfg;
    cfg.lambda1 = 1.0;
    cfg.lambda2 = 0.0;
    cfg.charbonnier_eps = 1e-9;
    // data (1-2)^2 = 1; |grad R| = 1 across both wrapped diffs = 2
    const EnergyTerms e = tv_energy(img, r, s, 1.0, cfg);
    CHECK(e.data == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.tv_r == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(e.tv_s == 0.0);
    CHECK(e.prox == 0.0);
    CHECK(e.total == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("energy is zero on an exact smooth factorization") {
    const Image r(4, 8, 3, 0.5f);
    const Image s(4, 8, 3, 2.0f);
    const Image img = reconstruct_image(r, s, 1.0);
    const EnergyTerms e = tv_energy(img, r, s, 1.0, RefineConfig{}, &r, &s);
    CHECK(e.total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("with all penalties off the energy is the data SSE") {
    const Image img = random_image(4, 8, 1, 0.f, 2.f, 31);
    const Image r = random_image(4, 8, 1, 0.1f, 1.f, 32);
    const Image s = random_image(4, 8, 1, 0.5f, 3.f, 33);
    RefineConfig cfg;
    cfg.lambda1 = cfg.lambda2 = cfg.lambda_prox = 0.0;
    const double scale = 1.3;
    double sse = 0.0;
    for (size_t i = 0; i < img.data.size(); ++i) {
        const double res = img.data[i] - scale * r.data[i] * s.data[i];
        sse += res * res;
    }
    const EnergyTerms e = tv_energy(img, r, s, scale, cfg, &r, &s);
    CHECK(e.total == doctest::Approx(sse).epsilon(1e-12));
    CHECK_THROWS_AS(tv_energy(img, Image(2, 4, 1), s, 1.0, cfg),
                    std::invalid_argument);
}

TEST_CASE("analytic gradients match finite differences") {
    const Image img = random_image(4, 8, 3, 0.2f, 2.f, 41);
    const Image r = random_image(4, 8, 3, 0.2f, 1.5f, 42);
    const Image s = random_image(4, 8, 3, 0.5f, 3.f, 43);
    CHECK(numeric_gradient_check(img, r, s, RefineConfig{}, 200, 7) < 1e-4);

    // with the quadratic data term alone, central differences are exact
    RefineConfig data_only;
    data_only.lambda1 = data_only.lambda2 = data_only.lambda_prox = 0.0;
    CHECK(numeric_gradient_check(img, r, s, data_only, 200, 7) < 1e-6);
}

TEST_CASE("an exact constant factorization is a fixed point") {
    const Image r0(4, 8, 1, 0.5f);
    const Image s0(4, 8, 1, 2.0f);
    const Image img = reconstruct_image(r0, s0, 1.0);
    RefineConfig cfg;
    cfg.iterations = 25;
    const RefineResult res = tv_refine(img, r0, s0, cfg);
    for (size_t i = 0; i < r0.data.size(); ++i) {
        CHECK(res.reflectance.data[i] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(res.shading.data[i] == doctest::Approx(2.0).epsilon(1e-9));
    }
    for (const TraceRow& t : res.trace) CHECK(t.total < 1e-12);
}

TEST_CASE("zero learning rate leaves the iterates untouched") {
    const Image img = random_image(4, 8, 1, 0.f, 2.f, 51);
    const Image r0 = random_image(4, 8, 1, 0.1f, 1.f, 52);
    const Image s0 = random_image(4, 8, 1, 0.5f, 3.f, 53);
    RefineConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.iterations = 5;
    const RefineResult res = tv_refine(img, r0, s0, cfg);
    CHECK(res.reflectance.data == r0.data);
    CHECK(res.shading.data == s0.data);
}

TEST_CASE("logged energy is non-increasing and iterates stay feasible") {
    const Image img = random_image(8, 16, 3, 0.2f, 3.f, 61);
    const Image r0 = random_image(8, 16, 3, 0.1f, 1.2f, 62);
    const Image s0 = random_image(8, 16, 3, 0.5f, 3.f, 63);
    RefineConfig cfg;
    cfg.iterations = 120;
    cfg.log_every = 10;
    const RefineResult res = tv_refine(img, r0, s0, cfg);
    REQUIRE(res.trace.size() >= 2);
    CHECK(res.trace.front().iteration == 0);
    CHECK(res.trace.back().iteration == 120);
    for (size_t i = 1; i < res.trace.size(); ++i)
        CHECK(res.trace[i].total <= res.trace[i - 1].total + 1e-12);
    for (float x : res.reflectance.data) {
        CHECK(x >= 0.f);
        CHECK(x <= static_cast<float>(cfg.r_max));
    }
    for (float x : res.shading.data) CHECK(x >= 0.f);
}

TEST_CASE("data term is invariant under a joint (aR, S/a) rescale") {
    const Image img = random_image(8, 16, 1, 0.5f, 3.f, 71);
    Image r = random_image(8, 16, 1, 0.3f, 1.2f, 72);
    Image s = random_image(8, 16, 1, 1.f, 3.f, 73);
    RefineConfig cfg;
    cfg.lambda1 = cfg.lambda2 = cfg.lambda_prox = 0.0;

    const double base = tv_energy(img, r, s, 1.3, cfg).total;
    Image r2 = r, s2 = s;
    for (float& x : r2.data) x *= 2.f;   // exact in binary float
    for (float& x : s2.data) x *= 0.5f;
    CHECK(tv_energy(img, r2, s2, 1.3, cfg).total ==
          doctest::Approx(base).epsilon(1e-12));

    // the reflectance smoothness term is (near-)homogeneous of degree one
    RefineConfig tv_only;
    tv_only.lambda1 = 1.0;
    tv_only.lambda2 = tv_only.lambda_prox = 0.0;
    tv_only.charbonnier_eps = 1e-9;
    const double tv1 = tv_energy(img, r, s, 0.0, tv_only).tv_r;
    const double tv2 = tv_energy(img, r2, s2, 0.0, tv_only).tv_r;
    CHECK(tv2 == doctest::Approx(2.0 * tv1).epsilon(1e-5));
}

TEST_CASE("refinement denoises a piecewise-constant reflectance") {
    const int H = 24, W = 48;
    Image rstar(H, W, 1);
    Image sstar(H, W, 1);
    for (int v = 0; v < H; ++v)
        for (int u = 0; u < W; ++u) {
            rstar.at(v, u) = u < W / 2 ? 0.4f : 0.8f;
            sstar.at(v, u) = static_cast<float>(
                2.5 + 0.5 * std::sin(2.0 * kPi * v / H));
        }
    const Image img = reconstruct_image(rstar, sstar, 1.0);

    std::mt19937_64 rng(81);
    std::uniform_real_distribution<float> noise(-0.05f, 0.05f);
    Image r0 = rstar;
    for (float& x : r0.data) x *= 1.f + noise(rng);

    RefineConfig cfg;
    cfg.iterations = 300;
    const RefineResult res = tv_refine(img, r0, sstar, cfg);
    CHECK(smse(res.reflectance, rstar) < smse(r0, rstar));
    CHECK(res.trace.back().total < res.trace.front().total);
}

TEST_CASE("trace csv has a header and one row per log point") {
    std::vector<TraceRow> rows{{0, 1, 1, 0, 0, 0}, {10, 0.5, 0.5, 0, 0, 0}};
    const std::string csv = trace_csv(rows);
    CHECK(csv.rfind("iteration,total,data,tv_r,tv_s,prox\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("config validation") {
    RefineConfig cfg;
    cfg.lambda1 = -1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.charbonnier_eps = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

}  // TEST_SUITE
