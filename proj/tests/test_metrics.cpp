#include <doctest.h>

#include <cmath>
#include <random>

#include "pano/metrics.hpp"

using namespace pano;

namespace {

Image make(std::initializer_list<float> vals, int h, int w, int c) {
    Image img(h, w, c);
    size_t i = 0;
    for (float v : vals) img.data[i++] = v;
    return img;
}

NormalMap constant_normals(int h, int w, float x, float y, float z) {
    NormalMap nm;
    nm.normals = Image(h, w, 3);
    nm.valid = Mask(h, w, true);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            nm.normals.at(v, u, 0) = x;
            nm.normals.at(v, u, 1) = y;
            nm.normals.at(v, u, 2) = z;
        }
    return nm;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("smse hand value and scale invariance") {
    const Image pred = make({1.f, 0.f}, 1, 2, 1);
    const Image gt = make({1.f, 1.f}, 1, 2, 1);
    CHECK(smse(pred, gt) == doctest::Approx(0.5).epsilon(1e-12));

    // any positive rescale of the prediction is absorbed exactly
    Image scaled = pred;
    for (float& x : scaled.data) x *= 2.f;
    CHECK(smse(scaled, gt) == smse(pred, gt));
    const Image gt2 = make({2.f, 2.f}, 1, 2, 1);
    CHECK(smse(pred, gt2) == doctest::Approx(2.0).epsilon(1e-12));

    std::mt19937_64 rng(91);
    std::uniform_real_distribution<float> val(0.1f, 3.f);
    Image a(4, 8, 3), b(4, 8, 3);
    for (float& x : a.data) x = val(rng);
    for (float& x : b.data) x = val(rng);
    Image a17 = a;
    for (float& x : a17.data) x *= 1.7f;
    CHECK(smse(a17, b) == doctest::Approx(smse(a, b)).epsilon(1e-6));

    CHECK(smse(b, b) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(smse(a, Image(2, 4, 3)), std::invalid_argument);
    CHECK_THROWS_AS(smse(a, b, Mask(4, 8, false)), std::domain_error);
}

TEST_CASE("mae: bounds and hand angles") {
    const auto up = constant_normals(2, 4, 0, 1, 0);
    CHECK(mae_degrees(up, up) == doctest::Approx(0.0).epsilon(1e-9));

    const auto down = constant_normals(2, 4, 0, -1, 0);
    CHECK(mae_degrees(up, down) == doctest::Approx(180.0).epsilon(1e-9));

    // half aligned, half orthogonal -> 45 degrees on average
    NormalMap mixed = up;
    for (int v = 0; v < 2; ++v)
        for (int u = 2; u < 4; ++u) {
            mixed.normals.at(v, u, 0) = 1.f;
            mixed.normals.at(v, u, 1) = 0.f;
        }
    CHECK(mae_degrees(mixed, up) == doctest::Approx(45.0).epsilon(1e-9));

    Mask left(2, 4, false);
    for (int v = 0; v < 2; ++v) left.set(v, 0, true);
    CHECK(mae_degrees(mixed, up, left) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("psnr: hand value, infinity flag, monotonicity") {
    Image gt(2, 4, 1, 0.5f);
    Image pred = gt;
    for (float& x : pred.data) x += 0.1f;
    const Mask all(2, 4, true);
    MetricReport rep = psnr(pred, gt, all, 1.0);
    CHECK(rep.value == doctest::Approx(20.0).epsilon(1e-4));
    CHECK_FALSE(rep.infinite);
    CHECK(rep.pixel_count == 8);
    CHECK(rep.mask_coverage == 1.0);

    rep = psnr(gt, gt, all);
    CHECK(rep.infinite);
    CHECK(std::isinf(rep.value));

    // larger error -> strictly lower psnr
    Image worse = gt;
    for (float& x : worse.data) x += 0.2f;
    CHECK(psnr(worse, gt, all, 1.0).value < psnr(pred, gt, all, 1.0).value);

    // peak defaults to the masked max of gt
    const double dflt = psnr(pred, gt, all).value;
    CHECK(dflt == doctest::Approx(psnr(pred, gt, all, 0.5).value).epsilon(1e-12));

    const Image zeros(2, 4, 1, 0.f);
    CHECK_THROWS_AS(psnr(zeros, zeros, all), std::domain_error);
}

TEST_CASE("reflectance loss: zero at any global rescale, positive otherwise") {
    Image gt(2, 4, 3);
    std::mt19937_64 rng(93);
    std::uniform_real_distribution<float> val(0.25f, 2.f);
    for (float& x : gt.data) x = val(rng);

    CHECK(loss_reflectance(gt, gt) == doctest::Approx(0.0).epsilon(1e-12));
    Image pred3 = gt;
    for (float& x : pred3.data) x *= 2.f;
    CHECK(loss_reflectance(pred3, gt) == doctest::Approx(0.0).epsilon(1e-9));

    Image off = gt;
    off.at(0, 0, 0) += 1.f;
    CHECK(loss_reflectance(off, gt) > 0.0);
    CHECK_THROWS_AS(loss_reflectance(gt, Image(1, 2, 3)), std::invalid_argument);
}

TEST_CASE("normal loss: cosine sum plus l1 gradient difference") {
    // identical constant fields: -pixel_count, no gradient term
    Image n(2, 4, 3);
    for (int v = 0; v < 2; ++v)
        for (int u = 0; u < 4; ++u) n.at(v, u, 1) = 1.f;
    CHECK(loss_normal(n, n) == doctest::Approx(-8.0).epsilon(1e-9));

    // orthogonal constant fields: both terms vanish except cosine = 0
    Image m(2, 4, 3);
    for (int v = 0; v < 2; ++v)
        for (int u = 0; u < 4; ++u) m.at(v, u, 0) = 1.f;
    CHECK(loss_normal(n, m) == doctest::Approx(0.0).epsilon(1e-9));

    // 1x2 hand case: cosines sum to -1, wrapped gradient l1 adds 4
    const Image pred = make({0, 1, 0, 0, 1, 0}, 1, 2, 3);
    const Image gt = make({0, 1, 0, 1, 0, 0}, 1, 2, 3);
    CHECK(loss_normal(pred, gt) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("reports csv shape") {
    MetricReport a{"smse", 0.25, false, 100, 1.0};
    MetricReport b{"psnr", 0.0, true, 50, 0.5};
    const std::string csv = reports_csv({a, b});
    CHECK(csv.rfind("name,value,infinite,pixel_count,mask_coverage\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("psnr") != std::string::npos);
}

}  // TEST_SUITE
