#include "pano/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pano/refine.hpp"
#include "pano/render.hpp"

namespace pano {

double smse(const Image& pred, const Image& gt, const Mask& mask) {
    if (!pred.same_dims(gt))
        throw std::invalid_argument("smse dimension mismatch");
    const double s = least_squares_scale(pred, gt, mask);
    double sum = 0.0;
    size_t n = 0;
    for (int v = 0; v < pred.height; ++v)
        for (int u = 0; u < pred.width; ++u) {
            if (!mask.at(v, u)) continue;
            for (int k = 0; k < pred.channels; ++k) {
                const double e = s * pred.at(v, u, k) - gt.at(v, u, k);
                sum += e * e;
                ++n;
            }
        }
    if (n == 0) throw std::domain_error("smse: empty mask");
    return sum / n;
}

double smse(const Image& pred, const Image& gt) {
    return smse(pred, gt, Mask(pred.height, pred.width, true));
}

double mae_degrees(const NormalMap& pred, const NormalMap& gt, const Mask& mask) {
    const Image& a = pred.normals;
    const Image& b = gt.normals;
    if (!a.same_dims(b) || a.channels != 3)
        throw std::invalid_argument("mae dimension mismatch");
    double sum = 0.0;
    size_t n = 0;
    for (int v = 0; v < a.height; ++v)
        for (int u = 0; u < a.width; ++u) {
            if (!mask.at(v, u)) continue;
            double dot = 0.0;
            for (int k = 0; k < 3; ++k)
                dot += static_cast<double>(a.at(v, u, k)) * b.at(v, u, k);
            sum += std::acos(std::clamp(dot, -1.0, 1.0));
            ++n;
        }
    if (n == 0) throw std::domain_error("mae: empty mask");
    return deg_from_rad(sum / n);
}

double mae_degrees(const NormalMap& pred, const NormalMap& gt) {
    return mae_degrees(pred, gt, Mask(pred.normals.height, pred.normals.width, true));
}

MetricReport psnr(const Image& pred, const Image& gt, const Mask& mask,
                  double peak) {
    if (!pred.same_dims(gt))
        throw std::invalid_argument("psnr dimension mismatch");
    double mse = 0.0, gmax = 0.0;
    size_t n = 0;
    for (int v = 0; v < pred.height; ++v)
        for (int u = 0; u < pred.width; ++u) {
            if (!mask.at(v, u)) continue;
            for (int k = 0; k < pred.channels; ++k) {
                const double e = pred.at(v, u, k) - gt.at(v, u, k);
                mse += e * e;
                gmax = std::max(gmax, static_cast<double>(gt.at(v, u, k)));
                ++n;
            }
        }
    if (n == 0) throw std::domain_error("psnr: empty mask");
    mse /= n;
    if (peak <= 0.0) peak = gmax;
    if (!(peak > 0.0)) throw std::domain_error("psnr: non-positive peak");
    MetricReport rep;
    rep.name = "psnr";
    rep.pixel_count = n / pred.channels;
    rep.mask_coverage = static_cast<double>(mask.count()) / mask.data.size();
    if (mse == 0.0) {
        rep.infinite = true;
        rep.value = std::numeric_limits<double>::infinity();
    } else {
        rep.value = 10.0 * std::log10(peak * peak / mse);
    }
    return rep;
}

namespace {

double l1_grad_diff(const Image& a, const Image& b, double sa) {
    const auto [ah, av] = spherical_gradient(a);
    const auto [bh, bv] = spherical_gradient(b);
    double sum = 0.0;
    for (size_t i = 0; i < ah.data.size(); ++i)
        sum += std::abs(sa * ah.data[i] - bh.data[i]) +
               std::abs(sa * av.data[i] - bv.data[i]);
    return sum;
}

}  // namespace

double loss_reflectance(const Image& pred, const Image& gt) {
    if (!pred.same_dims(gt))
        throw std::invalid_argument("loss_reflectance dimension mismatch");
    const double s = least_squares_scale(pred, gt);
    double l2 = 0.0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        const double e = s * pred.data[i] - gt.data[i];
        l2 += e * e;
    }
    return l2 + l1_grad_diff(pred, gt, s);
}

double loss_normal(const Image& pred, const Image& gt) {
    if (!pred.same_dims(gt) || pred.channels != 3)
        throw std::invalid_argument("loss_normal dimension mismatch");
    double cosine = 0.0;
    for (int v = 0; v < pred.height; ++v)
        for (int u = 0; u < pred.width; ++u) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k)
                dot += static_cast<double>(pred.at(v, u, k)) * gt.at(v, u, k);
            cosine -= dot;
        }
    return cosine + l1_grad_diff(pred, gt, 1.0);
}

std::string reports_csv(const std::vector<MetricReport>& reports) {
    std::ostringstream out;
    out << "name,value,infinite,pixel_count,mask_coverage\n";
    out.precision(10);
    for (const MetricReport& r : reports)
        out << r.name << "," << r.value << "," << (r.infinite ? 1 : 0) << ","
            << r.pixel_count << "," << r.mask_coverage << "\n";
    return out.str();
}

}  // namespace pano
