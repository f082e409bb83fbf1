#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rrc/image.hpp"

namespace rrc {

/// Peak signal-to-noise ratio on the 0..255 scale; +infinity when MSE is zero.
inline double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b, "psnr");
    const double mse = mean_sq_diff(a, b);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace detail {

inline std::vector<double> gaussian_kernel_11() {
    std::vector<double> k(11);
    double total = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double x = i - 5.0;
        k[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
        total += k[i];
    }
    for (double& v : k) v /= total;
    return k;
}

// Separable valid-region filtering with the 11-tap Gaussian.
inline ImageBuffer gaussian_valid(const ImageBuffer& img) {
    static const std::vector<double> k = gaussian_kernel_11();
    const int vr = img.rows - 10, vc = img.cols - 10;
    ImageBuffer tmp(vr, img.cols);
    for (int r = 0; r < vr; ++r)
        for (int c = 0; c < img.cols; ++c) {
            double s = 0.0;
            for (int t = 0; t < 11; ++t) s += k[t] * img.at(r + t, c);
            tmp.at(r, c) = s;
        }
    ImageBuffer out(vr, vc);
    for (int r = 0; r < vr; ++r)
        for (int c = 0; c < vc; ++c) {
            double s = 0.0;
            for (int t = 0; t < 11; ++t) s += k[t] * tmp.at(r, c + t);
            out.at(r, c) = s;
        }
    return out;
}

}  // namespace detail

/// Mean local SSIM with the reference parameterization: 11x11 Gaussian window
/// (sigma 1.5), K1=0.01, K2=0.03, L=255, valid-region windows only.
inline double ssim(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b, "ssim");
    if (a.rows < 11 || a.cols < 11)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

    ImageBuffer aa(a.rows, a.cols), bb(a.rows, a.cols), ab(a.rows, a.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        aa.data[i] = a.data[i] * a.data[i];
        bb.data[i] = b.data[i] * b.data[i];
        ab.data[i] = a.data[i] * b.data[i];
    }
    const ImageBuffer mu_a = detail::gaussian_valid(a);
    const ImageBuffer mu_b = detail::gaussian_valid(b);
    const ImageBuffer m_aa = detail::gaussian_valid(aa);
    const ImageBuffer m_bb = detail::gaussian_valid(bb);
    const ImageBuffer m_ab = detail::gaussian_valid(ab);

    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.data.size(); ++i) {
        const double ma = mu_a.data[i], mb = mu_b.data[i];
        const double va = m_aa.data[i] - ma * ma;
        const double vb = m_bb.data[i] - mb * mb;
        const double cov = m_ab.data[i] - ma * mb;
        acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return acc / static_cast<double>(mu_a.data.size());
}

}  // namespace rrc
