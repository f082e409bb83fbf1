#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rrc/image.hpp"

namespace rrc {

/// Deterministic Gaussian stream: mt19937_64 feeding Box-Muller.
/// The generator is pinned here (not std::normal_distribution) so the same
/// seed yields the same noise on every platform and standard library.
class GaussianNoise {
public:
    explicit GaussianNoise(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // 53-bit uniforms in (0,1); +0.5 keeps u1 away from 0 for the log.
        const double u1 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1p-53;
        const double u2 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// y = x + sigma * z, z drawn pixel-by-pixel in row-major order.
inline ImageBuffer add_gaussian_noise(const ImageBuffer& img, double sigma, std::uint64_t seed) {
    GaussianNoise gen(seed);
    ImageBuffer out(img.rows, img.cols);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = img.data[i] + sigma * gen.next();
    return out;
}

}  // namespace rrc
