#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrc {

/// Single-channel raster, row-major doubles on the nominal 0..255 intensity scale.
struct ImageBuffer {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    ImageBuffer() = default;
    ImageBuffer(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const ImageBuffer& o) const { return rows == o.rows && cols == o.cols; }
};

inline void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* where) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(where) + ": shape mismatch (" +
                                    std::to_string(a.rows) + "x" + std::to_string(a.cols) + " vs " +
                                    std::to_string(b.rows) + "x" + std::to_string(b.cols) + ")");
}

inline void require_finite(const ImageBuffer& img, const char* where) {
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c)
            if (!std::isfinite(img.at(r, c)))
                throw std::invalid_argument(std::string(where) + ": non-finite pixel at (" +
                                            std::to_string(r) + "," + std::to_string(c) + ")");
}

/// Per-pixel mean of squared differences.
inline double mean_sq_diff(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b, "mean_sq_diff");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return a.data.empty() ? 0.0 : acc / static_cast<double>(a.data.size());
}

inline ImageBuffer crop(const ImageBuffer& img, int r0, int c0, int rows, int cols) {
    if (r0 < 0 || c0 < 0 || r0 + rows > img.rows || c0 + cols > img.cols)
        throw std::invalid_argument("crop: region out of bounds");
    ImageBuffer out(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out.at(r, c) = img.at(r0 + r, c0 + c);
    return out;
}

/// Round-and-clamp to the 8-bit range; used when materializing to files.
inline ImageBuffer quantize_to_byte(const ImageBuffer& img) {
    ImageBuffer out(img.rows, img.cols);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        double v = std::nearbyint(img.data[i]);
        if (v < 0.0) v = 0.0;
        if (v > 255.0) v = 255.0;
        out.data[i] = v;
    }
    return out;
}

}  // namespace rrc
