#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rrc/image.hpp"
#include "rrc/linalg.hpp"

namespace rrc {

struct GroupingParams {
    int patch_side = 7;   // sqrt(d)
    int group_size = 60;  // m
    int window = 25;      // L
    int stride = 4;       // spacing between reference patches

    void validate() const {
        if (patch_side < 1 || group_size < 1 || stride < 1)
            throw std::invalid_argument("GroupingParams: sides, group size and stride must be >= 1");
        if (window < patch_side)
            throw std::invalid_argument("GroupingParams: window smaller than patch");
    }
};

/// d x m matrix of vectorized similar patches; column 0 is the reference patch.
struct PatchGroup {
    Matrix data;                                // d x m, columns are patches
    std::vector<std::pair<int, int>> coords;    // top-left (row, col) per column
    int patch_side = 0;
    bool padded = false;                        // window had fewer than m candidates
};

namespace detail {

inline void copy_patch(const ImageBuffer& img, int r0, int c0, int side, double* dst) {
    for (int c = 0; c < side; ++c)
        for (int r = 0; r < side; ++r) *dst++ = img.at(r0 + r, c0 + c);
}

}  // namespace detail

/// Patches of img at the given top-left coords (column order preserved).
inline PatchGroup extract_at(const ImageBuffer& img, const std::vector<std::pair<int, int>>& coords,
                             int patch_side) {
    PatchGroup g;
    g.patch_side = patch_side;
    g.coords = coords;
    g.data = Matrix(patch_side * patch_side, static_cast<int>(coords.size()));
    for (std::size_t k = 0; k < coords.size(); ++k) {
        const auto [r, c] = coords[k];
        if (r < 0 || c < 0 || r + patch_side > img.rows || c + patch_side > img.cols)
            throw std::invalid_argument("extract_at: patch out of bounds at (" + std::to_string(r) +
                                        "," + std::to_string(c) + ")");
        detail::copy_patch(img, r, c, patch_side, g.data.col(static_cast<int>(k)));
    }
    return g;
}

/// KNN block matching: the group_size patches inside the window centered at
/// ref_pos (clipped at image borders) closest to the reference in squared
/// Euclidean distance. The reference is always column 0; remaining columns are
/// sorted by ascending distance, ties broken by raster order. Windows with too
/// few candidates are padded by cyclic repetition and flagged.
inline PatchGroup extract_group(const ImageBuffer& img, std::pair<int, int> ref_pos,
                                const GroupingParams& params) {
    params.validate();
    const int ps = params.patch_side;
    const auto [rr, rc] = ref_pos;
    if (rr < 0 || rc < 0 || rr + ps > img.rows || rc + ps > img.cols)
        throw std::invalid_argument("extract_group: reference patch out of bounds at (" +
                                    std::to_string(rr) + "," + std::to_string(rc) + ")");

    const int rad = (params.window - 1) / 2;
    // Candidate top-left offsets keeping the whole patch inside the (clipped) window.
    const int r_lo = std::max(rr - rad, 0);
    const int r_hi = std::min({rr + rad - ps + 1, img.rows - ps});
    const int c_lo = std::max(rc - rad, 0);
    const int c_hi = std::min({rc + rad - ps + 1, img.cols - ps});

    std::vector<double> ref(static_cast<std::size_t>(ps) * ps);
    detail::copy_patch(img, rr, rc, ps, ref.data());

    struct Cand {
        double dist;
        int r, c;
    };
    std::vector<Cand> cands;
    cands.reserve(static_cast<std::size_t>(std::max(r_hi - r_lo + 1, 0)) *
                  static_cast<std::size_t>(std::max(c_hi - c_lo + 1, 0)));
    std::vector<double> buf(ref.size());
    for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
            if (r == rr && c == rc) continue;
            detail::copy_patch(img, r, c, ps, buf.data());
            double dist = 0.0;
            for (std::size_t i = 0; i < buf.size(); ++i) {
                const double dv = buf[i] - ref[i];
                dist += dv * dv;
            }
            cands.push_back({dist, r, c});
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.r != b.r) return a.r < b.r;
        return a.c < b.c;
    });

    const int m = params.group_size;
    PatchGroup g;
    g.patch_side = ps;
    g.coords.reserve(m);
    g.coords.emplace_back(rr, rc);
    const int avail = static_cast<int>(cands.size()) + 1;
    if (avail < m) g.padded = true;
    for (int k = 1; k < m; ++k) {
        const int idx = (k - 1) % std::max(avail - 1, 1);
        if (cands.empty())
            g.coords.emplace_back(rr, rc);  // lone patch: repeat the reference
        else
            g.coords.emplace_back(cands[idx].r, cands[idx].c);
    }
    g.data = Matrix(ps * ps, m);
    for (int k = 0; k < m; ++k)
        detail::copy_patch(img, g.coords[k].first, g.coords[k].second, ps, g.data.col(k));
    return g;
}

/// Nonlocal-means estimate of the clean group: every output column is the
/// weighted average of the input columns, weights exp(-||x0 - xk||^2 / h)
/// anchored on the reference column and normalized to sum to one.
inline PatchGroup estimate_reference_group(const PatchGroup& est, double h) {
    if (h <= 0.0) throw std::invalid_argument("estimate_reference_group: h must be positive");
    const int d = est.data.rows();
    const int m = est.data.cols();
    if (m < 1) throw std::invalid_argument("estimate_reference_group: empty group");

    const double* ref = est.data.col(0);
    std::vector<double> w(m);
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
        const double* xk = est.data.col(k);
        double dist = 0.0;
        for (int i = 0; i < d; ++i) {
            const double dv = ref[i] - xk[i];
            dist += dv * dv;
        }
        w[k] = std::exp(-dist / h);
        total += w[k];
    }
    std::vector<double> avg(d, 0.0);
    for (int k = 0; k < m; ++k) {
        const double wk = w[k] / total;
        const double* xk = est.data.col(k);
        for (int i = 0; i < d; ++i) avg[i] += wk * xk[i];
    }
    PatchGroup out;
    out.patch_side = est.patch_side;
    out.coords = est.coords;
    out.padded = est.padded;
    out.data = Matrix(d, m);
    for (int k = 0; k < m; ++k) std::copy(avg.begin(), avg.end(), out.data.col(k));
    return out;
}

/// Per-column prefix form of the reference estimate: output column j averages
/// only the m-j+1 closest patches (input columns are distance-ordered), with
/// the weights renormalized over each prefix. Column 1 is the full nonlocal
/// average, column m the reference patch itself, so the reference keeps a
/// full spectrum instead of collapsing to rank one.
inline PatchGroup estimate_reference_group_tapered(const PatchGroup& est, double h) {
    if (h <= 0.0) throw std::invalid_argument("estimate_reference_group_tapered: h must be positive");
    const int d = est.data.rows();
    const int m = est.data.cols();
    if (m < 1) throw std::invalid_argument("estimate_reference_group_tapered: empty group");

    const double* ref = est.data.col(0);
    std::vector<double> w(m);
    for (int k = 0; k < m; ++k) {
        const double* xk = est.data.col(k);
        double dist = 0.0;
        for (int i = 0; i < d; ++i) {
            const double dv = ref[i] - xk[i];
            dist += dv * dv;
        }
        w[k] = std::exp(-dist / h);
    }
    // prefix_num[len] = sum of w_k * x_k over the len closest patches.
    std::vector<double> prefix_num(static_cast<std::size_t>(m) * d, 0.0);
    std::vector<double> prefix_den(m, 0.0);
    double den = 0.0;
    for (int len = 1; len <= m; ++len) {
        const double* xk = est.data.col(len - 1);
        double* acc = prefix_num.data() + static_cast<std::size_t>(len - 1) * d;
        if (len > 1) {
            const double* prev = prefix_num.data() + static_cast<std::size_t>(len - 2) * d;
            for (int i = 0; i < d; ++i) acc[i] = prev[i];
        }
        for (int i = 0; i < d; ++i) acc[i] += w[len - 1] * xk[i];
        den += w[len - 1];
        prefix_den[len - 1] = den;
    }
    PatchGroup out;
    out.patch_side = est.patch_side;
    out.coords = est.coords;
    out.padded = est.padded;
    out.data = Matrix(d, m);
    for (int j = 0; j < m; ++j) {
        const int len = m - j;
        const double* acc = prefix_num.data() + static_cast<std::size_t>(len - 1) * d;
        double* oc = out.data.col(j);
        const double inv = 1.0 / prefix_den[len - 1];
        for (int i = 0; i < d; ++i) oc[i] = acc[i] * inv;
    }
    return out;
}

/// Incremental mean-of-contributions accumulator. Feeding groups in a fixed
/// order (group index, then column index) keeps results bit-reproducible
/// regardless of how the groups were computed.
class Aggregator {
public:
    Aggregator(int rows, int cols)
        : sum_(rows, cols, 0.0), count_(static_cast<std::size_t>(rows) * cols, 0) {}

    void add(const PatchGroup& g) {
        const int ps = g.patch_side;
        const int rows = sum_.rows, cols = sum_.cols;
        for (std::size_t k = 0; k < g.coords.size(); ++k) {
            const auto [r0, c0] = g.coords[k];
            if (r0 < 0 || c0 < 0 || r0 + ps > rows || c0 + ps > cols)
                throw std::invalid_argument("aggregate: patch out of bounds at (" +
                                            std::to_string(r0) + "," + std::to_string(c0) + ")");
            const double* col = g.data.col(static_cast<int>(k));
            for (int c = 0; c < ps; ++c)
                for (int r = 0; r < ps; ++r) {
                    sum_.at(r0 + r, c0 + c) += *col++;
                    ++count_[static_cast<std::size_t>(r0 + r) * cols + (c0 + c)];
                }
        }
    }

    /// Raw sums and per-pixel coverage, for solvers that need them unscaled.
    const ImageBuffer& sums() const { return sum_; }
    const std::vector<std::uint32_t>& counts() const { return count_; }

    ImageBuffer finish() const {
        ImageBuffer out = sum_;
        for (int r = 0; r < out.rows; ++r)
            for (int c = 0; c < out.cols; ++c) {
                const std::uint32_t n = count_[static_cast<std::size_t>(r) * out.cols + c];
                if (n == 0)
                    throw std::runtime_error("aggregate: uncovered pixel at (" + std::to_string(r) +
                                             "," + std::to_string(c) + ")");
                out.at(r, c) /= static_cast<double>(n);
            }
        return out;
    }

private:
    ImageBuffer sum_;
    std::vector<std::uint32_t> count_;
};

/// Mean-of-contributions aggregation in group order then column order.
inline ImageBuffer aggregate(const std::vector<PatchGroup>& groups, int rows, int cols) {
    Aggregator acc(rows, cols);
    for (const auto& g : groups) acc.add(g);
    return acc.finish();
}

/// Reference top-left positions on a stride grid, with the last row/column
/// clamped to the border so coverage is total.
inline std::vector<std::pair<int, int>> reference_positions(int rows, int cols, int patch_side,
                                                            int stride) {
    if (rows < patch_side || cols < patch_side)
        throw std::invalid_argument("reference_positions: image smaller than patch");
    auto axis = [&](int n) {
        std::vector<int> pos;
        const int last = n - patch_side;
        for (int p = 0; p < last; p += stride) pos.push_back(p);
        pos.push_back(last);
        return pos;
    };
    std::vector<std::pair<int, int>> out;
    const auto rs = axis(rows), cs = axis(cols);
    out.reserve(rs.size() * cs.size());
    for (int r : rs)
        for (int c : cs) out.emplace_back(r, c);
    return out;
}

}  // namespace rrc
