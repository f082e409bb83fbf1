#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrc/image.hpp"
#include "rrc/linalg.hpp"
#include "rrc/metrics.hpp"
#include "rrc/parallel.hpp"
#include "rrc/patch.hpp"

namespace rrc {

struct DenoiseConfig {
    double sigma_n = 0.0;  // noise std, intensity units
    double mu = 0.1;       // iterative-regularization step
    double rho = 0.8;      // sigma decay
    double c = 1.0;        // lambda scale
    double eps = 0.2;      // lambda regularizer
    double h = 40.0;       // nonlocal kernel width (per-pixel squared distance)
    GroupingParams grouping;
    int max_iters = 24;
    double tau_stop = 0.001;

    // Threshold policy: true applies the lambda rule per singular value with
    // the componentwise residual scale, false applies one group-level lambda
    // from the sample std of the whole residual vector.
    bool per_component_lambda = true;
    // Reference estimator: 0 = tapered per-column prefix averages,
    // 1 = full-group average in every column (rank-one), 2 = previous
    // estimate's group verbatim.
    int reference_mode = 0;

    void validate() const {
        if (sigma_n < 0.0) throw std::invalid_argument("DenoiseConfig: sigma_n must be >= 0");
        if (mu <= 0.0 || mu > 1.0) throw std::invalid_argument("DenoiseConfig: need 0 < mu <= 1");
        if (rho <= 0.0 || rho > 1.0) throw std::invalid_argument("DenoiseConfig: need 0 < rho <= 1");
        if (c <= 0.0 || eps <= 0.0 || tau_stop <= 0.0)
            throw std::invalid_argument("DenoiseConfig: c, eps and tau_stop must be positive");
        if (h <= 0.0) throw std::invalid_argument("DenoiseConfig: h must be positive");
        if (max_iters < 1) throw std::invalid_argument("DenoiseConfig: max_iters must be >= 1");
        grouping.validate();
    }
};

/// Noise-band parameter table: patch side, (mu, rho, c, m, tau) per band,
/// with L=25, eps=0.2, h=40 throughout and stride = patch_side - 3.
struct StageSchedule {
    struct Band {
        double max_sigma;
        int patch_side;
        double mu, rho, c;
        int group_size;
        double tau;
    };

    static const std::vector<Band>& bands() {
        static const std::vector<Band> table{
            {20.0, 6, 0.1, 0.9, 0.9, 60, 0.001},
            {30.0, 7, 0.1, 0.8, 0.9, 60, 0.001},
            {40.0, 7, 0.1, 0.8, 0.9, 70, 0.0006},
            {50.0, 7, 0.1, 0.8, 1.0, 80, 0.0006},
            {75.0, 8, 0.1, 0.8, 1.0, 90, 0.0005},
            {100.0, 9, 0.1, 0.8, 1.0, 100, 0.002},
        };
        return table;
    }

    /// Band lookup keyed by band_sigma; sigma_n is the noise level the run
    /// actually uses (they differ only under a profile override).
    static DenoiseConfig lookup(double sigma_n, double band_sigma) {
        if (sigma_n < 0.0) throw std::invalid_argument("StageSchedule: sigma_n must be >= 0");
        if (band_sigma <= 0.0) throw std::invalid_argument("StageSchedule: band sigma must be positive");
        const Band* chosen = &bands().back();
        for (const auto& b : bands())
            if (band_sigma <= b.max_sigma) {
                chosen = &b;
                break;
            }
        DenoiseConfig cfg;
        cfg.sigma_n = sigma_n;
        cfg.mu = chosen->mu;
        cfg.rho = chosen->rho;
        cfg.c = chosen->c;
        cfg.tau_stop = chosen->tau;
        cfg.eps = 0.2;
        cfg.h = 40.0;
        cfg.grouping.patch_side = chosen->patch_side;
        cfg.grouping.group_size = chosen->group_size;
        cfg.grouping.window = 25;
        cfg.grouping.stride = chosen->patch_side - 3;
        return cfg;
    }

    static DenoiseConfig lookup(double sigma_n) { return lookup(sigma_n, sigma_n); }
};

/// lambda = c * 2*sqrt(2) * sigma_t^2 / (phi + eps).
inline double adaptive_lambda(double residual_sigma_std, double sigma_n_t, double c, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("adaptive_lambda: eps must be positive");
    const double two_sqrt2 = 2.0 * std::sqrt(2.0);
    return c * two_sqrt2 * sigma_n_t * sigma_n_t / (residual_sigma_std + eps);
}

/// sigma_n^t = rho * sqrt(max(sigma_n^2 - mean((y - x_prev)^2), 0)).
inline double sigma_schedule(double sigma_n, const ImageBuffer& y, const ImageBuffer& x_prev,
                             double rho) {
    require_same_shape(y, x_prev, "sigma_schedule");
    const double rad = sigma_n * sigma_n - mean_sq_diff(y, x_prev);
    return rho * std::sqrt(std::max(rad, 0.0));
}

/// Feedback update y^t = x_hat + mu * (y - y_prev); with mu = 0 it returns
/// x_hat unchanged, so the working image is exactly the previous estimate.
inline ImageBuffer iterative_regularization(const ImageBuffer& x_hat, const ImageBuffer& y,
                                            const ImageBuffer& y_prev, double mu) {
    require_same_shape(x_hat, y, "iterative_regularization");
    require_same_shape(y, y_prev, "iterative_regularization");
    ImageBuffer out(y.rows, y.cols);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = x_hat.data[i] + mu * (y.data[i] - y_prev.data[i]);
    return out;
}

struct IterationRecord {
    int iter = 0;
    double sigma_t = 0.0;
    double mean_lambda = 0.0;
    double rel_change = 0.0;
    double psnr_vs_clean = std::numeric_limits<double>::quiet_NaN();
};
using IterationTrace = std::vector<IterationRecord>;

namespace detail {

inline double sample_std(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(n - 1));
}

// Thresholds for shrinking obs singular values toward ref singular values.
// Per-component mode estimates the clean residual std of component k at patch
// scale, phi_k = sqrt(max((delta_k - psi_k)^2 / m - sigma_t^2, 0)), feeds it
// to the lambda rule and lifts the threshold back to group scale by sqrt(m);
// components whose residual power is explained by noise get a huge lambda and
// snap to the reference, strong residuals keep the observation. Group mode
// uses one lambda from the sample std of the whole residual vector.
inline std::vector<double> rrc_thresholds(const std::vector<double>& delta,
                                          const std::vector<double>& psi, int group_size,
                                          double sigma_t, double c, double eps,
                                          bool per_component) {
    const std::size_t j = delta.size();
    std::vector<double> lam(j);
    const double sqrt_m = std::sqrt(static_cast<double>(group_size));
    if (per_component) {
        for (std::size_t k = 0; k < j; ++k) {
            const double signal_power = delta[k] * delta[k] / static_cast<double>(group_size) -
                                        sigma_t * sigma_t;
            const double phi = std::sqrt(std::max(signal_power, 0.0));
            lam[k] = sqrt_m * adaptive_lambda(phi, sigma_t, c, eps);
        }
    } else {
        std::vector<double> resid(j);
        for (std::size_t k = 0; k < j; ++k) resid[k] = delta[k] - psi[k];
        const double lambda = adaptive_lambda(sample_std(resid), sigma_t, c, eps);
        std::fill(lam.begin(), lam.end(), lambda);
    }
    return lam;
}

// Uniform SVT threshold for the NNM baseline, on the same scale convention.
inline double nnm_threshold(const std::vector<double>& delta, int group_size, double sigma_t,
                            double c, double eps) {
    double mean = 0.0;
    for (double d : delta) mean += d;
    if (!delta.empty()) mean /= static_cast<double>(delta.size());
    const double sqrt_m = std::sqrt(static_cast<double>(group_size));
    return sqrt_m * adaptive_lambda(mean / sqrt_m, sigma_t, c, eps);
}

struct GroupShrinkResult {
    PatchGroup group;
    double lambda_sum = 0.0;
    std::size_t lambda_count = 0;
};

inline GroupShrinkResult shrink_group(const PatchGroup& obs, const std::vector<double>* ref_sigma,
                                      const SvdFactors& f, const std::vector<double>& thresholds) {
    GroupShrinkResult out;
    SvdFactors g = f;
    for (std::size_t k = 0; k < g.sigma.size(); ++k) {
        const double ref = ref_sigma ? (*ref_sigma)[k] : 0.0;
        g.sigma[k] = std::max(soft(f.sigma[k] - ref, thresholds[k]) + ref, 0.0);
        out.lambda_sum += thresholds[k];
    }
    out.lambda_count = g.sigma.size();
    out.group.data = reconstruct(g);
    out.group.coords = obs.coords;
    out.group.patch_side = obs.patch_side;
    out.group.padded = obs.padded;
    return out;
}

}  // namespace detail

namespace detail {

inline std::pair<ImageBuffer, IterationTrace> denoise_pipeline(const ImageBuffer& y,
                                                               const DenoiseConfig& cfg,
                                                               bool use_reference,
                                                               const ImageBuffer* clean) {
    cfg.validate();
    require_finite(y, "denoise");
    if (y.rows < cfg.grouping.patch_side || y.cols < cfg.grouping.patch_side)
        throw std::invalid_argument("denoise: image smaller than the patch size");

    const int ps = cfg.grouping.patch_side;
    const int d = ps * ps;
    const double h_eff = cfg.h * static_cast<double>(d);  // h scales mean per-pixel distance

    ImageBuffer x_hat = y;
    ImageBuffer y_t = y;
    ImageBuffer y_prev = y;
    IterationTrace trace;

    const auto refs = reference_positions(y.rows, y.cols, ps, cfg.grouping.stride);
    constexpr std::size_t kWave = 512;

    for (int t = 1; t <= cfg.max_iters; ++t) {
        y_t = iterative_regularization(x_hat, y, y_prev, cfg.mu);
        y_prev = y_t;

        const double sigma_t = sigma_schedule(cfg.sigma_n, y, x_hat, cfg.rho);

        Aggregator acc(y.rows, y.cols);
        double lambda_sum = 0.0;
        std::size_t lambda_count = 0;
        std::vector<detail::GroupShrinkResult> wave(std::min(kWave, refs.size()));
        for (std::size_t base = 0; base < refs.size(); base += kWave) {
            const std::size_t n = std::min(kWave, refs.size() - base);
            parallel_for(n, [&](std::size_t w) {
                const auto& ref_pos = refs[base + w];
                PatchGroup g = extract_group(y_t, ref_pos, cfg.grouping);
                SvdFactors f = svd_thin(g.data);
                if (use_reference) {
                    PatchGroup est = extract_at(x_hat, g.coords, ps);
                    PatchGroup refg = cfg.reference_mode == 0
                                          ? estimate_reference_group_tapered(est, h_eff)
                                          : (cfg.reference_mode == 1
                                                 ? estimate_reference_group(est, h_eff)
                                                 : est);
                    SvdFactors fr = svd_thin(refg.data);
                    const auto lam = detail::rrc_thresholds(f.sigma, fr.sigma,
                                                            cfg.grouping.group_size, sigma_t,
                                                            cfg.c, cfg.eps,
                                                            cfg.per_component_lambda);
                    wave[w] = detail::shrink_group(g, &fr.sigma, f, lam);
                } else {
                    const double lam = detail::nnm_threshold(f.sigma, cfg.grouping.group_size,
                                                             sigma_t, cfg.c, cfg.eps);
                    std::vector<double> lam_vec(f.sigma.size(), lam);
                    wave[w] = detail::shrink_group(g, nullptr, f, lam_vec);
                }
            });
            for (std::size_t w = 0; w < n; ++w) {
                acc.add(wave[w].group);
                lambda_sum += wave[w].lambda_sum;
                lambda_count += wave[w].lambda_count;
            }
        }
        ImageBuffer x_new = acc.finish();
        for (double v : x_new.data)
            if (!std::isfinite(v))
                throw std::runtime_error("denoise: non-finite estimate at iteration " +
                                         std::to_string(t));

        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x_new.data.size(); ++i) {
            const double dch = x_new.data[i] - x_hat.data[i];
            num += dch * dch;
            den += x_hat.data[i] * x_hat.data[i];
        }
        const double rel = den > 0.0 ? num / den : 0.0;

        IterationRecord rec;
        rec.iter = t;
        rec.sigma_t = sigma_t;
        rec.mean_lambda = lambda_count ? lambda_sum / static_cast<double>(lambda_count) : 0.0;
        rec.rel_change = rel;
        if (clean) rec.psnr_vs_clean = psnr(x_new, *clean);
        trace.push_back(rec);

        x_hat = std::move(x_new);
        if (rel < cfg.tau_stop) break;
    }
    return {std::move(x_hat), std::move(trace)};
}

}  // namespace detail

/// Full iterative rank-residual denoiser. Output is the unclamped estimate;
/// clamping to [0,255] happens only when an image is written to disk.
inline std::pair<ImageBuffer, IterationTrace> denoise(const ImageBuffer& y,
                                                      const DenoiseConfig& cfg,
                                                      const ImageBuffer* clean = nullptr) {
    return detail::denoise_pipeline(y, cfg, true, clean);
}

/// Baseline: identical pipeline with uniform singular value thresholding and
/// the reference machinery disabled.
inline ImageBuffer denoise_nnm(const ImageBuffer& y, const DenoiseConfig& cfg) {
    return detail::denoise_pipeline(y, cfg, false, nullptr).first;
}

struct HistogramTable {
    std::vector<double> edges;        // bins + 1 monotone edges
    std::vector<std::size_t> counts;  // one per bin
    double excess_kurtosis = 0.0;
    std::size_t samples = 0;
};

/// Pooled rank residuals sigma(degraded group) - sigma(clean group at the same
/// coords), binned, plus the excess kurtosis of the pooled sample.
inline HistogramTable rank_residual_histogram(const ImageBuffer& clean, const ImageBuffer& degraded,
                                              const GroupingParams& params, int bins = 64) {
    require_same_shape(clean, degraded, "rank_residual_histogram");
    params.validate();
    if (bins < 1) throw std::invalid_argument("rank_residual_histogram: bins must be >= 1");

    const auto refs = reference_positions(degraded.rows, degraded.cols, params.patch_side,
                                          params.stride);
    std::vector<std::vector<double>> per_ref(refs.size());
    parallel_for(refs.size(), [&](std::size_t i) {
        PatchGroup g = extract_group(degraded, refs[i], params);
        PatchGroup cg = extract_at(clean, g.coords, params.patch_side);
        const auto delta = svd_thin(g.data).sigma;
        const auto psi = svd_thin(cg.data).sigma;
        std::vector<double> gamma(delta.size());
        for (std::size_t k = 0; k < delta.size(); ++k) gamma[k] = delta[k] - psi[k];
        per_ref[i] = std::move(gamma);
    });
    std::vector<double> pooled;
    for (const auto& v : per_ref) pooled.insert(pooled.end(), v.begin(), v.end());

    HistogramTable table;
    table.samples = pooled.size();
    if (pooled.empty()) return table;

    double lo = pooled[0], hi = pooled[0];
    for (double v : pooled) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) hi = lo + 1.0;  // degenerate spike: one wide bin
    table.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        table.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    table.counts.assign(bins, 0);
    for (double v : pooled) {
        int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        b = std::clamp(b, 0, bins - 1);
        ++table.counts[static_cast<std::size_t>(b)];
    }

    double mean = 0.0;
    for (double v : pooled) mean += v;
    mean /= static_cast<double>(pooled.size());
    double m2 = 0.0, m4 = 0.0;
    for (double v : pooled) {
        const double e = v - mean;
        m2 += e * e;
        m4 += e * e * e * e;
    }
    m2 /= static_cast<double>(pooled.size());
    m4 /= static_cast<double>(pooled.size());
    table.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    return table;
}

}  // namespace rrc
