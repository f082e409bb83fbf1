// Scratch harness for threshold-policy measurements; not part of the build
// users see. Invoke: calibrate <image.pgm> <sigma> [seed]
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "rrc/denoise.hpp"
#include "rrc/io.hpp"
#include "rrc/metrics.hpp"
#include "rrc/noise.hpp"

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: calibrate <image.pgm> <sigma> [seed]\n");
        return 1;
    }
    const std::string path = argv[1];
    const double sigma = std::atof(argv[2]);
    const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

    rrc::ImageBuffer clean = rrc::load_image(path);
    rrc::ImageBuffer noisy = rrc::quantize_to_byte(rrc::add_gaussian_noise(clean, sigma, seed));
    std::printf("noisy psnr %.2f  (%dx%d, sigma %.0f)\n", rrc::psnr(noisy, clean), clean.rows,
                clean.cols, sigma);

    auto run = [&](const char* tag, bool per_comp, int ref_mode, double h_scale, int max_it = 0) {
        rrc::DenoiseConfig cfg = rrc::StageSchedule::lookup(sigma);
        cfg.per_component_lambda = per_comp;
        cfg.reference_mode = ref_mode;
        cfg.h *= h_scale;
        if (max_it) { cfg.max_iters = max_it; cfg.tau_stop = 1e-12; }
        const auto t0 = std::chrono::steady_clock::now();
        auto [out, trace] = rrc::denoise(noisy, cfg, &clean);
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-28s psnr %.3f ssim %.4f iters %zu  (%.1fs)\n", tag, rrc::psnr(out, clean),
                    rrc::ssim(out, clean), trace.size(), dt);
        for (const auto& r : trace)
            std::printf("    it %2d sigma_t %7.2f mean_lambda %10.2f rel %.6f psnr %.2f\n", r.iter,
                        r.sigma_t, r.mean_lambda, r.rel_change, r.psnr_vs_clean);
    };

    const int ps = rrc::StageSchedule::lookup(sigma).grouping.patch_side;
    const double dd = ps * ps;
    run("taper h=40/pix", true, 0, 1.0, 8);

    {
        rrc::DenoiseConfig cfg = rrc::StageSchedule::lookup(sigma);
        const auto t0 = std::chrono::steady_clock::now();
        auto out = rrc::denoise_nnm(noisy, cfg);
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%-28s psnr %.3f ssim %.4f (%.1fs)\n", "nnm baseline", rrc::psnr(out, clean),
                    rrc::ssim(out, clean), dt);
    }
    return 0;
}
