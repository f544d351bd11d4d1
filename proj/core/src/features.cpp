#include <algorithm>
#include <cmath>

#include "specshift/detector.hpp"
#include "specshift/error.hpp"

namespace specshift {

int descriptor_dimension(const FeatureConfig& cfg, int channels) {
    return 2 * channels + cfg.hist_bins;
}

int feature_dimension(const FeatureConfig& cfg, int channels) {
    return descriptor_dimension(cfg, channels) + 2;
}

PatchGridShape patch_grid(int width, int height, const FeatureConfig& cfg) {
    if (cfg.stride < 1) throw Error("stride must be at least 1");
    if (cfg.patch_size < 1 || cfg.patch_size > width || cfg.patch_size > height) {
        throw Error("patch size " + std::to_string(cfg.patch_size) + " does not fit a " + std::to_string(width) + "x" +
                    std::to_string(height) + " image");
    }
    return {(width - cfg.patch_size) / cfg.stride + 1, (height - cfg.patch_size) / cfg.stride + 1};
}

std::vector<PatchFeature> extract_patches(const Image& img, const FeatureConfig& cfg) {
    require_valid(img, "extract_patches");
    if (cfg.hist_bins < 1) throw Error("hist_bins must be at least 1");
    const auto grid = patch_grid(img.width, img.height, cfg);
    const int w = img.width;
    const int h = img.height;
    const int ch = img.channels;

    // Gradient magnitude of the channel-mean intensity, central differences
    // with replicated borders.
    std::vector<float> luma(img.pixel_count());
    for (std::size_t p = 0; p < luma.size(); ++p) {
        float s = 0.0f;
        for (int c = 0; c < ch; ++c) s += img.data[p * ch + c];
        luma[p] = s / static_cast<float>(ch);
    }
    std::vector<float> grad(luma.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto L = [&](int xx, int yy) {
                return luma[static_cast<std::size_t>(std::clamp(yy, 0, h - 1)) * w + std::clamp(xx, 0, w - 1)];
            };
            const float gx = 0.5f * (L(x + 1, y) - L(x - 1, y));
            const float gy = 0.5f * (L(x, y + 1) - L(x, y - 1));
            grad[static_cast<std::size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
        }
    }

    const int dim = descriptor_dimension(cfg, ch);
    const int p = cfg.patch_size;
    const double n = static_cast<double>(p) * p;
    std::vector<PatchFeature> out;
    out.reserve(static_cast<std::size_t>(grid.cols) * static_cast<std::size_t>(grid.rows));
    std::vector<double> sum(static_cast<std::size_t>(ch)), sum2(static_cast<std::size_t>(ch));
    std::vector<double> hist(static_cast<std::size_t>(cfg.hist_bins));
    for (int gy = 0; gy < grid.rows; ++gy) {
        for (int gx = 0; gx < grid.cols; ++gx) {
            const int x0 = gx * cfg.stride;
            const int y0 = gy * cfg.stride;
            std::fill(sum.begin(), sum.end(), 0.0);
            std::fill(sum2.begin(), sum2.end(), 0.0);
            std::fill(hist.begin(), hist.end(), 0.0);
            for (int y = y0; y < y0 + p; ++y) {
                for (int x = x0; x < x0 + p; ++x) {
                    const auto idx = static_cast<std::size_t>(y) * w + x;
                    for (int c = 0; c < ch; ++c) {
                        const double v = img.data[idx * ch + c];
                        sum[static_cast<std::size_t>(c)] += v;
                    }
                    int bin = static_cast<int>(grad[idx] / cfg.hist_max * cfg.hist_bins);
                    bin = std::clamp(bin, 0, cfg.hist_bins - 1);
                    hist[static_cast<std::size_t>(bin)] += 1.0;
                }
            }
            PatchFeature f;
            f.descriptor.resize(static_cast<std::size_t>(dim));
            f.center_x = static_cast<float>(x0 + (p - 1) / 2.0);
            f.center_y = static_cast<float>(y0 + (p - 1) / 2.0);
            std::size_t k = 0;
            for (int c = 0; c < ch; ++c) f.descriptor[k++] = static_cast<float>(sum[static_cast<std::size_t>(c)] / n);
            // Second pass for the deviation so flat patches give exactly zero.
            for (int y = y0; y < y0 + p; ++y) {
                for (int x = x0; x < x0 + p; ++x) {
                    const auto idx = static_cast<std::size_t>(y) * w + x;
                    for (int c = 0; c < ch; ++c) {
                        const double d = img.data[idx * ch + c] - sum[static_cast<std::size_t>(c)] / n;
                        sum2[static_cast<std::size_t>(c)] += d * d;
                    }
                }
            }
            for (int c = 0; c < ch; ++c) f.descriptor[k++] = static_cast<float>(std::sqrt(sum2[static_cast<std::size_t>(c)] / n));
            for (double b : hist) f.descriptor[k++] = static_cast<float>(cfg.hist_weight * b / n);
            out.push_back(std::move(f));
        }
    }
    return out;
}

}  // namespace specshift
