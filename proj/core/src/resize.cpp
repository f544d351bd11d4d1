#include <algorithm>
#include <cmath>

#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"

namespace specshift {

namespace {

struct Tap {
    int lo;
    int hi;
    double frac;
};

// Source taps for every output coordinate along one axis.
std::vector<Tap> axis_taps(int in, int out) {
    std::vector<Tap> taps(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
        const double src = out == 1 ? (in - 1) / 2.0 : static_cast<double>(o) * (in - 1) / (out - 1);
        int lo = static_cast<int>(std::floor(src));
        lo = std::clamp(lo, 0, in - 1);
        const int hi = std::min(lo + 1, in - 1);
        taps[static_cast<std::size_t>(o)] = {lo, hi, src - lo};
    }
    return taps;
}

// Interpolates `channels` interleaved planes of `src` (in_w x in_h).
template <typename Out>
void bilinear(const float* src, int in_w, int in_h, int channels, int out_w, int out_h, Out* dst) {
    const auto xt = axis_taps(in_w, out_w);
    const auto yt = axis_taps(in_h, out_h);
    for (int y = 0; y < out_h; ++y) {
        const auto& ty = yt[static_cast<std::size_t>(y)];
        for (int x = 0; x < out_w; ++x) {
            const auto& tx = xt[static_cast<std::size_t>(x)];
            for (int c = 0; c < channels; ++c) {
                auto px = [&](int sx, int sy) {
                    return static_cast<double>(src[(static_cast<std::size_t>(sy) * in_w + sx) * channels + c]);
                };
                const double top = px(tx.lo, ty.lo) * (1.0 - tx.frac) + px(tx.hi, ty.lo) * tx.frac;
                const double bot = px(tx.lo, ty.hi) * (1.0 - tx.frac) + px(tx.hi, ty.hi) * tx.frac;
                double v = top * (1.0 - ty.frac) + bot * ty.frac;
                // Convex combination, but rounding can step just outside the
                // source range; clamp to the four taps.
                const double lo = std::min({px(tx.lo, ty.lo), px(tx.hi, ty.lo), px(tx.lo, ty.hi), px(tx.hi, ty.hi)});
                const double hi = std::max({px(tx.lo, ty.lo), px(tx.hi, ty.lo), px(tx.lo, ty.hi), px(tx.hi, ty.hi)});
                v = std::clamp(v, lo, hi);
                dst[(static_cast<std::size_t>(y) * out_w + x) * channels + c] = static_cast<Out>(v);
            }
        }
    }
}

void check_dims(int width, int height) {
    if (width <= 0 || height <= 0) throw Error("resize target dimensions must be positive");
}

}  // namespace

AnomalyMap resize_bilinear(const AnomalyMap& map, int width, int height) {
    check_dims(width, height);
    if (map.width <= 0 || map.height <= 0) throw Error("cannot resize an empty map");
    if (map.width == width && map.height == height) return map;
    AnomalyMap out(width, height, 0.0f, map.normalized);
    bilinear(map.data.data(), map.width, map.height, 1, width, height, out.data.data());
    return out;
}

Image resize_bilinear(const Image& img, int width, int height) {
    check_dims(width, height);
    if (img.width <= 0 || img.height <= 0) throw Error("cannot resize an empty image");
    if (img.width == width && img.height == height) return img;
    Image out(width, height, img.channels);
    bilinear(img.data.data(), img.width, img.height, img.channels, width, height, out.data.data());
    return out;
}

PixelMask resize_mask(const PixelMask& mask, int width, int height) {
    check_dims(width, height);
    if (mask.width == width && mask.height == height) return mask;
    std::vector<float> plane(mask.data.begin(), mask.data.end());
    std::vector<float> resized(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    bilinear(plane.data(), mask.width, mask.height, 1, width, height, resized.data());
    PixelMask out(width, height);
    for (std::size_t i = 0; i < resized.size(); ++i) out.data[i] = resized[i] > 0.0f ? 1 : 0;
    return out;
}

}  // namespace specshift
