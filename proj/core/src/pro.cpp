#include <algorithm>
#include <cmath>
#include <numeric>

#include "specshift/error.hpp"
#include "specshift/metrics.hpp"

namespace specshift {

std::pair<std::vector<int>, int> label_components(const PixelMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8) throw Error("connectivity must be 4 or 8");
    const int w = mask.width;
    const int h = mask.height;
    std::vector<int> labels(mask.pixel_count(), -1);
    int count = 0;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < mask.pixel_count(); ++start) {
        if (!mask.data[start] || labels[start] >= 0) continue;
        labels[start] = count;
        stack.push_back(start);
        while (!stack.empty()) {
            const auto idx = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(idx % w);
            const int y = static_cast<int>(idx / w);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (connectivity == 4 && dx != 0 && dy != 0) continue;
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const auto n = static_cast<std::size_t>(ny) * w + nx;
                    if (mask.data[n] && labels[n] < 0) {
                        labels[n] = count;
                        stack.push_back(n);
                    }
                }
            }
        }
        ++count;
    }
    return {std::move(labels), count};
}

ProCurve pro_curve(std::span<const MapWithMask> items, int connectivity) {
    struct Pixel {
        float score;
        int region;  // -1 = normal pixel
    };
    std::vector<Pixel> pixels;
    std::vector<std::size_t> region_size;
    for (const auto& item : items) {
        if (!item.map || !item.mask) throw Error("null map or mask");
        if (item.map->width != item.mask->width || item.map->height != item.mask->height) {
            throw Error("anomaly map and mask dimensions differ");
        }
        auto [labels, count] = label_components(*item.mask, connectivity);
        const int offset = static_cast<int>(region_size.size());
        region_size.resize(region_size.size() + static_cast<std::size_t>(count), 0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const float s = item.map->data[i];
            if (!std::isfinite(s)) throw Error("anomaly scores must be finite");
            const int region = labels[i] < 0 ? -1 : labels[i] + offset;
            if (region >= 0) ++region_size[static_cast<std::size_t>(region)];
            pixels.push_back({s, region});
        }
    }
    if (region_size.empty()) throw Error("PRO needs at least one ground-truth region");
    const auto n_normal = static_cast<std::size_t>(
        std::count_if(pixels.begin(), pixels.end(), [](const Pixel& p) { return p.region < 0; }));
    if (n_normal == 0) throw Error("PRO needs at least one normal pixel");

    std::sort(pixels.begin(), pixels.end(), [](const Pixel& a, const Pixel& b) { return a.score > b.score; });

    const auto n_regions = static_cast<long double>(region_size.size());
    ProCurve curve;
    curve.fpr.push_back(0.0);
    curve.overlap.push_back(0.0);
    std::vector<std::size_t> hits(region_size.size(), 0);
    long double overlap_sum = 0.0L;
    std::size_t false_pos = 0;
    for (std::size_t i = 0; i < pixels.size();) {
        const float cut = pixels[i].score;
        for (; i < pixels.size() && pixels[i].score == cut; ++i) {
            const int r = pixels[i].region;
            if (r < 0) {
                ++false_pos;
            } else {
                const auto ur = static_cast<std::size_t>(r);
                ++hits[ur];
                overlap_sum += 1.0L / static_cast<long double>(region_size[ur]);
            }
        }
        curve.fpr.push_back(static_cast<double>(false_pos) / static_cast<double>(n_normal));
        curve.overlap.push_back(static_cast<double>(std::clamp(overlap_sum / n_regions, 0.0L, 1.0L)));
    }
    // Pin the final point against accumulated rounding: every region is fully covered.
    curve.overlap.back() = 1.0;
    return curve;
}

double integrate_to_limit(std::span<const double> x, std::span<const double> y, double limit) {
    if (x.size() != y.size() || x.empty()) throw Error("curve coordinates must be non-empty and of equal length");
    long double area = 0.0L;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double x0 = x[i];
        const double x1 = x[i + 1];
        if (x0 >= limit) break;
        if (x1 == x0) continue;
        if (x1 <= limit) {
            area += 0.5L * (x1 - x0) * (static_cast<long double>(y[i]) + y[i + 1]);
        } else {
            const long double t = (limit - x0) / (x1 - x0);
            const long double y_lim = y[i] + t * (y[i + 1] - y[i]);
            area += 0.5L * (limit - x0) * (y[i] + y_lim);
            break;
        }
    }
    return static_cast<double>(area);
}

double pro(std::span<const MapWithMask> items, const ProOptions& opts) {
    if (!(opts.fpr_limit > 0.0 && opts.fpr_limit <= 1.0)) throw Error("fpr_limit must lie in (0,1]");
    const auto curve = pro_curve(items, opts.connectivity);
    const double value = integrate_to_limit(curve.fpr, curve.overlap, opts.fpr_limit) / opts.fpr_limit;
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace specshift
