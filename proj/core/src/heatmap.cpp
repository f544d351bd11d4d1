#include "specshift/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"

namespace specshift {

std::array<float, 3> ramp_color(float score) {
    const float t = std::clamp(score, 0.0f, 1.0f);
    auto lobe = [](float x) { return std::clamp(1.5f - std::abs(4.0f * x), 0.0f, 1.0f); };
    return {lobe(t - 0.75f), lobe(t - 0.5f), lobe(t - 0.25f)};
}

Image render_heatmap(const Image& input, const AnomalyMap& map) {
    require_valid(input, "render_heatmap");
    if (!map.normalized) throw Error("heatmap needs a normalized map");
    const AnomalyMap m = resize_bilinear(map, input.width, input.height);
    const int w = input.width;
    Image out(2 * w, input.height, 3);
    for (int y = 0; y < input.height; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = input.at(x, y, input.channels == 3 ? c : 0);
            const auto rgb = ramp_color(m.at(x, y));
            for (int c = 0; c < 3; ++c) out.at(w + x, y, c) = rgb[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

void write_heatmap(const std::filesystem::path& path, const Image& input, const AnomalyMap& map) {
    write_image(render_heatmap(input, map), path);
}

}  // namespace specshift
