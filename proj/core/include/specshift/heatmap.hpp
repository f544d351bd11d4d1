#pragma once

#include <array>
#include <filesystem>

#include "specshift/types.hpp"

namespace specshift {

// Jet-like ramp: 0 -> dark blue, 0.5 -> green/yellow, 1 -> dark red.
std::array<float, 3> ramp_color(float score);

// RGB panel pair [input | colored map]. The map is resized to the input size
// and must be normalized.
Image render_heatmap(const Image& input, const AnomalyMap& map);

void write_heatmap(const std::filesystem::path& path, const Image& input, const AnomalyMap& map);

}  // namespace specshift
