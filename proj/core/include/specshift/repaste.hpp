#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "specshift/types.hpp"

namespace specshift {

enum class RepasteMode { mixup, hard, off };

// Which version of image alpha drives step alpha -> alpha+1 of a chain:
// the image as already augmented by the previous step, or the original.
enum class ChainSource { augmented, raw };

std::string_view to_string(RepasteMode mode);
RepasteMode parse_repaste_mode(std::string_view text);
std::string_view to_string(ChainSource source);
ChainSource parse_chain_source(std::string_view text);

struct RepasteConfig {
    double tau = 0.9;
    RepasteMode mode = RepasteMode::mixup;
    ChainSource chain_source = ChainSource::augmented;

    bool operator==(const RepasteConfig&) const = default;
};

void validate(const RepasteConfig& cfg);

// Resize the previous map to (width, height) bilinearly, then keep pixels
// scoring strictly above tau.
PixelMask extract_mask(const AnomalyMap& map_prev, int width, int height, const RepasteConfig& cfg);

// Per-pixel paste with a binary mask broadcast over channels:
//   mixup: M * (x_prev + x_next) / 2 + (1 - M) * x_next
//   hard:  M * x_prev + (1 - M) * x_next
//   off:   x_next
// Pixels with M = 0 are copied from x_next unchanged.
Image paste(const Image& x_prev, const PixelMask& mask, const Image& x_next, RepasteMode mode);

Image repaste(const Image& x_prev, const AnomalyMap& map_prev, const Image& x_next, const RepasteConfig& cfg);

// Scores image at position `index` of a chain.
using ChainScoreFn = std::function<AnomalyMap(const Image& image, std::size_t index)>;

// out[0] = images[0]; out[a+1] = repaste(src[a], score(src[a], a), images[a+1])
// where src is `out` (augmented) or `images` (raw) per cfg.chain_source.
// Step a+1 depends only on steps <= a.
std::vector<Image> repaste_chain(const std::vector<Image>& images, const ChainScoreFn& score, const RepasteConfig& cfg);

}  // namespace specshift
