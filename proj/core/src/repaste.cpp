#include "specshift/repaste.hpp"

#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"

namespace specshift {

std::string_view to_string(RepasteMode mode) {
    switch (mode) {
        case RepasteMode::mixup: return "mixup";
        case RepasteMode::hard: return "hard";
        case RepasteMode::off: return "off";
    }
    return "?";
}

RepasteMode parse_repaste_mode(std::string_view text) {
    if (text == "mixup") return RepasteMode::mixup;
    if (text == "hard") return RepasteMode::hard;
    if (text == "off") return RepasteMode::off;
    throw Error("unknown repaste mode '" + std::string(text) + "'");
}

std::string_view to_string(ChainSource source) { return source == ChainSource::augmented ? "augmented" : "raw"; }

ChainSource parse_chain_source(std::string_view text) {
    if (text == "augmented") return ChainSource::augmented;
    if (text == "raw") return ChainSource::raw;
    throw Error("unknown chain source '" + std::string(text) + "'");
}

void validate(const RepasteConfig& cfg) {
    if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) throw Error("tau must lie in [0,1]");
}

PixelMask extract_mask(const AnomalyMap& map_prev, int width, int height, const RepasteConfig& cfg) {
    validate(cfg);
    if (!map_prev.normalized) throw Error("map must be normalized before thresholding");
    return binarize_map(resize_bilinear(map_prev, width, height), cfg.tau);
}

Image paste(const Image& x_prev, const PixelMask& mask, const Image& x_next, RepasteMode mode) {
    if (x_prev.width != x_next.width || x_prev.height != x_next.height || x_prev.channels != x_next.channels) {
        throw Error("repaste: previous and next images differ in shape");
    }
    if (mask.width != x_next.width || mask.height != x_next.height) throw Error("repaste: mask and image dimensions differ");

    Image out = x_next;
    if (mode == RepasteMode::off) return out;
    const int ch = x_next.channels;
    for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
        if (!mask.data[p]) continue;
        for (int c = 0; c < ch; ++c) {
            const auto i = p * ch + c;
            out.data[i] = mode == RepasteMode::mixup ? (x_prev.data[i] + x_next.data[i]) / 2.0f : x_prev.data[i];
        }
    }
    return out;
}

Image repaste(const Image& x_prev, const AnomalyMap& map_prev, const Image& x_next, const RepasteConfig& cfg) {
    const PixelMask mask = extract_mask(map_prev, x_next.width, x_next.height, cfg);
    return paste(x_prev, mask, x_next, cfg.mode);
}

std::vector<Image> repaste_chain(const std::vector<Image>& images, const ChainScoreFn& score, const RepasteConfig& cfg) {
    validate(cfg);
    if (images.empty()) throw Error("repaste chain needs at least one image");
    std::vector<Image> out;
    out.reserve(images.size());
    out.push_back(images.front());
    if (cfg.mode == RepasteMode::off) {
        out.assign(images.begin(), images.end());
        return out;
    }
    for (std::size_t a = 0; a + 1 < images.size(); ++a) {
        const Image& source = cfg.chain_source == ChainSource::augmented ? out[a] : images[a];
        const AnomalyMap map = score(source, a);
        out.push_back(repaste(source, map, images[a + 1], cfg));
    }
    return out;
}

}  // namespace specshift
