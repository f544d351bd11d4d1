#include "specshift/types.hpp"

#include <algorithm>
#include <cmath>

#include "specshift/error.hpp"

namespace specshift {

std::size_t PixelMask::count_ones() const {
    return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

std::string_view to_string(Label label) {
    return label == Label::normal ? "normal" : "anomalous";
}

std::string_view to_string(Role role) {
    return role == Role::train ? "train" : "test";
}

Label parse_label(std::string_view text) {
    if (text == "normal") return Label::normal;
    if (text == "anomalous") return Label::anomalous;
    throw Error("unknown label '" + std::string(text) + "'");
}

Role parse_role(std::string_view text) {
    if (text == "train") return Role::train;
    if (text == "test") return Role::test;
    throw Error("unknown role '" + std::string(text) + "'");
}

Validation validate_image(const Image& img) {
    if (img.width <= 0 || img.height <= 0) return Validation::fail("non-positive dimensions");
    if (img.channels != 1 && img.channels != 3) return Validation::fail("channels must be 1 or 3");
    const auto expected = img.pixel_count() * static_cast<std::size_t>(img.channels);
    if (img.data.size() != expected) return Validation::fail("length mismatch");
    for (float v : img.data) {
        if (!(v >= 0.0f && v <= 1.0f)) return Validation::fail("intensity out of range");
    }
    return Validation::pass();
}

Validation validate_mask(const PixelMask& mask) {
    if (mask.width <= 0 || mask.height <= 0) return Validation::fail("non-positive dimensions");
    if (mask.data.size() != static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height)) {
        return Validation::fail("length mismatch");
    }
    for (auto v : mask.data) {
        if (v > 1) return Validation::fail("mask value not binary");
    }
    return Validation::pass();
}

Validation validate_map(const AnomalyMap& map) {
    if (map.width <= 0 || map.height <= 0) return Validation::fail("non-positive dimensions");
    if (map.data.size() != static_cast<std::size_t>(map.width) * static_cast<std::size_t>(map.height)) {
        return Validation::fail("length mismatch");
    }
    for (float v : map.data) {
        if (!std::isfinite(v)) return Validation::fail("non-finite score");
        if (map.normalized && (v < 0.0f || v > 1.0f)) return Validation::fail("score outside [0,1] on normalized map");
    }
    return Validation::pass();
}

Validation validate_record(const SampleRecord& record) {
    if (record.id.empty()) return Validation::fail("empty id");
    if (record.image_path.empty()) return Validation::fail("empty image_path");
    if (record.label == Label::anomalous && !record.mask_path) {
        return Validation::fail("anomalous record without mask");
    }
    if (record.label == Label::normal && record.mask_path && !record.is_target) {
        return Validation::fail("normal record with mask");
    }
    return Validation::pass();
}

void require_valid(const Image& img, std::string_view what) {
    if (auto v = validate_image(img); !v) throw Error(std::string(what) + ": " + v.reason);
}

void require_valid(const AnomalyMap& map, std::string_view what) {
    if (auto v = validate_map(map); !v) throw Error(std::string(what) + ": " + v.reason);
}

PixelMask binarize_map(const AnomalyMap& map, double threshold) {
    if (!map.normalized) throw Error("map must be normalized before thresholding");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error("threshold must lie in [0,1]");
    PixelMask mask(map.width, map.height);
    std::transform(map.data.begin(), map.data.end(), mask.data.begin(),
                   [threshold](float s) { return static_cast<std::uint8_t>(static_cast<double>(s) > threshold); });
    return mask;
}

}  // namespace specshift
