#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "specshift/types.hpp"

namespace specshift {

enum class MaskKind { blob, scratch };
enum class FillKind { texture_shuffle, intensity_shift, noise_fill };

std::string_view to_string(MaskKind kind);
std::string_view to_string(FillKind kind);
MaskKind parse_mask_kind(std::string_view text);
FillKind parse_fill_kind(std::string_view text);

struct FillOptions {
    double intensity_shift = 0.3;
};

struct PseudoSpec {
    std::uint64_t seed = 0;
    int count = 40;
    MaskKind mask_kind = MaskKind::blob;
    double area_lo = 0.004;
    double area_hi = 0.008;
    FillKind fill_kind = FillKind::texture_shuffle;
    FillOptions fill;
    int image_size = 0;                // 0 keeps the source resolution
    std::vector<SampleRecord> source;  // normal images to corrupt, cycled in order
};

// Throws Error naming the first violated constraint.
void validate(const PseudoSpec& spec);

// Noise -> smooth -> threshold style mask with an exact pixel count drawn
// from the area range. Deterministic in `seed`.
PixelMask generate_mask(std::uint64_t seed, int width, int height, MaskKind kind, double area_lo, double area_hi);

// Alters exactly the masked pixels; each masked pixel differs from the
// input after 8-bit quantization and the output stays in [0,1].
//  - intensity_shift: v + shift, clamped; a pixel the clamp would leave
//    unchanged is shifted the other way instead.
//  - texture_shuffle: each masked pixel copies a random pixel from outside
//    the mask.
//  - noise_fill: uniform random intensities.
Image apply_pseudo(const Image& img, const PixelMask& mask, FillKind fill, std::uint64_t seed,
                   const FillOptions& opts = {});

// Writes spec.count image/mask pairs under <out>/<class>/test/pseudo and
// <out>/<class>/ground_truth/pseudo, plus <out>/<class>/pseudo.json
// describing the sources. Returned records are relative to `out`.
std::vector<SampleRecord> generate_pseudo_set(const PseudoSpec& spec, const std::filesystem::path& source_root,
                                              const std::string& class_name, const std::filesystem::path& out);

// Reads a pseudo set previously written by generate_pseudo_set. Returns an
// empty list when none exists.
std::vector<SampleRecord> load_pseudo_set(const std::filesystem::path& root, const std::string& class_name);

}  // namespace specshift
