#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specshift/types.hpp"

namespace specshift {

namespace fs = std::filesystem;

// ---- PNG raster I/O -------------------------------------------------------

// 8-bit quantization used for every write: round half down, so 0.5 -> 127.
std::uint8_t quantize(float v);

Image read_image(const fs::path& path);
void write_image(const Image& img, const fs::path& path);

// Any nonzero pixel reads as 1.
PixelMask read_mask(const fs::path& path);
void write_mask(const PixelMask& mask, const fs::path& path);

// ---- Resampling -------------------------------------------------------------

// Corner-aligned bilinear interpolation: output pixel x samples source
// coordinate x * (W_in - 1) / (W_out - 1). A 1-pixel output axis samples the
// source centre.
AnomalyMap resize_bilinear(const AnomalyMap& map, int width, int height);
Image resize_bilinear(const Image& img, int width, int height);

// Bilinear resample followed by the nonzero-means-anomalous rule.
PixelMask resize_mask(const PixelMask& mask, int width, int height);

// ---- MVTec-layout datasets -------------------------------------------------

// Defect directory name reserved for generated pseudo-anomalies. Datasets
// loaded with load_dataset never list it as an original defect class.
inline constexpr std::string_view kPseudoClass = "pseudo";

struct DefectClassStats {
    std::string name;
    double mean_area_fraction = 0.0;
    int count = 0;

    bool operator==(const DefectClassStats&) const = default;
};

struct DatasetIndex {
    fs::path root;
    std::string class_name;
    std::vector<SampleRecord> samples;            // sorted by image_path
    std::vector<DefectClassStats> defect_classes;  // sorted by name, "good" excluded
    std::string content_hash;                      // FNV-1a over paths and file bytes

    const DefectClassStats* find_defect(std::string_view name) const;
    std::vector<SampleRecord> select(Role role, std::string_view defect_class) const;
};

// Reads <root>/<class>/{train/good, test/<defect>, ground_truth/<defect>}.
// Record paths are relative to `root`; ids are "<role>/<defect>/<stem>".
DatasetIndex load_dataset(const fs::path& root, const std::string& class_name);

// Loads a record's image; `size` > 0 resizes to size x size.
Image load_sample_image(const fs::path& root, const SampleRecord& record, int size = 0);

// Loads a record's ground-truth mask at the given resolution; records
// without a mask yield an all-zero mask.
PixelMask load_sample_mask(const fs::path& root, const SampleRecord& record, int width, int height);

// ---- Synthetic datasets -----------------------------------------------------

enum class DefectKind { scratch, spot, blob };

std::string_view to_string(DefectKind kind);
DefectKind parse_defect_kind(std::string_view text);

struct DefectSpec {
    std::string name;
    int count = 0;
    double area_lo = 0.002;
    double area_hi = 0.008;
    DefectKind kind = DefectKind::spot;
};

struct SyntheticSpec {
    std::uint64_t seed = 7;
    std::string class_name = "synth";
    int image_size = 256;
    int channels = 1;
    int n_train_normal = 40;
    int n_test_normal = 20;
    std::vector<DefectSpec> defects;
};

// Default desk-scale class: one sub-1% target-sized defect with 40 samples
// and two larger defect classes.
SyntheticSpec default_synthetic_spec();

// Throws Error naming the first violated constraint.
void validate(const SyntheticSpec& spec);

// Writes the MVTec tree for spec.class_name under `out` and returns its
// index. Identical specs produce byte-identical trees.
DatasetIndex generate_synthetic(const SyntheticSpec& spec, const fs::path& out);

// Normal texture used by generate_synthetic for image `index` of a stream.
Image synthesize_normal(const SyntheticSpec& spec, std::uint64_t image_seed);

}  // namespace specshift
