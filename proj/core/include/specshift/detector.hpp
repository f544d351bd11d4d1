#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specshift/repaste.hpp"
#include "specshift/types.hpp"

namespace specshift {

struct FeatureConfig {
    int patch_size = 16;
    int stride = 8;
    int hist_bins = 8;
    double hist_max = 0.2;         // gradient magnitudes >= hist_max land in the last bin
    double hist_weight = 0.5;      // scale of the histogram block in feature space
    double position_weight = 0.05; // scale of the normalized patch-centre block

    bool operator==(const FeatureConfig&) const = default;
};

// Descriptor layout: [mean per channel | std per channel | gradient-magnitude
// histogram]. The memory bank appends the patch centre, normalized to [0,1]
// and scaled by position_weight.
struct PatchFeature {
    std::vector<float> descriptor;
    float center_x = 0.0f;  // pixel coordinates of the patch centre
    float center_y = 0.0f;
};

int descriptor_dimension(const FeatureConfig& cfg, int channels);
// Bank row width: descriptor plus the two position columns.
int feature_dimension(const FeatureConfig& cfg, int channels);

// Dense grid of patches, row-major over patch positions. Throws when the
// patch does not fit or the stride is not positive.
std::vector<PatchFeature> extract_patches(const Image& img, const FeatureConfig& cfg);

struct PatchGridShape {
    int cols = 0;
    int rows = 0;
};
PatchGridShape patch_grid(int width, int height, const FeatureConfig& cfg);

struct ModelConfig {
    FeatureConfig features;
    int k_neighbors = 1;
    double coreset_fraction = 0.25;
    std::uint64_t seed = 0;

    bool operator==(const ModelConfig&) const = default;
};

struct TrainConfig {
    int epochs = 2;
    RepasteConfig repaste;
    std::uint64_t shuffle_seed = 0;

    bool operator==(const TrainConfig&) const = default;
};

inline constexpr std::string_view kNormalization = "per_image_minmax";

// Patch memory bank. Each bank row remembers which training image it came
// from, so training-time scoring can leave that image out.
struct DetectorModel {
    ModelConfig config;
    TrainConfig train;
    int channels = 0;
    int dim = 0;
    int input_size = 0;               // side length images are resized to before scoring; 0 = as given
    std::vector<float> bank;          // rows x dim, row-major
    std::vector<std::int32_t> source; // training image index per row
    std::string normalization = std::string(kNormalization);
    std::string trained_on;           // manifest hash or free-form provenance

    std::size_t size() const { return source.size(); }
    bool fitted() const { return !source.empty(); }
    const float* row(std::size_t i) const { return bank.data() + i * static_cast<std::size_t>(dim); }

    bool operator==(const DetectorModel&) const = default;
};

// Greedy k-center subsample of `n` rows (dim columns). Starts from a seeded
// random row, then repeatedly adds the row farthest from the chosen set.
// Returns row indices in selection order.
std::vector<std::size_t> greedy_coreset(const std::vector<float>& rows, int dim, std::size_t target, std::uint64_t seed);

// Epoch 1 builds the bank from the raw images. Each later epoch shuffles the
// training order, runs a RePaste chain scored by the previous epoch's model
// (leaving each image's own patches out), and rebuilds the bank from the
// augmented images. mode=off skips the later epochs: they would rebuild the
// same bank.
DetectorModel fit(const std::vector<Image>& train_images, const TrainConfig& train_cfg, const ModelConfig& model_cfg,
                  std::string trained_on = {});

struct Scored {
    AnomalyMap map;           // per-image min-max normalized; constant maps become all zeros
    double image_score = 0.0; // maximum raw pixel score
};

Scored score(const DetectorModel& model, const Image& img);

// As score(), ignoring bank rows that came from training image `excluded_source`.
Scored score_excluding(const DetectorModel& model, const Image& img, int excluded_source);

// Raw (unnormalized) per-patch k-NN distances on the patch grid.
std::vector<float> patch_scores(const DetectorModel& model, const Image& img, int excluded_source = -1);

void save_model(const DetectorModel& model, const std::filesystem::path& path);
DetectorModel load_model(const std::filesystem::path& path);

}  // namespace specshift
