#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace specshift {

// Raster image, intensities in [0,1], row-major, channels interleaved.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 (grayscale) or 3 (RGB)
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c, float fill = 0.0f)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), fill) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    float at(int x, int y, int c = 0) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    float& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

    bool operator==(const Image&) const = default;
};

// Binary per-pixel mask, values exactly 0 or 1.
struct PixelMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    PixelMask() = default;
    PixelMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    std::size_t pixel_count() const { return data.size(); }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count_ones() const;

    bool operator==(const PixelMask&) const = default;
};

// Per-pixel anomaly scores. `normalized` asserts every score lies in [0,1].
struct AnomalyMap {
    int width = 0;
    int height = 0;
    std::vector<float> data;
    bool normalized = false;

    AnomalyMap() = default;
    AnomalyMap(int w, int h, float fill = 0.0f, bool is_normalized = false)
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill),
          normalized(is_normalized) {}

    std::size_t pixel_count() const { return data.size(); }
    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const AnomalyMap&) const = default;
};

enum class Label : std::uint8_t { normal = 0, anomalous = 1 };
enum class Role : std::uint8_t { train, test };

std::string_view to_string(Label label);
std::string_view to_string(Role role);
Label parse_label(std::string_view text);
Role parse_role(std::string_view text);

inline constexpr std::string_view kGoodClass = "good";

struct SampleRecord {
    std::string id;
    std::string image_path;                // relative to the dataset root
    std::optional<std::string> mask_path;  // relative to the dataset root
    Label label = Label::normal;
    Role role = Role::test;
    std::string defect_class = std::string(kGoodClass);
    bool is_target = false;

    bool operator==(const SampleRecord&) const = default;
};

struct ScoreEntry {
    std::string id;
    double score = 0.0;
    int label = 0;  // 0 = normal, 1 = anomalous
};

struct ScoreSet {
    std::vector<ScoreEntry> entries;
};

struct Validation {
    bool ok = true;
    std::string reason;  // first violated invariant when !ok

    explicit operator bool() const { return ok; }
    static Validation pass() { return {}; }
    static Validation fail(std::string why) { return {false, std::move(why)}; }
};

Validation validate_image(const Image& img);
Validation validate_mask(const PixelMask& mask);
Validation validate_map(const AnomalyMap& map);

// Record-level invariant: a normal record carries no mask unless it is a
// redefined target (whose mask marks the redefined region).
Validation validate_record(const SampleRecord& record);

// Throws Error when validation fails; `what` prefixes the message.
void require_valid(const Image& img, std::string_view what);
void require_valid(const AnomalyMap& map, std::string_view what);

// M(i,j) = 1 iff map(i,j) > threshold. Requires map.normalized.
PixelMask binarize_map(const AnomalyMap& map, double threshold);

}  // namespace specshift
