#include <png.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"

namespace specshift {

namespace {

struct Decoded {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> bytes;
};

// Decodes to 8-bit gray or RGB, keeping the file's color-ness.
Decoded decode_png(const fs::path& path, bool force_gray) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        std::string msg = "cannot decode PNG '" + path.string() + "': " + image.message;
        png_image_free(&image);
        throw Error(msg);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0 && !force_gray;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    Decoded out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.channels = color ? 3 : 1;
    out.bytes.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.bytes.data(), 0, nullptr)) {
        std::string msg = "cannot decode PNG '" + path.string() + "': " + image.message;
        png_image_free(&image);
        throw Error(msg);
    }
    return out;
}

void encode_png(const fs::path& path, int width, int height, int channels, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        std::string msg = "cannot write PNG '" + path.string() + "': " + image.message;
        png_image_free(&image);
        throw Error(msg);
    }
}

}  // namespace

std::uint8_t quantize(float v) {
    const double scaled = std::ceil(static_cast<double>(v) * 255.0 - 0.5);
    if (scaled <= 0.0) return 0;
    if (scaled >= 255.0) return 255;
    return static_cast<std::uint8_t>(scaled);
}

Image read_image(const fs::path& path) {
    auto decoded = decode_png(path, false);
    Image img(decoded.width, decoded.height, decoded.channels);
    for (std::size_t i = 0; i < decoded.bytes.size(); ++i) img.data[i] = static_cast<float>(decoded.bytes[i]) / 255.0f;
    return img;
}

void write_image(const Image& img, const fs::path& path) {
    require_valid(img, "write_image");
    std::vector<std::uint8_t> bytes(img.data.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize(img.data[i]);
    encode_png(path, img.width, img.height, img.channels, bytes);
}

PixelMask read_mask(const fs::path& path) {
    auto decoded = decode_png(path, true);
    PixelMask mask(decoded.width, decoded.height);
    for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = decoded.bytes[i] != 0 ? 1 : 0;
    return mask;
}

void write_mask(const PixelMask& mask, const fs::path& path) {
    if (auto v = validate_mask(mask); !v) throw Error("write_mask: " + v.reason);
    std::vector<std::uint8_t> bytes(mask.data.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.data[i] ? 255 : 0;
    encode_png(path, mask.width, mask.height, 1, bytes);
}

}  // namespace specshift
