#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include <unistd.h>

#include "specshift/dataset_io.hpp"
#include "specshift/random.hpp"

namespace fixture {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("specshift-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative path -> file bytes for every regular file under root.
inline std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[e.path().lexically_relative(root).generic_string()] = slurp(e.path());
    }
    return out;
}

inline specshift::Image noise_image(int w, int h, int c, std::uint64_t seed) {
    specshift::Rng rng(seed);
    specshift::Image img(w, h, c);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

inline specshift::PixelMask random_mask(int w, int h, double p, std::uint64_t seed) {
    specshift::Rng rng(seed);
    specshift::PixelMask m(w, h);
    for (auto& v : m.data) v = rng.uniform() < p ? 1 : 0;
    return m;
}

// Writes a w x h mask with `ones` pixels set in reading order.
inline void write_count_mask(const fs::path& p, int w, int h, int ones) {
    specshift::PixelMask m(w, h);
    for (int i = 0; i < ones; ++i) m.data[static_cast<std::size_t>(i)] = 1;
    specshift::write_mask(m, p);
}

}  // namespace fixture
