#include <doctest.h>

#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "specshift/dataset_io.hpp"
#include "specshift/detector.hpp"
#include "specshift/error.hpp"
#include "specshift/shapes.hpp"

using namespace specshift;

namespace {

SyntheticSpec texture(int size = 32, std::uint64_t seed = 5) {
    SyntheticSpec s;
    s.seed = seed;
    s.image_size = size;
    return s;
}

std::vector<Image> normals(int n, int size = 32, std::uint64_t seed = 5, std::string_view tag = "train") {
    std::vector<Image> out;
    for (int i = 0; i < n; ++i) out.push_back(synthesize_normal(texture(size, seed), derive_seed(seed, tag, static_cast<std::uint64_t>(i))));
    return out;
}

ModelConfig small_model(double coreset = 1.0) {
    ModelConfig m;
    m.features.patch_size = 8;
    m.features.stride = 4;
    m.coreset_fraction = coreset;
    m.seed = 3;
    return m;
}

TrainConfig train_cfg(RepasteMode mode, int epochs = 2) {
    TrainConfig t;
    t.epochs = epochs;
    t.repaste.mode = mode;
    return t;
}

// Bright square added on top of the texture.
Image with_square(Image img, int x0, int y0, int side, float delta) {
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x)
            for (int c = 0; c < img.channels; ++c) img.at(x, y, c) = std::min(1.0f, img.at(x, y, c) + delta);
    return img;
}

double region_mean(const std::vector<float>& patches, const PatchGridShape& g, const FeatureConfig& f, int x0, int y0,
                   int side) {
    double s = 0.0;
    int n = 0;
    for (int gy = 0; gy < g.rows; ++gy) {
        for (int gx = 0; gx < g.cols; ++gx) {
            const int px = gx * f.stride;
            const int py = gy * f.stride;
            const bool overlaps = px < x0 + side && px + f.patch_size > x0 && py < y0 + side && py + f.patch_size > y0;
            if (!overlaps) continue;
            s += patches[static_cast<std::size_t>(gy * g.cols + gx)];
            ++n;
        }
    }
    return s / n;
}

}  // namespace

TEST_SUITE("detector") {
    TEST_CASE("patch grid size") {
        FeatureConfig f;
        const auto g = patch_grid(256, 256, f);
        CHECK(g.cols == 31);
        CHECK(g.rows == 31);
        CHECK(extract_patches(Image(256, 256, 1, 0.3f), f).size() == 961);
        CHECK_THROWS_WITH_AS(patch_grid(8, 32, f), doctest::Contains("does not fit"), Error);
        f.stride = 0;
        CHECK_THROWS_AS(patch_grid(32, 32, f), Error);
    }

    TEST_CASE("constant image gives identical descriptors with zero deviation") {
        FeatureConfig f;
        f.patch_size = 8;
        f.stride = 4;
        const auto patches = extract_patches(Image(32, 32, 3, 0.42f), f);
        for (const auto& p : patches) {
            CHECK(p.descriptor == patches.front().descriptor);
            for (int c = 0; c < 3; ++c) CHECK(p.descriptor[static_cast<std::size_t>(3 + c)] == 0.0f);
            CHECK(p.descriptor[0] == doctest::Approx(0.42));
        }
        CHECK(static_cast<int>(patches.front().descriptor.size()) == descriptor_dimension(f, 3));
    }

    TEST_CASE("shifting by one stride shifts the grid") {
        FeatureConfig f;
        f.patch_size = 8;
        f.stride = 4;
        const Image img = fixture::noise_image(40, 24, 1, 8);
        Image shifted(36, 24, 1);
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 36; ++x) shifted.at(x, y) = img.at(x + 4, y);
        const auto a = extract_patches(img, f);
        const auto b = extract_patches(shifted, f);
        const auto ga = patch_grid(40, 24, f);
        const auto gb = patch_grid(36, 24, f);
        // interior patches only: border gradients differ once the image is cropped
        for (int gy = 0; gy < gb.rows; ++gy) {
            for (int gx = 1; gx + 1 < gb.cols; ++gx) {
                const auto& pa = a[static_cast<std::size_t>(gy * ga.cols + gx + 1)];
                const auto& pb = b[static_cast<std::size_t>(gy * gb.cols + gx)];
                CHECK(pa.center_x - pb.center_x == doctest::Approx(4.0));
                CHECK(pa.center_y == pb.center_y);
                for (std::size_t k = 0; k < 2; ++k) CHECK(pa.descriptor[k] == doctest::Approx(pb.descriptor[k]).epsilon(1e-6));
            }
        }
    }

    TEST_CASE("fit: off mode ignores epochs, coreset 1 keeps everything") {
        const auto imgs = normals(4);
        const auto m1 = fit(imgs, train_cfg(RepasteMode::off, 1), small_model());
        const auto m3 = fit(imgs, train_cfg(RepasteMode::off, 3), small_model());
        CHECK(m1.bank == m3.bank);
        CHECK(m1.source == m3.source);
        CHECK(m1.size() == 4u * 49u);
        CHECK(m1.dim == feature_dimension(small_model().features, 1));

        const auto sub = fit(imgs, train_cfg(RepasteMode::off, 1), small_model(0.25));
        CHECK(sub.size() == 49u);
        CHECK_THROWS_AS(fit({}, train_cfg(RepasteMode::off), small_model()), Error);
        CHECK_THROWS_AS(fit(imgs, train_cfg(RepasteMode::off, 0), small_model()), Error);
    }

    TEST_CASE("fit is deterministic") {
        const auto imgs = normals(5);
        const auto a = fit(imgs, train_cfg(RepasteMode::mixup, 3), small_model(0.3));
        const auto b = fit(imgs, train_cfg(RepasteMode::mixup, 3), small_model(0.3));
        CHECK(a == b);
        auto other = small_model(0.3);
        other.seed = 4;
        CHECK_FALSE(fit(imgs, train_cfg(RepasteMode::mixup, 3), other).bank == a.bank);
    }

    TEST_CASE("self-membership scores zero") {
        const auto imgs = normals(3);
        const auto m = fit(imgs, train_cfg(RepasteMode::off, 1), small_model());
        const auto s = score(m, imgs[1]);
        CHECK(s.image_score == 0.0);
        for (float v : patch_scores(m, imgs[1])) CHECK(v == 0.0f);
        for (float v : s.map.data) CHECK(v == 0.0f);  // constant map normalizes to zeros
        CHECK(s.map.normalized);
        // leaving the image out makes its own patches unavailable
        CHECK(score_excluding(m, imgs[1], 1).image_score > 0.0);
    }

    TEST_CASE("maps are normalized per image") {
        const auto imgs = normals(4);
        const auto m = fit(imgs, train_cfg(RepasteMode::off, 1), small_model(0.5));
        const auto s = score(m, fixture::noise_image(32, 32, 1, 77));
        CHECK(s.map.width == 32);
        float lo = 1, hi = 0;
        for (float v : s.map.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo == 0.0f);
        CHECK(hi == 1.0f);
        CHECK(s.image_score > 0.0);
    }

    TEST_CASE("an injected defect raises the image score") {
        const auto imgs = normals(6);
        const auto m = fit(imgs, train_cfg(RepasteMode::off, 1), small_model(0.5));
        for (const auto& clean : normals(4, 32, 5, "probe")) {
            const Image defect = with_square(clean, 12, 12, 4, 0.35f);
            CHECK(score(m, defect).image_score > score(m, clean).image_score);
        }
    }

    TEST_CASE("monotone sensitivity: extra bank rows never raise distances") {
        const auto imgs = normals(3);
        auto m = fit(imgs, train_cfg(RepasteMode::off, 1), small_model(0.3));
        const Image probe = fixture::noise_image(32, 32, 1, 4);
        const auto before = patch_scores(m, probe);
        Rng rng(1);
        for (int r = 0; r < 20; ++r) {
            for (int k = 0; k < m.dim; ++k) m.bank.push_back(static_cast<float>(rng.uniform()));
            m.source.push_back(99);
        }
        const auto after = patch_scores(m, probe);
        for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i] <= before[i]);
    }

    TEST_CASE("mixup repaste spreads a rare training blob") {
        auto imgs = normals(10);
        imgs[3] = with_square(imgs[3], 12, 12, 5, 0.3f);
        const auto model_cfg = small_model(0.5);
        const auto off = fit(imgs, train_cfg(RepasteMode::off), model_cfg);
        const auto mix = fit(imgs, train_cfg(RepasteMode::mixup), model_cfg);
        const auto g = patch_grid(32, 32, model_cfg.features);
        double off_sum = 0.0, mix_sum = 0.0;
        for (const auto& clean : normals(5, 32, 5, "probe")) {
            const Image probe = with_square(clean, 12, 12, 5, 0.3f);
            off_sum += region_mean(patch_scores(off, probe), g, model_cfg.features, 12, 12, 5);
            mix_sum += region_mean(patch_scores(mix, probe), g, model_cfg.features, 12, 12, 5);
        }
        CHECK(mix_sum < off_sum);
    }

    TEST_CASE("greedy coreset") {
        std::vector<float> rows{0, 0, 10, 0, 0, 10, 0.1f, 0, 10, 10.1f};
        const auto picked = greedy_coreset(rows, 2, 3, 0);
        CHECK(picked.size() == 3);
        std::set<std::size_t> uniq(picked.begin(), picked.end());
        CHECK(uniq.size() == 3);
        CHECK(greedy_coreset(rows, 2, 10, 0).size() == 5);
        CHECK(greedy_coreset(rows, 2, 2, 7) == greedy_coreset(rows, 2, 2, 7));
    }

    TEST_CASE("model persistence round trips exactly") {
        fixture::TempDir dir("model");
        const auto imgs = normals(3);
        auto m = fit(imgs, train_cfg(RepasteMode::hard, 2), small_model(0.4), "abc123");
        m.input_size = 32;
        save_model(m, dir / "m.bin");
        CHECK(load_model(dir / "m.bin") == m);

        std::ofstream(dir / "junk.bin") << "nope";
        CHECK_THROWS_WITH_AS(load_model(dir / "junk.bin"), doctest::Contains("junk.bin"), Error);
        const auto bytes = fixture::slurp(dir / "m.bin");
        std::ofstream(dir / "cut.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 9);
        CHECK_THROWS_WITH_AS(load_model(dir / "cut.bin"), doctest::Contains("truncated"), Error);
        CHECK_THROWS_AS(save_model(DetectorModel{}, dir / "empty.bin"), Error);
    }

    TEST_CASE("scoring errors") {
        CHECK_THROWS_WITH_AS(score(DetectorModel{}, Image(16, 16, 1)), doctest::Contains("not fitted"), Error);
        const auto m = fit(normals(2), train_cfg(RepasteMode::off, 1), small_model());
        CHECK_THROWS_AS(score(m, Image(16, 16, 3)), Error);
    }
}
