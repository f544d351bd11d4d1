#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"
#include "specshift/repaste.hpp"

using namespace specshift;

namespace {

RepasteConfig cfg(RepasteMode mode, double tau = 0.9) {
    RepasteConfig c;
    c.mode = mode;
    c.tau = tau;
    return c;
}

}  // namespace

TEST_SUITE("repaste") {
    TEST_CASE("extract_mask") {
        CHECK(extract_mask(AnomalyMap(3, 3, 0.5f, true), 8, 8, cfg(RepasteMode::mixup)).count_ones() == 0);
        CHECK(extract_mask(AnomalyMap(3, 3, 1.0f, true), 8, 8, cfg(RepasteMode::mixup)).count_ones() == 64);
        CHECK_THROWS_WITH_AS(extract_mask(AnomalyMap(3, 3, 1.0f, false), 8, 8, cfg(RepasteMode::mixup)),
                             "map must be normalized before thresholding", Error);

        AnomalyMap small(2, 2, 0.0f, true);
        small.data = {1.0f, 0.2f, 0.95f, 0.0f};
        const auto m = extract_mask(small, 4, 4, cfg(RepasteMode::mixup));
        for (int y = 0; y < 4; ++y) {
            for (int x = 0; x < 4; ++x) CHECK(m.at(x, y) == (oracle::bilinear_at(small, 4, 4, x, y) > 0.9 ? 1 : 0));
        }
        CHECK_THROWS_AS(extract_mask(small, 4, 4, cfg(RepasteMode::mixup, 1.2)), Error);
    }

    TEST_CASE("paste identities") {
        const Image prev(5, 4, 3, 0.2f);
        const Image next(5, 4, 3, 0.6f);
        for (auto mode : {RepasteMode::mixup, RepasteMode::hard, RepasteMode::off}) {
            CHECK(paste(prev, PixelMask(5, 4), next, mode) == next);
        }
        const PixelMask all(5, 4, 1);
        const auto mixed = paste(prev, all, next, RepasteMode::mixup);
        for (float v : mixed.data) CHECK(v == (0.2f + 0.6f) / 2.0f);
        for (float v : mixed.data) CHECK(v == doctest::Approx(0.4));
        CHECK(paste(prev, all, next, RepasteMode::hard) == prev);
        CHECK(paste(prev, all, next, RepasteMode::off) == next);
    }

    TEST_CASE("paste with a mixed 2x2 mask") {
        Image prev(2, 2, 1), next(2, 2, 1);
        prev.data = {0.2f, 0.4f, 0.6f, 1.0f};
        next.data = {0.8f, 0.1f, 0.3f, 0.0f};
        PixelMask m(2, 2);
        m.data = {1, 0, 0, 1};
        const auto out = paste(prev, m, next, RepasteMode::mixup);
        CHECK(out.data[0] == doctest::Approx(0.5));
        CHECK(out.data[1] == 0.1f);
        CHECK(out.data[2] == 0.3f);
        CHECK(out.data[3] == doctest::Approx(0.5));
        const auto hard = paste(prev, m, next, RepasteMode::hard);
        CHECK(hard.data == std::vector<float>{0.2f, 0.1f, 0.3f, 1.0f});
    }

    TEST_CASE("paste rejects shape mismatches") {
        CHECK_THROWS_AS(paste(Image(2, 2, 1), PixelMask(2, 2), Image(2, 2, 3), RepasteMode::mixup), Error);
        CHECK_THROWS_AS(paste(Image(2, 2, 1), PixelMask(3, 2), Image(2, 2, 1), RepasteMode::mixup), Error);
        CHECK_THROWS_AS(repaste(Image(2, 2, 1), AnomalyMap(2, 2, 0.0f, false), Image(2, 2, 1), cfg(RepasteMode::hard)),
                        Error);
    }

    TEST_CASE("property: paste matches the per-pixel oracle bit for bit") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            Rng rng(seed);
            const int w = rng.range(1, 12);
            const int h = rng.range(1, 12);
            const int c = rng.coin() ? 3 : 1;
            const Image prev = fixture::noise_image(w, h, c, seed * 3);
            const Image next = fixture::noise_image(w, h, c, seed * 3 + 1);
            const PixelMask m = fixture::random_mask(w, h, rng.uniform(), seed * 3 + 2);
            const auto mix = paste(prev, m, next, RepasteMode::mixup);
            const auto hard = paste(prev, m, next, RepasteMode::hard);
            CHECK(mix == oracle::paste(prev, m, next, true));
            CHECK(hard == oracle::paste(prev, m, next, false));
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    for (int k = 0; k < c; ++k) {
                        const float a = prev.at(x, y, k);
                        const float b = next.at(x, y, k);
                        CHECK(mix.at(x, y, k) >= std::min(a, b));
                        CHECK(mix.at(x, y, k) <= std::max(a, b));
                        if (!m.at(x, y)) {
                            CHECK(mix.at(x, y, k) == b);
                            CHECK(hard.at(x, y, k) == b);
                        }
                    }
                }
            }
            // both modes agree where the images agree
            CHECK(paste(next, m, next, RepasteMode::mixup) == paste(next, m, next, RepasteMode::hard));
        }
    }

    TEST_CASE("repaste composes extract_mask and paste") {
        const Image prev = fixture::noise_image(8, 8, 1, 1);
        const Image next = fixture::noise_image(8, 8, 1, 2);
        AnomalyMap map(4, 4, 0.0f, true);
        map.at(1, 1) = 1.0f;
        const auto c = cfg(RepasteMode::mixup);
        CHECK(repaste(prev, map, next, c) == paste(prev, extract_mask(map, 8, 8, c), next, RepasteMode::mixup));
    }

    TEST_CASE("repaste_chain trivial cases") {
        std::vector<Image> seq{fixture::noise_image(6, 6, 1, 1), fixture::noise_image(6, 6, 1, 2),
                               fixture::noise_image(6, 6, 1, 3)};
        auto hot = [](const Image& img, std::size_t) { return AnomalyMap(img.width, img.height, 1.0f, true); };
        CHECK(repaste_chain(seq, hot, cfg(RepasteMode::off)) == seq);
        auto cold = [](const Image& img, std::size_t) { return AnomalyMap(img.width, img.height, 0.0f, true); };
        CHECK(repaste_chain(seq, cold, cfg(RepasteMode::mixup)) == seq);
        CHECK_THROWS_AS(repaste_chain({}, cold, cfg(RepasteMode::mixup)), Error);

        auto failing = [](const Image&, std::size_t) -> AnomalyMap { throw Error("scorer failed"); };
        CHECK_THROWS_WITH_AS(repaste_chain(seq, failing, cfg(RepasteMode::mixup)), "scorer failed", Error);
    }

    TEST_CASE("repaste_chain step-through") {
        // image 0 carries a bright square; the scorer flags bright pixels
        Image a(8, 8, 1, 0.2f), b(8, 8, 1, 0.4f), c(8, 8, 1, 0.1f);
        for (int y = 2; y < 5; ++y)
            for (int x = 2; x < 5; ++x) a.at(x, y) = 1.0f;
        auto score = [](const Image& img, std::size_t) {
            AnomalyMap m(img.width, img.height, 0.0f, true);
            for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = img.data[i] >= 0.55f ? 1.0f : 0.0f;
            return m;
        };
        const std::vector<Image> seq{a, b, c};
        const auto out = repaste_chain(seq, score, cfg(RepasteMode::mixup));
        CHECK(out[0] == a);
        PixelMask square(8, 8);
        for (int y = 2; y < 5; ++y)
            for (int x = 2; x < 5; ++x) square.at(x, y) = 1;
        const Image expect1 = oracle::paste(a, square, b, true);  // square becomes 0.7
        CHECK(out[1] == expect1);
        // image 1's recomputed map still flags the square (0.7 >= 0.55), so image 2 blends it too
        CHECK(out[2] == oracle::paste(expect1, square, c, true));

        // raw chain source scores the untouched image 1, which has no hot pixels
        auto raw = cfg(RepasteMode::mixup);
        raw.chain_source = ChainSource::raw;
        const auto out_raw = repaste_chain(seq, score, raw);
        CHECK(out_raw[1] == expect1);
        CHECK(out_raw[2] == c);
    }

    TEST_CASE("repaste_chain is causal") {
        std::vector<Image> seq;
        for (std::uint64_t i = 0; i < 5; ++i) seq.push_back(fixture::noise_image(6, 6, 1, i));
        auto score = [](const Image& img, std::size_t) {
            AnomalyMap m(img.width, img.height, 0.0f, true);
            for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = img.data[i];
            return m;
        };
        const auto full = repaste_chain(seq, score, cfg(RepasteMode::hard, 0.5));
        auto changed_tail = seq;
        changed_tail[4] = fixture::noise_image(6, 6, 1, 99);
        const auto other = repaste_chain(changed_tail, score, cfg(RepasteMode::hard, 0.5));
        for (std::size_t i = 0; i < 4; ++i) CHECK(full[i] == other[i]);
        CHECK(full.size() == seq.size());
    }

    TEST_CASE("mode and source parsing") {
        CHECK(parse_repaste_mode("hard") == RepasteMode::hard);
        CHECK(parse_chain_source(to_string(ChainSource::raw)) == ChainSource::raw);
        CHECK_THROWS_AS(parse_repaste_mode("soft"), Error);
    }
}
