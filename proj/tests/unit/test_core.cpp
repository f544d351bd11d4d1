#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <vector>

#include "fixtures.hpp"
#include "specshift/error.hpp"
#include "specshift/parallel.hpp"
#include "specshift/random.hpp"
#include "specshift/types.hpp"

using namespace specshift;

TEST_SUITE("core") {
    TEST_CASE("validate_image accepts a well-formed image") {
        Image img(2, 2, 3, 0.5f);
        CHECK(validate_image(img).ok);
    }

    TEST_CASE("validate_image names the violated invariant") {
        Image img(2, 2, 3, 0.5f);
        img.data[5] = 1.5f;
        auto v = validate_image(img);
        CHECK_FALSE(v.ok);
        CHECK(v.reason == "intensity out of range");

        Image short_img(2, 2, 3, 0.5f);
        short_img.data.resize(11);
        CHECK(validate_image(short_img).reason == "length mismatch");

        Image two_channel(2, 2, 2, 0.5f);
        CHECK(validate_image(two_channel).reason == "channels must be 1 or 3");

        Image empty;
        CHECK(validate_image(empty).reason == "non-positive dimensions");

        Image nan_img(1, 1, 1);
        nan_img.data[0] = std::numeric_limits<float>::quiet_NaN();
        CHECK(validate_image(nan_img).reason == "intensity out of range");
    }

    TEST_CASE("validate_mask and validate_map") {
        PixelMask m(2, 2);
        CHECK(validate_mask(m).ok);
        m.data[0] = 2;
        CHECK(validate_mask(m).reason == "mask value not binary");

        AnomalyMap a(2, 1, 3.0f, false);
        CHECK(validate_map(a).ok);
        a.normalized = true;
        CHECK_FALSE(validate_map(a).ok);
    }

    TEST_CASE("validate_record ties labels to masks") {
        SampleRecord r{"test/x/000", "c/test/x/000.png", std::nullopt, Label::anomalous, Role::test, "x", false};
        CHECK(validate_record(r).reason == "anomalous record without mask");
        r.mask_path = "c/ground_truth/x/000_mask.png";
        CHECK(validate_record(r).ok);
        r.label = Label::normal;
        CHECK(validate_record(r).reason == "normal record with mask");
        r.is_target = true;  // redefined target keeps its mask
        CHECK(validate_record(r).ok);
    }

    TEST_CASE("binarize_map uses a strict threshold") {
        AnomalyMap hot(3, 3, 0.95f, true);
        CHECK(binarize_map(hot, 0.9).count_ones() == 9);

        AnomalyMap edge(3, 3, 0.9f, true);
        CHECK(binarize_map(edge, 0.9).count_ones() == 0);

        AnomalyMap m(2, 2, 0.0f, true);
        m.data = {0.91f, 0.5f, 0.95f, 0.1f};
        const auto mask = binarize_map(m, 0.9);
        CHECK(mask.data == std::vector<std::uint8_t>{1, 0, 1, 0});
    }

    TEST_CASE("binarize_map errors") {
        AnomalyMap raw(2, 2, 0.5f, false);
        CHECK_THROWS_WITH_AS(binarize_map(raw, 0.9), "map must be normalized before thresholding", Error);
        AnomalyMap ok(2, 2, 0.5f, true);
        CHECK_THROWS_AS(binarize_map(ok, 1.5), Error);
    }

    TEST_CASE("property: binarize_map counts and monotonicity") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            Rng rng(seed);
            AnomalyMap m(7, 5, 0.0f, true);
            for (auto& v : m.data) v = static_cast<float>(rng.below(11)) / 10.0f;  // plenty of exact ties
            const double t1 = rng.uniform();
            const double t2 = t1 + (1.0 - t1) * rng.uniform();
            const auto lo = binarize_map(m, t1);
            const auto hi = binarize_map(m, t2);
            std::size_t above = 0;
            for (float v : m.data) above += static_cast<double>(v) > t1;
            CHECK(lo.count_ones() == above);
            for (std::size_t i = 0; i < lo.data.size(); ++i) CHECK(hi.data[i] <= lo.data[i]);
        }
    }

    TEST_CASE("label and role parsing") {
        CHECK(parse_label("normal") == Label::normal);
        CHECK(parse_role(to_string(Role::train)) == Role::train);
        CHECK_THROWS_AS(parse_label("odd"), Error);
    }

    TEST_CASE("derived seeds are stable and tag-sensitive") {
        CHECK(derive_seed(7, "train", 3) == derive_seed(7, "train", 3));
        CHECK(derive_seed(7, "train", 3) != derive_seed(7, "train", 4));
        CHECK(derive_seed(7, "train", 3) != derive_seed(7, "test", 3));
        CHECK(derive_seed(7, "train", 3) != derive_seed(8, "train", 3));
        Fnv1a h;
        h.update(std::string_view("a"));
        CHECK(h.value() == 0xaf63dc4c8601ec8cULL);  // published FNV-1a test vector for "a"
    }

    TEST_CASE("Rng conversions stay in range") {
        Rng rng(42);
        for (int i = 0; i < 10000; ++i) {
            const double u = rng.uniform();
            CHECK((u >= 0.0 && u < 1.0));
            const auto b = rng.below(7);
            CHECK(b < 7);
            const int r = rng.range(-3, 3);
            CHECK((r >= -3 && r <= 3));
        }
    }

    TEST_CASE("parallel_for visits every index once and rethrows") {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) CHECK(h.load() == 1);
        CHECK_THROWS_AS(parallel_for(100, [](std::size_t i) {
                            if (i == 37) throw Error("boom");
                        }),
                        Error);
    }

    TEST_CASE("SPECSHIFT_THREADS caps workers") {
        ::setenv("SPECSHIFT_THREADS", "3", 1);
        CHECK(worker_count() == 3);
        std::vector<int> out(50, 0);
        parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
        ::setenv("SPECSHIFT_THREADS", "0", 1);
        CHECK(worker_count() >= 1);
        ::unsetenv("SPECSHIFT_THREADS");
    }
}
