#include "specshift/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "specshift/error.hpp"
#include "specshift/parallel.hpp"
#include "specshift/random.hpp"

namespace specshift {

namespace {

// Bank rows for one image: descriptor followed by the scaled patch centre.
void append_rows(const Image& img, const FeatureConfig& cfg, std::vector<float>& rows) {
    const auto patches = extract_patches(img, cfg);
    const float sx = static_cast<float>(cfg.position_weight / std::max(1, img.width - 1));
    const float sy = static_cast<float>(cfg.position_weight / std::max(1, img.height - 1));
    for (const auto& p : patches) {
        rows.insert(rows.end(), p.descriptor.begin(), p.descriptor.end());
        rows.push_back(p.center_x * sx);
        rows.push_back(p.center_y * sy);
    }
}

std::vector<float> image_rows(const Image& img, const FeatureConfig& cfg) {
    std::vector<float> rows;
    append_rows(img, cfg, rows);
    return rows;
}

float squared_distance(const float* a, const float* b, int dim) {
    float s = 0.0f;
    for (int i = 0; i < dim; ++i) {
        const float d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void validate(const ModelConfig& cfg) {
    if (cfg.k_neighbors < 1) throw Error("k_neighbors must be at least 1");
    if (!(cfg.coreset_fraction > 0.0 && cfg.coreset_fraction <= 1.0)) throw Error("coreset_fraction must lie in (0,1]");
    if (cfg.features.hist_bins < 1) throw Error("hist_bins must be at least 1");
    if (!(cfg.features.hist_max > 0.0)) throw Error("hist_max must be positive");
}

// Bank from per-image rows, subsampled to the coreset budget.
void build_bank(DetectorModel& model, const std::vector<std::vector<float>>& per_image, std::uint64_t coreset_seed) {
    std::vector<float> all;
    std::vector<std::int32_t> all_source;
    for (std::size_t i = 0; i < per_image.size(); ++i) {
        all.insert(all.end(), per_image[i].begin(), per_image[i].end());
        all_source.insert(all_source.end(), per_image[i].size() / static_cast<std::size_t>(model.dim),
                          static_cast<std::int32_t>(i));
    }
    const std::size_t n = all_source.size();
    const auto target = static_cast<std::size_t>(std::ceil(model.config.coreset_fraction * static_cast<double>(n)));
    if (target >= n) {
        model.bank = std::move(all);
        model.source = std::move(all_source);
        return;
    }
    const auto picked = greedy_coreset(all, model.dim, std::max<std::size_t>(1, target), coreset_seed);
    model.bank.clear();
    model.source.clear();
    model.bank.reserve(picked.size() * static_cast<std::size_t>(model.dim));
    for (auto idx : picked) {
        const float* r = all.data() + idx * static_cast<std::size_t>(model.dim);
        model.bank.insert(model.bank.end(), r, r + model.dim);
        model.source.push_back(all_source[idx]);
    }
}

std::vector<std::vector<float>> rows_for(const std::vector<Image>& images, const FeatureConfig& cfg) {
    std::vector<std::vector<float>> out(images.size());
    parallel_for(images.size(), [&](std::size_t i) { out[i] = image_rows(images[i], cfg); });
    return out;
}

}  // namespace

std::vector<std::size_t> greedy_coreset(const std::vector<float>& rows, int dim, std::size_t target, std::uint64_t seed) {
    if (dim <= 0) throw Error("coreset: dimension must be positive");
    const std::size_t n = rows.size() / static_cast<std::size_t>(dim);
    if (n == 0) throw Error("coreset: no rows");
    target = std::min(target, n);
    std::vector<std::size_t> picked;
    picked.reserve(target);
    std::vector<float> nearest(n, std::numeric_limits<float>::infinity());
    Rng rng(seed);
    std::size_t current = static_cast<std::size_t>(rng.below(n));
    while (picked.size() < target) {
        picked.push_back(current);
        const float* c = rows.data() + current * static_cast<std::size_t>(dim);
        std::size_t best = 0;
        float best_d = -1.0f;
        for (std::size_t i = 0; i < n; ++i) {
            const float d = squared_distance(rows.data() + i * static_cast<std::size_t>(dim), c, dim);
            if (d < nearest[i]) nearest[i] = d;
            if (nearest[i] > best_d) {
                best_d = nearest[i];
                best = i;
            }
        }
        current = best;
    }
    return picked;
}

DetectorModel fit(const std::vector<Image>& train_images, const TrainConfig& train_cfg, const ModelConfig& model_cfg,
                  std::string trained_on) {
    if (train_images.empty()) throw Error("cannot fit on an empty training set");
    if (train_cfg.epochs < 1) throw Error("epochs must be at least 1");
    validate(model_cfg);
    validate(train_cfg.repaste);
    const int channels = train_images.front().channels;
    for (const auto& img : train_images) {
        require_valid(img, "fit");
        if (img.channels != channels) throw Error("training images must share a channel count");
    }

    DetectorModel model;
    model.config = model_cfg;
    model.train = train_cfg;
    model.channels = channels;
    model.dim = feature_dimension(model_cfg.features, channels);
    model.trained_on = std::move(trained_on);

    build_bank(model, rows_for(train_images, model_cfg.features), derive_seed(model_cfg.seed, "coreset", 1));
    if (train_cfg.repaste.mode == RepasteMode::off) return model;

    for (int epoch = 2; epoch <= train_cfg.epochs; ++epoch) {
        std::vector<std::size_t> order(train_images.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle(derive_seed(train_cfg.shuffle_seed, "epoch-order", static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

        std::vector<Image> stream;
        stream.reserve(order.size());
        for (auto idx : order) stream.push_back(train_images[idx]);

        const DetectorModel& previous = model;
        auto scorer = [&](const Image& img, std::size_t pos) {
            return score_excluding(previous, img, static_cast<int>(order[pos])).map;
        };
        auto augmented_stream = repaste_chain(stream, scorer, train_cfg.repaste);

        std::vector<Image> augmented(train_images.size());
        for (std::size_t pos = 0; pos < order.size(); ++pos) augmented[order[pos]] = std::move(augmented_stream[pos]);

        DetectorModel next = model;
        build_bank(next, rows_for(augmented, model_cfg.features),
                   derive_seed(model_cfg.seed, "coreset", static_cast<std::uint64_t>(epoch)));
        model = std::move(next);
    }
    return model;
}

std::vector<float> patch_scores(const DetectorModel& model, const Image& img, int excluded_source) {
    if (!model.fitted()) throw Error("model is not fitted");
    if (img.channels != model.channels) throw Error("image channel count does not match the model");
    const auto rows = image_rows(img, model.config.features);
    const std::size_t n_query = rows.size() / static_cast<std::size_t>(model.dim);
    const auto k = static_cast<std::size_t>(model.config.k_neighbors);

    std::vector<float> out(n_query);
    parallel_for(n_query, [&](std::size_t q) {
        const float* query = rows.data() + q * static_cast<std::size_t>(model.dim);
        // k smallest squared distances, kept sorted ascending
        std::vector<float> best;
        best.reserve(k + 1);
        for (std::size_t b = 0; b < model.size(); ++b) {
            if (model.source[b] == excluded_source) continue;
            const float d = squared_distance(query, model.row(b), model.dim);
            if (best.size() == k && d >= best.back()) continue;
            best.insert(std::upper_bound(best.begin(), best.end(), d), d);
            if (best.size() > k) best.pop_back();
        }
        if (best.empty()) throw Error("memory bank has no usable rows");
        double s = 0.0;
        for (float d : best) s += std::sqrt(static_cast<double>(d));
        out[q] = static_cast<float>(s / static_cast<double>(best.size()));
    });
    return out;
}

namespace {

Scored score_impl(const DetectorModel& model, const Image& img, int excluded_source) {
    require_valid(img, "score");
    const auto& fc = model.config.features;
    const auto grid = patch_grid(img.width, img.height, fc);
    const auto patches = patch_scores(model, img, excluded_source);

    // Patch scores sit at patch centres; pixels interpolate bilinearly
    // between neighbouring centres and clamp beyond the outermost ones.
    const double c0 = (fc.patch_size - 1) / 2.0;
    auto taps = [&](int pixel, int cells) {
        double u = (pixel - c0) / fc.stride;
        u = std::clamp(u, 0.0, static_cast<double>(cells - 1));
        const int lo = static_cast<int>(std::floor(u));
        const int hi = std::min(lo + 1, cells - 1);
        return std::tuple{lo, hi, u - lo};
    };

    AnomalyMap raw(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const auto [y0, y1, ty] = taps(y, grid.rows);
        for (int x = 0; x < img.width; ++x) {
            const auto [x0, x1, tx] = taps(x, grid.cols);
            auto P = [&](int gx, int gy) { return static_cast<double>(patches[static_cast<std::size_t>(gy) * grid.cols + gx]); };
            const double top = P(x0, y0) * (1 - tx) + P(x1, y0) * tx;
            const double bot = P(x0, y1) * (1 - tx) + P(x1, y1) * tx;
            raw.at(x, y) = static_cast<float>(top * (1 - ty) + bot * ty);
        }
    }

    Scored result;
    const auto [lo_it, hi_it] = std::minmax_element(raw.data.begin(), raw.data.end());
    const float lo = *lo_it;
    const float hi = *hi_it;
    result.image_score = hi;
    result.map = AnomalyMap(img.width, img.height, 0.0f, true);
    if (hi > lo) {
        const float span = hi - lo;
        for (std::size_t i = 0; i < raw.data.size(); ++i) {
            result.map.data[i] = std::clamp((raw.data[i] - lo) / span, 0.0f, 1.0f);
        }
    }
    return result;
}

}  // namespace

Scored score(const DetectorModel& model, const Image& img) {
    return score_impl(model, img, -1);
}

Scored score_excluding(const DetectorModel& model, const Image& img, int excluded_source) {
    return score_impl(model, img, excluded_source);
}

}  // namespace specshift
