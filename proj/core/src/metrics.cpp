#include "specshift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "specshift/error.hpp"

namespace specshift {

namespace {

struct TieGroup {
    double score;
    std::uint64_t pos;
    std::uint64_t neg;
};

// Groups of equal scores in ascending order.
std::vector<TieGroup> tie_groups(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (double s : scores) {
        if (!std::isfinite(s)) throw Error("scores must be finite");
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::vector<TieGroup> groups;
    for (std::size_t i = 0; i < order.size();) {
        TieGroup g{scores[order[i]], 0, 0};
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == g.score) {
            if (labels[order[j]]) ++g.pos; else ++g.neg;
            ++j;
        }
        groups.push_back(g);
        i = j;
    }
    return groups;
}

__extension__ using u128 = unsigned __int128;

}  // namespace

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    const auto groups = tie_groups(scores, labels);
    std::uint64_t n_pos = 0, n_neg = 0;
    for (const auto& g : groups) {
        n_pos += g.pos;
        n_neg += g.neg;
    }
    if (n_pos == 0 || n_neg == 0) throw Error("AUROC undefined without both classes");

    // Twice the Mann-Whitney U, kept integral so the statistic is exact.
    u128 u2 = 0;
    std::uint64_t neg_below = 0;
    for (const auto& g : groups) {
        u2 += static_cast<u128>(2) * g.pos * neg_below + static_cast<u128>(g.pos) * g.neg;
        neg_below += g.neg;
    }
    const long double denom = 2.0L * static_cast<long double>(n_pos) * static_cast<long double>(n_neg);
    return static_cast<double>(static_cast<long double>(u2) / denom);
}

double auroc(const ScoreSet& scores) {
    std::vector<double> s;
    std::vector<std::uint8_t> y;
    s.reserve(scores.entries.size());
    y.reserve(scores.entries.size());
    for (const auto& e : scores.entries) {
        if (e.label != 0 && e.label != 1) throw Error("score label must be 0 or 1 for '" + e.id + "'");
        s.push_back(e.score);
        y.push_back(static_cast<std::uint8_t>(e.label));
    }
    return auroc(s, y);
}

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    const auto groups = tie_groups(scores, labels);
    double n_pos = 0, n_neg = 0;
    for (const auto& g : groups) {
        n_pos += static_cast<double>(g.pos);
        n_neg += static_cast<double>(g.neg);
    }
    if (n_pos == 0 || n_neg == 0) throw Error("AUROC undefined without both classes");
    RocCurve curve;
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);
    std::uint64_t tp = 0, fp = 0;
    for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
        tp += it->pos;
        fp += it->neg;
        curve.fpr.push_back(static_cast<double>(fp) / n_neg);
        curve.tpr.push_back(static_cast<double>(tp) / n_pos);
        curve.thresholds.push_back(it->score);
    }
    return curve;
}

namespace {

void check_pair(const MapWithMask& item) {
    if (!item.map || !item.mask) throw Error("null map or mask");
    if (item.map->width != item.mask->width || item.map->height != item.mask->height) {
        throw Error("anomaly map and mask dimensions differ");
    }
}

}  // namespace

double pixel_auroc(std::span<const MapWithMask> items) {
    std::size_t total = 0;
    for (const auto& item : items) {
        check_pair(item);
        total += item.map->pixel_count();
    }
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    scores.reserve(total);
    labels.reserve(total);
    for (const auto& item : items) {
        for (std::size_t i = 0; i < item.map->pixel_count(); ++i) {
            scores.push_back(item.map->data[i]);
            labels.push_back(item.mask->data[i]);
        }
    }
    return auroc(scores, labels);
}

std::string_view to_string(TargetRole role) { return role == TargetRole::as_normal ? "as_normal" : "as_anomalous"; }

TargetRole parse_target_role(std::string_view text) {
    if (text == "as_normal") return TargetRole::as_normal;
    if (text == "as_anomalous") return TargetRole::as_anomalous;
    throw Error("unknown target role '" + std::string(text) + "'");
}

namespace {

ScoreSet restrict_scores(const ScoreSet& all, const std::set<std::string>& targets, const std::set<std::string>& contrasts,
                         TargetRole role, std::string_view which) {
    std::map<std::string, double> by_id;
    for (const auto& e : all.entries) by_id[e.id] = e.score;
    const int target_label = role == TargetRole::as_normal ? 0 : 1;
    ScoreSet out;
    auto take = [&](const std::set<std::string>& ids, int label) {
        for (const auto& id : ids) {
            auto it = by_id.find(id);
            if (it == by_id.end()) throw Error("id '" + id + "' missing from " + std::string(which) + " scores");
            out.entries.push_back({id, it->second, label});
        }
    };
    take(targets, target_label);
    take(contrasts, 1 - target_label);
    return out;
}

}  // namespace

SAurocReport s_auroc(const ScoreSet& pre_scores, const ScoreSet& post_scores, const std::set<std::string>& target_ids,
                     const std::set<std::string>& contrast_ids, TargetRole role) {
    if (target_ids.empty()) throw Error("S-AUROC needs a non-empty target set");
    if (contrast_ids.empty()) throw Error("S-AUROC needs a non-empty contrast set");
    for (const auto& id : target_ids) {
        if (contrast_ids.count(id)) throw Error("id '" + id + "' is both target and contrast");
    }
    SAurocReport r;
    r.role = role;
    r.n_target = target_ids.size();
    r.n_contrast = contrast_ids.size();
    r.pre_change_auroc = auroc(restrict_scores(pre_scores, target_ids, contrast_ids, role, "pre-change"));
    r.post_change_auroc = auroc(restrict_scores(post_scores, target_ids, contrast_ids, role, "post-change"));
    r.delta = r.post_change_auroc - r.pre_change_auroc;
    return r;
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::i_auroc: return "i_auroc";
        case Metric::p_auroc: return "p_auroc";
        case Metric::pro: return "pro";
    }
    return "?";
}

Metric parse_metric(std::string_view text) {
    if (text == "i_auroc") return Metric::i_auroc;
    if (text == "p_auroc") return Metric::p_auroc;
    if (text == "pro") return Metric::pro;
    throw Error("unknown metric '" + std::string(text) + "'");
}

std::optional<double> MetricsReport::get(std::string_view key) const {
    for (const auto& [name, value] : metrics) {
        if (name == key) return value;
    }
    return std::nullopt;
}

MetricsReport evaluate_manifest(const ScoreTable& scores, const ScenarioManifest& manifest, const MaskLoader& masks,
                                const EvalOptions& opts) {
    if (manifest.test.empty()) throw Error("manifest has no test samples");
    MetricsReport report;
    report.fpr_limit = opts.pro.fpr_limit;
    report.connectivity = opts.pro.connectivity;
    report.manifest_hash = manifest_hash(manifest);
    report.dataset_hash = manifest.provenance.dataset_hash;
    report.scenario = std::string(to_string(manifest.scenario));
    report.sub_scenario = std::string(to_string(manifest.sub_scenario));
    report.class_name = manifest.class_name;
    report.target_class = manifest.target_class;
    report.n_test = manifest.test.size();

    std::vector<double> image_scores;
    std::vector<std::uint8_t> image_labels;
    std::vector<const SampleScore*> per_record;
    for (const auto& r : manifest.test) {
        auto it = scores.find(r.id);
        if (it == scores.end()) throw Error("missing score for test sample '" + r.id + "'");
        per_record.push_back(&it->second);
        image_scores.push_back(it->second.image_score);
        image_labels.push_back(r.label == Label::anomalous ? 1 : 0);
        if (r.label == Label::anomalous) ++report.n_anomalous;
    }

    const bool needs_pixels = std::any_of(opts.metrics.begin(), opts.metrics.end(),
                                          [](Metric m) { return m != Metric::i_auroc; });
    std::vector<PixelMask> effective;
    std::vector<MapWithMask> items;
    if (needs_pixels) {
        effective.reserve(manifest.test.size());
        for (std::size_t i = 0; i < manifest.test.size(); ++i) {
            const auto& r = manifest.test[i];
            const auto& map = per_record[i]->map;
            if (r.label == Label::anomalous) {
                effective.push_back(masks(r, map.width, map.height));
                if (effective.back().width != map.width || effective.back().height != map.height) {
                    throw Error("mask for '" + r.id + "' does not match its anomaly map");
                }
            } else {
                effective.emplace_back(map.width, map.height);
            }
        }
        for (std::size_t i = 0; i < manifest.test.size(); ++i) items.push_back({&per_record[i]->map, &effective[i]});
    }

    for (Metric m : opts.metrics) {
        double value = 0.0;
        switch (m) {
            case Metric::i_auroc: value = auroc(image_scores, image_labels); break;
            case Metric::p_auroc: value = pixel_auroc(items); break;
            case Metric::pro: value = pro(items, opts.pro); break;
        }
        report.metrics.emplace_back(std::string(to_string(m)), value);
    }
    return report;
}

}  // namespace specshift
