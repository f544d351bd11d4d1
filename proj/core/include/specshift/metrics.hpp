#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specshift/scenario.hpp"
#include "specshift/types.hpp"

namespace specshift {

// ---- ROC / AUROC ------------------------------------------------------------

struct RocCurve {
    std::vector<double> fpr;         // nondecreasing, starts at 0, ends at 1
    std::vector<double> tpr;         // nondecreasing, starts at 0, ends at 1
    std::vector<double> thresholds;  // score cut for each point after the first (predict positive if score >= cut)
};

// Mann-Whitney AUROC: P(pos > neg) + 0.5 * P(pos == neg). O(n log n), exact
// rank statistic. Throws when either class is absent or a score is not finite.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);
double auroc(const ScoreSet& scores);

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

// ---- Pixel-level metrics ------------------------------------------------------

struct MapWithMask {
    const AnomalyMap* map = nullptr;
    const PixelMask* mask = nullptr;
};

// AUROC over pooled per-pixel (score, mask) pairs of all images.
double pixel_auroc(std::span<const MapWithMask> items);

struct ProOptions {
    double fpr_limit = 0.3;
    int connectivity = 8;  // 4 or 8
};

struct ProCurve {
    std::vector<double> fpr;      // nondecreasing, starts at 0
    std::vector<double> overlap;  // mean per-region overlap at each cut
    double fpr_limit = 0.3;
};

// Connected components of the 1-pixels. Returns per-pixel labels (-1 for
// background) and the component count.
std::pair<std::vector<int>, int> label_components(const PixelMask& mask, int connectivity = 8);

// Curve over every distinct pooled score (predict anomalous if score >= cut),
// preceded by the (0, 0) point.
ProCurve pro_curve(std::span<const MapWithMask> items, int connectivity = 8);

// Trapezoidal area under the PRO curve on [0, fpr_limit], divided by fpr_limit.
double pro(std::span<const MapWithMask> items, const ProOptions& opts = {});

// Area of a piecewise-linear curve on [0, limit] (the curve is interpolated at limit).
double integrate_to_limit(std::span<const double> x, std::span<const double> y, double limit);

// ---- S-AUROC ------------------------------------------------------------------

enum class TargetRole { as_normal, as_anomalous };

std::string_view to_string(TargetRole role);
TargetRole parse_target_role(std::string_view text);

struct SAurocReport {
    double pre_change_auroc = 0.0;
    double post_change_auroc = 0.0;
    double delta = 0.0;  // post - pre
    std::string target_class;
    Scenario scenario = Scenario::A2N;
    TargetRole role = TargetRole::as_normal;
    std::size_t n_target = 0;
    std::size_t n_contrast = 0;
    std::string pre_model;
    std::string post_model;

    bool operator==(const SAurocReport&) const = default;
};

// Restricts both score sets to target and contrast ids, labels them by role
// (as_normal: targets 0, contrasts 1; as_anomalous: targets 1, contrasts 0)
// and reports each model's AUROC. Score-set labels are ignored.
SAurocReport s_auroc(const ScoreSet& pre_scores, const ScoreSet& post_scores, const std::set<std::string>& target_ids,
                     const std::set<std::string>& contrast_ids, TargetRole role);

// ---- Manifest evaluation ------------------------------------------------------

struct SampleScore {
    double image_score = 0.0;
    AnomalyMap map;
};
using ScoreTable = std::map<std::string, SampleScore>;

enum class Metric { i_auroc, p_auroc, pro };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);

struct EvalOptions {
    std::vector<Metric> metrics{Metric::i_auroc, Metric::p_auroc, Metric::pro};
    ProOptions pro;
};

struct MetricsReport {
    std::vector<std::pair<std::string, double>> metrics;  // in requested order
    double fpr_limit = 0.3;
    int connectivity = 8;
    std::string manifest_hash;
    std::string dataset_hash;
    std::string scenario;
    std::string sub_scenario;
    std::string class_name;
    std::string target_class;
    std::size_t n_test = 0;
    std::size_t n_anomalous = 0;
    std::string model;

    bool operator==(const MetricsReport&) const = default;
    std::optional<double> get(std::string_view key) const;
};

// Ground-truth mask for a record at the given map resolution.
using MaskLoader = std::function<PixelMask(const SampleRecord&, int width, int height)>;

// I-AUROC with manifest labels; P-AUROC and PRO with effective masks: a
// record labelled normal contributes an all-zero mask even when it carries
// one (redefined targets), an anomalous record contributes its mask.
MetricsReport evaluate_manifest(const ScoreTable& scores, const ScenarioManifest& manifest, const MaskLoader& masks,
                                const EvalOptions& opts = {});

// ---- Report files ---------------------------------------------------------------

std::string metrics_report_to_json(const MetricsReport& r);
MetricsReport metrics_report_from_json(std::string_view text);
void write_metrics_report(const MetricsReport& r, const std::filesystem::path& path);
MetricsReport read_metrics_report(const std::filesystem::path& path);

std::string s_auroc_report_to_json(const SAurocReport& r);
SAurocReport s_auroc_report_from_json(std::string_view text);
void write_s_auroc_report(const SAurocReport& r, const std::filesystem::path& path);
SAurocReport read_s_auroc_report(const std::filesystem::path& path);

}  // namespace specshift
