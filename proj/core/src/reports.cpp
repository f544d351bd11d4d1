#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specshift/error.hpp"
#include "specshift/metrics.hpp"

namespace specshift {

using ojson = nlohmann::ordered_json;

namespace {

std::string slurp(const std::filesystem::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + std::string(what) + " '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const std::filesystem::path& path, const std::string& text, std::string_view what) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + std::string(what) + " '" + path.string() + "'");
    out << text;
}

ojson parse(std::string_view text, std::string_view what) {
    try {
        return ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string(what) + ": invalid JSON: " + e.what());
    }
}

template <typename T>
T get(const ojson& j, const char* key, std::string_view what) {
    if (!j.is_object() || !j.contains(key)) throw Error(std::string(what) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(std::string(what) + ": field '" + key + "' has the wrong type");
    }
}

}  // namespace

std::string metrics_report_to_json(const MetricsReport& r) {
    ojson j;
    j["schema"] = "specshift.metrics/1";
    ojson metrics = ojson::object();
    for (const auto& [name, value] : r.metrics) metrics[name] = value;
    j["metrics"] = metrics;
    j["fpr_limit"] = r.fpr_limit;
    j["connectivity"] = r.connectivity;
    j["manifest_hash"] = r.manifest_hash;
    j["dataset_hash"] = r.dataset_hash;
    j["scenario"] = r.scenario;
    j["sub_scenario"] = r.sub_scenario;
    j["class_name"] = r.class_name;
    j["target_class"] = r.target_class;
    j["n_test"] = r.n_test;
    j["n_anomalous"] = r.n_anomalous;
    j["model"] = r.model;
    return j.dump(2) + "\n";
}

MetricsReport metrics_report_from_json(std::string_view text) {
    constexpr std::string_view what = "metrics report";
    const ojson j = parse(text, what);
    if (get<std::string>(j, "schema", what) != "specshift.metrics/1") throw Error("metrics report: unsupported schema");
    MetricsReport r;
    if (!j.contains("metrics")) throw Error("metrics report: missing field 'metrics'");
    const auto& metrics = j.at("metrics");
    if (!metrics.is_object()) throw Error("metrics report: field 'metrics' has the wrong type");
    for (const auto& [name, value] : metrics.items()) {
        if (!value.is_number()) throw Error("metrics report: metric '" + name + "' is not a number");
        (void)parse_metric(name);
        r.metrics.emplace_back(name, value.get<double>());
    }
    r.fpr_limit = get<double>(j, "fpr_limit", what);
    r.connectivity = get<int>(j, "connectivity", what);
    r.manifest_hash = get<std::string>(j, "manifest_hash", what);
    r.dataset_hash = get<std::string>(j, "dataset_hash", what);
    r.scenario = get<std::string>(j, "scenario", what);
    r.sub_scenario = get<std::string>(j, "sub_scenario", what);
    r.class_name = get<std::string>(j, "class_name", what);
    r.target_class = get<std::string>(j, "target_class", what);
    r.n_test = get<std::size_t>(j, "n_test", what);
    r.n_anomalous = get<std::size_t>(j, "n_anomalous", what);
    r.model = get<std::string>(j, "model", what);
    return r;
}

void write_metrics_report(const MetricsReport& r, const std::filesystem::path& path) {
    spill(path, metrics_report_to_json(r), "metrics report");
}

MetricsReport read_metrics_report(const std::filesystem::path& path) {
    return metrics_report_from_json(slurp(path, "metrics report"));
}

std::string s_auroc_report_to_json(const SAurocReport& r) {
    ojson j;
    j["schema"] = "specshift.s_auroc/1";
    j["s_auroc"] = r.post_change_auroc;
    j["pre_change_auroc"] = r.pre_change_auroc;
    j["post_change_auroc"] = r.post_change_auroc;
    j["delta"] = r.delta;
    j["target_class"] = r.target_class;
    j["scenario"] = std::string(to_string(r.scenario));
    j["target_role"] = std::string(to_string(r.role));
    j["n_target"] = r.n_target;
    j["n_contrast"] = r.n_contrast;
    j["pre_model"] = r.pre_model;
    j["post_model"] = r.post_model;
    return j.dump(2) + "\n";
}

SAurocReport s_auroc_report_from_json(std::string_view text) {
    constexpr std::string_view what = "S-AUROC report";
    const ojson j = parse(text, what);
    if (get<std::string>(j, "schema", what) != "specshift.s_auroc/1") throw Error("S-AUROC report: unsupported schema");
    SAurocReport r;
    r.pre_change_auroc = get<double>(j, "pre_change_auroc", what);
    r.post_change_auroc = get<double>(j, "post_change_auroc", what);
    r.delta = get<double>(j, "delta", what);
    r.target_class = get<std::string>(j, "target_class", what);
    r.scenario = parse_scenario(get<std::string>(j, "scenario", what));
    r.role = parse_target_role(get<std::string>(j, "target_role", what));
    r.n_target = get<std::size_t>(j, "n_target", what);
    r.n_contrast = get<std::size_t>(j, "n_contrast", what);
    r.pre_model = get<std::string>(j, "pre_model", what);
    r.post_model = get<std::string>(j, "post_model", what);
    return r;
}

void write_s_auroc_report(const SAurocReport& r, const std::filesystem::path& path) {
    spill(path, s_auroc_report_to_json(r), "S-AUROC report");
}

SAurocReport read_s_auroc_report(const std::filesystem::path& path) {
    return s_auroc_report_from_json(slurp(path, "S-AUROC report"));
}

}  // namespace specshift
