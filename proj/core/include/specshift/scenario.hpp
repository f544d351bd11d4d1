#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "specshift/dataset_io.hpp"
#include "specshift/types.hpp"

namespace specshift {

enum class Scenario { A2N, N2A };
enum class SubScenario { changed, standard };

std::string_view to_string(Scenario s);
std::string_view to_string(SubScenario s);
Scenario parse_scenario(std::string_view text);
SubScenario parse_sub_scenario(std::string_view text);

inline constexpr std::string_view kBuilderVersion = "specshift-scenario/1";
inline constexpr double kDefaultMaxAreaFraction = 0.01;

struct ManifestProvenance {
    std::string dataset_hash;
    std::string builder_version = std::string(kBuilderVersion);
    double max_area_fraction = kDefaultMaxAreaFraction;
    std::string target_selection = "explicit";  // "explicit" or "auto"
    double target_area_fraction = 0.0;          // mean mask area of the target set
    std::string pseudo_source;                  // N2A only: where pseudo images came from
    std::string pseudo_hash;                    // N2A only

    bool operator==(const ManifestProvenance&) const = default;
};

// One sub-scenario split. Labels are stored explicitly per record, so
// evaluation never has to re-derive scenario rules.
struct ScenarioManifest {
    Scenario scenario = Scenario::A2N;
    SubScenario sub_scenario = SubScenario::changed;
    std::string class_name;
    std::string target_class;
    std::string dataset_root;
    std::vector<SampleRecord> train;
    std::vector<SampleRecord> test;
    ManifestProvenance provenance;

    bool operator==(const ScenarioManifest&) const = default;
};

struct ManifestPair {
    ScenarioManifest changed;
    ScenarioManifest standard;
};

struct BuildOptions {
    double max_area_fraction = kDefaultMaxAreaFraction;
    std::string target_selection = "explicit";
    std::string pseudo_source = "train/good";
};

// Defect classes whose mean ground-truth area fraction is strictly below
// `max_area_fraction`, sorted by name.
std::vector<std::string> select_targets(const DatasetIndex& index, double max_area_fraction = kDefaultMaxAreaFraction);

// Anomaly-to-normal: the first floor(N/2) target samples (path order) join
// training as normals; the rest stay in test as normals. The standard
// manifest trains on original normals and tests every defect as anomalous.
ManifestPair build_a2n(const DatasetIndex& index, const std::string& target_class, const BuildOptions& opts = {});

// Normal-to-anomaly with a pseudo-anomaly set: the standard manifest trains
// on the first floor(N/2) pseudo samples as normals; both manifests test on
// the same remaining pseudo samples, anomalous in `changed`, normal in
// `standard`.
ManifestPair build_n2a(const DatasetIndex& index, const std::vector<SampleRecord>& pseudo,
                       const BuildOptions& opts = {});

// First violated manifest invariant, by name.
Validation validate_manifest(const ScenarioManifest& m);

std::string manifest_to_json(const ScenarioManifest& m);
ScenarioManifest manifest_from_json(std::string_view text);

// Refuses to write a manifest that violates an invariant.
void write_manifest(const ScenarioManifest& m, const std::filesystem::path& path);
ScenarioManifest read_manifest(const std::filesystem::path& path);

// Hash of the canonical JSON text; recorded by models and reports.
std::string manifest_hash(const ScenarioManifest& m);

// Test records flagged as specification-change targets.
std::vector<SampleRecord> target_records(const std::vector<SampleRecord>& records);

}  // namespace specshift
