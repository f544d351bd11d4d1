#include "specshift/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specshift/error.hpp"
#include "specshift/random.hpp"

namespace specshift {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Scenario s) { return s == Scenario::A2N ? "A2N" : "N2A"; }
std::string_view to_string(SubScenario s) { return s == SubScenario::changed ? "changed" : "standard"; }

Scenario parse_scenario(std::string_view text) {
    if (text == "A2N" || text == "a2n") return Scenario::A2N;
    if (text == "N2A" || text == "n2a") return Scenario::N2A;
    throw Error("unknown scenario '" + std::string(text) + "'");
}

SubScenario parse_sub_scenario(std::string_view text) {
    if (text == "changed") return SubScenario::changed;
    if (text == "standard") return SubScenario::standard;
    throw Error("unknown sub_scenario '" + std::string(text) + "'");
}

std::vector<std::string> select_targets(const DatasetIndex& index, double max_area_fraction) {
    if (index.defect_classes.empty()) throw Error("dataset has no defect classes with ground-truth masks");
    std::vector<std::string> out;
    for (const auto& d : index.defect_classes) {
        if (d.mean_area_fraction < max_area_fraction) out.push_back(d.name);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void sort_by_path(std::vector<SampleRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const SampleRecord& a, const SampleRecord& b) { return a.image_path < b.image_path; });
}

ScenarioManifest base_manifest(const DatasetIndex& index, Scenario scenario, SubScenario sub,
                               const std::string& target, const BuildOptions& opts) {
    ScenarioManifest m;
    m.scenario = scenario;
    m.sub_scenario = sub;
    m.class_name = index.class_name;
    m.target_class = target;
    m.dataset_root = index.root.generic_string();
    m.provenance.dataset_hash = index.content_hash;
    m.provenance.max_area_fraction = opts.max_area_fraction;
    m.provenance.target_selection = opts.target_selection;
    return m;
}

SampleRecord as_target(SampleRecord r, Role role, Label label) {
    r.role = role;
    r.label = label;
    r.is_target = true;
    return r;
}

}  // namespace

ManifestPair build_a2n(const DatasetIndex& index, const std::string& target_class, const BuildOptions& opts) {
    const auto* stats = index.find_defect(target_class);
    if (!stats) throw Error("unknown target class '" + target_class + "'");
    auto targets = index.select(Role::test, target_class);
    sort_by_path(targets);
    const std::size_t n = targets.size();
    if (n < 2) throw Error("target class '" + target_class + "' needs at least 2 samples, has " + std::to_string(n));
    const std::size_t half = n / 2;

    ManifestPair pair{base_manifest(index, Scenario::A2N, SubScenario::changed, target_class, opts),
                      base_manifest(index, Scenario::A2N, SubScenario::standard, target_class, opts)};
    pair.changed.provenance.target_area_fraction = stats->mean_area_fraction;
    pair.standard.provenance.target_area_fraction = stats->mean_area_fraction;

    for (const auto& r : index.samples) {
        if (r.role == Role::train) {
            pair.changed.train.push_back(r);
            pair.standard.train.push_back(r);
        }
    }
    for (std::size_t i = 0; i < half; ++i) pair.changed.train.push_back(as_target(targets[i], Role::train, Label::normal));

    std::set<std::string> first_half;
    for (std::size_t i = 0; i < half; ++i) first_half.insert(targets[i].id);
    for (const auto& r : index.samples) {
        if (r.role != Role::test) continue;
        if (r.defect_class == target_class) {
            if (!first_half.count(r.id)) pair.changed.test.push_back(as_target(r, Role::test, Label::normal));
            pair.standard.test.push_back(as_target(r, Role::test, Label::anomalous));
        } else {
            pair.changed.test.push_back(r);
            pair.standard.test.push_back(r);
        }
    }
    sort_by_path(pair.changed.train);
    sort_by_path(pair.standard.train);
    return pair;
}

ManifestPair build_n2a(const DatasetIndex& index, const std::vector<SampleRecord>& pseudo, const BuildOptions& opts) {
    if (pseudo.size() < 2) throw Error("pseudo-anomaly set needs at least 2 samples, has " + std::to_string(pseudo.size()));
    for (const auto& r : pseudo) {
        if (!r.mask_path) throw Error("pseudo record '" + r.id + "' has no mask");
        if (!r.is_target) throw Error("pseudo record '" + r.id + "' is not flagged as a target");
    }
    auto targets = pseudo;
    sort_by_path(targets);
    const std::size_t half = targets.size() / 2;

    std::string target_name = targets.front().defect_class;
    ManifestPair pair{base_manifest(index, Scenario::N2A, SubScenario::changed, target_name, opts),
                      base_manifest(index, Scenario::N2A, SubScenario::standard, target_name, opts)};
    Fnv1a h;
    for (const auto& r : targets) {
        h.update(r.image_path);
        h.update(*r.mask_path);
    }
    for (auto* m : {&pair.changed, &pair.standard}) {
        m->provenance.pseudo_source = opts.pseudo_source;
        m->provenance.pseudo_hash = h.hex();
    }

    for (const auto& r : index.samples) {
        if (r.role == Role::train) {
            pair.changed.train.push_back(r);
            pair.standard.train.push_back(r);
        } else {
            pair.changed.test.push_back(r);
            pair.standard.test.push_back(r);
        }
    }
    for (std::size_t i = 0; i < half; ++i) pair.standard.train.push_back(as_target(targets[i], Role::train, Label::normal));
    for (std::size_t i = half; i < targets.size(); ++i) {
        pair.changed.test.push_back(as_target(targets[i], Role::test, Label::anomalous));
        pair.standard.test.push_back(as_target(targets[i], Role::test, Label::normal));
    }
    for (auto* m : {&pair.changed, &pair.standard}) {
        sort_by_path(m->train);
        sort_by_path(m->test);
    }
    return pair;
}

Validation validate_manifest(const ScenarioManifest& m) {
    std::set<std::string> train_ids;
    for (const auto& r : m.train) {
        if (auto v = validate_record(r); !v) return Validation::fail("record_valid: " + r.id + ": " + v.reason);
        if (!train_ids.insert(r.id).second) return Validation::fail("unique_ids: duplicate train id " + r.id);
        if (r.role != Role::train) return Validation::fail("train_role: " + r.id);
        if (r.label != Label::normal) return Validation::fail("train_labels_normal: " + r.id);
        if (r.is_target && m.scenario == Scenario::A2N && m.sub_scenario == SubScenario::standard) {
            return Validation::fail("a2n_standard_no_target_in_train: " + r.id);
        }
        if (r.is_target && m.scenario == Scenario::N2A && m.sub_scenario == SubScenario::changed) {
            return Validation::fail("n2a_changed_no_target_in_train: " + r.id);
        }
    }
    std::set<std::string> test_ids;
    for (const auto& r : m.test) {
        if (auto v = validate_record(r); !v) return Validation::fail("record_valid: " + r.id + ": " + v.reason);
        if (!test_ids.insert(r.id).second) return Validation::fail("unique_ids: duplicate test id " + r.id);
        if (train_ids.count(r.id)) return Validation::fail("train_test_disjoint: " + r.id);
        if (r.role != Role::test) return Validation::fail("test_role: " + r.id);
        if (r.is_target) {
            const bool as_normal = (m.scenario == Scenario::A2N) == (m.sub_scenario == SubScenario::changed);
            const Label expected = as_normal ? Label::normal : Label::anomalous;
            if (r.label != expected) return Validation::fail("target_label_by_sub_scenario: " + r.id);
        }
    }
    return Validation::pass();
}

namespace {

ojson record_to_json(const SampleRecord& r) {
    ojson j;
    j["id"] = r.id;
    j["image_path"] = r.image_path;
    j["mask_path"] = r.mask_path ? ojson(*r.mask_path) : ojson(nullptr);
    j["label"] = std::string(to_string(r.label));
    j["role"] = std::string(to_string(r.role));
    j["defect_class"] = r.defect_class;
    j["is_target"] = r.is_target;
    return j;
}

const ojson& field(const ojson& j, const std::string& name, const std::string& where) {
    if (!j.is_object() || !j.contains(name)) throw Error("manifest: missing field '" + where + name + "'");
    return j.at(name);
}

template <typename T>
T typed(const ojson& j, const std::string& name, const std::string& where) {
    const auto& v = field(j, name, where);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error("manifest: field '" + where + name + "' has the wrong type");
    }
}

SampleRecord record_from_json(const ojson& j, const std::string& where) {
    SampleRecord r;
    r.id = typed<std::string>(j, "id", where);
    r.image_path = typed<std::string>(j, "image_path", where);
    const auto& mask = field(j, "mask_path", where);
    if (!mask.is_null()) r.mask_path = typed<std::string>(j, "mask_path", where);
    try {
        r.label = parse_label(typed<std::string>(j, "label", where));
        r.role = parse_role(typed<std::string>(j, "role", where));
    } catch (const Error& e) {
        throw Error("manifest: " + where + ": " + e.what());
    }
    r.defect_class = typed<std::string>(j, "defect_class", where);
    r.is_target = typed<bool>(j, "is_target", where);
    return r;
}

}  // namespace

std::string manifest_to_json(const ScenarioManifest& m) {
    ojson j;
    j["schema"] = "specshift.manifest/1";
    j["scenario"] = std::string(to_string(m.scenario));
    j["sub_scenario"] = std::string(to_string(m.sub_scenario));
    j["class_name"] = m.class_name;
    j["target_class"] = m.target_class;
    j["dataset_root"] = m.dataset_root;
    ojson prov;
    prov["dataset_hash"] = m.provenance.dataset_hash;
    prov["builder_version"] = m.provenance.builder_version;
    prov["max_area_fraction"] = m.provenance.max_area_fraction;
    prov["target_selection"] = m.provenance.target_selection;
    prov["target_area_fraction"] = m.provenance.target_area_fraction;
    prov["pseudo_source"] = m.provenance.pseudo_source;
    prov["pseudo_hash"] = m.provenance.pseudo_hash;
    j["provenance"] = prov;
    j["train"] = ojson::array();
    for (const auto& r : m.train) j["train"].push_back(record_to_json(r));
    j["test"] = ojson::array();
    for (const auto& r : m.test) j["test"].push_back(record_to_json(r));
    return j.dump(2) + "\n";
}

ScenarioManifest manifest_from_json(std::string_view text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("manifest: invalid JSON: ") + e.what());
    }
    ScenarioManifest m;
    if (typed<std::string>(j, "schema", "") != "specshift.manifest/1") throw Error("manifest: unsupported schema");
    try {
        m.scenario = parse_scenario(typed<std::string>(j, "scenario", ""));
        m.sub_scenario = parse_sub_scenario(typed<std::string>(j, "sub_scenario", ""));
    } catch (const Error& e) {
        throw Error(std::string("manifest: ") + e.what());
    }
    m.class_name = typed<std::string>(j, "class_name", "");
    m.target_class = typed<std::string>(j, "target_class", "");
    m.dataset_root = typed<std::string>(j, "dataset_root", "");
    const auto& prov = field(j, "provenance", "");
    m.provenance.dataset_hash = typed<std::string>(prov, "dataset_hash", "provenance.");
    m.provenance.builder_version = typed<std::string>(prov, "builder_version", "provenance.");
    m.provenance.max_area_fraction = typed<double>(prov, "max_area_fraction", "provenance.");
    m.provenance.target_selection = typed<std::string>(prov, "target_selection", "provenance.");
    m.provenance.target_area_fraction = typed<double>(prov, "target_area_fraction", "provenance.");
    m.provenance.pseudo_source = typed<std::string>(prov, "pseudo_source", "provenance.");
    m.provenance.pseudo_hash = typed<std::string>(prov, "pseudo_hash", "provenance.");
    for (const char* part : {"train", "test"}) {
        const auto& list = field(j, part, "");
        if (!list.is_array()) throw Error(std::string("manifest: field '") + part + "' has the wrong type");
        auto& dst = std::string_view(part) == "train" ? m.train : m.test;
        for (std::size_t i = 0; i < list.size(); ++i) {
            dst.push_back(record_from_json(list[i], std::string(part) + "[" + std::to_string(i) + "]."));
        }
    }
    if (auto v = validate_manifest(m); !v) throw Error("manifest violates invariant " + v.reason);
    return m;
}

void write_manifest(const ScenarioManifest& m, const std::filesystem::path& path) {
    if (auto v = validate_manifest(m); !v) throw Error("refusing to write manifest: invariant " + v.reason);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest '" + path.string() + "'");
    out << manifest_to_json(m);
    if (!out) throw Error("cannot write manifest '" + path.string() + "'");
}

ScenarioManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read manifest '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return manifest_from_json(buf.str());
}

std::string manifest_hash(const ScenarioManifest& m) {
    Fnv1a h;
    h.update(manifest_to_json(m));
    return h.hex();
}

std::vector<SampleRecord> target_records(const std::vector<SampleRecord>& records) {
    std::vector<SampleRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [](const SampleRecord& r) { return r.is_target; });
    return out;
}

}  // namespace specshift
