#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specshift/dataset_io.hpp"
#include "specshift/detector.hpp"
#include "specshift/error.hpp"
#include "specshift/heatmap.hpp"
#include "specshift/metrics.hpp"
#include "specshift/pseudo_anomaly.hpp"
#include "specshift/scenario.hpp"

namespace fs = std::filesystem;
using namespace specshift;

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Left-aligned text table on stdout.
void print_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        width.resize(std::max(width.size(), r.size()));
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t i = 0; i < r.size(); ++i) {
            line += r[i];
            if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
        }
        std::cout << line << "\n";
    }
}

DefectSpec parse_defect(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 5) throw Error("--defect expects name:kind:count:area_lo:area_hi, got '" + text + "'");
    DefectSpec d;
    d.name = parts[0];
    d.kind = parse_defect_kind(parts[1]);
    try {
        d.count = std::stoi(parts[2]);
        d.area_lo = std::stod(parts[3]);
        d.area_hi = std::stod(parts[4]);
    } catch (const std::exception&) {
        throw Error("--defect has a malformed number in '" + text + "'");
    }
    return d;
}

void print_dataset(const DatasetIndex& index) {
    int train = 0;
    int test_good = 0;
    for (const auto& r : index.samples) {
        if (r.role == Role::train) ++train;
        else if (r.defect_class == kGoodClass) ++test_good;
    }
    std::vector<std::vector<std::string>> rows{{"class", "defect", "count", "mean_area"}};
    rows.push_back({index.class_name, "train/good", std::to_string(train), "-"});
    rows.push_back({index.class_name, "test/good", std::to_string(test_good), "-"});
    for (const auto& d : index.defect_classes) {
        rows.push_back({index.class_name, d.name, std::to_string(d.count), fixed(d.mean_area_fraction, 5)});
    }
    print_table(rows);
}

Image load_for(const DetectorModel& model, const fs::path& root, const SampleRecord& r) {
    return load_sample_image(root, r, model.input_size);
}

ScoreTable score_records(const DetectorModel& model, const fs::path& root, const std::vector<SampleRecord>& records) {
    ScoreTable table;
    for (const auto& r : records) {
        auto s = score(model, load_for(model, root, r));
        table[r.id] = SampleScore{s.image_score, std::move(s.map)};
    }
    return table;
}

ScoreSet image_scores(const ScoreTable& table) {
    ScoreSet set;
    for (const auto& [id, s] : table) set.entries.push_back({id, s.image_score, 0});
    return set;
}

// ---- commands ----------------------------------------------------------------

struct GenSyntheticArgs {
    std::string out;
    std::uint64_t seed = 7;
    std::string class_name = "synth";
    int image_size = 256;
    int channels = 1;
    int n_train = 40;
    int n_test = 20;
    std::vector<std::string> defects;
};

int cmd_gen_synthetic(const GenSyntheticArgs& a) {
    SyntheticSpec spec = default_synthetic_spec();
    spec.seed = a.seed;
    spec.class_name = a.class_name;
    spec.image_size = a.image_size;
    spec.channels = a.channels;
    spec.n_train_normal = a.n_train;
    spec.n_test_normal = a.n_test;
    if (!a.defects.empty()) {
        spec.defects.clear();
        for (const auto& d : a.defects) spec.defects.push_back(parse_defect(d));
    }
    validate(spec);
    const auto index = generate_synthetic(spec, a.out);
    print_dataset(index);
    return 0;
}

struct GenPseudoArgs {
    std::string dataset;
    std::string class_name;
    std::string out;  // defaults to the dataset root
    std::uint64_t seed = 0;
    int count = 40;
    std::string mask = "blob";
    std::string fill = "texture_shuffle";
    double area_lo = 0.004;
    double area_hi = 0.008;
    double shift = 0.3;
    int image_size = 0;
};

int cmd_gen_pseudo(const GenPseudoArgs& a) {
    const auto index = load_dataset(a.dataset, a.class_name);
    PseudoSpec spec;
    spec.seed = a.seed;
    spec.count = a.count;
    spec.mask_kind = parse_mask_kind(a.mask);
    spec.fill_kind = parse_fill_kind(a.fill);
    spec.area_lo = a.area_lo;
    spec.area_hi = a.area_hi;
    spec.fill.intensity_shift = a.shift;
    spec.image_size = a.image_size;
    spec.source = index.select(Role::train, kGoodClass);
    validate(spec);
    const fs::path out = a.out.empty() ? fs::path(a.dataset) : fs::path(a.out);
    const auto records = generate_pseudo_set(spec, a.dataset, a.class_name, out);
    print_table({{"class", "pseudo", "mask", "fill", "source"},
                 {a.class_name, std::to_string(records.size()), a.mask, a.fill, "train/good"}});
    return 0;
}

struct BuildScenarioArgs {
    std::string dataset;
    std::string class_name;
    std::string scenario;
    std::string target = "auto";
    std::string out;
    double max_area = kDefaultMaxAreaFraction;
    std::string pseudo_root;  // defaults to the dataset root
};

void write_pair(const ManifestPair& pair, const fs::path& dir) {
    write_manifest(pair.changed, dir / "changed.json");
    write_manifest(pair.standard, dir / "standard.json");
    auto count = [](const std::vector<SampleRecord>& rs, bool targets) {
        std::size_t n = 0;
        for (const auto& r : rs) n += r.is_target == targets;
        return std::to_string(n);
    };
    std::vector<std::vector<std::string>> rows{{"manifest", "target", "train", "train_targets", "test", "test_targets"}};
    for (const auto* m : {&pair.changed, &pair.standard}) {
        rows.push_back({(dir / (m == &pair.changed ? "changed.json" : "standard.json")).generic_string(), m->target_class,
                        std::to_string(m->train.size()), count(m->train, true), std::to_string(m->test.size()),
                        count(m->test, true)});
    }
    print_table(rows);
}

int cmd_build_scenario(const BuildScenarioArgs& a) {
    const Scenario scenario = parse_scenario(a.scenario);
    const auto index = load_dataset(a.dataset, a.class_name);
    BuildOptions opts;
    opts.max_area_fraction = a.max_area;
    const fs::path out = a.out;

    if (scenario == Scenario::N2A) {
        const fs::path pseudo_root = a.pseudo_root.empty() ? fs::path(a.dataset) : fs::path(a.pseudo_root);
        auto pseudo = load_pseudo_set(pseudo_root, a.class_name);
        if (pseudo.empty()) {
            throw Error("no pseudo-anomaly set under '" + (pseudo_root / a.class_name / "test" / "pseudo").generic_string() +
                        "'; run 'specshift gen-pseudo --dataset " + a.dataset + " --class " + a.class_name + "' first");
        }
        if (!a.pseudo_root.empty()) {
            const fs::path base = fs::absolute(a.dataset).lexically_normal();
            const fs::path proot = fs::absolute(pseudo_root).lexically_normal();
            for (auto& r : pseudo) {
                r.image_path = (proot / r.image_path).lexically_relative(base).generic_string();
                r.mask_path = (proot / *r.mask_path).lexically_relative(base).generic_string();
            }
        }
        write_pair(build_n2a(index, pseudo, opts), out);
        return 0;
    }

    std::vector<std::string> targets;
    if (a.target == "auto") {
        opts.target_selection = "auto";
        targets = select_targets(index, a.max_area);
        if (targets.empty()) {
            std::string msg = "no defect class qualifies as a target (mean area fraction < " + fixed(a.max_area, 4) + "):";
            for (const auto& d : index.defect_classes) {
                msg += "\n  " + d.name + ": " + fixed(d.mean_area_fraction, 4) + " >= " + fixed(a.max_area, 4);
            }
            throw Error(msg);
        }
    } else {
        targets.push_back(a.target);
    }
    if (targets.size() == 1) {
        write_pair(build_a2n(index, targets.front(), opts), out);
    } else {
        for (const auto& t : targets) write_pair(build_a2n(index, t, opts), out / t);
    }
    return 0;
}

struct TrainArgs {
    std::string manifest;
    std::string out;
    std::uint64_t seed = 0;
    int epochs = 2;
    std::string repaste = "mixup";
    double tau = 0.9;
    std::string chain_source = "augmented";
    int image_size = 256;
    int patch = 16;
    int stride = 8;
    int k = 1;
    double coreset = 0.25;
};

int cmd_train(const TrainArgs& a) {
    const auto manifest = read_manifest(a.manifest);
    ModelConfig mc;
    mc.features.patch_size = a.patch;
    mc.features.stride = a.stride;
    mc.k_neighbors = a.k;
    mc.coreset_fraction = a.coreset;
    mc.seed = a.seed;
    TrainConfig tc;
    tc.epochs = a.epochs;
    tc.repaste.mode = parse_repaste_mode(a.repaste);
    tc.repaste.tau = a.tau;
    tc.repaste.chain_source = parse_chain_source(a.chain_source);
    tc.shuffle_seed = a.seed;
    if (a.image_size < 0) throw Error("--image-size must be non-negative");

    std::vector<Image> images;
    images.reserve(manifest.train.size());
    for (const auto& r : manifest.train) images.push_back(load_sample_image(manifest.dataset_root, r, a.image_size));
    auto model = fit(images, tc, mc, manifest_hash(manifest));
    model.input_size = a.image_size;
    save_model(model, a.out);
    print_table({{"model", "manifest", "train", "bank_rows", "dim", "repaste", "epochs"},
                 {a.out, std::string(to_string(manifest.sub_scenario)), std::to_string(images.size()),
                  std::to_string(model.size()), std::to_string(model.dim), a.repaste, std::to_string(a.epochs)}});
    return 0;
}

struct EvalArgs {
    std::string model;
    std::string manifest;
    std::string out;
    std::vector<std::string> metrics{"i_auroc", "p_auroc", "pro"};
    double fpr_limit = 0.3;
};

int cmd_eval(const EvalArgs& a) {
    const auto model = load_model(a.model);
    const auto manifest = read_manifest(a.manifest);
    EvalOptions opts;
    opts.metrics.clear();
    std::set<std::string> seen;
    for (const auto& m : a.metrics) {
        opts.metrics.push_back(parse_metric(m));
        if (!seen.insert(m).second) throw Error("metric '" + m + "' requested twice");
    }
    opts.pro.fpr_limit = a.fpr_limit;
    const fs::path root = manifest.dataset_root;
    const auto scores = score_records(model, root, manifest.test);
    auto report = evaluate_manifest(scores, manifest, [&](const SampleRecord& r, int w, int h) {
        return load_sample_mask(root, r, w, h);
    }, opts);
    report.model = model.trained_on;
    write_metrics_report(report, a.out);
    std::vector<std::vector<std::string>> rows{{"metric", "value"}};
    for (const auto& [k, v] : report.metrics) rows.push_back({k, fixed(v)});
    print_table(rows);
    return 0;
}

struct SAurocArgs {
    std::string pre;
    std::string post;
    std::string manifest_changed;
    std::string manifest_standard;
    std::string out;
};

int cmd_s_auroc(const SAurocArgs& a) {
    const auto pre = load_model(a.pre);
    const auto post = load_model(a.post);
    const auto changed = read_manifest(a.manifest_changed);
    const auto standard = read_manifest(a.manifest_standard);
    if (changed.sub_scenario != SubScenario::changed) throw Error("--manifest-changed is a standard manifest");
    if (standard.sub_scenario != SubScenario::standard) throw Error("--manifest-standard is a changed manifest");
    if (changed.scenario != standard.scenario || changed.class_name != standard.class_name ||
        changed.target_class != standard.target_class) {
        throw Error("manifests do not describe the same specification change");
    }
    if (pre.trained_on != manifest_hash(standard)) {
        std::cerr << "warning: --pre was not trained on the standard manifest\n";
    }
    if (post.trained_on != manifest_hash(changed)) {
        std::cerr << "warning: --post was not trained on the changed manifest\n";
    }

    const TargetRole role = changed.scenario == Scenario::A2N ? TargetRole::as_normal : TargetRole::as_anomalous;
    std::set<std::string> target_ids;
    std::set<std::string> contrast_ids;
    std::vector<SampleRecord> needed;
    for (const auto& r : changed.test) {
        const bool contrast = !r.is_target && (role == TargetRole::as_normal ? r.label == Label::anomalous
                                                                             : r.label == Label::normal);
        if (r.is_target) target_ids.insert(r.id);
        else if (contrast) contrast_ids.insert(r.id);
        else continue;
        needed.push_back(r);
    }
    const fs::path root = changed.dataset_root;
    auto report = s_auroc(image_scores(score_records(pre, root, needed)), image_scores(score_records(post, root, needed)),
                          target_ids, contrast_ids, role);
    report.target_class = changed.target_class;
    report.pre_model = pre.trained_on;
    report.post_model = post.trained_on;
    write_s_auroc_report(report, a.out);
    print_table({{"target", "role", "n_target", "n_contrast", "pre", "post", "delta"},
                 {report.target_class, std::string(to_string(role)), std::to_string(report.n_target),
                  std::to_string(report.n_contrast), fixed(report.pre_change_auroc), fixed(report.post_change_auroc),
                  fixed(report.delta)}});
    return 0;
}

struct RenderArgs {
    std::string model;
    std::string image;
    std::string manifest;
    std::string out;
};

int cmd_render(const RenderArgs& a) {
    const auto model = load_model(a.model);
    if (a.image.empty() == a.manifest.empty()) throw Error("render needs exactly one of --image or --manifest");
    if (!a.image.empty()) {
        Image img = read_image(a.image);
        if (model.input_size > 0) img = resize_bilinear(img, model.input_size, model.input_size);
        write_heatmap(a.out, img, score(model, img).map);
        std::cout << a.out << "\n";
        return 0;
    }
    const auto manifest = read_manifest(a.manifest);
    for (const auto& r : manifest.test) {
        const Image img = load_for(model, manifest.dataset_root, r);
        std::string name = r.id;
        for (auto& c : name) if (c == '/') c = '_';
        write_heatmap(fs::path(a.out) / (name + ".png"), img, score(model, img).map);
    }
    std::cout << manifest.test.size() << " heatmaps in " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"specshift: anomaly detection under specification changes"};
    app.require_subcommand(1);

    GenSyntheticArgs gs;
    auto* c_gs = app.add_subcommand("gen-synthetic", "Generate a seeded synthetic MVTec-layout class");
    c_gs->add_option("--out", gs.out, "Output dataset root")->required();
    c_gs->add_option("--seed", gs.seed, "Seed")->capture_default_str();
    c_gs->add_option("--class", gs.class_name, "Class name")->capture_default_str();
    c_gs->add_option("--image-size", gs.image_size, "Image side length")->capture_default_str();
    c_gs->add_option("--channels", gs.channels, "1 or 3")->capture_default_str();
    c_gs->add_option("--n-train", gs.n_train, "Training normals")->capture_default_str();
    c_gs->add_option("--n-test", gs.n_test, "Test normals")->capture_default_str();
    c_gs->add_option("--defect", gs.defects, "name:kind:count:area_lo:area_hi (repeatable; replaces the defaults)");

    GenPseudoArgs gp;
    auto* c_gp = app.add_subcommand("gen-pseudo", "Generate a pseudo-anomaly set from training normals");
    c_gp->add_option("--dataset", gp.dataset, "Dataset root")->required()->check(CLI::ExistingDirectory);
    c_gp->add_option("--class", gp.class_name, "Class name")->required();
    c_gp->add_option("--out", gp.out, "Output root (default: the dataset root)");
    c_gp->add_option("--seed", gp.seed, "Seed")->capture_default_str();
    c_gp->add_option("--count", gp.count, "Number of pseudo-anomalies")->capture_default_str();
    c_gp->add_option("--mask", gp.mask, "blob or scratch")->capture_default_str();
    c_gp->add_option("--fill", gp.fill, "texture_shuffle, intensity_shift or noise_fill")->capture_default_str();
    c_gp->add_option("--area-lo", gp.area_lo, "Minimum mask area fraction")->capture_default_str();
    c_gp->add_option("--area-hi", gp.area_hi, "Maximum mask area fraction")->capture_default_str();
    c_gp->add_option("--shift", gp.shift, "Intensity shift for intensity_shift")->capture_default_str();
    c_gp->add_option("--image-size", gp.image_size, "Resize sources (0 keeps them)")->capture_default_str();

    BuildScenarioArgs bs;
    auto* c_bs = app.add_subcommand("build-scenario", "Write changed/standard manifests for a specification change");
    c_bs->add_option("--dataset", bs.dataset, "Dataset root")->required()->check(CLI::ExistingDirectory);
    c_bs->add_option("--class", bs.class_name, "Class name")->required();
    c_bs->add_option("--scenario", bs.scenario, "a2n or n2a")->required();
    c_bs->add_option("--target", bs.target, "Target defect class or 'auto' (a2n)")->capture_default_str();
    c_bs->add_option("--out", bs.out, "Output directory")->required();
    c_bs->add_option("--max-area", bs.max_area, "Target area-fraction bound for auto")->capture_default_str();
    c_bs->add_option("--pseudo-root", bs.pseudo_root, "Root holding the pseudo set (default: the dataset root)")
        ->check(CLI::ExistingDirectory);

    TrainArgs tr;
    auto* c_tr = app.add_subcommand("train", "Fit the patch memory-bank detector on a manifest");
    c_tr->add_option("--manifest", tr.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
    c_tr->add_option("--out", tr.out, "Model file")->required();
    c_tr->add_option("--seed", tr.seed, "Seed")->capture_default_str();
    c_tr->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
    c_tr->add_option("--repaste", tr.repaste, "mixup, hard or off")->capture_default_str();
    c_tr->add_option("--tau", tr.tau, "RePaste threshold")->capture_default_str();
    c_tr->add_option("--chain-source", tr.chain_source, "augmented or raw")->capture_default_str();
    c_tr->add_option("--image-size", tr.image_size, "Resize inputs (0 keeps them)")->capture_default_str();
    c_tr->add_option("--patch", tr.patch, "Patch size")->capture_default_str();
    c_tr->add_option("--stride", tr.stride, "Patch stride")->capture_default_str();
    c_tr->add_option("--k", tr.k, "Nearest neighbours")->capture_default_str();
    c_tr->add_option("--coreset", tr.coreset, "Coreset fraction")->capture_default_str();

    EvalArgs ev;
    auto* c_ev = app.add_subcommand("eval", "Score a manifest's test split and write metrics");
    c_ev->add_option("--model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
    c_ev->add_option("--manifest", ev.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
    c_ev->add_option("--out", ev.out, "Metrics JSON")->required();
    c_ev->add_option("--metrics", ev.metrics, "Comma-separated subset of i_auroc,p_auroc,pro")
        ->delimiter(',')
        ->capture_default_str();
    c_ev->add_option("--fpr-limit", ev.fpr_limit, "PRO integration limit")->capture_default_str();

    SAurocArgs sa;
    auto* c_sa = app.add_subcommand("s-auroc", "Compare pre- and post-change models on the change targets");
    c_sa->add_option("--pre", sa.pre, "Model trained on the standard manifest")->required()->check(CLI::ExistingFile);
    c_sa->add_option("--post", sa.post, "Model trained on the changed manifest")->required()->check(CLI::ExistingFile);
    c_sa->add_option("--manifest-changed", sa.manifest_changed, "Changed manifest")->required()->check(CLI::ExistingFile);
    c_sa->add_option("--manifest-standard", sa.manifest_standard, "Standard manifest")
        ->required()
        ->check(CLI::ExistingFile);
    c_sa->add_option("--out", sa.out, "Report JSON")->required();

    RenderArgs rd;
    auto* c_rd = app.add_subcommand("render", "Write input|heatmap PNGs");
    c_rd->add_option("--model", rd.model, "Model file")->required()->check(CLI::ExistingFile);
    c_rd->add_option("--image", rd.image, "Single PNG to render")->check(CLI::ExistingFile);
    c_rd->add_option("--manifest", rd.manifest, "Render every test record of a manifest")->check(CLI::ExistingFile);
    c_rd->add_option("--out", rd.out, "Output PNG (--image) or directory (--manifest)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_gs->parsed()) return cmd_gen_synthetic(gs);
        if (c_gp->parsed()) return cmd_gen_pseudo(gp);
        if (c_bs->parsed()) return cmd_build_scenario(bs);
        if (c_tr->parsed()) return cmd_train(tr);
        if (c_ev->parsed()) return cmd_eval(ev);
        if (c_sa->parsed()) return cmd_s_auroc(sa);
        if (c_rd->parsed()) return cmd_render(rd);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
