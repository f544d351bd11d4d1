#include "specshift/pseudo_anomaly.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"
#include "specshift/random.hpp"
#include "specshift/shapes.hpp"

namespace specshift {

std::string_view to_string(MaskKind kind) { return kind == MaskKind::blob ? "blob" : "scratch"; }

std::string_view to_string(FillKind kind) {
    switch (kind) {
        case FillKind::texture_shuffle: return "texture_shuffle";
        case FillKind::intensity_shift: return "intensity_shift";
        case FillKind::noise_fill: return "noise_fill";
    }
    return "?";
}

MaskKind parse_mask_kind(std::string_view text) {
    if (text == "blob") return MaskKind::blob;
    if (text == "scratch") return MaskKind::scratch;
    throw Error("unknown mask kind '" + std::string(text) + "'");
}

FillKind parse_fill_kind(std::string_view text) {
    if (text == "texture_shuffle") return FillKind::texture_shuffle;
    if (text == "intensity_shift") return FillKind::intensity_shift;
    if (text == "noise_fill") return FillKind::noise_fill;
    throw Error("unknown fill kind '" + std::string(text) + "'");
}

void validate(const PseudoSpec& spec) {
    if (spec.count < 2) throw Error("pseudo spec: count must be at least 2");
    if (!(spec.area_lo > 0.0 && spec.area_hi < 1.0 && spec.area_lo <= spec.area_hi)) {
        throw Error("pseudo spec: area range must lie within (0,1)");
    }
    if (spec.source.empty()) throw Error("pseudo spec: empty source set");
    if (spec.image_size < 0) throw Error("pseudo spec: negative image size");
}

PixelMask generate_mask(std::uint64_t seed, int width, int height, MaskKind kind, double area_lo, double area_hi) {
    Rng rng(seed);
    const auto area = shapes::draw_area(width, height, area_lo, area_hi, rng);
    return kind == MaskKind::blob ? shapes::blob(width, height, area, rng) : shapes::scratch(width, height, area, rng);
}

namespace {

bool same_quantized(const Image& a, const Image& b, std::size_t pixel) {
    for (int c = 0; c < a.channels; ++c) {
        const auto i = pixel * a.channels + c;
        if (quantize(a.data[i]) != quantize(b.data[i])) return false;
    }
    return true;
}

}  // namespace

Image apply_pseudo(const Image& img, const PixelMask& mask, FillKind fill, std::uint64_t seed, const FillOptions& opts) {
    require_valid(img, "apply_pseudo");
    if (mask.width != img.width || mask.height != img.height) throw Error("apply_pseudo: mask and image dimensions differ");

    Image out = img;
    Rng rng(seed);
    const int ch = img.channels;
    constexpr int kTries = 16;

    std::vector<std::size_t> outside;
    if (fill == FillKind::texture_shuffle) {
        for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
            if (!mask.data[p]) outside.push_back(p);
        }
    }

    for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
        if (!mask.data[p]) continue;
        switch (fill) {
            case FillKind::intensity_shift: {
                for (int c = 0; c < ch; ++c) {
                    const auto i = p * ch + c;
                    const float v = img.data[i];
                    float shifted = static_cast<float>(std::clamp(v + opts.intensity_shift, 0.0, 1.0));
                    if (shifted == v) shifted = static_cast<float>(std::clamp(v - opts.intensity_shift, 0.0, 1.0));
                    out.data[i] = shifted;
                }
                break;
            }
            case FillKind::texture_shuffle: {
                if (outside.empty()) break;  // nothing to draw from; force_distinct below still alters the pixel
                for (int t = 0; t < kTries; ++t) {
                    const auto donor = outside[rng.below(outside.size())];
                    for (int c = 0; c < ch; ++c) out.data[p * ch + c] = img.data[donor * ch + c];
                    if (!same_quantized(img, out, p)) break;
                }
                break;
            }
            case FillKind::noise_fill: {
                for (int t = 0; t < kTries; ++t) {
                    for (int c = 0; c < ch; ++c) out.data[p * ch + c] = static_cast<float>(rng.uniform());
                    if (!same_quantized(img, out, p)) break;
                }
                break;
            }
        }
    }
    shapes::force_distinct(img, out, mask);
    return out;
}

namespace {

std::string numbered(int i, std::string_view suffix) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03d", i);
    return std::string(buf) + std::string(suffix) + ".png";
}

}  // namespace

std::vector<SampleRecord> generate_pseudo_set(const PseudoSpec& spec, const std::filesystem::path& source_root,
                                              const std::string& class_name, const std::filesystem::path& out) {
    validate(spec);
    namespace fs = std::filesystem;
    const fs::path class_dir = out / class_name;

    std::vector<SampleRecord> records;
    nlohmann::ordered_json sources = nlohmann::ordered_json::array();
    for (int i = 0; i < spec.count; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        const auto& src_rec = spec.source[static_cast<std::size_t>(i) % spec.source.size()];
        const Image src = load_sample_image(source_root, src_rec, spec.image_size);
        const PixelMask mask = generate_mask(derive_seed(spec.seed, "pseudo-mask", idx), src.width, src.height,
                                             spec.mask_kind, spec.area_lo, spec.area_hi);
        const Image corrupted = apply_pseudo(src, mask, spec.fill_kind, derive_seed(spec.seed, "pseudo-fill", idx), spec.fill);

        const fs::path image_file = class_dir / "test" / std::string(kPseudoClass) / numbered(i, "");
        const fs::path mask_file = class_dir / "ground_truth" / std::string(kPseudoClass) / numbered(i, "_mask");
        write_image(corrupted, image_file);
        write_mask(mask, mask_file);

        SampleRecord r;
        r.id = "test/" + std::string(kPseudoClass) + "/" + image_file.stem().string();
        r.image_path = image_file.lexically_relative(out).generic_string();
        r.mask_path = mask_file.lexically_relative(out).generic_string();
        r.label = Label::anomalous;
        r.role = Role::test;
        r.defect_class = std::string(kPseudoClass);
        r.is_target = true;
        records.push_back(r);
        sources.push_back({{"id", r.id}, {"source", src_rec.id}});
    }

    nlohmann::ordered_json meta;
    meta["schema"] = "specshift.pseudo/1";
    meta["seed"] = spec.seed;
    meta["count"] = spec.count;
    meta["mask_kind"] = std::string(to_string(spec.mask_kind));
    meta["area_range"] = {spec.area_lo, spec.area_hi};
    meta["fill_kind"] = std::string(to_string(spec.fill_kind));
    meta["intensity_shift"] = spec.fill.intensity_shift;
    meta["image_size"] = spec.image_size;
    meta["source_role"] = "train/good";
    meta["samples"] = sources;
    std::ofstream meta_out(class_dir / "pseudo.json", std::ios::binary);
    if (!meta_out) throw Error("cannot write '" + (class_dir / "pseudo.json").string() + "'");
    meta_out << meta.dump(2) << "\n";
    return records;
}

std::vector<SampleRecord> load_pseudo_set(const std::filesystem::path& root, const std::string& class_name) {
    namespace fs = std::filesystem;
    const fs::path dir = root / class_name / "test" / std::string(kPseudoClass);
    std::vector<SampleRecord> records;
    if (!fs::is_directory(dir)) return records;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const fs::path mask_file = root / class_name / "ground_truth" / std::string(kPseudoClass) /
                                   (f.stem().string() + "_mask.png");
        if (!fs::exists(mask_file)) throw Error("missing pseudo mask '" + mask_file.string() + "'");
        SampleRecord r;
        r.id = "test/" + std::string(kPseudoClass) + "/" + f.stem().string();
        r.image_path = f.lexically_relative(root).generic_string();
        r.mask_path = mask_file.lexically_relative(root).generic_string();
        r.label = Label::anomalous;
        r.role = Role::test;
        r.defect_class = std::string(kPseudoClass);
        r.is_target = true;
        records.push_back(r);
    }
    return records;
}

}  // namespace specshift
