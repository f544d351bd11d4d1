#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"
#include "specshift/random.hpp"
#include "specshift/shapes.hpp"

namespace specshift {

namespace {

std::string file_name(int i, std::string_view suffix = "") {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03d", i);
    return std::string(buf) + std::string(suffix) + ".png";
}

PixelMask defect_shape(DefectKind kind, int size, std::size_t area, Rng& rng) {
    switch (kind) {
        case DefectKind::spot: return shapes::spot(size, size, area, rng);
        case DefectKind::scratch: return shapes::scratch(size, size, area, rng);
        case DefectKind::blob: return shapes::blob(size, size, area, rng);
    }
    throw Error("unknown defect kind");
}

Image inject_defect(const Image& src, const PixelMask& mask, DefectKind kind, Rng& rng) {
    Image out = src;
    const int ch = src.channels;
    // dust opacity varies widely; larger defects are uniformly strong
    const double strength = kind == DefectKind::spot ? rng.uniform(0.1, 0.4) : rng.uniform(0.25, 0.4);
    std::vector<float> stain;
    if (kind == DefectKind::blob) stain = shapes::smooth_noise(src.width, src.height, 4, rng);
    for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
        if (!mask.data[p]) continue;
        for (int c = 0; c < ch; ++c) {
            const auto i = p * ch + c;
            double v = src.data[i];
            switch (kind) {
                case DefectKind::spot: v -= strength; break;           // dark dust-like speck
                case DefectKind::scratch: v += strength; break;        // bright line
                case DefectKind::blob: v = 0.35 * v + 0.65 * (0.6 + 0.35 * stain[p]); break;  // pale discoloured stain
            }
            out.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    shapes::force_distinct(src, out, mask);
    return out;
}

}  // namespace

std::string_view to_string(DefectKind kind) {
    switch (kind) {
        case DefectKind::scratch: return "scratch";
        case DefectKind::spot: return "spot";
        case DefectKind::blob: return "blob";
    }
    return "?";
}

DefectKind parse_defect_kind(std::string_view text) {
    if (text == "scratch") return DefectKind::scratch;
    if (text == "spot") return DefectKind::spot;
    if (text == "blob") return DefectKind::blob;
    throw Error("unknown defect kind '" + std::string(text) + "'");
}

SyntheticSpec default_synthetic_spec() {
    SyntheticSpec spec;
    spec.defects = {
        {"crack", 12, 0.015, 0.03, DefectKind::scratch},
        {"speck", 40, 0.002, 0.008, DefectKind::spot},
        {"stain", 12, 0.02, 0.05, DefectKind::blob},
    };
    return spec;
}

void validate(const SyntheticSpec& spec) {
    if (spec.class_name.empty()) throw Error("synthetic spec: empty class name");
    if (spec.image_size < 8) throw Error("synthetic spec: image_size must be at least 8");
    if (spec.channels != 1 && spec.channels != 3) throw Error("synthetic spec: channels must be 1 or 3");
    if (spec.n_train_normal <= 0) throw Error("synthetic spec: n_train_normal must be positive");
    if (spec.n_test_normal <= 0) throw Error("synthetic spec: n_test_normal must be positive");
    if (spec.defects.empty()) throw Error("synthetic spec: at least one defect class required");
    std::set<std::string> names;
    for (const auto& d : spec.defects) {
        if (d.name.empty() || d.name == kGoodClass || d.name == kPseudoClass) {
            throw Error("synthetic spec: invalid defect name '" + d.name + "'");
        }
        if (!names.insert(d.name).second) throw Error("synthetic spec: duplicate defect name '" + d.name + "'");
        if (d.count <= 0) throw Error("synthetic spec: defect '" + d.name + "' count must be positive");
        if (!(d.area_lo > 0.0 && d.area_hi < 1.0 && d.area_lo <= d.area_hi)) {
            throw Error("synthetic spec: defect '" + d.name + "' area range must lie within (0,1)");
        }
        (void)shapes::area_bounds(spec.image_size, spec.image_size, d.area_lo, d.area_hi);
    }
}

Image synthesize_normal(const SyntheticSpec& spec, std::uint64_t image_seed) {
    const int n = spec.image_size;
    // Class-level structure comes from spec.seed only, so every image of the
    // class shares the same pattern family.
    Rng cls(derive_seed(spec.seed, "class-structure"));
    const double angle = cls.uniform(0.0, std::numbers::pi);
    const double period = n / cls.uniform(3.0, 6.0);
    const double base = cls.uniform(0.4, 0.55);
    double tint[3] = {1.0, 1.0, 1.0};
    if (spec.channels == 3) {
        for (auto& t : tint) t = cls.uniform(0.85, 1.15);
    }

    Rng rng(image_seed);
    const double phase = rng.uniform(0.0, 0.05);  // parts sit in a fixture, so the pattern barely shifts
    const auto low = shapes::smooth_noise(n, n, std::max(4, n / 8), rng);
    Image img(n, n, spec.channels);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double u = (x * std::cos(angle) + y * std::sin(angle)) / period;
            const double structure = 0.1 * std::sin(2.0 * std::numbers::pi * (u + phase));
            const double drift = 0.08 * (low[static_cast<std::size_t>(y) * n + x] - 0.5);
            const double grain = 0.01 * rng.normal();
            for (int c = 0; c < spec.channels; ++c) {
                const double v = (base + structure + drift) * tint[c] + grain;
                img.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return img;
}

DatasetIndex generate_synthetic(const SyntheticSpec& spec, const fs::path& out) {
    validate(spec);
    const fs::path class_dir = out / spec.class_name;
    std::error_code ec;
    fs::create_directories(class_dir, ec);
    if (ec) throw Error("cannot create '" + class_dir.string() + "': " + ec.message());

    for (int i = 0; i < spec.n_train_normal; ++i) {
        write_image(synthesize_normal(spec, derive_seed(spec.seed, "train", static_cast<std::uint64_t>(i))),
                    class_dir / "train" / "good" / file_name(i));
    }
    for (int i = 0; i < spec.n_test_normal; ++i) {
        write_image(synthesize_normal(spec, derive_seed(spec.seed, "test-good", static_cast<std::uint64_t>(i))),
                    class_dir / "test" / "good" / file_name(i));
    }
    for (const auto& d : spec.defects) {
        for (int i = 0; i < d.count; ++i) {
            const auto idx = static_cast<std::uint64_t>(i);
            const Image clean = synthesize_normal(spec, derive_seed(spec.seed, "defect-source:" + d.name, idx));
            Rng rng(derive_seed(spec.seed, "defect:" + d.name, idx));
            const auto area = shapes::draw_area(spec.image_size, spec.image_size, d.area_lo, d.area_hi, rng);
            const PixelMask mask = defect_shape(d.kind, spec.image_size, area, rng);
            write_image(inject_defect(clean, mask, d.kind, rng), class_dir / "test" / d.name / file_name(i));
            write_mask(mask, class_dir / "ground_truth" / d.name / file_name(i, "_mask"));
        }
    }
    return load_dataset(out, spec.class_name);
}

}  // namespace specshift
