#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>

#include "specshift/dataset_io.hpp"
#include "specshift/error.hpp"
#include "specshift/random.hpp"

namespace specshift {

namespace {

std::vector<fs::path> list_pngs(const fs::path& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<std::string> list_subdirs(const fs::path& dir) {
    std::vector<std::string> names;
    if (!fs::is_directory(dir)) return names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory()) names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

void hash_file(Fnv1a& h, const fs::path& root, const std::string& rel) {
    std::ifstream in(root / rel, std::ios::binary);
    if (!in) throw Error("cannot read '" + (root / rel).string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    h.update(rel);
    h.update(std::span<const std::uint8_t>(bytes));
}

std::string relative_string(const fs::path& p, const fs::path& root) {
    return p.lexically_relative(root).generic_string();
}

}  // namespace

const DefectClassStats* DatasetIndex::find_defect(std::string_view name) const {
    auto it = std::find_if(defect_classes.begin(), defect_classes.end(),
                           [&](const DefectClassStats& d) { return d.name == name; });
    return it == defect_classes.end() ? nullptr : &*it;
}

std::vector<SampleRecord> DatasetIndex::select(Role role, std::string_view defect_class) const {
    std::vector<SampleRecord> out;
    std::copy_if(samples.begin(), samples.end(), std::back_inserter(out), [&](const SampleRecord& r) {
        return r.role == role && r.defect_class == defect_class;
    });
    return out;
}

DatasetIndex load_dataset(const fs::path& root, const std::string& class_name) {
    const fs::path class_dir = root / class_name;
    if (!fs::is_directory(class_dir)) throw Error("class directory '" + class_dir.string() + "' does not exist");

    DatasetIndex index;
    index.root = root;
    index.class_name = class_name;

    for (const auto& file : list_pngs(class_dir / "train" / "good")) {
        SampleRecord r;
        r.id = "train/good/" + file.stem().string();
        r.image_path = relative_string(file, root);
        r.label = Label::normal;
        r.role = Role::train;
        index.samples.push_back(std::move(r));
    }
    if (index.samples.empty()) throw Error("no train samples under '" + (class_dir / "train" / "good").string() + "'");

    std::map<std::string, std::pair<double, int>> area_sums;
    std::size_t n_test = 0;
    for (const auto& defect : list_subdirs(class_dir / "test")) {
        if (defect == kPseudoClass) continue;
        for (const auto& file : list_pngs(class_dir / "test" / defect)) {
            SampleRecord r;
            r.id = "test/" + defect + "/" + file.stem().string();
            r.image_path = relative_string(file, root);
            r.role = Role::test;
            r.defect_class = defect;
            const Image img = read_image(file);
            if (defect == kGoodClass) {
                r.label = Label::normal;
            } else {
                const fs::path mask_file = class_dir / "ground_truth" / defect / (file.stem().string() + "_mask.png");
                if (!fs::exists(mask_file)) throw Error("missing ground-truth mask '" + mask_file.string() + "'");
                const PixelMask mask = read_mask(mask_file);
                if (mask.width != img.width || mask.height != img.height) {
                    throw Error("mask '" + mask_file.string() + "' does not match its image dimensions");
                }
                const auto ones = mask.count_ones();
                if (ones == 0) throw Error("empty ground-truth mask '" + mask_file.string() + "'");
                auto& [sum, count] = area_sums[defect];
                sum += static_cast<double>(ones) / static_cast<double>(mask.pixel_count());
                ++count;
                r.label = Label::anomalous;
                r.mask_path = relative_string(mask_file, root);
            }
            index.samples.push_back(std::move(r));
            ++n_test;
        }
    }
    if (n_test == 0) throw Error("no test samples under '" + (class_dir / "test").string() + "'");

    for (const auto& [name, acc] : area_sums) {
        index.defect_classes.push_back({name, acc.first / acc.second, acc.second});
    }
    std::sort(index.samples.begin(), index.samples.end(),
              [](const SampleRecord& a, const SampleRecord& b) { return a.image_path < b.image_path; });

    Fnv1a h;
    h.update(class_name);
    for (const auto& r : index.samples) {
        // test images were already decoded above; decode train images too so
        // an unreadable file fails at load time
        if (r.role == Role::train) (void)read_image(root / r.image_path);
        hash_file(h, root, r.image_path);
        if (r.mask_path) hash_file(h, root, *r.mask_path);
    }
    index.content_hash = h.hex();
    return index;
}

Image load_sample_image(const fs::path& root, const SampleRecord& record, int size) {
    Image img = read_image(root / record.image_path);
    if (size > 0 && (img.width != size || img.height != size)) img = resize_bilinear(img, size, size);
    return img;
}

PixelMask load_sample_mask(const fs::path& root, const SampleRecord& record, int width, int height) {
    if (!record.mask_path) return PixelMask(width, height);
    return resize_mask(read_mask(root / *record.mask_path), width, height);
}

}  // namespace specshift
