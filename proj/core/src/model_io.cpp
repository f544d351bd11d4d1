#include <cstring>
#include <fstream>

#include <json.hpp>

#include "specshift/detector.hpp"
#include "specshift/error.hpp"

// Model file layout (little-endian):
//   "SSDM" | u32 version | u64 header length | header JSON |
//   u64 rows | u32 dim | rows*dim f32 | rows i32 (source image index)
namespace specshift {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'D', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw Error("model file '" + path + "' is truncated");
    return v;
}

nlohmann::ordered_json header_of(const DetectorModel& m) {
    const auto& f = m.config.features;
    nlohmann::ordered_json j;
    j["features"] = {{"patch_size", f.patch_size},     {"stride", f.stride},
                     {"hist_bins", f.hist_bins},       {"hist_max", f.hist_max},
                     {"hist_weight", f.hist_weight},   {"position_weight", f.position_weight}};
    j["k_neighbors"] = m.config.k_neighbors;
    j["coreset_fraction"] = m.config.coreset_fraction;
    j["seed"] = m.config.seed;
    j["train"] = {{"epochs", m.train.epochs},
                  {"repaste", std::string(to_string(m.train.repaste.mode))},
                  {"tau", m.train.repaste.tau},
                  {"chain_source", std::string(to_string(m.train.repaste.chain_source))},
                  {"shuffle_seed", m.train.shuffle_seed}};
    j["channels"] = m.channels;
    j["input_size"] = m.input_size;
    j["normalization"] = m.normalization;
    j["trained_on"] = m.trained_on;
    return j;
}

}  // namespace

void save_model(const DetectorModel& model, const std::filesystem::path& path) {
    if (!model.fitted()) throw Error("refusing to save an unfitted model");
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model '" + path.string() + "'");
    const std::string header = header_of(model).dump();
    out.write(kMagic, 4);
    put(out, kVersion);
    put(out, static_cast<std::uint64_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    put(out, static_cast<std::uint64_t>(model.size()));
    put(out, static_cast<std::uint32_t>(model.dim));
    out.write(reinterpret_cast<const char*>(model.bank.data()), static_cast<std::streamsize>(model.bank.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(model.source.data()),
              static_cast<std::streamsize>(model.source.size() * sizeof(std::int32_t)));
    if (!out) throw Error("cannot write model '" + path.string() + "'");
}

DetectorModel load_model(const std::filesystem::path& path) {
    const std::string p = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read model '" + p + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error("'" + p + "' is not a specshift model file");
    const auto version = take<std::uint32_t>(in, p);
    if (version != kVersion) throw Error("model '" + p + "' has unsupported version " + std::to_string(version));
    const auto header_len = take<std::uint64_t>(in, p);
    if (header_len > (1u << 20)) throw Error("model '" + p + "' has a corrupt header");
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw Error("model file '" + p + "' is truncated");

    DetectorModel m;
    try {
        const auto j = nlohmann::json::parse(header);
        const auto& f = j.at("features");
        m.config.features.patch_size = f.at("patch_size").get<int>();
        m.config.features.stride = f.at("stride").get<int>();
        m.config.features.hist_bins = f.at("hist_bins").get<int>();
        m.config.features.hist_max = f.at("hist_max").get<double>();
        m.config.features.hist_weight = f.at("hist_weight").get<double>();
        m.config.features.position_weight = f.at("position_weight").get<double>();
        m.config.k_neighbors = j.at("k_neighbors").get<int>();
        m.config.coreset_fraction = j.at("coreset_fraction").get<double>();
        m.config.seed = j.at("seed").get<std::uint64_t>();
        const auto& t = j.at("train");
        m.train.epochs = t.at("epochs").get<int>();
        m.train.repaste.mode = parse_repaste_mode(t.at("repaste").get<std::string>());
        m.train.repaste.tau = t.at("tau").get<double>();
        m.train.repaste.chain_source = parse_chain_source(t.at("chain_source").get<std::string>());
        m.train.shuffle_seed = t.at("shuffle_seed").get<std::uint64_t>();
        m.channels = j.at("channels").get<int>();
        m.input_size = j.at("input_size").get<int>();
        m.normalization = j.at("normalization").get<std::string>();
        m.trained_on = j.at("trained_on").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("model '" + p + "' has an invalid header: " + e.what());
    }

    const auto rows = take<std::uint64_t>(in, p);
    const auto dim = take<std::uint32_t>(in, p);
    if (static_cast<int>(dim) != feature_dimension(m.config.features, m.channels)) {
        throw Error("model '" + p + "' dimension does not match its feature configuration");
    }
    m.dim = static_cast<int>(dim);
    m.bank.resize(rows * dim);
    m.source.resize(rows);
    in.read(reinterpret_cast<char*>(m.bank.data()), static_cast<std::streamsize>(m.bank.size() * sizeof(float)));
    in.read(reinterpret_cast<char*>(m.source.data()), static_cast<std::streamsize>(m.source.size() * sizeof(std::int32_t)));
    if (!in) throw Error("model file '" + p + "' is truncated");
    return m;
}

}  // namespace specshift
