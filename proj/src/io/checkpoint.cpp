#include "polytg/io/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "polytg/io/graph_cache.hpp"

namespace polytg::io {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'C', 'K', 'P'};
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CheckpointError(path + ": truncated checkpoint");
    return v;
}

json config_to_json(const nn::EncoderConfig& c, graph::FeatureMode mode) {
    return json{{"arch", c.arch == nn::Arch::GINE ? "gine" : "gatv2"},
                {"features", mode == graph::FeatureMode::Chemical ? "chemical" : "topology-only"},
                {"atom_dim", c.atom_dim},
                {"bond_dim", c.bond_dim},
                {"hidden", c.hidden},
                {"layers", c.layers},
                {"decoder_hidden", c.decoder_hidden},
                {"num_globals", c.num_globals},
                {"dropout", c.dropout},
                {"decoder_dropout", c.decoder_dropout},
                {"leaky_slope", c.leaky_slope},
                {"graphnorm_eps", c.graphnorm_eps},
                {"schema_version", kFeaturizerSchemaVersion}};
}

}  // namespace

void save_checkpoint(const std::string& path, const nn::TgModel<float>& model,
                     graph::FeatureMode mode,
                     const std::optional<train::QuantileTransform>& transform,
                     const std::string& metadata_json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError(path + ": cannot open for writing");

    json manifest;
    manifest["config"] = config_to_json(model.config(), mode);
    if (transform) {
        manifest["target_transform"] = {{"quantiles", transform->knot_quantiles()},
                                        {"probs", transform->knot_probs()}};
    }
    if (!metadata_json.empty()) {
        manifest["metadata"] = json::parse(metadata_json);
    }
    const std::string mtext = manifest.dump();

    out.write(kMagic, 4);
    write_pod(out, kCheckpointVersion);
    write_pod(out, static_cast<uint32_t>(mtext.size()));
    out.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));

    const auto& items = model.params().items();
    write_pod(out, static_cast<uint32_t>(items.size()));
    for (const auto& [name, t] : items) {
        write_pod(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod(out, static_cast<uint32_t>(t->rows));
        write_pod(out, static_cast<uint32_t>(t->cols));
        out.write(reinterpret_cast<const char*>(t->val.data()),
                  static_cast<std::streamsize>(t->val.size() * sizeof(float)));
    }
    if (!out) throw CheckpointError(path + ": write failure");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(path + ": cannot open");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw CheckpointError(path + ": not a checkpoint file");
    }
    const auto version = read_pod<uint32_t>(in, path);
    if (version != kCheckpointVersion) {
        throw CheckpointError(path + ": unsupported checkpoint version " +
                              std::to_string(version));
    }
    const auto mlen = read_pod<uint32_t>(in, path);
    std::string mtext(mlen, '\0');
    in.read(mtext.data(), mlen);
    if (!in) throw CheckpointError(path + ": truncated checkpoint");

    json manifest;
    try {
        manifest = json::parse(mtext);
    } catch (const json::exception& e) {
        throw CheckpointError(path + ": bad manifest: " + e.what());
    }

    Checkpoint ckpt;
    const json& cj = manifest.at("config");
    ckpt.config.arch = cj.at("arch").get<std::string>() == "gine" ? nn::Arch::GINE
                                                                  : nn::Arch::GATv2;
    ckpt.feature_mode = cj.at("features").get<std::string>() == "chemical"
                            ? graph::FeatureMode::Chemical
                            : graph::FeatureMode::TopologyOnly;
    ckpt.config.atom_dim = cj.at("atom_dim").get<uint32_t>();
    ckpt.config.bond_dim = cj.at("bond_dim").get<uint32_t>();
    ckpt.config.hidden = cj.at("hidden").get<uint32_t>();
    ckpt.config.layers = cj.at("layers").get<uint32_t>();
    ckpt.config.decoder_hidden = cj.at("decoder_hidden").get<uint32_t>();
    ckpt.config.num_globals = cj.at("num_globals").get<uint32_t>();
    ckpt.config.dropout = cj.at("dropout").get<double>();
    ckpt.config.decoder_dropout = cj.at("decoder_dropout").get<double>();
    ckpt.config.leaky_slope = cj.at("leaky_slope").get<double>();
    ckpt.config.graphnorm_eps = cj.at("graphnorm_eps").get<double>();
    if (cj.at("schema_version").get<uint32_t>() != kFeaturizerSchemaVersion) {
        throw CheckpointError(path + ": featurizer schema version mismatch");
    }
    if (manifest.contains("target_transform")) {
        const json& tt = manifest["target_transform"];
        ckpt.target_transform = train::QuantileTransform::from_knots(
            tt.at("quantiles").get<std::vector<double>>(),
            tt.at("probs").get<std::vector<double>>());
    }
    if (manifest.contains("metadata")) ckpt.metadata_json = manifest["metadata"].dump();

    const auto count = read_pod<uint32_t>(in, path);
    ckpt.tensors.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        const auto name_len = read_pod<uint32_t>(in, path);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const auto rows = read_pod<uint32_t>(in, path);
        const auto cols = read_pod<uint32_t>(in, path);
        auto t = nn::make_tensor<float>(rows, cols);
        in.read(reinterpret_cast<char*>(t->val.data()),
                static_cast<std::streamsize>(t->val.size() * sizeof(float)));
        if (!in) throw CheckpointError(path + ": truncated checkpoint");
        ckpt.tensors.emplace_back(std::move(name), std::move(t));
    }
    return ckpt;
}

nn::TgModel<float> restore_model(const Checkpoint& ckpt) {
    nn::TgModel<float> model(ckpt.config, /*seed=*/0);
    const auto& items = model.params().items();
    if (items.size() != ckpt.tensors.size()) {
        throw CheckpointError("checkpoint parameter count does not match architecture");
    }
    for (const auto& [name, stored] : ckpt.tensors) {
        auto target = model.params().find(name);
        if (!target) throw CheckpointError("checkpoint has unknown tensor '" + name + "'");
        if (target->rows != stored->rows || target->cols != stored->cols) {
            throw CheckpointError("checkpoint tensor '" + name + "' has wrong shape");
        }
        target->val = stored->val;
    }
    return model;
}

}  // namespace polytg::io
