#pragma once

// Shared plumbing for the command-line tool: config files, manifests,
// enum spellings, and machine-readable error records.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polytg/graph/builder.hpp"
#include "polytg/nn/model.hpp"
#include "polytg/num/rng.hpp"
#include "polytg/train/loops.hpp"

namespace polytg::cli {

using nlohmann::json;

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

// Content hash for reproducibility manifests (FNV-1a, 64-bit, hex).
inline std::string file_hash_hex(const std::string& path) {
    const uint64_t h = num::hash_string(read_file(path));
    std::ostringstream ss;
    ss << std::hex << h;
    return ss.str();
}

inline json load_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

// ---- enum spellings ----

inline graph::Construction parse_construction(const std::string& s) {
    if (s == "large") return graph::Construction::LargeGraph;
    if (s == "repeat-unit") return graph::Construction::RepeatUnit;
    throw ConfigError("unknown construction '" + s + "' (expected large|repeat-unit)");
}

inline const char* construction_name(graph::Construction c) {
    return c == graph::Construction::LargeGraph ? "large" : "repeat-unit";
}

inline graph::FeatureMode parse_features(const std::string& s) {
    if (s == "chemical") return graph::FeatureMode::Chemical;
    if (s == "topology-only") return graph::FeatureMode::TopologyOnly;
    throw ConfigError("unknown features '" + s + "' (expected chemical|topology-only)");
}

inline const char* features_name(graph::FeatureMode m) {
    return m == graph::FeatureMode::Chemical ? "chemical" : "topology-only";
}

inline nn::Arch parse_arch(const std::string& s) {
    if (s == "gine") return nn::Arch::GINE;
    if (s == "gatv2") return nn::Arch::GATv2;
    throw ConfigError("unknown arch '" + s + "' (expected gine|gatv2)");
}

inline const char* arch_name(nn::Arch a) { return a == nn::Arch::GINE ? "GINE" : "GATv2"; }

// Ablation row label used in summary reports.
inline std::string report_label(graph::Construction c, graph::FeatureMode m) {
    if (m == graph::FeatureMode::TopologyOnly) return "Topology-only (no chem. feats.)";
    if (c == graph::Construction::RepeatUnit) return "Repeat-unit + global scalars";
    return "Large graph + globals";
}

// ---- config file ----

struct AppConfig {
    graph::BuildConfig build;
    nn::EncoderConfig enc;
    train::TrainConfig tc;
    int folds = 5;
    std::vector<uint64_t> seeds = {0, 1};
};

namespace detail {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

// Applies a config file on top of the defaults; CLI flags are applied
// afterwards and win over both.
inline void apply_config_json(AppConfig& c, const json& j) {
    using detail::maybe;
    if (j.contains("build")) {
        const auto& b = j.at("build");
        maybe(b, "cups", c.build.cups);
        maybe(b, "chains_per_cup", c.build.chains_per_cup);
        maybe(b, "bins", c.build.bins);
        maybe(b, "dp_max", c.build.dp_max);
    }
    if (j.contains("encoder")) {
        const auto& e = j.at("encoder");
        maybe(e, "hidden", c.enc.hidden);
        maybe(e, "layers", c.enc.layers);
        maybe(e, "decoder_hidden", c.enc.decoder_hidden);
        maybe(e, "dropout", c.enc.dropout);
        maybe(e, "decoder_dropout", c.enc.decoder_dropout);
        maybe(e, "leaky_slope", c.enc.leaky_slope);
    }
    if (j.contains("pretrain")) {
        const auto& p = j.at("pretrain");
        auto& t = c.tc.pretrain;
        maybe(p, "lr", t.lr);
        maybe(p, "weight_decay", t.weight_decay);
        maybe(p, "batch_size", t.batch_size);
        maybe(p, "epochs", t.epochs);
        maybe(p, "patience", t.patience);
        maybe(p, "mask_nodes", t.mask_nodes);
        maybe(p, "mask_edges", t.mask_edges);
        maybe(p, "val_fraction", t.val_fraction);
    }
    if (j.contains("finetune")) {
        const auto& f = j.at("finetune");
        auto& t = c.tc.finetune;
        maybe(f, "lr", t.lr);
        maybe(f, "weight_decay", t.weight_decay);
        maybe(f, "batch_size", t.batch_size);
        maybe(f, "epochs", t.epochs);
        maybe(f, "patience", t.patience);
        maybe(f, "warmup", t.warmup);
        maybe(f, "huber_delta", t.huber_delta);
        maybe(f, "val_fraction", t.val_fraction);
        if (f.contains("plateau")) {
            const auto& pl = f.at("plateau");
            maybe(pl, "factor", t.plateau.factor);
            maybe(pl, "patience", t.plateau.patience);
            maybe(pl, "min_lr", t.plateau.min_lr);
        }
    }
    maybe(j, "folds", c.folds);
    maybe(j, "seeds", c.seeds);
}

inline json config_to_json(const AppConfig& c) {
    json j;
    j["build"] = {{"cups", c.build.cups},
                  {"chains_per_cup", c.build.chains_per_cup},
                  {"bins", c.build.bins},
                  {"dp_max", c.build.dp_max},
                  {"seed", c.build.seed},
                  {"construction", construction_name(c.build.construction)},
                  {"features", features_name(c.build.schema.mode)}};
    j["encoder"] = {{"arch", arch_name(c.enc.arch)},
                    {"hidden", c.enc.hidden},
                    {"layers", c.enc.layers},
                    {"decoder_hidden", c.enc.decoder_hidden},
                    {"dropout", c.enc.dropout},
                    {"decoder_dropout", c.enc.decoder_dropout},
                    {"leaky_slope", c.enc.leaky_slope}};
    j["pretrain"] = {{"lr", c.tc.pretrain.lr},
                     {"weight_decay", c.tc.pretrain.weight_decay},
                     {"batch_size", c.tc.pretrain.batch_size},
                     {"epochs", c.tc.pretrain.epochs},
                     {"patience", c.tc.pretrain.patience},
                     {"mask_nodes", c.tc.pretrain.mask_nodes},
                     {"mask_edges", c.tc.pretrain.mask_edges},
                     {"val_fraction", c.tc.pretrain.val_fraction}};
    j["finetune"] = {{"lr", c.tc.finetune.lr},
                     {"weight_decay", c.tc.finetune.weight_decay},
                     {"batch_size", c.tc.finetune.batch_size},
                     {"epochs", c.tc.finetune.epochs},
                     {"patience", c.tc.finetune.patience},
                     {"warmup", c.tc.finetune.warmup},
                     {"huber_delta", c.tc.finetune.huber_delta},
                     {"val_fraction", c.tc.finetune.val_fraction},
                     {"plateau",
                      {{"factor", c.tc.finetune.plateau.factor},
                       {"patience", c.tc.finetune.plateau.patience},
                       {"min_lr", c.tc.finetune.plateau.min_lr}}}};
    j["folds"] = c.folds;
    j["seeds"] = c.seeds;
    return j;
}

// ---- manifests & timing ----

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

  private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create directory " + dir + ": " + ec.message());
}

inline std::string path_join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace polytg::cli
