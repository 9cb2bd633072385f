#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "doctest.h"
#include "polytg/chem/psmiles.hpp"
#include "polytg/graph/builder.hpp"
#include "polytg/io/checkpoint.hpp"
#include "polytg/io/dataset.hpp"
#include "polytg/io/graph_cache.hpp"
#include "polytg/num/rng.hpp"
#include "polytg/train/data.hpp"

namespace fs = std::filesystem;
using namespace polytg;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static std::atomic<uint64_t> counter{0};
        const auto now = std::chrono::steady_clock::now().time_since_epoch().count();
        path = fs::temp_directory_path() /
               ("polytg_io_test_" + std::to_string(now) + "_" +
                std::to_string(counter.fetch_add(1)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

void patch_u32(const std::string& path, std::streamoff offset, uint32_t value) {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(offset);
    f.write(reinterpret_cast<const char*>(&value), sizeof value);
}

std::vector<graph::PolymerGraph> sample_graphs() {
    graph::PolymerInput in;
    in.id = "cache_poly";
    in.unit1 = chem::parse_repeat_unit("[*]CC([*])C");
    in.mn = 600;
    in.mw = 900;
    in.m0 = 42.08;
    graph::BuildConfig cfg;
    cfg.cups = 2;
    cfg.chains_per_cup = 8;
    cfg.bins = 4;
    cfg.seed = 5;
    auto graphs = graph::build_graphs(in, cfg);
    in.id = "unit_poly";
    graphs.push_back(graph::build_repeat_unit_graph(in, cfg.schema));
    return graphs;
}

bool same_graph(const graph::PolymerGraph& a, const graph::PolymerGraph& b) {
    return a.polymer_id == b.polymer_id && a.cup_index == b.cup_index &&
           a.num_nodes == b.num_nodes && a.atom_dim == b.atom_dim &&
           a.bond_dim == b.bond_dim && a.component_id == b.component_id && a.x == b.x &&
           a.edges == b.edges && a.e == b.e &&
           a.globals.as_array() == b.globals.as_array();
}

}  // namespace

TEST_SUITE("cache_io") {

TEST_CASE("graph cache round trip is bit exact") {
    TempDir dir;
    const auto path = dir.file("graphs.pchg");
    const auto graphs = sample_graphs();
    {
        io::GraphCacheWriter writer(path, graph::FeatureMode::Chemical,
                                    graphs[0].atom_dim, graphs[0].bond_dim);
        for (const auto& g : graphs) writer.add(g);
        writer.finish();
    }

    io::GraphCacheReader reader(path);
    CHECK(reader.meta().format_version == io::kCacheFormatVersion);
    CHECK(reader.meta().schema_version == io::kFeaturizerSchemaVersion);
    CHECK(reader.meta().mode == graph::FeatureMode::Chemical);
    CHECK(reader.meta().atom_dim == graphs[0].atom_dim);
    CHECK(reader.meta().bond_dim == graphs[0].bond_dim);
    REQUIRE(reader.size() == graphs.size());

    for (size_t i = 0; i < graphs.size(); ++i) {
        const auto& s = reader.summaries()[i];
        CHECK(s.polymer_id == graphs[i].polymer_id);
        CHECK(s.cup_index == graphs[i].cup_index);
        CHECK(s.num_nodes == graphs[i].num_nodes);
        CHECK(s.num_edges == graphs[i].num_edges());
        CHECK(same_graph(reader.read(i), graphs[i]));
    }
    // Random access out of order still lands on the right record.
    CHECK(same_graph(reader.read(2), graphs[2]));
    CHECK(same_graph(reader.read(0), graphs[0]));
    CHECK_THROWS_AS((void)reader.read(graphs.size()), io::CacheError);
}

TEST_CASE("cache source matches an in-memory source") {
    TempDir dir;
    const auto path = dir.file("graphs.pchg");
    auto graphs = sample_graphs();
    {
        io::GraphCacheWriter writer(path, graph::FeatureMode::Chemical,
                                    graphs[0].atom_dim, graphs[0].bond_dim);
        for (const auto& g : graphs) writer.add(g);
        writer.finish();
    }
    train::CacheSource cached(path);
    train::MemorySource memory(graphs);
    REQUIRE(cached.size() == memory.size());
    for (size_t i = 0; i < cached.size(); ++i) {
        CHECK(cached.ref(i).polymer_id == memory.ref(i).polymer_id);
        CHECK(cached.ref(i).cup_index == memory.ref(i).cup_index);
        CHECK(same_graph(cached.load(i), memory.load(i)));
    }
}

TEST_CASE("corrupt caches are hard errors") {
    TempDir dir;
    CHECK_THROWS_AS((void)io::GraphCacheReader(dir.file("missing.pchg")), io::CacheError);

    const auto bad_magic = dir.file("bad_magic.pchg");
    write_text(bad_magic, "XXXXgarbage that is long enough to read");
    CHECK_THROWS_AS((void)io::GraphCacheReader(bad_magic), io::CacheError);

    const auto graphs = sample_graphs();
    const auto good = dir.file("good.pchg");
    {
        io::GraphCacheWriter writer(good, graph::FeatureMode::Chemical, graphs[0].atom_dim,
                                    graphs[0].bond_dim);
        writer.add(graphs[0]);
        writer.finish();
    }
    CHECK_NOTHROW((void)io::GraphCacheReader(good));

    const auto bad_format = dir.file("bad_format.pchg");
    fs::copy_file(good, bad_format);
    patch_u32(bad_format, 4, 99);  // format version field
    CHECK_THROWS_AS((void)io::GraphCacheReader(bad_format), io::CacheError);

    const auto bad_schema = dir.file("bad_schema.pchg");
    fs::copy_file(good, bad_schema);
    patch_u32(bad_schema, 8, 99);  // featurizer schema version field
    CHECK_THROWS_AS((void)io::GraphCacheReader(bad_schema), io::CacheError);

    const auto truncated = dir.file("truncated.pchg");
    fs::copy_file(good, truncated);
    fs::resize_file(truncated, 45);  // cuts into the first record header
    CHECK_THROWS_AS((void)io::GraphCacheReader(truncated), io::CacheError);
}

TEST_CASE("cache writer validates its inputs") {
    TempDir dir;
    const auto graphs = sample_graphs();
    const auto path = dir.file("writer.pchg");
    io::GraphCacheWriter writer(path, graph::FeatureMode::Chemical, 7, 3);
    CHECK_THROWS_AS(writer.add(graphs[0]), io::CacheError);  // width mismatch
    writer.finish();
    CHECK_THROWS_AS(writer.add(graphs[0]), io::CacheError);  // already finished
}

TEST_CASE("checkpoint round trip restores an identical model") {
    TempDir dir;
    const auto path = dir.file("model.pckp");

    nn::EncoderConfig cfg;
    cfg.arch = nn::Arch::GATv2;
    cfg.hidden = 8;
    cfg.layers = 1;
    cfg.decoder_hidden = 4;
    nn::TgModel<float> model(cfg, 17);

    std::vector<double> targets;
    for (int i = 0; i < 20; ++i) targets.push_back(250.0 + 7.0 * i);
    const auto tf = train::QuantileTransform::fit(targets);

    io::save_checkpoint(path, model, graph::FeatureMode::Chemical, tf,
                        R"({"stage":"finetune","fold":3})");
    const auto ckpt = io::load_checkpoint(path);

    CHECK(ckpt.config.arch == nn::Arch::GATv2);
    CHECK(ckpt.feature_mode == graph::FeatureMode::Chemical);
    CHECK(ckpt.config.hidden == cfg.hidden);
    CHECK(ckpt.config.layers == cfg.layers);
    CHECK(ckpt.config.decoder_hidden == cfg.decoder_hidden);
    CHECK(ckpt.config.atom_dim == cfg.atom_dim);
    CHECK(ckpt.config.bond_dim == cfg.bond_dim);
    CHECK(ckpt.config.dropout == doctest::Approx(cfg.dropout));
    CHECK(ckpt.config.leaky_slope == doctest::Approx(cfg.leaky_slope));

    REQUIRE(ckpt.target_transform.has_value());
    CHECK(ckpt.target_transform->knot_quantiles() == tf.knot_quantiles());
    CHECK(ckpt.target_transform->knot_probs() == tf.knot_probs());

    CHECK(nlohmann::json::parse(ckpt.metadata_json) ==
          nlohmann::json::parse(R"({"stage":"finetune","fold":3})"));

    const auto& items = model.params().items();
    REQUIRE(ckpt.tensors.size() == items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        CHECK(ckpt.tensors[i].first == items[i].first);
        CHECK(ckpt.tensors[i].second->val == items[i].second->val);
    }

    // The restored model predicts exactly like the original.
    auto restored = io::restore_model(ckpt);
    graph::PolymerInput in;
    in.id = "probe";
    in.unit1 = chem::parse_repeat_unit("[*]CC[*]");
    in.mn = 500;
    in.mw = 500;
    in.m0 = 28.05;
    graph::BuildConfig bcfg;
    bcfg.cups = 1;
    bcfg.chains_per_cup = 4;
    bcfg.bins = 2;
    const auto cup = graph::build_graphs(in, bcfg);
    auto bg = nn::make_batch<float>({&cup[0]});
    num::CounterRng rng(0);
    const auto a = model.predict(bg, nn::RunMode::Eval, rng);
    const auto b = restored.predict(bg, nn::RunMode::Eval, rng);
    REQUIRE(a->numel() == b->numel());
    for (size_t i = 0; i < a->val.size(); ++i) CHECK(a->val[i] == b->val[i]);
}

TEST_CASE("checkpoint without a transform stays empty") {
    TempDir dir;
    const auto path = dir.file("plain.pckp");
    nn::EncoderConfig cfg;
    cfg.hidden = 8;
    cfg.layers = 1;
    cfg.decoder_hidden = 4;
    nn::TgModel<float> model(cfg, 3);
    io::save_checkpoint(path, model, graph::FeatureMode::TopologyOnly, std::nullopt, "");
    const auto ckpt = io::load_checkpoint(path);
    CHECK(ckpt.config.arch == nn::Arch::GINE);
    CHECK(ckpt.feature_mode == graph::FeatureMode::TopologyOnly);
    CHECK_FALSE(ckpt.target_transform.has_value());
    CHECK(ckpt.metadata_json.empty());
}

TEST_CASE("broken checkpoints are rejected") {
    TempDir dir;
    CHECK_THROWS_AS((void)io::load_checkpoint(dir.file("none.pckp")), io::CheckpointError);

    const auto garbage = dir.file("garbage.pckp");
    write_text(garbage, "not a checkpoint at all, definitely not");
    CHECK_THROWS_AS((void)io::load_checkpoint(garbage), io::CheckpointError);

    nn::EncoderConfig cfg;
    cfg.hidden = 8;
    cfg.layers = 1;
    cfg.decoder_hidden = 4;
    nn::TgModel<float> model(cfg, 3);
    const auto good = dir.file("good.pckp");
    io::save_checkpoint(good, model, graph::FeatureMode::Chemical, std::nullopt, "");

    const auto bad_version = dir.file("bad_version.pckp");
    fs::copy_file(good, bad_version);
    patch_u32(bad_version, 4, 42);  // checkpoint version field
    CHECK_THROWS_AS((void)io::load_checkpoint(bad_version), io::CheckpointError);

    const auto truncated = dir.file("short.pckp");
    fs::copy_file(good, truncated);
    fs::resize_file(truncated, fs::file_size(truncated) - 64);
    CHECK_THROWS_AS((void)io::load_checkpoint(truncated), io::CheckpointError);

    auto ckpt = io::load_checkpoint(good);
    auto renamed = ckpt;
    renamed.tensors[0].first = "bogus.tensor";
    CHECK_THROWS_AS((void)io::restore_model(renamed), io::CheckpointError);

    auto misshaped = ckpt;
    misshaped.tensors[0].second = nn::make_tensor<float>(1, 1);
    CHECK_THROWS_AS((void)io::restore_model(misshaped), io::CheckpointError);

    auto missing = ckpt;
    missing.tensors.pop_back();
    CHECK_THROWS_AS((void)io::restore_model(missing), io::CheckpointError);
}

TEST_CASE("dataset csv round trip") {
    TempDir dir;
    const auto path = dir.file("data.csv");

    std::vector<io::PolymerRecord> records(3);
    records[0].id = "homo_1";
    records[0].psmiles1 = "[*]CC[*]";
    records[0].mn = 12000;
    records[0].mw = 30000;
    records[0].m0 = 28.05;
    records[0].tg = 251.5;

    records[1].id = "co_1";
    records[1].psmiles1 = "[*]CC([*])C";
    records[1].psmiles2 = "[*]CC([*])c1ccccc1";
    records[1].phi1 = 0.6;
    records[1].phi2 = 0.4;
    records[1].mn = 9000;
    records[1].mw = 19800;
    records[1].m0 = 0.6 * 42.08 + 0.4 * 104.15;
    records[1].m0_1 = 42.08;
    records[1].m0_2 = 104.15;
    records[1].tg = 330.25;

    records[2].id = "unlabeled";
    records[2].psmiles1 = "[*]CCO[*]";
    records[2].mn = 4000;
    records[2].mw = 4000;
    records[2].m0 = 44.05;

    io::write_dataset_csv(path, records);
    std::vector<std::string> warnings;
    const auto back = io::read_dataset_csv(path, &warnings);
    CHECK(warnings.empty());
    REQUIRE(back.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].id == records[i].id);
        CHECK(back[i].psmiles1 == records[i].psmiles1);
        CHECK(back[i].psmiles2 == records[i].psmiles2);
        CHECK(back[i].phi1 == records[i].phi1);
        CHECK(back[i].phi2 == records[i].phi2);
        CHECK(back[i].mn == records[i].mn);
        CHECK(back[i].mw == records[i].mw);
        CHECK(back[i].m0 == records[i].m0);
        CHECK(back[i].m0_1 == records[i].m0_1);
        CHECK(back[i].m0_2 == records[i].m0_2);
        CHECK(back[i].tg == records[i].tg);
        CHECK(back[i].is_copolymer() == records[i].is_copolymer());
    }
    CHECK(back[1].m0_eff() == doctest::Approx(records[1].m0).epsilon(1e-12));
}

TEST_CASE("dataset csv structural errors") {
    TempDir dir;
    const auto path = dir.file("bad.csv");
    const std::string header =
        "id,psmiles_1,psmiles_2,phi_1,phi_2,mn_g_mol,mw_g_mol,m0_g_mol,m0_1,m0_2,tg_K\n";

    CHECK_THROWS_AS((void)io::read_dataset_csv(dir.file("nope.csv")), io::DatasetError);

    write_text(path, "");
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);

    write_text(path, "id,psmiles_1\n");  // missing columns
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);

    write_text(path, header + "a,[*]CC[*],,0.7,0.2,1000,2000,28,,,300\n");  // phi sum
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);

    write_text(path, header + "a,[*]CC[*],,0.9,0.1,1000,2000,28,,,300\n");  // homo phi
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);

    write_text(path, header + ",[*]CC[*],,1,0,1000,2000,28,,,300\n");  // empty id
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);

    write_text(path, header + "a,[*]CC[*],,1,0,3000,2000,28,,,300\n");  // mw < mn
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);

    write_text(path, header + "a,[*]CC[*],,1,0,abc,2000,28,,,300\n");  // bad number
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);

    write_text(path, header + "a,[*]CC[*],,1,0\n");  // too few fields
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);

    write_text(path, header + "a,[*]CC[*],,1,0,-5,2000,28,,,300\n");  // mn <= 0
    CHECK_THROWS_AS((void)io::read_dataset_csv(path), io::DatasetError);
}

TEST_CASE("dataset csv plausibility warnings") {
    TempDir dir;
    const auto path = dir.file("warn.csv");
    const std::string header =
        "id,psmiles_1,psmiles_2,phi_1,phi_2,mn_g_mol,mw_g_mol,m0_g_mol,m0_1,m0_2,tg_K\n";
    write_text(path, header +
                          "tiny,[*]CC[*],,1,0,500,800,28,,,300\n"
                          "hot,[*]CC[*],,1,0,5000,9000,28,,,700\n"
                          "off,[*]CC([*])C,[*]CCO[*],0.5,0.5,5000,9000,99,42.08,44.05,300\n");
    std::vector<std::string> warnings;
    const auto records = io::read_dataset_csv(path, &warnings);
    CHECK(records.size() == 3);
    REQUIRE(warnings.size() == 3);
    CHECK(warnings[0].find("tiny") != std::string::npos);
    CHECK(warnings[1].find("hot") != std::string::npos);
    CHECK(warnings[2].find("off") != std::string::npos);
    // Per-unit masses win over the inconsistent m0 column.
    CHECK(records[2].m0_eff() == doctest::Approx(0.5 * 42.08 + 0.5 * 44.05));
}

TEST_CASE("corpus line files skip comments and blanks") {
    TempDir dir;
    const auto path = dir.file("corpus.txt");
    write_text(path, "# header comment\n[*]CC[*]\n\n[*]CC([*])C\n# trailing\n");
    const auto lines = io::read_corpus_lines(path);
    CHECK(lines == std::vector<std::string>{"[*]CC[*]", "[*]CC([*])C"});

    io::write_corpus_lines(dir.file("out.txt"), lines);
    CHECK(io::read_corpus_lines(dir.file("out.txt")) == lines);
    CHECK_THROWS_AS((void)io::read_corpus_lines(dir.file("nothing.txt")), io::DatasetError);
}

}  // TEST_SUITE
