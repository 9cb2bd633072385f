// Command-line pipeline: synthetic data, graph construction, masked
// pretraining, cross-validated fine-tuning, evaluation, and the
// dispersity sensitivity sweep.

#include <algorithm>
#include <exception>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "cli_common.hpp"
#include "polytg/chem/psmiles.hpp"
#include "polytg/eval/harness.hpp"
#include "polytg/io/checkpoint.hpp"
#include "polytg/io/dataset.hpp"
#include "polytg/io/graph_cache.hpp"
#include "polytg/io/synth.hpp"
#include "polytg/mmd/schulz_zimm.hpp"

namespace {

using namespace polytg;
using cli::json;

std::string g_error_dir;  // destination for error.json once --out is known

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string classify_exception(const std::exception& e) {
    if (dynamic_cast<const chem::ParseError*>(&e)) return "parse_error";
    if (dynamic_cast<const mmd::InvalidDescriptors*>(&e)) return "invalid_descriptors";
    if (dynamic_cast<const graph::AssemblyError*>(&e)) return "assembly_error";
    if (dynamic_cast<const io::DatasetError*>(&e)) return "dataset_error";
    if (dynamic_cast<const io::CacheError*>(&e)) return "cache_error";
    if (dynamic_cast<const io::CheckpointError*>(&e)) return "checkpoint_error";
    if (dynamic_cast<const train::CorpusEmpty*>(&e)) return "corpus_empty";
    if (dynamic_cast<const train::NoValidation*>(&e)) return "no_validation";
    if (dynamic_cast<const train::MaskFractionZero*>(&e)) return "mask_fraction_zero";
    if (dynamic_cast<const train::TooFewSamples*>(&e)) return "too_few_samples";
    if (dynamic_cast<const nn::EmptyMask*>(&e)) return "empty_mask";
    if (dynamic_cast<const eval::MissingCup*>(&e)) return "missing_cup";
    if (dynamic_cast<const eval::ZeroVariance*>(&e)) return "zero_variance";
    if (dynamic_cast<const num::NonFiniteInput*>(&e)) return "non_finite_input";
    if (dynamic_cast<const num::ConvergenceFailure*>(&e)) return "convergence_failure";
    if (dynamic_cast<const cli::ConfigError*>(&e)) return "config_error";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    return "error";
}

int fail(const std::exception& e) {
    json rec{{"error", classify_exception(e)}, {"message", e.what()}};
    std::cerr << rec.dump() << "\n";
    if (!g_error_dir.empty()) {
        try {
            cli::write_json_file(cli::path_join(g_error_dir, "error.json"), rec);
        } catch (...) {
        }
    }
    return 1;
}

std::vector<uint64_t> parse_seed_list(const std::string& s) {
    std::vector<uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoull(item));
    }
    if (out.empty()) throw cli::ConfigError("empty seed list '" + s + "'");
    return out;
}

graph::PolymerInput to_input(const io::PolymerRecord& r) {
    graph::PolymerInput in;
    in.id = r.id;
    try {
        in.unit1 = chem::parse_repeat_unit(r.psmiles1);
        if (r.is_copolymer()) {
            in.unit2 = chem::parse_repeat_unit(r.psmiles2);
            in.is_copolymer = true;
        }
    } catch (const chem::ParseError& e) {
        throw chem::ParseError(e.kind, e.position, "record " + r.id + ": " + e.what());
    }
    in.phi1 = r.phi1;
    in.phi2 = r.phi2;
    in.mn = r.mn;
    in.mw = r.mw;
    in.m0 = r.m0_eff();
    return in;
}

std::string metrics_jsonl(const std::vector<train::EpochLog>& log, bool ssl) {
    std::ostringstream ss;
    for (const auto& l : log) {
        json rec{{"epoch", l.epoch},
                 {"train_loss", l.train_loss},
                 {ssl ? "val_masked_ce" : "val_rmse_K", l.val_metric},
                 {"lr", l.lr}};
        if (ssl) {
            rec["masked_atom_acc"] = l.atom_accuracy;
            rec["masked_bond_acc"] = l.bond_accuracy;
        }
        ss << rec.dump() << "\n";
    }
    return ss.str();
}

json base_manifest(const std::string& command, const cli::AppConfig& cfg) {
    json m;
    m["command"] = command;
    m["config"] = cli::config_to_json(cfg);
    m["inputs"] = json::object();
    m["outputs"] = json::array();
    return m;
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
    std::string out;
    uint64_t seed = 0;
    size_t polymers = 381;
    size_t corpus = 1000;
};

int run_synth(const SynthOpts& o) {
    cli::Stopwatch sw;
    cli::ensure_dir(o.out);
    g_error_dir = o.out;

    io::SynthConfig sc;
    sc.n_polymers = o.polymers;
    sc.seed = o.seed;
    auto records = io::generate_dataset(sc);
    const auto dataset_path = cli::path_join(o.out, "dataset.csv");
    io::write_dataset_csv(dataset_path, records);

    auto corpus = io::generate_corpus(o.corpus, o.seed);
    const auto corpus_path = cli::path_join(o.out, "corpus.txt");
    io::write_corpus_lines(corpus_path, corpus);

    size_t homo = 0;
    for (const auto& r : records) {
        if (!r.is_copolymer()) ++homo;
    }

    json m;
    m["command"] = "synth";
    m["seed"] = o.seed;
    m["n_polymers"] = records.size();
    m["n_homopolymers"] = homo;
    m["n_copolymers"] = records.size() - homo;
    m["n_corpus"] = corpus.size();
    m["outputs"] = {{{"path", dataset_path}, {"hash", cli::file_hash_hex(dataset_path)}},
                    {{"path", corpus_path}, {"hash", cli::file_hash_hex(corpus_path)}}};
    m["wall_clock_s"] = sw.seconds();
    cli::write_json_file(cli::path_join(o.out, "manifest.json"), m);

    std::cout << "wrote " << records.size() << " records (" << homo << " homo / "
              << records.size() - homo << " co) and " << corpus.size()
              << " corpus units to " << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- build

struct BuildOpts {
    std::string data, out, config;
    std::string construction = "large";
    std::string features = "chemical";
    uint64_t seed = 0;
    int cups = -1, chains = -1, bins = -1, dp_max = -1, block = -1;
};

int run_build(const BuildOpts& o) {
    cli::Stopwatch sw;
    cli::ensure_dir(o.out);
    g_error_dir = o.out;

    cli::AppConfig cfg;
    if (!o.config.empty()) cli::apply_config_json(cfg, cli::load_json(o.config));
    if (o.cups >= 0) cfg.build.cups = static_cast<uint32_t>(o.cups);
    if (o.chains >= 0) cfg.build.chains_per_cup = static_cast<uint32_t>(o.chains);
    if (o.bins >= 0) cfg.build.bins = static_cast<uint32_t>(o.bins);
    if (o.dp_max >= 0) cfg.build.dp_max = static_cast<uint32_t>(o.dp_max);
    cfg.build.seed = o.seed;
    cfg.build.construction = cli::parse_construction(o.construction);
    cfg.build.schema.mode = cli::parse_features(o.features);

    std::vector<std::string> warnings;
    auto records = io::read_dataset_csv(o.data, &warnings);
    print_warnings(warnings);
    std::sort(records.begin(), records.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });

    const auto cache_path = cli::path_join(o.out, "graphs.pchg");
    io::GraphCacheWriter writer(cache_path, cfg.build.schema.mode,
                                cfg.build.schema.atom_dim(), cfg.build.schema.bond_dim());

    int block = o.block;
    if (block <= 0) {
#ifdef _OPENMP
        block = omp_get_max_threads();
#else
        block = 1;
#endif
    }

    // Records are built in parallel, a bounded block at a time, and
    // written in id order so the cache layout is deterministic.
    size_t n_graphs = 0;
    for (size_t base = 0; base < records.size(); base += static_cast<size_t>(block)) {
        const size_t n = std::min<size_t>(block, records.size() - base);
        std::vector<std::vector<graph::PolymerGraph>> built(n);
        std::vector<std::exception_ptr> errors(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (size_t k = 0; k < n; ++k) {
            try {
                built[k] = graph::build_graphs(to_input(records[base + k]), cfg.build);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
        for (size_t k = 0; k < n; ++k) {
            if (errors[k]) std::rethrow_exception(errors[k]);
            for (const auto& g : built[k]) {
                writer.add(g);
                ++n_graphs;
            }
        }
    }
    writer.finish();

    const double secs = sw.seconds();
    auto m = base_manifest("build", cfg);
    m["seed"] = o.seed;
    m["inputs"][o.data] = cli::file_hash_hex(o.data);
    m["outputs"] = {{{"path", cache_path}, {"hash", cli::file_hash_hex(cache_path)}}};
    m["n_records"] = records.size();
    m["n_graphs"] = n_graphs;
    m["wall_clock_s"] = secs;
    m["graphs_per_s"] = secs > 0 ? static_cast<double>(n_graphs) / secs : 0.0;
    cli::write_json_file(cli::path_join(o.out, "manifest.json"), m);

    std::cout << "built " << n_graphs << " graphs from " << records.size() << " records in "
              << std::fixed << std::setprecision(1) << secs << " s ("
              << std::setprecision(1) << (secs > 0 ? n_graphs / secs : 0.0)
              << " graphs/s) -> " << cache_path << "\n";
    return 0;
}

// ------------------------------------------------------------- pretrain

struct PretrainOpts {
    std::string corpus, out, config;
    std::string arch = "gine";
    std::string features = "chemical";
    uint64_t seed = 0;
    double max_failure_rate = 0.05;
};

int run_pretrain(const PretrainOpts& o) {
    cli::Stopwatch sw;
    cli::ensure_dir(o.out);
    g_error_dir = o.out;

    if (cli::parse_features(o.features) != graph::FeatureMode::Chemical) {
        throw cli::ConfigError("masked pretraining requires --features chemical");
    }

    cli::AppConfig cfg;
    if (!o.config.empty()) cli::apply_config_json(cfg, cli::load_json(o.config));
    cfg.enc.arch = cli::parse_arch(o.arch);

    auto lines = io::read_corpus_lines(o.corpus);
    if (lines.empty()) throw train::CorpusEmpty("corpus file has no usable lines");

    graph::FeatureSchema schema;  // chemical
    const auto trimer_path = cli::path_join(o.out, "trimers.pchg");
    size_t failures = 0;
    {
        io::GraphCacheWriter writer(trimer_path, schema.mode, schema.atom_dim(),
                                    schema.bond_dim());
        std::ostringstream faillog;
        for (size_t i = 0; i < lines.size(); ++i) {
            std::ostringstream id;
            id << "corpus_" << std::setw(6) << std::setfill('0') << i;
            try {
                auto unit = chem::parse_repeat_unit(lines[i]);
                writer.add(graph::build_trimer_graph(id.str(), unit, schema));
            } catch (const std::exception& e) {
                ++failures;
                faillog << "line " << i + 1 << ": " << e.what() << "\n";
            }
        }
        writer.finish();
        cli::write_file(cli::path_join(o.out, "corpus_failures.log"), faillog.str());
    }
    const double rate = static_cast<double>(failures) / static_cast<double>(lines.size());
    if (rate > o.max_failure_rate) {
        throw io::DatasetError("corpus failure rate " + std::to_string(rate) +
                               " exceeds threshold " + std::to_string(o.max_failure_rate));
    }

    train::CacheSource corpus(trimer_path);
    auto res = train::pretrain(corpus, cfg.enc, cfg.tc.pretrain, o.seed);

    cli::write_file(cli::path_join(o.out, "metrics.jsonl"), metrics_jsonl(res.log, true));

    json meta{{"command", "pretrain"},
              {"seed", o.seed},
              {"arch", cli::arch_name(cfg.enc.arch)},
              {"corpus_hash", cli::file_hash_hex(o.corpus)},
              {"n_corpus", lines.size()},
              {"n_failures", failures},
              {"best_val_masked_ce", res.best_val},
              {"best_epoch", res.best_epoch},
              {"epochs_run", res.log.empty() ? 0 : res.log.size() - 1}};
    const auto ckpt_path = cli::path_join(o.out, "encoder.pckp");
    io::save_checkpoint(ckpt_path, *res.model, graph::FeatureMode::Chemical, std::nullopt,
                        meta.dump());

    auto m = base_manifest("pretrain", cfg);
    m["seed"] = o.seed;
    m["inputs"][o.corpus] = cli::file_hash_hex(o.corpus);
    m["outputs"] = {{{"path", ckpt_path}, {"hash", cli::file_hash_hex(ckpt_path)}}};
    m["n_corpus"] = lines.size();
    m["n_failures"] = failures;
    m["best_val_masked_ce"] = res.best_val;
    m["best_epoch"] = res.best_epoch;
    m["wall_clock_s"] = sw.seconds();
    cli::write_json_file(cli::path_join(o.out, "manifest.json"), m);

    std::cout << "pretrained on " << lines.size() - failures << " trimers; best val CE "
              << res.best_val << " at epoch " << res.best_epoch << " -> " << ckpt_path
              << "\n";
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainOpts {
    std::string cache, data, out, config, pretrained;
    std::string arch = "gine";
    std::string features = "chemical";
    std::string construction = "large";
    std::string ssl = "off";
    std::string seeds;
    int folds = -1;
    uint64_t seed = 0;  // fold-plan seed
};

int run_train(const TrainOpts& o) {
    cli::Stopwatch sw;
    cli::ensure_dir(o.out);
    g_error_dir = o.out;

    cli::AppConfig cfg;
    if (!o.config.empty()) cli::apply_config_json(cfg, cli::load_json(o.config));
    if (o.folds > 0) cfg.folds = o.folds;
    if (!o.seeds.empty()) cfg.seeds = parse_seed_list(o.seeds);
    cfg.enc.arch = cli::parse_arch(o.arch);
    cfg.build.construction = cli::parse_construction(o.construction);
    cfg.build.schema.mode = cli::parse_features(o.features);
    const bool ssl_on = o.ssl == "on";
    if (!ssl_on && o.ssl != "off") {
        throw cli::ConfigError("unknown --ssl value '" + o.ssl + "' (expected on|off)");
    }

    std::vector<std::string> warnings;
    auto records = io::read_dataset_csv(o.data, &warnings);
    print_warnings(warnings);

    train::CacheSource cache(o.cache);
    const auto& meta = cache.reader().meta();
    if (meta.mode != cfg.build.schema.mode) {
        throw cli::ConfigError(std::string("cache was built with --features ") +
                               cli::features_name(meta.mode));
    }
    cfg.enc.atom_dim = meta.atom_dim;
    cfg.enc.bond_dim = meta.bond_dim;

    std::optional<nn::TgModel<float>> init;
    if (ssl_on) {
        if (o.pretrained.empty()) {
            throw cli::ConfigError("--ssl on requires --pretrained <encoder.pckp>");
        }
        auto ckpt = io::load_checkpoint(o.pretrained);
        if (ckpt.config.arch != cfg.enc.arch) {
            throw cli::ConfigError("pretrained encoder arch mismatch (checkpoint is " +
                                   std::string(cli::arch_name(ckpt.config.arch)) + ")");
        }
        if (ckpt.config.atom_dim != cfg.enc.atom_dim ||
            ckpt.config.bond_dim != cfg.enc.bond_dim ||
            ckpt.config.hidden != cfg.enc.hidden || ckpt.config.layers != cfg.enc.layers) {
            throw cli::ConfigError("pretrained encoder dimensions do not match this run");
        }
        init.emplace(io::restore_model(ckpt));
    } else if (!o.pretrained.empty()) {
        std::cerr << "warning: --pretrained ignored because --ssl off\n";
    }

    uint32_t expected_cups = 0;
    for (const auto& s : cache.reader().summaries()) {
        expected_cups = std::max(expected_cups, s.cup_index + 1);
    }

    auto plan = eval::make_folds(records, cfg.folds, o.seed);
    print_warnings(plan.warnings);
    {
        json jf = json::object();
        for (int f = 0; f < plan.n_folds; ++f) jf[std::to_string(f)] = plan.members[f];
        cli::write_json_file(cli::path_join(o.out, "folds.json"), jf);
    }

    auto summary = eval::cross_validate(
        cache, records, plan, cfg.seeds, init ? &*init : nullptr, cfg.enc, cfg.tc.finetune,
        expected_cups, [](const std::string& s) { std::cerr << s << "\n"; });

    const std::string label =
        cli::report_label(cfg.build.construction, cfg.build.schema.mode);

    std::ostringstream per_polymer;
    per_polymer << "fold,seed,polymer_id,tg_true_K,tg_pred_K\n";
    json runs = json::array();
    for (auto& run : summary.runs) {
        const std::string tag =
            "f" + std::to_string(run.fold) + "_s" + std::to_string(run.seed);
        cli::write_file(cli::path_join(o.out, "metrics_" + tag + ".jsonl"),
                        metrics_jsonl(run.log, false));

        json ckpts = json::array();
        for (size_t r = 0; r < run.top3.size(); ++r) {
            nn::TgModel<float> snap(cfg.enc, 0);
            train::restore_weights(snap, run.top3[r].weights);
            json meta_j{{"command", "train"},          {"label", label},
                        {"fold", run.fold},            {"seed", run.seed},
                        {"rank", r + 1},               {"val_rmse_K", run.top3[r].val_rmse},
                        {"epoch", run.top3[r].epoch},  {"ssl", ssl_on ? "on" : "off"},
                        {"construction", cli::construction_name(cfg.build.construction)},
                        {"features", cli::features_name(cfg.build.schema.mode)},
                        {"arch", cli::arch_name(cfg.enc.arch)}};
            const auto path =
                cli::path_join(o.out, "run_" + tag + "_rank" + std::to_string(r + 1) +
                                          ".pckp");
            io::save_checkpoint(path, snap, cfg.build.schema.mode, run.transform,
                                meta_j.dump());
            ckpts.push_back(path);
        }
        for (size_t i = 0; i < run.ids.size(); ++i) {
            per_polymer << run.fold << "," << run.seed << "," << run.ids[i] << ","
                        << run.truths_k[i] << "," << run.predictions_k[i] << "\n";
        }
        runs.push_back({{"fold", run.fold},
                        {"seed", run.seed},
                        {"rmse_K", run.rmse_k},
                        {"best_val_rmse_K", run.best_val_rmse},
                        {"checkpoints", ckpts}});
    }
    cli::write_file(cli::path_join(o.out, "per_polymer.csv"), per_polymer.str());

    json sj{{"label", label},
            {"construction", cli::construction_name(cfg.build.construction)},
            {"encoder", cli::arch_name(cfg.enc.arch)},
            {"ssl", ssl_on ? "on" : "off"},
            {"rmse_mean_K", summary.rmse_mean_k},
            {"rmse_std_K", summary.rmse_std_k},
            {"folds", cfg.folds},
            {"seeds", cfg.seeds},
            {"expected_cups", expected_cups},
            {"runs", runs}};
    cli::write_json_file(cli::path_join(o.out, "summary.json"), sj);

    auto m = base_manifest("train", cfg);
    m["seed"] = o.seed;
    m["ssl"] = ssl_on ? "on" : "off";
    m["label"] = label;
    m["inputs"][o.data] = cli::file_hash_hex(o.data);
    m["inputs"][o.cache] = cli::file_hash_hex(o.cache);
    if (!o.pretrained.empty()) m["inputs"][o.pretrained] = cli::file_hash_hex(o.pretrained);
    m["rmse_mean_K"] = summary.rmse_mean_k;
    m["rmse_std_K"] = summary.rmse_std_k;
    m["wall_clock_s"] = sw.seconds();
    cli::write_json_file(cli::path_join(o.out, "manifest.json"), m);

    std::cout << label << " [" << cli::arch_name(cfg.enc.arch) << ", ssl "
              << (ssl_on ? "on" : "off") << "]: RMSE " << std::fixed
              << std::setprecision(2) << summary.rmse_mean_k << " +/- "
              << summary.rmse_std_k << " K over " << summary.runs.size() << " runs\n";
    return 0;
}

// ------------------------------------------------------------- evaluate

struct EvalOpts {
    std::string run, cache, data, out, compare;
    uint32_t mc_passes = 0;
    bool ensemble = false;
    uint64_t seed = 0;
};

int run_evaluate(const EvalOpts& o) {
    cli::Stopwatch sw;
    cli::ensure_dir(o.out);
    g_error_dir = o.out;

    auto summary = cli::load_json(cli::path_join(o.run, "summary.json"));
    auto folds_j = cli::load_json(cli::path_join(o.run, "folds.json"));
    const auto expected_cups = summary.at("expected_cups").get<uint32_t>();

    std::vector<std::string> warnings;
    auto records = io::read_dataset_csv(o.data, &warnings);
    print_warnings(warnings);
    std::unordered_map<std::string, double> targets;
    for (const auto& r : records) {
        if (r.tg) targets.emplace(r.id, *r.tg);
    }

    train::CacheSource cache(o.cache);
    std::map<std::string, std::vector<size_t>> graphs_of;
    for (size_t i = 0; i < cache.size(); ++i) {
        graphs_of[cache.ref(i).polymer_id].push_back(i);
    }

    std::ostringstream report;
    report << "fold,seed,polymer_id,tg_true_K,tg_pred_K";
    if (o.ensemble) report << ",tg_ensemble_K";
    if (o.mc_passes > 0) report << ",sigma_mc_K";
    report << "\n";

    json run_rows = json::array();
    std::vector<double> best_rmses, ens_rmses;
    size_t run_index = 0;
    for (const auto& run : summary.at("runs")) {
        const auto fold = run.at("fold").get<uint32_t>();
        const auto seed = run.at("seed").get<uint64_t>();
        const auto ckpt_paths = run.at("checkpoints").get<std::vector<std::string>>();
        if (ckpt_paths.empty()) throw io::CheckpointError("run has no checkpoints");

        auto ckpt = io::load_checkpoint(ckpt_paths[0]);
        if (!ckpt.target_transform) {
            throw io::CheckpointError(ckpt_paths[0] + " has no target transform");
        }
        auto model = io::restore_model(ckpt);
        const auto& tf = *ckpt.target_transform;

        std::vector<size_t> test_idx;
        for (const auto& id :
             folds_j.at(std::to_string(fold)).get<std::vector<std::string>>()) {
            auto it = graphs_of.find(id);
            if (it == graphs_of.end()) {
                throw eval::MissingCup("polymer " + id + " has no graphs in the cache");
            }
            test_idx.insert(test_idx.end(), it->second.begin(), it->second.end());
        }

        auto rr = eval::evaluate_run(model, cache, test_idx, tf, targets, expected_cups);
        best_rmses.push_back(rr.rmse_k);

        std::vector<double> ens;
        if (o.ensemble) {
            std::vector<std::shared_ptr<nn::TgModel<float>>> models;
            for (const auto& p : ckpt_paths) {
                models.push_back(
                    std::make_shared<nn::TgModel<float>>(io::restore_model(
                        io::load_checkpoint(p))));
            }
            ens = eval::ensemble_predict(models, cache, test_idx, tf);
            ens_rmses.push_back(eval::rmse(ens, rr.truths_k));
        }

        eval::McResult mc;
        if (o.mc_passes > 0) {
            mc = eval::mc_dropout(model, cache, test_idx, tf, o.mc_passes,
                                  num::mix_keys(o.seed, run_index));
        }

        for (size_t i = 0; i < rr.ids.size(); ++i) {
            report << fold << "," << seed << "," << rr.ids[i] << "," << rr.truths_k[i]
                   << "," << rr.predictions_k[i];
            if (o.ensemble) report << "," << ens[i];
            if (o.mc_passes > 0) report << "," << mc.std_k[i];
            report << "\n";
        }

        json row{{"fold", fold}, {"seed", seed}, {"rmse_K", rr.rmse_k}};
        if (o.ensemble) row["ensemble_rmse_K"] = ens_rmses.back();
        run_rows.push_back(row);
        ++run_index;
    }
    cli::write_file(cli::path_join(o.out, "report.csv"), report.str());

    json es{{"label", summary.at("label")},
            {"construction", summary.at("construction")},
            {"encoder", summary.at("encoder")},
            {"ssl", summary.at("ssl")},
            {"rmse_mean_K", eval::mean(best_rmses)},
            {"rmse_std_K", best_rmses.size() > 1 ? eval::sample_std(best_rmses) : 0.0},
            {"runs", run_rows}};
    if (o.ensemble) {
        es["ensemble_rmse_mean_K"] = eval::mean(ens_rmses);
        es["ensemble_rmse_std_K"] = ens_rmses.size() > 1 ? eval::sample_std(ens_rmses) : 0.0;
    }

    if (!o.compare.empty()) {
        auto other = cli::load_json(o.compare);
        std::map<std::pair<uint32_t, uint64_t>, double> mine, theirs;
        for (const auto& r : run_rows) {
            mine[{r.at("fold").get<uint32_t>(), r.at("seed").get<uint64_t>()}] =
                r.at("rmse_K").get<double>();
        }
        for (const auto& r : other.at("runs")) {
            theirs[{r.at("fold").get<uint32_t>(), r.at("seed").get<uint64_t>()}] =
                r.at("rmse_K").get<double>();
        }
        if (mine.size() != theirs.size()) {
            throw std::invalid_argument("compared run sets differ in size");
        }
        std::vector<double> a, b;
        for (const auto& [k, v] : mine) {
            auto it = theirs.find(k);
            if (it == theirs.end()) {
                throw std::invalid_argument("unmatched run in --compare summary");
            }
            a.push_back(v);
            b.push_back(it->second);
        }
        auto tt = eval::paired_t_test(a, b);
        es["compare"] = {{"against", o.compare},
                         {"t", tt.t},
                         {"df", tt.df},
                         {"p_two_sided", tt.p}};
    }
    es["wall_clock_s"] = sw.seconds();
    cli::write_json_file(cli::path_join(o.out, "eval_summary.json"), es);

    std::cout << "evaluated " << run_rows.size() << " runs: RMSE " << std::fixed
              << std::setprecision(2) << eval::mean(best_rmses) << " K";
    if (o.ensemble) std::cout << " (ensemble " << eval::mean(ens_rmses) << " K)";
    std::cout << " -> " << cli::path_join(o.out, "eval_summary.json") << "\n";
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepOpts {
    std::string checkpoint, out, psmiles, config;
    double m0 = 0.0;
    double mn_lo = 2000.0, mn_hi = 20000.0;
    double d_lo = 1.5, d_hi = 4.0;
    uint32_t grid = 10;
    int cups = -1, chains = -1, bins = -1, dp_max = -1;
    uint64_t seed = 0;
};

int run_sweep(const SweepOpts& o) {
    cli::Stopwatch sw;
    cli::ensure_dir(o.out);
    g_error_dir = o.out;

    cli::AppConfig cfg;
    if (!o.config.empty()) cli::apply_config_json(cfg, cli::load_json(o.config));
    if (o.cups >= 0) cfg.build.cups = static_cast<uint32_t>(o.cups);
    if (o.chains >= 0) cfg.build.chains_per_cup = static_cast<uint32_t>(o.chains);
    if (o.bins >= 0) cfg.build.bins = static_cast<uint32_t>(o.bins);
    if (o.dp_max >= 0) cfg.build.dp_max = static_cast<uint32_t>(o.dp_max);
    cfg.build.seed = o.seed;
    cfg.build.construction = graph::Construction::LargeGraph;

    auto ckpt = io::load_checkpoint(o.checkpoint);
    if (!ckpt.target_transform) {
        throw io::CheckpointError(o.checkpoint + " has no target transform");
    }
    auto model = io::restore_model(ckpt);
    cfg.build.schema.mode = ckpt.feature_mode;

    eval::SweepSpec spec;
    spec.psmiles = o.psmiles;
    spec.m0 = o.m0 > 0 ? o.m0 : io::unit_mass(chem::parse_repeat_unit(o.psmiles));
    spec.mn_lo = o.mn_lo;
    spec.mn_hi = o.mn_hi;
    spec.d_lo = o.d_lo;
    spec.d_hi = o.d_hi;
    spec.grid = o.grid;
    spec.build = cfg.build;

    auto res = eval::sensitivity_sweep(model, *ckpt.target_transform, spec);

    std::ostringstream csv;
    csv << "mn_g_mol,dispersity,tg_pred_K,dtg_dD\n";
    for (uint32_t i = 0; i < spec.grid; ++i) {
        for (uint32_t j = 0; j < spec.grid; ++j) {
            const size_t c = static_cast<size_t>(i) * spec.grid + j;
            csv << res.mn_values[i] << "," << res.d_values[j] << "," << res.tg_k[c] << ","
                << res.sens[c] << "\n";
        }
    }
    const auto csv_path = cli::path_join(o.out, "sweep.csv");
    cli::write_file(csv_path, csv.str());

    auto m = base_manifest("sweep", cfg);
    m["seed"] = o.seed;
    m["inputs"][o.checkpoint] = cli::file_hash_hex(o.checkpoint);
    m["psmiles"] = o.psmiles;
    m["m0"] = spec.m0;
    m["grid"] = spec.grid;
    m["outputs"] = {{{"path", csv_path}, {"hash", cli::file_hash_hex(csv_path)}}};
    m["wall_clock_s"] = sw.seconds();
    cli::write_json_file(cli::path_join(o.out, "manifest.json"), m);

    const auto [lo, hi] = std::minmax_element(res.tg_k.begin(), res.tg_k.end());
    std::cout << "sweep " << spec.grid << "x" << spec.grid << ": Tg in [" << std::fixed
              << std::setprecision(1) << *lo << ", " << *hi << "] K -> " << csv_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polymer ensemble-graph Tg prediction pipeline"};
    app.require_subcommand(1);

    SynthOpts so;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset and corpus");
    synth->add_option("--out", so.out, "output directory")->required();
    synth->add_option("--seed", so.seed, "master seed");
    synth->add_option("--polymers", so.polymers, "number of labeled polymers");
    synth->add_option("--corpus", so.corpus, "number of corpus repeat units");

    BuildOpts bo;
    auto* build = app.add_subcommand("build", "featurize a dataset into a graph cache");
    build->add_option("--data", bo.data, "dataset CSV")->required();
    build->add_option("--out", bo.out, "output directory")->required();
    build->add_option("--config", bo.config, "JSON config file");
    build->add_option("--cups", bo.cups, "sampled ensembles per polymer");
    build->add_option("--chains", bo.chains, "chains per cup");
    build->add_option("--bins", bo.bins, "stratified sampling bins");
    build->add_option("--dp-max", bo.dp_max, "chain-length cap");
    build->add_option("--construction", bo.construction, "large|repeat-unit");
    build->add_option("--features", bo.features, "chemical|topology-only");
    build->add_option("--seed", bo.seed, "construction seed");
    build->add_option("--block", bo.block, "records built in parallel per block");

    PretrainOpts po;
    auto* pretrain = app.add_subcommand("pretrain", "masked pretraining on a corpus");
    pretrain->add_option("--corpus", po.corpus, "PSMILES lines file")->required();
    pretrain->add_option("--out", po.out, "output directory")->required();
    pretrain->add_option("--config", po.config, "JSON config file");
    pretrain->add_option("--arch", po.arch, "gine|gatv2");
    pretrain->add_option("--features", po.features, "must be chemical");
    pretrain->add_option("--seed", po.seed, "master seed");
    pretrain->add_option("--max-failure-rate", po.max_failure_rate,
                         "tolerated corpus parse-failure fraction");

    TrainOpts to;
    auto* train_cmd = app.add_subcommand("train", "cross-validated fine-tuning");
    train_cmd->add_option("--cache", to.cache, "graph cache from `build`")->required();
    train_cmd->add_option("--data", to.data, "dataset CSV")->required();
    train_cmd->add_option("--out", to.out, "output directory")->required();
    train_cmd->add_option("--config", to.config, "JSON config file");
    train_cmd->add_option("--arch", to.arch, "gine|gatv2");
    train_cmd->add_option("--features", to.features, "chemical|topology-only");
    train_cmd->add_option("--construction", to.construction, "large|repeat-unit");
    train_cmd->add_option("--ssl", to.ssl, "on|off");
    train_cmd->add_option("--pretrained", to.pretrained, "encoder checkpoint for --ssl on");
    train_cmd->add_option("--seeds", to.seeds, "comma-separated run seeds");
    train_cmd->add_option("--folds", to.folds, "number of CV folds");
    train_cmd->add_option("--seed", to.seed, "fold-plan seed");

    EvalOpts eo;
    auto* evaluate = app.add_subcommand("evaluate", "re-score saved checkpoints");
    evaluate->add_option("--run", eo.run, "output directory of `train`")->required();
    evaluate->add_option("--cache", eo.cache, "graph cache")->required();
    evaluate->add_option("--data", eo.data, "dataset CSV")->required();
    evaluate->add_option("--out", eo.out, "output directory")->required();
    evaluate->add_option("--mc-passes", eo.mc_passes, "MC-dropout passes (0 = off)");
    evaluate->add_flag("--ensemble", eo.ensemble, "also report top-3 ensemble predictions");
    evaluate->add_option("--compare", eo.compare,
                         "summary.json of another run for a paired t-test");
    evaluate->add_option("--seed", eo.seed, "MC-dropout seed");

    SweepOpts wo;
    auto* sweep = app.add_subcommand("sweep", "Mn x dispersity sensitivity grid");
    sweep->add_option("--checkpoint", wo.checkpoint, "trained checkpoint")->required();
    sweep->add_option("--out", wo.out, "output directory")->required();
    sweep->add_option("--psmiles", wo.psmiles, "repeat unit to sweep")->required();
    sweep->add_option("--config", wo.config, "JSON config file");
    sweep->add_option("--m0", wo.m0, "repeat-unit mass (derived from the unit when 0)");
    sweep->add_option("--mn-lo", wo.mn_lo, "Mn range low");
    sweep->add_option("--mn-hi", wo.mn_hi, "Mn range high");
    sweep->add_option("--d-lo", wo.d_lo, "dispersity range low");
    sweep->add_option("--d-hi", wo.d_hi, "dispersity range high");
    sweep->add_option("--grid", wo.grid, "grid points per axis");
    sweep->add_option("--cups", wo.cups, "cups per cell");
    sweep->add_option("--chains", wo.chains, "chains per cup");
    sweep->add_option("--bins", wo.bins, "stratified sampling bins");
    sweep->add_option("--dp-max", wo.dp_max, "chain-length cap");
    sweep->add_option("--seed", wo.seed, "construction seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(so);
        if (build->parsed()) return run_build(bo);
        if (pretrain->parsed()) return run_pretrain(po);
        if (train_cmd->parsed()) return run_train(to);
        if (evaluate->parsed()) return run_evaluate(eo);
        if (sweep->parsed()) return run_sweep(wo);
    } catch (const std::exception& e) {
        return fail(e);
    }
    return 0;
}
