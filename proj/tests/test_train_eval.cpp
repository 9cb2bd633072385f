#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "polytg/chem/psmiles.hpp"
#include "polytg/eval/harness.hpp"
#include "polytg/graph/builder.hpp"
#include "polytg/io/synth.hpp"
#include "polytg/train/loops.hpp"

using namespace polytg;

namespace {

nn::EncoderConfig small_config() {
    nn::EncoderConfig cfg;
    cfg.hidden = 8;
    cfg.layers = 1;
    cfg.decoder_hidden = 4;
    return cfg;
}

constexpr std::array<const char*, 6> kUnits = {
    "[*]CC[*]",        "[*]CC([*])C",         "[*]CC([*])c1ccccc1",
    "[*]CCO[*]",       "[*]CC([*])Cl",        "[*]CC([*])C(=O)OC",
};

// Twelve labeled polymers, two small cups each. Polymers ft10/ft11 are
// the held-out validation pair; the ten training targets span all three
// Tg strata.
struct Labeled {
    std::shared_ptr<train::MemorySource> source;
    std::unordered_map<std::string, double> targets;
    std::vector<size_t> train_idx, val_idx;
};

const Labeled& labeled() {
    static const Labeled fixture = [] {
        Labeled l;
        std::vector<graph::PolymerGraph> graphs;
        for (int i = 0; i < 12; ++i) {
            graph::PolymerInput in;
            in.id = "ft" + std::to_string(i);
            in.unit1 = chem::parse_repeat_unit(kUnits[static_cast<size_t>(i) % kUnits.size()]);
            in.mn = 400.0 + 90.0 * i;
            in.mw = in.mn * 1.5;
            in.m0 = io::unit_mass(in.unit1);
            graph::BuildConfig cfg;
            cfg.cups = 2;
            cfg.chains_per_cup = 4;
            cfg.bins = 2;
            cfg.seed = 13;
            for (auto& g : graph::build_graphs(in, cfg)) graphs.push_back(std::move(g));
            l.targets[in.id] = 190.0 + 25.0 * i;
        }
        for (size_t i = 0; i < graphs.size(); ++i) {
            const auto& id = graphs[i].polymer_id;
            (id == "ft10" || id == "ft11" ? l.val_idx : l.train_idx).push_back(i);
        }
        l.source = std::make_shared<train::MemorySource>(std::move(graphs));
        return l;
    }();
    return fixture;
}

std::shared_ptr<train::MemorySource> trimer_corpus(size_t n) {
    std::vector<graph::PolymerGraph> graphs;
    const auto units = io::generate_corpus(n, 21);
    graph::FeatureSchema schema;
    for (size_t i = 0; i < units.size(); ++i) {
        graphs.push_back(graph::build_trimer_graph("t" + std::to_string(i),
                                                   chem::parse_repeat_unit(units[i]), schema));
    }
    return std::make_shared<train::MemorySource>(std::move(graphs));
}

bool same_weights(const nn::TgModel<float>& a, const nn::TgModel<float>& b) {
    const auto sa = train::snapshot_weights(a);
    const auto sb = train::snapshot_weights(b);
    return sa == sb;
}

std::vector<size_t> indices_of(const train::GraphSource& data, const std::string& id) {
    std::vector<size_t> out;
    for (size_t i = 0; i < data.size(); ++i) {
        if (data.ref(i).polymer_id == id) out.push_back(i);
    }
    return out;
}

double recomputed_val_rmse(const nn::TgModel<float>& model, const train::GraphSource& data,
                           const std::vector<size_t>& val_idx,
                           const train::QuantileTransform& tf,
                           const std::unordered_map<std::string, double>& targets) {
    num::CounterRng unused(0);
    double ss = 0.0;
    const auto groups = train::group_by_polymer(data, val_idx);
    for (const auto& g : groups) {
        auto preds =
            train::predict_kelvin(model, data, g.graphs, tf, nn::RunMode::Eval, unused);
        double mean = 0.0;
        for (double p : preds) mean += p;
        mean /= static_cast<double>(preds.size());
        const double d = mean - targets.at(g.id);
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(groups.size()));
}

}  // namespace

TEST_SUITE("train_eval") {

TEST_CASE("pretrain rejects bad corpora") {
    train::PretrainConfig cfg;
    auto empty = std::make_shared<train::MemorySource>(std::vector<graph::PolymerGraph>{});
    CHECK_THROWS_AS((void)train::pretrain(*empty, small_config(), cfg, 1),
                    train::CorpusEmpty);
    auto single = trimer_corpus(1);
    CHECK_THROWS_AS((void)train::pretrain(*single, small_config(), cfg, 1),
                    train::CorpusEmpty);

    auto corpus = trimer_corpus(4);
    cfg.mask_nodes = 0.0;
    cfg.mask_edges = 0.0;
    CHECK_THROWS_AS((void)train::pretrain(*corpus, small_config(), cfg, 1),
                    train::MaskFractionZero);
}

TEST_CASE("pretraining replays bit for bit under one seed") {
    auto corpus = trimer_corpus(12);
    train::PretrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 4;
    cfg.val_fraction = 0.2;

    const auto a = train::pretrain(*corpus, small_config(), cfg, 5);
    const auto b = train::pretrain(*corpus, small_config(), cfg, 5);

    REQUIRE(a.log.size() == 3);  // epoch-0 validation pass plus two epochs
    CHECK(a.log[0].epoch == 0);
    CHECK(a.log[0].train_loss == 0.0);
    CHECK(a.log[1].epoch == 1);
    for (const auto& e : a.log) {
        CHECK(std::isfinite(e.val_metric));
        CHECK(e.val_metric > 0.0);
        CHECK(e.atom_accuracy >= 0.0);
        CHECK(e.atom_accuracy <= 1.0);
        CHECK(e.bond_accuracy >= 0.0);
        CHECK(e.bond_accuracy <= 1.0);
    }

    REQUIRE(b.log.size() == a.log.size());
    for (size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].train_loss == b.log[i].train_loss);
        CHECK(a.log[i].val_metric == b.log[i].val_metric);
    }
    CHECK(same_weights(*a.model, *b.model));
    CHECK(a.best_epoch == b.best_epoch);

    // The kept weights correspond to the best validation epoch.
    double best = a.log[0].val_metric;
    for (const auto& e : a.log) best = std::min(best, e.val_metric);
    CHECK(a.best_val == best);

    const auto c = train::pretrain(*corpus, small_config(), cfg, 6);
    CHECK_FALSE(same_weights(*a.model, *c.model));
}

TEST_CASE("finetune input validation") {
    const auto& l = labeled();
    train::FinetuneConfig cfg;
    CHECK_THROWS_AS((void)train::finetune(*l.source, {}, l.val_idx, l.targets, nullptr,
                                          small_config(), cfg, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)train::finetune(*l.source, l.train_idx, {}, l.targets, nullptr,
                                          small_config(), cfg, 1),
                    train::NoValidation);
}

TEST_CASE("finetuning is deterministic and tracks its best checkpoints") {
    const auto& l = labeled();
    train::FinetuneConfig cfg;
    cfg.epochs = 3;
    cfg.warmup = 0;
    cfg.batch_size = 2;

    const auto a = train::finetune(*l.source, l.train_idx, l.val_idx, l.targets, nullptr,
                                   small_config(), cfg, 9);
    const auto b = train::finetune(*l.source, l.train_idx, l.val_idx, l.targets, nullptr,
                                   small_config(), cfg, 9);

    REQUIRE(a.log.size() == 3);
    for (size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].epoch == i + 1);
        CHECK(std::isfinite(a.log[i].train_loss));
        CHECK(std::isfinite(a.log[i].val_metric));
        CHECK(a.log[i].train_loss == b.log[i].train_loss);
        CHECK(a.log[i].val_metric == b.log[i].val_metric);
    }
    CHECK(same_weights(*a.model, *b.model));

    // top3: ascending val RMSE, epochs as tie break, entries taken from
    // the logged epochs.
    REQUIRE(a.top3.size() == 3);
    for (size_t i = 1; i < a.top3.size(); ++i) {
        const bool ordered =
            a.top3[i - 1].val_rmse < a.top3[i].val_rmse ||
            (a.top3[i - 1].val_rmse == a.top3[i].val_rmse &&
             a.top3[i - 1].epoch < a.top3[i].epoch);
        CHECK(ordered);
    }
    for (const auto& entry : a.top3) {
        REQUIRE(entry.epoch >= 1);
        REQUIRE(entry.epoch <= a.log.size());
        CHECK(entry.val_rmse == a.log[entry.epoch - 1].val_metric);
    }
    CHECK(a.best_val_rmse == a.top3.front().val_rmse);
    CHECK(a.best_epoch == a.top3.front().epoch);

    // The returned model carries the best checkpoint's weights.
    CHECK(recomputed_val_rmse(*a.model, *l.source, l.val_idx, a.transform, l.targets) ==
          doctest::Approx(a.best_val_rmse).epsilon(1e-9));

    const auto c = train::finetune(*l.source, l.train_idx, l.val_idx, l.targets, nullptr,
                                   small_config(), cfg, 10);
    CHECK_FALSE(same_weights(*a.model, *c.model));
}

TEST_CASE("target transform is fit on training polymers only") {
    const auto& l = labeled();
    train::FinetuneConfig cfg;
    cfg.epochs = 1;
    cfg.warmup = 0;

    const auto res = train::finetune(*l.source, l.train_idx, l.val_idx, l.targets, nullptr,
                                     small_config(), cfg, 3);
    std::vector<double> train_targets;
    for (int i = 0; i < 10; ++i) train_targets.push_back(190.0 + 25.0 * i);
    std::sort(train_targets.begin(), train_targets.end());
    CHECK(res.transform.knot_quantiles() == train_targets);

    // Perturbing the held-out labels must not move the transform.
    auto shifted = l.targets;
    shifted["ft10"] += 50.0;
    shifted["ft11"] -= 50.0;
    const auto res2 = train::finetune(*l.source, l.train_idx, l.val_idx, shifted, nullptr,
                                      small_config(), cfg, 3);
    CHECK(res2.transform.knot_quantiles() == res.transform.knot_quantiles());
    CHECK(res2.transform.knot_probs() == res.transform.knot_probs());
}

TEST_CASE("pretrained encoders seed fine-tuning") {
    const auto& l = labeled();
    auto corpus = trimer_corpus(8);
    train::PretrainConfig pcfg;
    pcfg.epochs = 1;
    pcfg.batch_size = 4;
    pcfg.val_fraction = 0.25;
    const auto pre = train::pretrain(*corpus, small_config(), pcfg, 2);

    train::FinetuneConfig cfg;
    cfg.epochs = 1;
    cfg.warmup = 0;
    const auto warm = train::finetune(*l.source, l.train_idx, l.val_idx, l.targets,
                                      pre.model.get(), small_config(), cfg, 4);
    const auto cold = train::finetune(*l.source, l.train_idx, l.val_idx, l.targets, nullptr,
                                      small_config(), cfg, 4);
    // Same seed, but the encoder init differs, so the runs diverge.
    CHECK_FALSE(same_weights(*warm.model, *cold.model));

    // copy_encoder_weights moves encoder tensors and only those.
    nn::TgModel<float> dst(small_config(), 100);
    const auto before = train::snapshot_weights(dst);
    train::copy_encoder_weights(dst, *pre.model);
    const auto& items = dst.params().items();
    const auto after = train::snapshot_weights(dst);
    for (size_t i = 0; i < items.size(); ++i) {
        const auto& name = items[i].first;
        const bool encoder = name.rfind("embed.", 0) == 0 || name.rfind("layer", 0) == 0;
        if (encoder) {
            CHECK(after[i] == train::snapshot_weights(*pre.model)[i]);
        } else {
            CHECK(after[i] == before[i]);
        }
    }

    nn::EncoderConfig other = small_config();
    other.hidden = 16;
    nn::TgModel<float> mismatched(other, 1);
    CHECK_THROWS_AS(train::copy_encoder_weights(mismatched, *pre.model),
                    std::invalid_argument);
}

TEST_CASE("predict_kelvin respects index order and batch splits") {
    const auto& l = labeled();
    nn::TgModel<float> model(small_config(), 2);
    std::vector<double> fit_targets;
    for (const auto& [id, tg] : l.targets) fit_targets.push_back(tg);
    const auto tf = train::QuantileTransform::fit(fit_targets);

    num::CounterRng unused(0);
    const std::vector<size_t> idx = {0, 1, 2, 3, 4};
    const auto one = train::predict_kelvin(model, *l.source, idx, tf, nn::RunMode::Eval,
                                           unused, 1);
    const auto four = train::predict_kelvin(model, *l.source, idx, tf, nn::RunMode::Eval,
                                            unused, 4);
    const auto all = train::predict_kelvin(model, *l.source, idx, tf, nn::RunMode::Eval,
                                           unused, 16);
    REQUIRE(one.size() == idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        CHECK(std::isfinite(one[i]));
        CHECK(four[i] == doctest::Approx(one[i]).epsilon(1e-6));
        CHECK(all[i] == doctest::Approx(one[i]).epsilon(1e-6));
    }

    const auto repeated = train::predict_kelvin(model, *l.source, {2, 0, 2}, tf,
                                                nn::RunMode::Eval, unused);
    CHECK(repeated[0] == repeated[2]);
    CHECK(repeated[0] == doctest::Approx(one[2]).epsilon(1e-6));
    CHECK(repeated[1] == doctest::Approx(one[0]).epsilon(1e-6));
}

TEST_CASE("group_by_polymer orders ids and keeps index order") {
    const auto& l = labeled();
    std::vector<size_t> idx(l.source->size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto groups = train::group_by_polymer(*l.source, idx);
    REQUIRE(groups.size() == 12);
    CHECK(std::is_sorted(groups.begin(), groups.end(),
                         [](const auto& a, const auto& b) { return a.id < b.id; }));
    for (const auto& g : groups) {
        CHECK(g.graphs.size() == 2);
        CHECK(std::is_sorted(g.graphs.begin(), g.graphs.end()));
        for (size_t i : g.graphs) CHECK(l.source->ref(i).polymer_id == g.id);
    }
}

TEST_CASE("evaluate_run aggregates cups per polymer") {
    const auto& l = labeled();
    nn::TgModel<float> model(small_config(), 7);
    std::vector<double> fit_targets;
    for (const auto& [id, tg] : l.targets) fit_targets.push_back(tg);
    const auto tf = train::QuantileTransform::fit(fit_targets);

    const auto res = eval::evaluate_run(model, *l.source, l.val_idx, tf, l.targets, 2);
    CHECK(res.ids == std::vector<std::string>{"ft10", "ft11"});
    REQUIRE(res.predictions_k.size() == 2);
    for (double p : res.predictions_k) CHECK(std::isfinite(p));
    CHECK(res.truths_k == std::vector<double>{440.0, 465.0});
    const double want =
        std::sqrt(((res.predictions_k[0] - 440.0) * (res.predictions_k[0] - 440.0) +
                   (res.predictions_k[1] - 465.0) * (res.predictions_k[1] - 465.0)) /
                  2.0);
    CHECK(res.rmse_k == doctest::Approx(want).epsilon(1e-12));

    // A test set that misses one cup of a polymer is invalid.
    auto partial = l.val_idx;
    partial.pop_back();
    CHECK_THROWS_AS((void)eval::evaluate_run(model, *l.source, partial, tf, l.targets, 2),
                    eval::MissingCup);
    CHECK_THROWS_AS((void)eval::evaluate_run(model, *l.source, {}, tf, l.targets, 2),
                    std::invalid_argument);

    auto missing_label = l.targets;
    missing_label.erase("ft11");
    CHECK_THROWS_AS(
        (void)eval::evaluate_run(model, *l.source, l.val_idx, tf, missing_label, 2),
        std::invalid_argument);
}

TEST_CASE("a zeroed output head predicts one constant everywhere") {
    const auto& l = labeled();
    nn::TgModel<float> model(small_config(), 7);
    auto w2 = model.params().find("decoder.w2");
    auto b2 = model.params().find("decoder.b2");
    REQUIRE(w2 != nullptr);
    REQUIRE(b2 != nullptr);
    std::fill(w2->val.begin(), w2->val.end(), 0.0f);
    std::fill(b2->val.begin(), b2->val.end(), 0.0f);

    std::vector<double> fit_targets;
    for (const auto& [id, tg] : l.targets) fit_targets.push_back(tg);
    const auto tf = train::QuantileTransform::fit(fit_targets);
    const double c = tf.inverse(0.0);

    const auto res = eval::evaluate_run(model, *l.source, l.val_idx, tf, l.targets, 2);
    CHECK(res.predictions_k[0] == c);
    CHECK(res.predictions_k[1] == c);
    const double want = std::sqrt(((c - 440.0) * (c - 440.0) + (c - 465.0) * (c - 465.0)) / 2.0);
    CHECK(res.rmse_k == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("mc dropout sigma collapses to zero without dropout") {
    const auto& l = labeled();
    nn::EncoderConfig cfg = small_config();
    cfg.dropout = 0.0;
    cfg.decoder_dropout = 0.0;
    nn::TgModel<float> model(cfg, 11);
    std::vector<double> fit_targets;
    for (const auto& [id, tg] : l.targets) fit_targets.push_back(tg);
    const auto tf = train::QuantileTransform::fit(fit_targets);

    const auto res = eval::mc_dropout(model, *l.source, l.val_idx, tf, 3, 99);
    CHECK(res.ids == std::vector<std::string>{"ft10", "ft11"});
    for (double s : res.std_k) CHECK(s <= 1e-9);
    for (double m : res.mean_k) CHECK(std::isfinite(m));
}

TEST_CASE("mc dropout spreads and replays with dropout enabled") {
    const auto& l = labeled();
    nn::EncoderConfig cfg = small_config();
    cfg.dropout = 0.2;
    cfg.decoder_dropout = 0.45;
    nn::TgModel<float> model(cfg, 11);
    std::vector<double> fit_targets;
    for (const auto& [id, tg] : l.targets) fit_targets.push_back(tg);
    const auto tf = train::QuantileTransform::fit(fit_targets);

    const auto a = eval::mc_dropout(model, *l.source, l.val_idx, tf, 4, 31);
    const auto b = eval::mc_dropout(model, *l.source, l.val_idx, tf, 4, 31);
    CHECK(a.mean_k == b.mean_k);
    CHECK(a.std_k == b.std_k);
    double max_std = 0.0;
    for (double s : a.std_k) {
        CHECK(s >= 0.0);
        max_std = std::max(max_std, s);
    }
    CHECK(max_std > 0.0);

    const auto c = eval::mc_dropout(model, *l.source, l.val_idx, tf, 4, 32);
    CHECK(a.mean_k != c.mean_k);

    const auto single = eval::mc_dropout(model, *l.source, l.val_idx, tf, 1, 31);
    for (double s : single.std_k) CHECK(s == 0.0);
    CHECK_THROWS_AS((void)eval::mc_dropout(model, *l.source, l.val_idx, tf, 0, 31),
                    std::invalid_argument);
}

TEST_CASE("ensembles average member predictions") {
    const auto& l = labeled();
    auto ma = std::make_shared<nn::TgModel<float>>(small_config(), 1);
    auto mb = std::make_shared<nn::TgModel<float>>(small_config(), 2);
    std::vector<double> fit_targets;
    for (const auto& [id, tg] : l.targets) fit_targets.push_back(tg);
    const auto tf = train::QuantileTransform::fit(fit_targets);

    std::vector<std::string> ids;
    const auto pa = eval::ensemble_predict({ma}, *l.source, l.val_idx, tf, &ids);
    CHECK(ids == std::vector<std::string>{"ft10", "ft11"});
    const auto pb = eval::ensemble_predict({mb}, *l.source, l.val_idx, tf);
    const auto mix = eval::ensemble_predict({ma, ma, mb}, *l.source, l.val_idx, tf);
    REQUIRE(mix.size() == 2);
    for (size_t i = 0; i < mix.size(); ++i) {
        CHECK(mix[i] == doctest::Approx((2.0 * pa[i] + pb[i]) / 3.0).epsilon(1e-12));
    }
    const auto twice = eval::ensemble_predict({ma, ma}, *l.source, l.val_idx, tf);
    for (size_t i = 0; i < twice.size(); ++i) {
        CHECK(twice[i] == doctest::Approx(pa[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)eval::ensemble_predict({}, *l.source, l.val_idx, tf),
                    std::invalid_argument);
}

TEST_CASE("compare_runs pairs by fold and seed") {
    auto make = [](std::vector<std::tuple<uint32_t, uint64_t, double>> spec) {
        eval::CvSummary s;
        for (const auto& [fold, seed, rmse] : spec) {
            eval::RunResult r;
            r.fold = fold;
            r.seed = seed;
            r.rmse_k = rmse;
            s.runs.push_back(std::move(r));
        }
        return s;
    };
    // Insertion order deliberately differs between the two summaries.
    const auto a = make({{0, 1, 25.0}, {0, 2, 26.0}, {1, 1, 27.0}, {1, 2, 28.0}});
    const auto b = make({{1, 2, 25.0}, {0, 1, 24.5}, {1, 1, 26.5}, {0, 2, 24.0}});
    const auto got = eval::compare_runs(a, b);
    const auto want = eval::paired_t_test({25.0, 26.0, 27.0, 28.0}, {24.5, 24.0, 26.5, 25.0});
    CHECK(got.t == want.t);
    CHECK(got.df == want.df);
    CHECK(got.p == want.p);

    const auto short_b = make({{0, 1, 24.5}, {0, 2, 24.0}, {1, 1, 26.5}});
    CHECK_THROWS_AS((void)eval::compare_runs(a, short_b), std::invalid_argument);
    const auto wrong_key = make({{0, 1, 24.5}, {0, 2, 24.0}, {1, 1, 26.5}, {2, 2, 25.0}});
    CHECK_THROWS_AS((void)eval::compare_runs(a, wrong_key), std::invalid_argument);
}

TEST_CASE("sensitivity sweep grid and finite differences") {
    nn::TgModel<float> model(small_config(), 3);
    std::vector<double> fit_targets;
    for (int i = 0; i < 12; ++i) fit_targets.push_back(250.0 + 10.0 * i);
    const auto tf = train::QuantileTransform::fit(fit_targets);

    eval::SweepSpec spec;
    spec.psmiles = "[*]CC([*])c1ccccc1";
    spec.m0 = io::unit_mass(chem::parse_repeat_unit(spec.psmiles));
    spec.mn_lo = 2000;
    spec.mn_hi = 4000;
    spec.d_lo = 1.5;
    spec.d_hi = 2.5;
    spec.grid = 3;
    spec.build.cups = 1;
    spec.build.chains_per_cup = 4;
    spec.build.bins = 2;
    spec.build.seed = 3;

    const auto res = eval::sensitivity_sweep(model, tf, spec);
    REQUIRE(res.mn_values.size() == 3);
    REQUIRE(res.d_values.size() == 3);
    REQUIRE(res.tg_k.size() == 9);
    REQUIRE(res.sens.size() == 9);
    CHECK(res.mn_values.front() == 2000.0);
    CHECK(res.mn_values.back() == 4000.0);
    CHECK(res.mn_values[1] == doctest::Approx(3000.0));
    CHECK(res.d_values.front() == 1.5);
    CHECK(res.d_values.back() == 2.5);

    const double dd = res.d_values[1] - res.d_values[0];
    for (size_t i = 0; i < 3; ++i) {
        const size_t row = i * 3;
        for (double v : {res.tg_k[row], res.tg_k[row + 1], res.tg_k[row + 2]}) {
            CHECK(std::isfinite(v));
        }
        CHECK(res.sens[row] ==
              doctest::Approx((res.tg_k[row + 1] - res.tg_k[row]) / dd).epsilon(1e-12));
        CHECK(res.sens[row + 1] ==
              doctest::Approx((res.tg_k[row + 2] - res.tg_k[row]) / (2.0 * dd))
                  .epsilon(1e-12));
        CHECK(res.sens[row + 2] ==
              doctest::Approx((res.tg_k[row + 2] - res.tg_k[row + 1]) / dd).epsilon(1e-12));
    }

    eval::SweepSpec bad = spec;
    bad.grid = 0;
    CHECK_THROWS_AS((void)eval::sensitivity_sweep(model, tf, bad), std::invalid_argument);
}

TEST_CASE("a flat model sweeps to a flat grid with zero sensitivity") {
    nn::TgModel<float> model(small_config(), 3);
    auto w2 = model.params().find("decoder.w2");
    auto b2 = model.params().find("decoder.b2");
    std::fill(w2->val.begin(), w2->val.end(), 0.0f);
    std::fill(b2->val.begin(), b2->val.end(), 0.0f);

    std::vector<double> fit_targets;
    for (int i = 0; i < 12; ++i) fit_targets.push_back(250.0 + 10.0 * i);
    const auto tf = train::QuantileTransform::fit(fit_targets);

    eval::SweepSpec spec;
    spec.psmiles = "[*]CC[*]";
    spec.m0 = io::unit_mass(chem::parse_repeat_unit(spec.psmiles));
    spec.mn_lo = 2000;
    spec.mn_hi = 3000;
    spec.d_lo = 1.5;
    spec.d_hi = 2.0;
    spec.grid = 2;
    spec.build.cups = 1;
    spec.build.chains_per_cup = 4;
    spec.build.bins = 2;

    const auto res = eval::sensitivity_sweep(model, tf, spec);
    const double c = tf.inverse(0.0);
    for (double v : res.tg_k) CHECK(v == c);
    for (double s : res.sens) CHECK(s == 0.0);
}

}  // TEST_SUITE
