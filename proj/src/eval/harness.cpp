#include "polytg/eval/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "polytg/chem/psmiles.hpp"
#include "polytg/num/rng.hpp"

namespace polytg::eval {

namespace {

const char* stratum_name(train::Stratum s) {
    switch (s) {
        case train::Stratum::Low: return "Low";
        case train::Stratum::Mid: return "Mid";
        default: return "High";
    }
}

// Ids bucketed by stratum in canonical (sorted) order.
std::array<std::vector<std::string>, train::kNumStrata> bucket_by_stratum(
    std::vector<std::string> ids, const std::unordered_map<std::string, double>& targets_k) {
    std::sort(ids.begin(), ids.end());
    std::array<std::vector<std::string>, train::kNumStrata> buckets;
    for (auto& id : ids) {
        auto it = targets_k.find(id);
        if (it == targets_k.end()) {
            throw std::invalid_argument("no Tg label for polymer " + id);
        }
        buckets[static_cast<int>(train::stratum_of(it->second))].push_back(std::move(id));
    }
    return buckets;
}

}  // namespace

FoldPlan make_folds(const std::vector<io::PolymerRecord>& records, int n_folds,
                    uint64_t seed) {
    if (n_folds < 2) throw std::invalid_argument("need at least two folds");
    if (records.empty()) throw std::invalid_argument("no records to fold");

    std::unordered_map<std::string, double> targets;
    for (const auto& r : records) {
        if (!r.tg) throw std::invalid_argument("record " + r.id + " has no Tg label");
        if (!targets.emplace(r.id, *r.tg).second) {
            throw std::invalid_argument("duplicate polymer id " + r.id);
        }
    }
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (const auto& r : records) ids.push_back(r.id);
    auto buckets = bucket_by_stratum(std::move(ids), targets);

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.members.resize(n_folds);
    // One round-robin cursor runs across all strata so total fold sizes
    // stay within one of each other as well.
    size_t cursor = 0;
    for (int s = 0; s < train::kNumStrata; ++s) {
        auto& bucket = buckets[s];
        if (bucket.empty()) {
            plan.warnings.push_back(std::string("stratum ") +
                                    stratum_name(static_cast<train::Stratum>(s)) +
                                    " is empty");
            continue;
        }
        num::CounterRng rng(seed, num::hash_string("folds"), static_cast<uint64_t>(s));
        rng.shuffle(bucket);
        for (auto& id : bucket) {
            const int f = static_cast<int>(cursor++ % static_cast<size_t>(n_folds));
            plan.fold_of.emplace(id, f);
            plan.members[f].push_back(std::move(id));
        }
    }
    for (auto& m : plan.members) std::sort(m.begin(), m.end());
    return plan;
}

std::pair<std::vector<std::string>, std::vector<std::string>> split_validation(
    const std::vector<std::string>& ids,
    const std::unordered_map<std::string, double>& targets_k, double val_fraction,
    uint64_t seed) {
    if (ids.empty()) throw std::invalid_argument("no polymers to split");
    auto buckets = bucket_by_stratum(ids, targets_k);

    std::vector<std::string> train_ids, val_ids;
    for (int s = 0; s < train::kNumStrata; ++s) {
        auto& bucket = buckets[s];
        if (bucket.empty()) continue;
        num::CounterRng rng(seed, num::hash_string("valsplit"), static_cast<uint64_t>(s));
        rng.shuffle(bucket);
        auto take = static_cast<size_t>(
            std::lround(val_fraction * static_cast<double>(bucket.size())));
        take = std::min(take, bucket.size());
        for (size_t i = 0; i < bucket.size(); ++i) {
            (i < take ? val_ids : train_ids).push_back(std::move(bucket[i]));
        }
    }
    if (val_ids.empty()) {
        // Fractions that round to zero everywhere still need one held-out
        // polymer for early stopping; take it from the end of the pool.
        if (train_ids.size() < 2) {
            throw train::NoValidation("too few polymers to carve a validation split");
        }
        val_ids.push_back(std::move(train_ids.back()));
        train_ids.pop_back();
    }
    if (train_ids.empty()) {
        throw std::invalid_argument("validation fraction leaves no training polymers");
    }
    std::sort(train_ids.begin(), train_ids.end());
    std::sort(val_ids.begin(), val_ids.end());
    return {std::move(train_ids), std::move(val_ids)};
}

RunResult evaluate_run(const nn::TgModel<float>& model, const train::GraphSource& data,
                       const std::vector<size_t>& test_idx,
                       const train::QuantileTransform& tf,
                       const std::unordered_map<std::string, double>& targets_k,
                       uint32_t expected_cups) {
    if (test_idx.empty()) throw std::invalid_argument("empty test set");
    auto groups = train::group_by_polymer(data, test_idx);

    RunResult res;
    num::CounterRng unused(0);
    for (const auto& g : groups) {
        std::set<uint32_t> cups;
        for (size_t i : g.graphs) cups.insert(data.ref(i).cup_index);
        if (cups.size() != expected_cups) {
            throw MissingCup("polymer " + g.id + " has " + std::to_string(cups.size()) +
                             " of " + std::to_string(expected_cups) + " cups");
        }
        auto preds = train::predict_kelvin(model, data, g.graphs, tf, nn::RunMode::Eval,
                                           unused);
        double mean = 0.0;
        for (double p : preds) mean += p;
        mean /= static_cast<double>(preds.size());

        auto it = targets_k.find(g.id);
        if (it == targets_k.end()) {
            throw std::invalid_argument("no Tg label for polymer " + g.id);
        }
        res.ids.push_back(g.id);
        res.predictions_k.push_back(mean);
        res.truths_k.push_back(it->second);
    }
    res.rmse_k = rmse(res.predictions_k, res.truths_k);
    return res;
}

CvSummary cross_validate(const train::GraphSource& data,
                         const std::vector<io::PolymerRecord>& records, const FoldPlan& plan,
                         const std::vector<uint64_t>& seeds,
                         const nn::TgModel<float>* pretrained,
                         const nn::EncoderConfig& enc, const train::FinetuneConfig& cfg,
                         uint32_t expected_cups, const ProgressFn& progress) {
    if (seeds.empty()) throw std::invalid_argument("no seeds given");

    std::unordered_map<std::string, double> targets;
    for (const auto& r : records) {
        if (r.tg) targets.emplace(r.id, *r.tg);
    }
    std::map<std::string, std::vector<size_t>> graphs_of;
    for (size_t i = 0; i < data.size(); ++i) {
        graphs_of[data.ref(i).polymer_id].push_back(i);
    }
    auto collect = [&graphs_of](const std::vector<std::string>& ids) {
        std::vector<size_t> out;
        for (const auto& id : ids) {
            auto it = graphs_of.find(id);
            if (it == graphs_of.end()) {
                throw std::invalid_argument("no graphs for polymer " + id);
            }
            out.insert(out.end(), it->second.begin(), it->second.end());
        }
        return out;
    };

    CvSummary summary;
    for (int f = 0; f < plan.n_folds; ++f) {
        std::vector<std::string> pool;
        for (int g = 0; g < plan.n_folds; ++g) {
            if (g == f) continue;
            pool.insert(pool.end(), plan.members[g].begin(), plan.members[g].end());
        }
        for (uint64_t s : seeds) {
            const uint64_t run_key =
                num::mix_keys(num::mix_keys(s, num::hash_string("run")),
                              static_cast<uint64_t>(f));
            auto [train_ids, val_ids] =
                split_validation(pool, targets, cfg.val_fraction, run_key);
            auto ft = train::finetune(data, collect(train_ids), collect(val_ids), targets,
                                      pretrained, enc, cfg, run_key);
            auto run = evaluate_run(*ft.model, data, collect(plan.members[f]), ft.transform,
                                    targets, expected_cups);
            run.fold = static_cast<uint32_t>(f);
            run.seed = s;
            run.best_val_rmse = ft.best_val_rmse;
            run.model = ft.model;
            run.transform = ft.transform;
            run.top3 = std::move(ft.top3);
            run.log = std::move(ft.log);
            if (progress) {
                progress("fold " + std::to_string(f) + " seed " + std::to_string(s) +
                         ": test RMSE " + std::to_string(run.rmse_k) + " K (best val " +
                         std::to_string(run.best_val_rmse) + " K, epoch " +
                         std::to_string(ft.best_epoch) + ")");
            }
            summary.runs.push_back(std::move(run));
        }
    }

    std::vector<double> rmses;
    rmses.reserve(summary.runs.size());
    for (const auto& r : summary.runs) rmses.push_back(r.rmse_k);
    summary.rmse_mean_k = mean(rmses);
    summary.rmse_std_k = rmses.size() > 1 ? sample_std(rmses) : 0.0;
    return summary;
}

TTestResult compare_runs(const CvSummary& a, const CvSummary& b) {
    std::map<std::pair<uint32_t, uint64_t>, double> ra, rb;
    for (const auto& r : a.runs) ra[{r.fold, r.seed}] = r.rmse_k;
    for (const auto& r : b.runs) rb[{r.fold, r.seed}] = r.rmse_k;
    if (ra.size() != rb.size()) throw std::invalid_argument("run sets differ in size");
    std::vector<double> va, vb;
    for (const auto& [key, v] : ra) {
        auto it = rb.find(key);
        if (it == rb.end()) {
            throw std::invalid_argument("unmatched run (fold " + std::to_string(key.first) +
                                        ", seed " + std::to_string(key.second) + ")");
        }
        va.push_back(v);
        vb.push_back(it->second);
    }
    return paired_t_test(va, vb);
}

McResult mc_dropout(const nn::TgModel<float>& model, const train::GraphSource& data,
                    const std::vector<size_t>& idx, const train::QuantileTransform& tf,
                    uint32_t n_passes, uint64_t seed) {
    if (n_passes == 0) throw std::invalid_argument("need at least one pass");
    auto groups = train::group_by_polymer(data, idx);

    McResult res;
    for (const auto& g : groups) res.ids.push_back(g.id);
    // passes x polymers matrix of per-pass cup-averaged predictions.
    std::vector<std::vector<double>> passes(n_passes,
                                            std::vector<double>(groups.size(), 0.0));
    for (uint32_t p = 0; p < n_passes; ++p) {
        num::CounterRng rng(seed, num::hash_string("mcpass"), p);
        for (size_t gi = 0; gi < groups.size(); ++gi) {
            auto preds = train::predict_kelvin(model, data, groups[gi].graphs, tf,
                                               nn::RunMode::MCDropout, rng);
            double mean = 0.0;
            for (double v : preds) mean += v;
            passes[p][gi] = mean / static_cast<double>(preds.size());
        }
    }

    res.mean_k.resize(groups.size());
    res.std_k.resize(groups.size());
    for (size_t gi = 0; gi < groups.size(); ++gi) {
        std::vector<double> col(n_passes);
        for (uint32_t p = 0; p < n_passes; ++p) col[p] = passes[p][gi];
        res.mean_k[gi] = mean(col);
        res.std_k[gi] = n_passes > 1 ? sample_std(col) : 0.0;
    }
    return res;
}

std::vector<double> ensemble_predict(
    const std::vector<std::shared_ptr<nn::TgModel<float>>>& models,
    const train::GraphSource& data, const std::vector<size_t>& idx,
    const train::QuantileTransform& tf, std::vector<std::string>* ids_out) {
    if (models.empty()) throw std::invalid_argument("empty ensemble");
    auto groups = train::group_by_polymer(data, idx);
    std::vector<double> out(groups.size(), 0.0);
    num::CounterRng unused(0);
    for (const auto& m : models) {
        for (size_t gi = 0; gi < groups.size(); ++gi) {
            auto preds = train::predict_kelvin(*m, data, groups[gi].graphs, tf,
                                               nn::RunMode::Eval, unused);
            double mean = 0.0;
            for (double v : preds) mean += v;
            out[gi] += mean / static_cast<double>(preds.size());
        }
    }
    for (auto& v : out) v /= static_cast<double>(models.size());
    if (ids_out) {
        ids_out->clear();
        for (const auto& g : groups) ids_out->push_back(g.id);
    }
    return out;
}

SweepResult sensitivity_sweep(const nn::TgModel<float>& model,
                              const train::QuantileTransform& tf, const SweepSpec& spec) {
    if (spec.grid == 0) throw std::invalid_argument("empty sweep grid");
    auto unit = chem::parse_repeat_unit(spec.psmiles);

    auto linspace = [](double lo, double hi, uint32_t n) {
        std::vector<double> v(n);
        for (uint32_t i = 0; i < n; ++i) {
            v[i] = n == 1 ? lo
                          : lo + (hi - lo) * static_cast<double>(i) /
                                static_cast<double>(n - 1);
        }
        return v;
    };

    SweepResult res;
    res.mn_values = linspace(spec.mn_lo, spec.mn_hi, spec.grid);
    res.d_values = linspace(spec.d_lo, spec.d_hi, spec.grid);
    res.tg_k.assign(static_cast<size_t>(spec.grid) * spec.grid, 0.0);
    res.sens.assign(static_cast<size_t>(spec.grid) * spec.grid, 0.0);

    num::CounterRng unused(0);
    for (uint32_t i = 0; i < spec.grid; ++i) {
        for (uint32_t j = 0; j < spec.grid; ++j) {
            graph::PolymerInput in;
            // One shared id keeps the chain draws identical across cells,
            // so grid differences reflect the descriptors alone.
            in.id = "sweep";
            in.unit1 = unit;
            in.phi1 = 1.0;
            in.phi2 = 0.0;
            in.mn = res.mn_values[i];
            in.mw = res.mn_values[i] * res.d_values[j];
            in.m0 = spec.m0;
            auto graphs = graph::build_graphs(in, spec.build);
            train::MemorySource source(std::move(graphs));
            std::vector<size_t> all(source.size());
            for (size_t k = 0; k < all.size(); ++k) all[k] = k;
            auto preds = train::predict_kelvin(model, source, all, tf, nn::RunMode::Eval,
                                               unused);
            double mean = 0.0;
            for (double v : preds) mean += v;
            res.tg_k[static_cast<size_t>(i) * spec.grid + j] =
                mean / static_cast<double>(preds.size());
        }
    }

    if (spec.grid > 1) {
        const double dd = res.d_values[1] - res.d_values[0];
        for (uint32_t i = 0; i < spec.grid; ++i) {
            const size_t row = static_cast<size_t>(i) * spec.grid;
            for (uint32_t j = 0; j < spec.grid; ++j) {
                double num, den;
                if (j == 0) {
                    num = res.tg_k[row + 1] - res.tg_k[row];
                    den = dd;
                } else if (j == spec.grid - 1) {
                    num = res.tg_k[row + j] - res.tg_k[row + j - 1];
                    den = dd;
                } else {
                    num = res.tg_k[row + j + 1] - res.tg_k[row + j - 1];
                    den = 2.0 * dd;
                }
                res.sens[row + j] = num / den;
            }
        }
    }
    return res;
}

}  // namespace polytg::eval
