#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "polytg/eval/stats.hpp"
#include "polytg/graph/builder.hpp"
#include "polytg/io/dataset.hpp"
#include "polytg/train/loops.hpp"

namespace polytg::eval {

class MissingCup : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Deterministic stratified grouped fold assignment: all cups of one
// polymer share a fold; per-fold stratum counts are within one of ideal.
struct FoldPlan {
    int n_folds = 5;
    std::unordered_map<std::string, int> fold_of;
    std::vector<std::vector<std::string>> members;  // per fold, sorted ids
    std::vector<std::string> warnings;              // e.g. empty strata
};

FoldPlan make_folds(const std::vector<io::PolymerRecord>& records, int n_folds,
                    uint64_t seed);

// Stratified grouped validation carve-out from one training fold.
// Returns (train ids, val ids); both non-empty.
std::pair<std::vector<std::string>, std::vector<std::string>> split_validation(
    const std::vector<std::string>& ids,
    const std::unordered_map<std::string, double>& targets_k, double val_fraction,
    uint64_t seed);

// Polymer-level predictions for one evaluation: cup predictions are
// inverse-transformed to Kelvin and averaged per polymer.
struct RunResult {
    uint32_t fold = 0;
    uint64_t seed = 0;
    std::vector<std::string> ids;  // sorted
    std::vector<double> predictions_k;
    std::vector<double> truths_k;
    double rmse_k = 0.0;

    double best_val_rmse = 0.0;
    std::shared_ptr<nn::TgModel<float>> model;
    train::QuantileTransform transform;
    std::vector<train::CheckpointEntry> top3;
    std::vector<train::EpochLog> log;
};

// Evaluates `model` on the test graphs; every polymer must contribute
// exactly `expected_cups` distinct cups, else MissingCup.
RunResult evaluate_run(const nn::TgModel<float>& model, const train::GraphSource& data,
                       const std::vector<size_t>& test_idx,
                       const train::QuantileTransform& tf,
                       const std::unordered_map<std::string, double>& targets_k,
                       uint32_t expected_cups);

struct CvSummary {
    std::vector<RunResult> runs;  // fold-major, then seed
    double rmse_mean_k = 0.0;
    double rmse_std_k = 0.0;  // sample std over run-level RMSEs
};

using ProgressFn = std::function<void(const std::string&)>;

// Full fold x seed protocol: for each run, carve a validation split from
// the training folds, fine-tune (optionally from a pretrained encoder),
// and evaluate the held-out fold. Aggregate = mean +/- std over the
// run-level RMSEs.
CvSummary cross_validate(const train::GraphSource& data,
                         const std::vector<io::PolymerRecord>& records, const FoldPlan& plan,
                         const std::vector<uint64_t>& seeds,
                         const nn::TgModel<float>* pretrained,
                         const nn::EncoderConfig& enc, const train::FinetuneConfig& cfg,
                         uint32_t expected_cups, const ProgressFn& progress = nullptr);

// Pairs runs of two configurations by (fold, seed) and compares their
// per-run RMSEs.
TTestResult compare_runs(const CvSummary& a, const CvSummary& b);

// Monte-Carlo dropout: n_passes stochastic forward passes; cup
// predictions are averaged within a pass, mean/std taken across passes.
struct McResult {
    std::vector<std::string> ids;  // sorted
    std::vector<double> mean_k;
    std::vector<double> std_k;
};

McResult mc_dropout(const nn::TgModel<float>& model, const train::GraphSource& data,
                    const std::vector<size_t>& idx, const train::QuantileTransform& tf,
                    uint32_t n_passes, uint64_t seed);

// Mean of several checkpoints' polymer-level Kelvin predictions.
std::vector<double> ensemble_predict(
    const std::vector<std::shared_ptr<nn::TgModel<float>>>& models,
    const train::GraphSource& data, const std::vector<size_t>& idx,
    const train::QuantileTransform& tf, std::vector<std::string>* ids_out = nullptr);

// Mn x Dispersity sensitivity sweep on one repeat unit. Cell (i, j) holds
// the prediction at (mn_values[i], d_values[j]); sens is the finite
// difference along the dispersity axis (central inside, one-sided at the
// edges). All cells reuse the same construction seed and polymer id so
// the underlying chain draws stay matched across the grid.
struct SweepSpec {
    std::string psmiles;
    double m0 = 0.0;
    double mn_lo = 2000.0, mn_hi = 20000.0;
    double d_lo = 1.5, d_hi = 4.0;
    uint32_t grid = 10;
    graph::BuildConfig build;
};

struct SweepResult {
    std::vector<double> mn_values;  // size grid
    std::vector<double> d_values;   // size grid
    std::vector<double> tg_k;       // row-major grid x grid
    std::vector<double> sens;       // dTg/dD, same layout
};

SweepResult sensitivity_sweep(const nn::TgModel<float>& model,
                              const train::QuantileTransform& tf, const SweepSpec& spec);

}  // namespace polytg::eval
