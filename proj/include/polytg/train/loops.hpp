#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "polytg/nn/model.hpp"
#include "polytg/num/rng.hpp"
#include "polytg/train/data.hpp"
#include "polytg/train/quantile_transform.hpp"

namespace polytg::train {

class CorpusEmpty : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NoValidation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class MaskFractionZero : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PretrainConfig {
    double lr = 5e-4;
    double weight_decay = 1e-4;
    uint32_t batch_size = 64;
    uint32_t epochs = 65;
    uint32_t patience = 10;
    double mask_nodes = 0.15;
    double mask_edges = 0.15;
    double val_fraction = 0.05;
};

struct PlateauConfig {
    double factor = 0.3;
    uint32_t patience = 30;
    double min_lr = 1e-6;
};

struct FinetuneConfig {
    double lr = 5e-5;
    double weight_decay = 3e-4;
    uint32_t batch_size = 2;
    uint32_t epochs = 85;
    uint32_t patience = 30;
    uint32_t warmup = 15;  // early stopping may not fire at or before this epoch
    double huber_delta = 1.0;
    PlateauConfig plateau;
    double val_fraction = 0.15;  // used by the harness when carving the split
};

struct TrainConfig {
    PretrainConfig pretrain;
    FinetuneConfig finetune;
};

// One line of the metrics stream. Epoch 0 is the pre-training validation
// pass (train_loss 0); val_metric is masked CE for pretraining and
// Kelvin RMSE for fine-tuning.
struct EpochLog {
    uint32_t epoch = 0;
    double train_loss = 0.0;
    double val_metric = 0.0;
    double lr = 0.0;
    double atom_accuracy = 0.0;
    double bond_accuracy = 0.0;
};

// Flat copy of every parameter tensor, in registry order.
using WeightSnapshot = std::vector<std::vector<float>>;

WeightSnapshot snapshot_weights(const nn::TgModel<float>& m);
void restore_weights(nn::TgModel<float>& m, const WeightSnapshot& snap);
// Copies embed.* and layer*.* tensors from `src` (typically a pretrained
// model) into `dst`; decoder and reconstruction heads keep their init.
void copy_encoder_weights(nn::TgModel<float>& dst, const nn::TgModel<float>& src);

struct PretrainResult {
    std::shared_ptr<nn::TgModel<float>> model;  // best-validation weights
    std::vector<EpochLog> log;
    double best_val = 0.0;
    uint32_t best_epoch = 0;
};

PretrainResult pretrain(const GraphSource& corpus, const nn::EncoderConfig& enc,
                        const PretrainConfig& cfg, uint64_t seed);

struct CheckpointEntry {
    uint32_t epoch = 0;
    double val_rmse = 0.0;
    WeightSnapshot weights;
};

struct FinetuneResult {
    std::shared_ptr<nn::TgModel<float>> model;  // best-validation weights
    std::vector<CheckpointEntry> top3;          // ascending (val_rmse, epoch)
    QuantileTransform transform;
    std::vector<EpochLog> log;
    double best_val_rmse = 0.0;
    uint32_t best_epoch = 0;
};

// Fine-tunes on the graphs named by train_idx, early-stopping on val_idx.
// targets_k maps polymer id to its label in Kelvin; init, when non-null,
// provides pretrained encoder weights.
FinetuneResult finetune(const GraphSource& data, const std::vector<size_t>& train_idx,
                        const std::vector<size_t>& val_idx,
                        const std::unordered_map<std::string, double>& targets_k,
                        const nn::TgModel<float>* init, const nn::EncoderConfig& enc,
                        const FinetuneConfig& cfg, uint64_t seed);

// Per-graph predictions in Kelvin (inverse-transformed), ordered as idx.
// Eval mode ignores rng; MCDropout draws fresh dropout masks from it.
std::vector<double> predict_kelvin(const nn::TgModel<float>& model, const GraphSource& data,
                                   const std::vector<size_t>& idx, const QuantileTransform& tf,
                                   nn::RunMode mode, num::CounterRng& rng,
                                   uint32_t batch_size = 4);

struct PolymerGroup {
    std::string id;
    std::vector<size_t> graphs;  // indices into the GraphSource
};

// Groups graph indices by polymer id, ordered by id.
std::vector<PolymerGroup> group_by_polymer(const GraphSource& data,
                                           const std::vector<size_t>& idx);

}  // namespace polytg::train
