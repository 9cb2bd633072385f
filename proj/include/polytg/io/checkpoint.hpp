#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polytg/nn/model.hpp"
#include "polytg/train/quantile_transform.hpp"

namespace polytg::io {

class CheckpointError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Model checkpoint ("PCKP"): a JSON manifest (architecture, feature mode,
// encoder hyperparameters, optional quantile-transform knots, free-form
// metadata) followed by named float32 tensors with shape prefixes.
struct Checkpoint {
    nn::EncoderConfig config;
    graph::FeatureMode feature_mode = graph::FeatureMode::Chemical;
    std::optional<train::QuantileTransform> target_transform;
    std::string metadata_json;  // caller-provided free-form block
    std::vector<std::pair<std::string, nn::Tensor<float>>> tensors;
};

// `metadata_json` must be a serialized JSON object (or empty for none).
void save_checkpoint(const std::string& path, const nn::TgModel<float>& model,
                     graph::FeatureMode mode,
                     const std::optional<train::QuantileTransform>& transform,
                     const std::string& metadata_json);

Checkpoint load_checkpoint(const std::string& path);

// Builds a model from a loaded checkpoint and copies every stored tensor
// into it; missing or mis-shaped tensors are hard errors.
nn::TgModel<float> restore_model(const Checkpoint& ckpt);

}  // namespace polytg::io
