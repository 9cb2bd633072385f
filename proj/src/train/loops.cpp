#include "polytg/train/loops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "polytg/nn/optim.hpp"

namespace polytg::train {

namespace {

using Model = nn::TgModel<float>;
using Batch = nn::BatchedGraph<float>;

// Loads the graphs named by idx[lo, hi) and batches them.
Batch load_batch(const GraphSource& data, const std::vector<size_t>& idx, size_t lo,
                 size_t hi) {
    std::vector<graph::PolymerGraph> owned;
    owned.reserve(hi - lo);
    for (size_t i = lo; i < hi; ++i) owned.push_back(data.load(idx[i]));
    std::vector<const graph::PolymerGraph*> ptrs;
    ptrs.reserve(owned.size());
    for (const auto& g : owned) ptrs.push_back(&g);
    return nn::make_batch<float>(ptrs);
}

struct ValSslStats {
    double ce = std::numeric_limits<double>::infinity();
    double atom_acc = 0.0;
    double bond_acc = 0.0;
};

// Masked CE on the held-out slice with masks that are identical across
// epochs (the mask stream restarts at the same key every call).
ValSslStats eval_ssl(const Model& model, const GraphSource& data,
                     const std::vector<size_t>& val_idx, const PretrainConfig& cfg,
                     uint64_t mask_key) {
    nn::NoGradGuard guard;
    num::CounterRng mask_rng(mask_key);
    num::CounterRng unused(0);
    double ce = 0.0, aacc = 0.0, bacc = 0.0;
    size_t graphs = 0;
    for (size_t lo = 0; lo < val_idx.size(); lo += cfg.batch_size) {
        const size_t hi = std::min(val_idx.size(), lo + cfg.batch_size);
        auto bg = load_batch(data, val_idx, lo, hi);
        nn::SslMask mask;
        try {
            mask = nn::make_ssl_mask(bg, cfg.mask_nodes, cfg.mask_edges, mask_rng);
        } catch (const nn::EmptyMask&) {
            continue;
        }
        auto res = model.ssl_forward(bg, mask, nn::RunMode::Eval, unused);
        const auto w = static_cast<double>(hi - lo);
        ce += static_cast<double>(res.loss->val[0]) * w;
        aacc += res.atom_accuracy * w;
        bacc += res.bond_accuracy * w;
        graphs += hi - lo;
    }
    if (graphs == 0) return {};
    const auto n = static_cast<double>(graphs);
    return {ce / n, aacc / n, bacc / n};
}

}  // namespace

WeightSnapshot snapshot_weights(const nn::TgModel<float>& m) {
    WeightSnapshot snap;
    const auto& items = m.params().items();
    snap.reserve(items.size());
    for (const auto& [name, t] : items) snap.push_back(t->val);
    return snap;
}

void restore_weights(nn::TgModel<float>& m, const WeightSnapshot& snap) {
    const auto& items = m.params().items();
    if (snap.size() != items.size()) {
        throw std::invalid_argument("weight snapshot does not match the model");
    }
    for (size_t i = 0; i < items.size(); ++i) {
        if (snap[i].size() != items[i].second->val.size()) {
            throw std::invalid_argument("weight snapshot shape mismatch at " + items[i].first);
        }
        items[i].second->val = snap[i];
    }
}

void copy_encoder_weights(nn::TgModel<float>& dst, const nn::TgModel<float>& src) {
    for (const auto& [name, t] : src.params().items()) {
        const bool encoder = name.rfind("embed.", 0) == 0 || name.rfind("layer", 0) == 0;
        if (!encoder) continue;
        auto target = dst.params().find(name);
        if (!target || target->val.size() != t->val.size()) {
            throw std::invalid_argument("encoder weight mismatch at " + name);
        }
        target->val = t->val;
    }
}

PretrainResult pretrain(const GraphSource& corpus, const nn::EncoderConfig& enc,
                        const PretrainConfig& cfg, uint64_t seed) {
    if (corpus.size() == 0) throw CorpusEmpty("pretraining corpus is empty");
    if (corpus.size() < 2) {
        throw CorpusEmpty("pretraining corpus too small to hold out a validation slice");
    }
    if (cfg.mask_nodes <= 0.0 && cfg.mask_edges <= 0.0) {
        throw MaskFractionZero("both mask fractions are zero");
    }

    const uint64_t root = num::mix_keys(seed, num::hash_string("pretrain"));

    std::vector<size_t> order(corpus.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    num::CounterRng split_rng(root, num::hash_string("split"));
    split_rng.shuffle(order);
    size_t n_val = static_cast<size_t>(
        std::lround(cfg.val_fraction * static_cast<double>(order.size())));
    n_val = std::clamp<size_t>(n_val, 1, order.size() - 1);
    std::vector<size_t> val_idx(order.begin(), order.begin() + static_cast<long>(n_val));
    std::vector<size_t> train_idx(order.begin() + static_cast<long>(n_val), order.end());

    PretrainResult res;
    res.model = std::make_shared<Model>(enc, num::mix_keys(root, num::hash_string("init")));
    auto opt_cfg = typename nn::AdamW<float>::Config{};
    opt_cfg.lr = cfg.lr;
    opt_cfg.weight_decay = cfg.weight_decay;
    nn::AdamW<float> opt(res.model->parameters(), opt_cfg);

    const uint64_t valmask_key = num::mix_keys(root, num::hash_string("valmask"));
    auto v0 = eval_ssl(*res.model, corpus, val_idx, cfg, valmask_key);
    res.log.push_back({0, 0.0, v0.ce, cfg.lr, v0.atom_acc, v0.bond_acc});
    res.best_val = v0.ce;
    res.best_epoch = 0;
    WeightSnapshot best = snapshot_weights(*res.model);

    uint32_t bad = 0;
    for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = nn::cosine_anneal(cfg.lr, epoch - 1, cfg.epochs);
        opt.set_lr(lr);

        num::CounterRng order_rng(root, num::hash_string("order"), epoch);
        num::CounterRng mask_rng(root, num::hash_string("mask"), epoch);
        num::CounterRng drop_rng(root, num::hash_string("dropout"), epoch);
        order_rng.shuffle(train_idx);

        double loss_sum = 0.0;
        size_t batches = 0;
        for (size_t lo = 0; lo < train_idx.size(); lo += cfg.batch_size) {
            const size_t hi = std::min(train_idx.size(), lo + cfg.batch_size);
            auto bg = load_batch(corpus, train_idx, lo, hi);
            nn::SslMask mask;
            try {
                mask = nn::make_ssl_mask(bg, cfg.mask_nodes, cfg.mask_edges, mask_rng);
            } catch (const nn::EmptyMask&) {
                continue;
            }
            auto ssl = res.model->ssl_forward(bg, mask, nn::RunMode::Train, drop_rng);
            loss_sum += static_cast<double>(ssl.loss->val[0]);
            ++batches;
            opt.zero_grad();
            nn::backward(ssl.loss);
            opt.step();
        }
        if (batches == 0) {
            throw MaskFractionZero("mask fractions round to zero elements on every batch");
        }

        auto v = eval_ssl(*res.model, corpus, val_idx, cfg, valmask_key);
        res.log.push_back({epoch, loss_sum / static_cast<double>(batches), v.ce, lr,
                           v.atom_acc, v.bond_acc});

        if (v.ce < res.best_val) {
            res.best_val = v.ce;
            res.best_epoch = epoch;
            best = snapshot_weights(*res.model);
            bad = 0;
        } else if (++bad >= cfg.patience) {
            break;
        }
    }

    restore_weights(*res.model, best);
    return res;
}

std::vector<PolymerGroup> group_by_polymer(const GraphSource& data,
                                           const std::vector<size_t>& idx) {
    std::map<std::string, std::vector<size_t>> by_id;
    for (size_t i : idx) by_id[data.ref(i).polymer_id].push_back(i);
    std::vector<PolymerGroup> out;
    out.reserve(by_id.size());
    for (auto& [id, graphs] : by_id) out.push_back({id, std::move(graphs)});
    return out;
}

std::vector<double> predict_kelvin(const nn::TgModel<float>& model, const GraphSource& data,
                                   const std::vector<size_t>& idx, const QuantileTransform& tf,
                                   nn::RunMode mode, num::CounterRng& rng,
                                   uint32_t batch_size) {
    nn::NoGradGuard guard;
    std::vector<double> out;
    out.reserve(idx.size());
    for (size_t lo = 0; lo < idx.size(); lo += batch_size) {
        const size_t hi = std::min(idx.size(), lo + batch_size);
        auto bg = load_batch(data, idx, lo, hi);
        auto pred = model.predict(bg, mode, rng);
        for (int64_t g = 0; g < pred->rows; ++g) {
            out.push_back(tf.inverse(static_cast<double>(pred->val[g])));
        }
    }
    return out;
}

namespace {

double target_of(const std::unordered_map<std::string, double>& targets_k,
                 const std::string& id) {
    auto it = targets_k.find(id);
    if (it == targets_k.end()) throw std::invalid_argument("no target for polymer " + id);
    return it->second;
}

// Validation RMSE in Kelvin after cup averaging.
double val_rmse_kelvin(const Model& model, const GraphSource& data,
                       const std::vector<PolymerGroup>& val_groups,
                       const QuantileTransform& tf,
                       const std::unordered_map<std::string, double>& targets_k) {
    num::CounterRng unused(0);
    double ss = 0.0;
    for (const auto& g : val_groups) {
        auto preds = predict_kelvin(model, data, g.graphs, tf, nn::RunMode::Eval, unused);
        double mean = 0.0;
        for (double p : preds) mean += p;
        mean /= static_cast<double>(preds.size());
        const double d = mean - target_of(targets_k, g.id);
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(val_groups.size()));
}

}  // namespace

FinetuneResult finetune(const GraphSource& data, const std::vector<size_t>& train_idx,
                        const std::vector<size_t>& val_idx,
                        const std::unordered_map<std::string, double>& targets_k,
                        const nn::TgModel<float>* init, const nn::EncoderConfig& enc,
                        const FinetuneConfig& cfg, uint64_t seed) {
    if (train_idx.empty()) throw std::invalid_argument("empty fine-tuning train set");
    if (val_idx.empty()) {
        throw NoValidation("fine-tuning requires a validation split for early stopping");
    }

    const uint64_t root = num::mix_keys(seed, num::hash_string("finetune"));
    const auto train_groups = group_by_polymer(data, train_idx);
    const auto val_groups = group_by_polymer(data, val_idx);

    // Transform and sampling weights come from the training polymers only.
    std::vector<double> train_targets;
    train_targets.reserve(train_groups.size());
    size_t stratum_count[kNumStrata] = {0, 0, 0};
    for (const auto& g : train_groups) {
        const double tg = target_of(targets_k, g.id);
        train_targets.push_back(tg);
        ++stratum_count[static_cast<int>(stratum_of(tg))];
    }

    FinetuneResult res;
    res.transform = QuantileTransform::fit(train_targets);

    // Per-graph sampling weight ∝ 1 / (train-fold count of the polymer's
    // stratum); cumulative sums drive the with-replacement draws.
    std::vector<double> cum(train_idx.size());
    std::vector<float> graph_target(train_idx.size());
    {
        std::unordered_map<std::string, double> weight_of;
        std::unordered_map<std::string, float> ttarget_of;
        for (const auto& g : train_groups) {
            const double tg = target_of(targets_k, g.id);
            const auto s = static_cast<int>(stratum_of(tg));
            weight_of[g.id] = 1.0 / static_cast<double>(stratum_count[s]);
            ttarget_of[g.id] = static_cast<float>(res.transform.transform(tg));
        }
        double acc = 0.0;
        for (size_t i = 0; i < train_idx.size(); ++i) {
            const auto id = data.ref(train_idx[i]).polymer_id;
            acc += weight_of.at(id);
            cum[i] = acc;
            graph_target[i] = ttarget_of.at(id);
        }
    }
    const double total_weight = cum.back();

    res.model = std::make_shared<Model>(enc, num::mix_keys(root, num::hash_string("init")));
    if (init != nullptr) copy_encoder_weights(*res.model, *init);

    auto opt_cfg = typename nn::AdamW<float>::Config{};
    opt_cfg.lr = cfg.lr;
    opt_cfg.weight_decay = cfg.weight_decay;
    nn::AdamW<float> opt(res.model->parameters(), opt_cfg);
    nn::ReduceLROnPlateau plateau(cfg.plateau.factor, static_cast<int>(cfg.plateau.patience),
                                  cfg.plateau.min_lr);

    for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        num::CounterRng order_rng(root, num::hash_string("order"), epoch);
        num::CounterRng drop_rng(root, num::hash_string("dropout"), epoch);

        // Weighted sample with replacement, as many draws as train graphs.
        std::vector<size_t> draws(train_idx.size());
        for (auto& d : draws) {
            const double u = order_rng.next_double() * total_weight;
            const auto it = std::upper_bound(cum.begin(), cum.end(), u);
            d = std::min<size_t>(static_cast<size_t>(it - cum.begin()), cum.size() - 1);
        }

        double loss_sum = 0.0;
        size_t batches = 0;
        for (size_t lo = 0; lo < draws.size(); lo += cfg.batch_size) {
            const size_t hi = std::min(draws.size(), lo + cfg.batch_size);
            std::vector<size_t> batch_graphs;
            std::vector<float> batch_targets;
            batch_graphs.reserve(hi - lo);
            for (size_t k = lo; k < hi; ++k) {
                batch_graphs.push_back(train_idx[draws[k]]);
                batch_targets.push_back(graph_target[draws[k]]);
            }
            std::vector<graph::PolymerGraph> owned;
            owned.reserve(batch_graphs.size());
            for (size_t g : batch_graphs) owned.push_back(data.load(g));
            std::vector<const graph::PolymerGraph*> ptrs;
            for (const auto& g : owned) ptrs.push_back(&g);
            auto bg = nn::make_batch<float>(ptrs);

            auto pred = res.model->predict(bg, nn::RunMode::Train, drop_rng);
            auto loss = nn::huber_mean(pred, batch_targets, cfg.huber_delta);
            loss_sum += static_cast<double>(loss->val[0]);
            ++batches;
            opt.zero_grad();
            nn::backward(loss);
            opt.step();
        }

        const double vrmse =
            val_rmse_kelvin(*res.model, data, val_groups, res.transform, targets_k);
        res.log.push_back({epoch, loss_sum / static_cast<double>(batches), vrmse, opt.lr(),
                           0.0, 0.0});
        opt.set_lr(plateau.update(opt.lr(), vrmse));

        res.top3.push_back({epoch, vrmse, snapshot_weights(*res.model)});
        std::stable_sort(res.top3.begin(), res.top3.end(),
                         [](const CheckpointEntry& a, const CheckpointEntry& b) {
                             return a.val_rmse != b.val_rmse ? a.val_rmse < b.val_rmse
                                                             : a.epoch < b.epoch;
                         });
        if (res.top3.size() > 3) res.top3.resize(3);

        const uint32_t best_epoch = res.top3.front().epoch;
        if (epoch > cfg.warmup && epoch - best_epoch >= cfg.patience) break;
    }

    res.best_val_rmse = res.top3.front().val_rmse;
    res.best_epoch = res.top3.front().epoch;
    restore_weights(*res.model, res.top3.front().weights);
    return res;
}

}  // namespace polytg::train
