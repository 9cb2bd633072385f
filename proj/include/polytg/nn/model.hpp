#pragma once

// Graph encoders (GINE / GATv2) with GraphNorm and residual stacks, the
// pooled decoder head, and the masked-reconstruction heads used for
// pretraining.

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "polytg/graph/features.hpp"
#include "polytg/graph/polymer_graph.hpp"
#include "polytg/nn/ops.hpp"
#include "polytg/nn/tensor.hpp"
#include "polytg/num/rng.hpp"

namespace polytg::nn {

enum class Arch : uint8_t { GINE = 0, GATv2 = 1 };
enum class RunMode : uint8_t { Train, Eval, MCDropout };

struct EncoderConfig {
    Arch arch = Arch::GINE;
    uint32_t atom_dim = graph::FeatureSchema::kChemAtomDim;
    uint32_t bond_dim = graph::FeatureSchema::kChemBondDim;
    uint32_t hidden = 32;
    uint32_t layers = 2;
    uint32_t decoder_hidden = 16;
    uint32_t num_globals = 6;
    double dropout = 0.1;
    double decoder_dropout = 0.45;
    double leaky_slope = 0.2;
    double graphnorm_eps = 1e-5;
};

// A set of polymer graphs flattened into one disconnected graph with the
// index structures every layer needs. Edges are stored undirected and
// expanded to both directions for message passing.
template <typename Real>
struct BatchedGraph {
    int64_t num_nodes = 0;
    int64_t num_undirected = 0;
    int64_t num_graphs = 0;

    Tensor<Real> x;         // num_nodes x atom_dim
    Tensor<Real> e;         // num_undirected x bond_dim
    Tensor<Real> globals;   // num_graphs x 6, raw descriptor values

    IndexVec edge_a, edge_b;              // undirected endpoints
    IndexVec dir_src, dir_dst, dir_edge;  // per directed edge (2 per undirected)
    SegIndex dst_index;          // directed edges grouped by destination node
    SegIndex graph_index;        // nodes grouped by graph
    IndexVec node_graph;         // node -> graph id

    std::vector<uint32_t> node_offsets;  // per graph, size num_graphs+1
    std::vector<uint32_t> edge_offsets;  // per graph, size num_graphs+1

    std::vector<Real> targets;           // per graph, empty when unlabeled
    std::vector<std::string> polymer_ids;
    std::vector<uint32_t> cup_indices;
};

template <typename Real>
BatchedGraph<Real> make_batch(const std::vector<const graph::PolymerGraph*>& graphs) {
    if (graphs.empty()) throw std::invalid_argument("empty batch");
    BatchedGraph<Real> bg;
    bg.num_graphs = static_cast<int64_t>(graphs.size());
    const uint32_t ad = graphs[0]->atom_dim, bd = graphs[0]->bond_dim;
    size_t total_nodes = 0, total_edges = 0;
    for (const auto* g : graphs) {
        if (g->atom_dim != ad || g->bond_dim != bd) {
            throw std::invalid_argument("mixed feature widths in batch");
        }
        total_nodes += g->num_nodes;
        total_edges += g->edges.size();
    }
    bg.num_nodes = static_cast<int64_t>(total_nodes);
    bg.num_undirected = static_cast<int64_t>(total_edges);

    bg.x = make_tensor<Real>(bg.num_nodes, ad);
    bg.e = make_tensor<Real>(bg.num_undirected, bd);
    bg.globals = make_tensor<Real>(bg.num_graphs, 6);

    auto edge_a = std::make_shared<std::vector<uint32_t>>();
    auto edge_b = std::make_shared<std::vector<uint32_t>>();
    auto dir_src = std::make_shared<std::vector<uint32_t>>();
    auto dir_dst = std::make_shared<std::vector<uint32_t>>();
    auto dir_edge = std::make_shared<std::vector<uint32_t>>();
    auto node_graph = std::make_shared<std::vector<uint32_t>>();
    edge_a->reserve(total_edges);
    edge_b->reserve(total_edges);
    dir_src->reserve(2 * total_edges);
    dir_dst->reserve(2 * total_edges);
    dir_edge->reserve(2 * total_edges);
    node_graph->reserve(total_nodes);

    bg.node_offsets.assign(1, 0);
    bg.edge_offsets.assign(1, 0);
    uint32_t node_base = 0, edge_base = 0;
    for (size_t gi = 0; gi < graphs.size(); ++gi) {
        const auto* g = graphs[gi];
        for (size_t i = 0; i < g->x.size(); ++i) {
            bg.x->val[static_cast<size_t>(node_base) * ad + i] = static_cast<Real>(g->x[i]);
        }
        for (size_t i = 0; i < g->e.size(); ++i) {
            bg.e->val[static_cast<size_t>(edge_base) * bd + i] = static_cast<Real>(g->e[i]);
        }
        for (const auto& [a, b] : g->edges) {
            const uint32_t ga = node_base + a, gb = node_base + b;
            const uint32_t eidx = static_cast<uint32_t>(edge_a->size());
            edge_a->push_back(ga);
            edge_b->push_back(gb);
            dir_src->push_back(ga);
            dir_dst->push_back(gb);
            dir_edge->push_back(eidx);
            dir_src->push_back(gb);
            dir_dst->push_back(ga);
            dir_edge->push_back(eidx);
        }
        node_graph->insert(node_graph->end(), g->num_nodes, static_cast<uint32_t>(gi));
        const auto garr = g->globals.as_array();
        for (int c = 0; c < 6; ++c) bg.globals->val[gi * 6 + c] = static_cast<Real>(garr[c]);
        bg.polymer_ids.push_back(g->polymer_id);
        bg.cup_indices.push_back(g->cup_index);
        node_base += g->num_nodes;
        edge_base += g->num_edges();
        bg.node_offsets.push_back(node_base);
        bg.edge_offsets.push_back(edge_base);
    }

    bg.edge_a = edge_a;
    bg.edge_b = edge_b;
    bg.dir_src = dir_src;
    bg.dir_dst = dir_dst;
    bg.dir_edge = dir_edge;
    bg.node_graph = node_graph;
    bg.dst_index = std::make_shared<SegmentIndex>(
        SegmentIndex::build(*dir_dst, static_cast<uint32_t>(bg.num_nodes)));
    bg.graph_index = std::make_shared<SegmentIndex>(
        SegmentIndex::build(*node_graph, static_cast<uint32_t>(bg.num_graphs)));
    return bg;
}

// Named parameter registry; creation order is the serialization order.
template <typename Real>
class ParamStore {
  public:
    enum class Init { Xavier, Zeros, Ones };

    explicit ParamStore(uint64_t seed) : rng_(seed) {}

    Tensor<Real> create(const std::string& name, int64_t rows, int64_t cols, Init init) {
        auto t = make_tensor<Real>(rows, cols, /*requires_grad=*/true);
        if (init == Init::Xavier) {
            const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
            for (auto& v : t->val) {
                v = static_cast<Real>((rng_.next_double() * 2.0 - 1.0) * limit);
            }
        } else if (init == Init::Ones) {
            std::fill(t->val.begin(), t->val.end(), Real(1));
        }
        items_.emplace_back(name, t);
        return t;
    }

    const std::vector<std::pair<std::string, Tensor<Real>>>& items() const { return items_; }

    std::vector<Tensor<Real>> tensors() const {
        std::vector<Tensor<Real>> out;
        out.reserve(items_.size());
        for (const auto& [name, t] : items_) out.push_back(t);
        return out;
    }

    Tensor<Real> find(const std::string& name) const {
        for (const auto& [n, t] : items_) {
            if (n == name) return t;
        }
        return nullptr;
    }

  private:
    num::CounterRng rng_;
    std::vector<std::pair<std::string, Tensor<Real>>> items_;
};

// gamma * (h - alpha * mean_g) / max(std_g, eps) + beta, with the mean and
// std taken per graph and per channel; std is about the plain mean.
template <typename Real>
struct GraphNormLayer {
    Tensor<Real> gamma, beta, alpha;
    double eps = 1e-5;

    Tensor<Real> forward(const Tensor<Real>& h, const BatchedGraph<Real>& bg) const {
        auto mu = segment_mean(h, bg.graph_index);
        auto mu_n = gather_rows(mu, bg.node_graph);
        auto diff = sub(h, mu_n);
        auto var = segment_mean(mul(diff, diff), bg.graph_index);
        auto sigma_n = gather_rows(sqrt_floored(var, eps), bg.node_graph);
        auto shifted = sub(h, mul_rowvec(mu_n, alpha));
        return add_rowvec(mul_rowvec(div(shifted, sigma_n), gamma), beta);
    }
};

namespace detail {

template <typename Real>
Tensor<Real> post_stack(const Tensor<Real>& z, const Tensor<Real>& h_in,
                        const GraphNormLayer<Real>& norm, const BatchedGraph<Real>& bg,
                        double p, bool use_dropout, num::CounterRng& rng) {
    auto out = gelu(norm.forward(z, bg));
    if (use_dropout && p > 0.0) out = dropout(out, p, rng);
    return add(out, h_in);
}

}  // namespace detail

// GINE message passing: sum over neighbors of relu(h_src + proj(e)),
// combined as MLP((1 + eps) * h + msg).
template <typename Real>
struct GineLayer {
    Tensor<Real> eps;
    Tensor<Real> we, be;
    Tensor<Real> w1, b1, w2, b2;
    GraphNormLayer<Real> norm;

    Tensor<Real> forward(const Tensor<Real>& h, const Tensor<Real>& e_in,
                         const BatchedGraph<Real>& bg, double p, bool use_dropout,
                         num::CounterRng& rng) const {
        auto eproj = linear(e_in, we, be);
        auto msg = relu(add(gather_rows(h, bg.dir_src), gather_rows(eproj, bg.dir_edge)));
        auto agg = segment_sum(msg, bg.dst_index);
        auto z = add(mul_scalar(h, add_const(eps, 1.0)), agg);
        z = linear(gelu(linear(z, w1, b1)), w2, b2);
        return detail::post_stack(z, h, norm, bg, p, use_dropout, rng);
    }
};

// Single-head GATv2: scores a^T leaky_relu(W [h_dst | h_src | proj(e)]),
// softmax over incoming edges, messages U h_src.
template <typename Real>
struct Gatv2Layer {
    Tensor<Real> w, bw;   // 3*hidden -> hidden
    Tensor<Real> a;       // hidden -> 1
    Tensor<Real> u, bu;   // hidden -> hidden
    Tensor<Real> we, be;  // bond_dim -> hidden
    GraphNormLayer<Real> norm;
    double leaky_slope = 0.2;

    Tensor<Real> forward(const Tensor<Real>& h, const Tensor<Real>& e_in,
                         const BatchedGraph<Real>& bg, double p, bool use_dropout,
                         num::CounterRng& rng) const {
        auto h_src = gather_rows(h, bg.dir_src);
        auto h_dst = gather_rows(h, bg.dir_dst);
        auto eproj = gather_rows(linear(e_in, we, be), bg.dir_edge);
        auto cat = concat_cols(concat_cols(h_dst, h_src), eproj);
        auto scores = matmul(leaky_relu(linear(cat, w, bw), leaky_slope), a);
        auto alpha = segment_softmax(scores, bg.dst_index);
        auto weighted = scale_rows(linear(h_src, u, bu), alpha);
        auto z = segment_sum(weighted, bg.dst_index);
        return detail::post_stack(z, h, norm, bg, p, use_dropout, rng);
    }
};

// Index lists and labels for one masked-reconstruction pass.
struct SslMask {
    IndexVec masked_nodes;
    IndexVec masked_edges;
    IndexVec masked_edge_a, masked_edge_b;  // endpoints of the masked edges
    std::vector<int> atom_labels;
    std::vector<int> bond_labels;
};

class EmptyMask : public std::runtime_error {
  public:
    EmptyMask() : std::runtime_error("mask selection produced no masked elements") {}
};

template <typename Real>
struct SslResult {
    Tensor<Real> loss;
    double atom_accuracy = 0.0;
    double bond_accuracy = 0.0;
};

template <typename Real>
class TgModel {
  public:
    TgModel(const EncoderConfig& cfg, uint64_t seed) : cfg_(cfg), store_(seed) {
        using Init = typename ParamStore<Real>::Init;
        const int64_t h = cfg.hidden;
        embed_w_ = store_.create("embed.w", cfg.atom_dim, h, Init::Xavier);
        embed_b_ = store_.create("embed.b", 1, h, Init::Zeros);
        for (uint32_t l = 0; l < cfg.layers; ++l) {
            const std::string p = "layer" + std::to_string(l) + ".";
            if (cfg.arch == Arch::GINE) {
                GineLayer<Real> layer;
                layer.eps = store_.create(p + "eps", 1, 1, Init::Zeros);
                layer.we = store_.create(p + "edge.w", cfg.bond_dim, h, Init::Xavier);
                layer.be = store_.create(p + "edge.b", 1, h, Init::Zeros);
                layer.w1 = store_.create(p + "mlp.w1", h, h, Init::Xavier);
                layer.b1 = store_.create(p + "mlp.b1", 1, h, Init::Zeros);
                layer.w2 = store_.create(p + "mlp.w2", h, h, Init::Xavier);
                layer.b2 = store_.create(p + "mlp.b2", 1, h, Init::Zeros);
                layer.norm = make_norm(p);
                gine_.push_back(layer);
            } else {
                Gatv2Layer<Real> layer;
                layer.w = store_.create(p + "att.w", 3 * h, h, Init::Xavier);
                layer.bw = store_.create(p + "att.b", 1, h, Init::Zeros);
                layer.a = store_.create(p + "att.a", h, 1, Init::Xavier);
                layer.u = store_.create(p + "msg.w", h, h, Init::Xavier);
                layer.bu = store_.create(p + "msg.b", 1, h, Init::Zeros);
                layer.we = store_.create(p + "edge.w", cfg.bond_dim, h, Init::Xavier);
                layer.be = store_.create(p + "edge.b", 1, h, Init::Zeros);
                layer.norm = make_norm(p);
                layer.leaky_slope = cfg.leaky_slope;
                gat_.push_back(layer);
            }
        }
        dec_w1_ = store_.create("decoder.w1", h + cfg.num_globals, cfg.decoder_hidden,
                                Init::Xavier);
        dec_b1_ = store_.create("decoder.b1", 1, cfg.decoder_hidden, Init::Zeros);
        dec_w2_ = store_.create("decoder.w2", cfg.decoder_hidden, 1, Init::Xavier);
        dec_b2_ = store_.create("decoder.b2", 1, 1, Init::Zeros);

        mask_node_ = store_.create("ssl.mask_node", 1, cfg.atom_dim, Init::Zeros);
        mask_edge_ = store_.create("ssl.mask_edge", 1, cfg.bond_dim, Init::Zeros);
        ssl_edge_w_ = store_.create("ssl.edge.w", cfg.bond_dim, h, Init::Xavier);
        ssl_edge_b_ = store_.create("ssl.edge.b", 1, h, Init::Zeros);
        atom_head_w_ = store_.create("ssl.atom.w", h, graph::kNumAtomClasses, Init::Xavier);
        atom_head_b_ = store_.create("ssl.atom.b", 1, graph::kNumAtomClasses, Init::Zeros);
        bond_head_w_ = store_.create("ssl.bond.w", h, graph::kNumBondClasses, Init::Xavier);
        bond_head_b_ = store_.create("ssl.bond.b", 1, graph::kNumBondClasses, Init::Zeros);
    }

    // Node embeddings after the full message-passing stack.
    Tensor<Real> encode(const BatchedGraph<Real>& bg, const Tensor<Real>& x_in,
                        const Tensor<Real>& e_in, RunMode mode, num::CounterRng& rng) const {
        const bool use_dropout = mode != RunMode::Eval;
        auto h = linear(x_in, embed_w_, embed_b_);
        for (uint32_t l = 0; l < cfg_.layers; ++l) {
            if (cfg_.arch == Arch::GINE) {
                h = gine_[l].forward(h, e_in, bg, cfg_.dropout, use_dropout, rng);
            } else {
                h = gat_[l].forward(h, e_in, bg, cfg_.dropout, use_dropout, rng);
            }
        }
        return h;
    }

    // Per-graph prediction in the transformed target space, num_graphs x 1.
    Tensor<Real> predict(const BatchedGraph<Real>& bg, RunMode mode,
                         num::CounterRng& rng) const {
        auto h = encode(bg, bg.x, bg.e, mode, rng);
        auto pooled = segment_mean(h, bg.graph_index);
        auto z = concat_cols(pooled, transformed_globals(bg));
        z = gelu(linear(z, dec_w1_, dec_b1_));
        if (mode != RunMode::Eval && cfg_.decoder_dropout > 0.0) {
            z = dropout(z, cfg_.decoder_dropout, rng);
        }
        return linear(z, dec_w2_, dec_b2_);
    }

    // Masked-feature reconstruction loss (atom CE + bond CE).
    SslResult<Real> ssl_forward(const BatchedGraph<Real>& bg, const SslMask& mask,
                                RunMode mode, num::CounterRng& rng) const {
        if (mask.masked_nodes->empty() && mask.masked_edges->empty()) throw EmptyMask();
        auto x_in = replace_rows(bg.x, mask.masked_nodes, mask_node_);
        auto e_in = replace_rows(bg.e, mask.masked_edges, mask_edge_);
        auto h = encode(bg, x_in, e_in, mode, rng);

        SslResult<Real> res;
        Tensor<Real> loss;
        if (!mask.masked_nodes->empty()) {
            auto logits = linear(gather_rows(h, mask.masked_nodes), atom_head_w_, atom_head_b_);
            loss = cross_entropy_mean(logits, mask.atom_labels);
            res.atom_accuracy = accuracy(logits, mask.atom_labels);
        }
        if (!mask.masked_edges->empty()) {
            auto hu = gather_rows(h, mask.masked_edge_a);
            auto hv = gather_rows(h, mask.masked_edge_b);
            auto eemb = add(scale(add(hu, hv), 0.5),
                            linear(gather_rows(e_in, mask.masked_edges), ssl_edge_w_,
                                   ssl_edge_b_));
            auto logits = linear(eemb, bond_head_w_, bond_head_b_);
            auto bond_loss = cross_entropy_mean(logits, mask.bond_labels);
            res.bond_accuracy = accuracy(logits, mask.bond_labels);
            loss = loss ? add(loss, bond_loss) : bond_loss;
        }
        res.loss = loss;
        return res;
    }

    const EncoderConfig& config() const { return cfg_; }
    const ParamStore<Real>& params() const { return store_; }
    ParamStore<Real>& params() { return store_; }
    std::vector<Tensor<Real>> parameters() const { return store_.tensors(); }

  private:
    GraphNormLayer<Real> make_norm(const std::string& prefix) {
        using Init = typename ParamStore<Real>::Init;
        GraphNormLayer<Real> n;
        n.gamma = store_.create(prefix + "norm.gamma", 1, cfg_.hidden, Init::Ones);
        n.beta = store_.create(prefix + "norm.beta", 1, cfg_.hidden, Init::Zeros);
        n.alpha = store_.create(prefix + "norm.alpha", 1, cfg_.hidden, Init::Ones);
        n.eps = cfg_.graphnorm_eps;
        return n;
    }

    // Mass-like descriptor columns get a fixed log10(1+x) squash; ratio
    // columns pass through.
    Tensor<Real> transformed_globals(const BatchedGraph<Real>& bg) const {
        auto g = make_tensor<Real>(bg.num_graphs, cfg_.num_globals);
        for (int64_t r = 0; r < bg.num_graphs; ++r) {
            for (uint32_t c = 0; c < cfg_.num_globals; ++c) {
                const double v = static_cast<double>(bg.globals->val[r * 6 + c]);
                const bool mass_col = (c == 0 || c == 1 || c == 3);
                g->val[r * cfg_.num_globals + c] =
                    static_cast<Real>(mass_col ? std::log10(1.0 + std::max(v, 0.0)) : v);
            }
        }
        return g;
    }

    static double accuracy(const Tensor<Real>& logits, const std::vector<int>& labels) {
        int64_t hit = 0;
        for (int64_t r = 0; r < logits->rows; ++r) {
            int best = 0;
            for (int64_t c = 1; c < logits->cols; ++c) {
                if (logits->val[r * logits->cols + c] > logits->val[r * logits->cols + best]) {
                    best = static_cast<int>(c);
                }
            }
            if (best == labels[r]) ++hit;
        }
        return logits->rows == 0 ? 0.0 : static_cast<double>(hit) / logits->rows;
    }

    EncoderConfig cfg_;
    ParamStore<Real> store_;
    Tensor<Real> embed_w_, embed_b_;
    std::vector<GineLayer<Real>> gine_;
    std::vector<Gatv2Layer<Real>> gat_;
    Tensor<Real> dec_w1_, dec_b1_, dec_w2_, dec_b2_;
    Tensor<Real> mask_node_, mask_edge_, ssl_edge_w_, ssl_edge_b_;
    Tensor<Real> atom_head_w_, atom_head_b_, bond_head_w_, bond_head_b_;
};

// Draws round(frac * n) masked nodes and edges per graph; labels come
// from the unmasked feature rows. Throws EmptyMask when nothing ends up
// masked across the whole batch.
template <typename Real>
SslMask make_ssl_mask(const BatchedGraph<Real>& bg, double node_frac, double edge_frac,
                      num::CounterRng& rng) {
    if (bg.x->cols < graph::FeatureSchema::kChemAtomDim) {
        throw std::invalid_argument("masked pretraining needs chemical features");
    }
    auto nodes = std::make_shared<std::vector<uint32_t>>();
    auto edges = std::make_shared<std::vector<uint32_t>>();
    auto ea = std::make_shared<std::vector<uint32_t>>();
    auto eb = std::make_shared<std::vector<uint32_t>>();
    SslMask m;

    auto pick = [&rng](uint32_t lo, uint32_t hi, double frac, std::vector<uint32_t>& out) {
        const uint32_t n = hi - lo;
        const auto want = static_cast<uint32_t>(std::lround(frac * n));
        if (want == 0 || n == 0) return;
        std::vector<uint32_t> pool(n);
        for (uint32_t i = 0; i < n; ++i) pool[i] = lo + i;
        rng.shuffle(pool);
        pool.resize(std::min(want, n));
        std::sort(pool.begin(), pool.end());
        out.insert(out.end(), pool.begin(), pool.end());
    };

    for (int64_t g = 0; g < bg.num_graphs; ++g) {
        pick(bg.node_offsets[g], bg.node_offsets[g + 1], node_frac, *nodes);
        pick(bg.edge_offsets[g], bg.edge_offsets[g + 1], edge_frac, *edges);
    }
    if (nodes->empty() && edges->empty()) throw EmptyMask();

    const int64_t ad = bg.x->cols;
    for (uint32_t r : *nodes) {
        int best = 0;
        for (int c = 1; c < 12; ++c) {
            if (bg.x->val[r * ad + c] > bg.x->val[r * ad + best]) best = c;
        }
        m.atom_labels.push_back(best == 0 ? graph::kNumAtomClasses - 1 : best - 1);
    }
    const int64_t bd = bg.e->cols;
    for (uint32_t r : *edges) {
        int best = 0;
        for (int c = 1; c < graph::kNumBondClasses; ++c) {
            if (bg.e->val[r * bd + c] > bg.e->val[r * bd + best]) best = c;
        }
        m.bond_labels.push_back(best);
        ea->push_back((*bg.edge_a)[r]);
        eb->push_back((*bg.edge_b)[r]);
    }
    m.masked_nodes = nodes;
    m.masked_edges = edges;
    m.masked_edge_a = ea;
    m.masked_edge_b = eb;
    return m;
}

}  // namespace polytg::nn
