#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "polytg/graph/polymer_graph.hpp"
#include "polytg/io/graph_cache.hpp"

namespace polytg::train {

struct GraphRef {
    std::string polymer_id;
    uint32_t cup_index = 0;
};

// Tg strata used for fold stratification and sampling weights.
enum class Stratum : uint8_t { Low = 0, Mid = 1, High = 2 };
inline constexpr int kNumStrata = 3;

inline Stratum stratum_of(double tg_k) {
    if (tg_k < 250.0) return Stratum::Low;
    if (tg_k < 400.0) return Stratum::Mid;
    return Stratum::High;
}

// Uniform access to a set of featurized graphs. Loads may hit disk, so
// callers batch what they need and let graphs go when done; nothing here
// assumes the whole set fits in memory.
class GraphSource {
  public:
    virtual ~GraphSource() = default;
    virtual size_t size() const = 0;
    virtual GraphRef ref(size_t i) const = 0;
    virtual graph::PolymerGraph load(size_t i) const = 0;
};

class MemorySource final : public GraphSource {
  public:
    explicit MemorySource(std::vector<graph::PolymerGraph> graphs)
        : graphs_(std::move(graphs)) {}

    size_t size() const override { return graphs_.size(); }
    GraphRef ref(size_t i) const override {
        return {graphs_[i].polymer_id, graphs_[i].cup_index};
    }
    graph::PolymerGraph load(size_t i) const override { return graphs_[i]; }

    const graph::PolymerGraph& peek(size_t i) const { return graphs_[i]; }

  private:
    std::vector<graph::PolymerGraph> graphs_;
};

class CacheSource final : public GraphSource {
  public:
    explicit CacheSource(const std::string& path) : reader_(path) {}

    size_t size() const override { return reader_.size(); }
    GraphRef ref(size_t i) const override {
        const auto& s = reader_.summaries()[i];
        return {s.polymer_id, s.cup_index};
    }
    graph::PolymerGraph load(size_t i) const override { return reader_.read(i); }

    const io::GraphCacheReader& reader() const { return reader_; }

  private:
    io::GraphCacheReader reader_;
};

}  // namespace polytg::train
