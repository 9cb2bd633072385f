#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "polytg/graph/features.hpp"
#include "polytg/graph/polymer_graph.hpp"

namespace polytg::io {

class CacheError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Little-endian binary container for featurized graphs ("PCHG"). Layout:
//   magic "PCHG" | u32 format version | u32 featurizer schema version |
//   u8 feature mode | u32 atom_dim | u32 bond_dim | u64 graph count
// then per graph:
//   u32 id length | id bytes | u32 cup index | u32 nodes | u32 edges |
//   f64 globals[6] | u32 component_id[nodes] | f32 X[nodes*atom_dim] |
//   u32 edge pairs[2*edges] | f32 E[edges*bond_dim]
// Any version mismatch on read is a hard error.
inline constexpr uint32_t kCacheFormatVersion = 1;
inline constexpr uint32_t kFeaturizerSchemaVersion = 1;

struct CacheMeta {
    uint32_t format_version = kCacheFormatVersion;
    uint32_t schema_version = kFeaturizerSchemaVersion;
    graph::FeatureMode mode = graph::FeatureMode::Chemical;
    uint32_t atom_dim = 0;
    uint32_t bond_dim = 0;
    uint64_t count = 0;
};

class GraphCacheWriter {
  public:
    GraphCacheWriter(const std::string& path, graph::FeatureMode mode, uint32_t atom_dim,
                     uint32_t bond_dim);
    ~GraphCacheWriter();

    void add(const graph::PolymerGraph& g);
    // Patches the graph count into the header; further adds are invalid.
    void finish();

  private:
    std::ofstream out_;
    std::string path_;
    CacheMeta meta_;
    bool finished_ = false;
};

struct GraphSummary {
    std::string polymer_id;
    uint32_t cup_index = 0;
    uint32_t num_nodes = 0;
    uint32_t num_edges = 0;
    uint64_t offset = 0;  // file position of the record
};

class GraphCacheReader {
  public:
    explicit GraphCacheReader(const std::string& path);

    const CacheMeta& meta() const { return meta_; }
    size_t size() const { return index_.size(); }
    const std::vector<GraphSummary>& summaries() const { return index_; }

    graph::PolymerGraph read(size_t i) const;

  private:
    mutable std::ifstream in_;
    std::string path_;
    CacheMeta meta_;
    std::vector<GraphSummary> index_;
};

}  // namespace polytg::io
