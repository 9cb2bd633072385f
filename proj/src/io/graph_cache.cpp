#include "polytg/io/graph_cache.hpp"

#include <bit>
#include <cstring>

namespace polytg::io {

static_assert(std::endian::native == std::endian::little,
              "cache layout assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'C', 'H', 'G'};
constexpr uint64_t kCountFieldOffset = 4 + 4 + 4 + 1 + 4 + 4;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CacheError(path + ": truncated cache file");
    return v;
}

template <typename T>
void read_vec(std::ifstream& in, std::vector<T>& v, size_t n, const std::string& path) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw CacheError(path + ": truncated cache file");
}

}  // namespace

GraphCacheWriter::GraphCacheWriter(const std::string& path, graph::FeatureMode mode,
                                   uint32_t atom_dim, uint32_t bond_dim)
    : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw CacheError(path + ": cannot open for writing");
    meta_.mode = mode;
    meta_.atom_dim = atom_dim;
    meta_.bond_dim = bond_dim;
    out_.write(kMagic, 4);
    write_pod(out_, meta_.format_version);
    write_pod(out_, meta_.schema_version);
    write_pod(out_, static_cast<uint8_t>(mode));
    write_pod(out_, atom_dim);
    write_pod(out_, bond_dim);
    write_pod(out_, meta_.count);
}

GraphCacheWriter::~GraphCacheWriter() {
    if (!finished_ && out_.is_open()) {
        try {
            finish();
        } catch (...) {
        }
    }
}

void GraphCacheWriter::add(const graph::PolymerGraph& g) {
    if (finished_) throw CacheError(path_ + ": writer already finished");
    if (g.atom_dim != meta_.atom_dim || g.bond_dim != meta_.bond_dim) {
        throw CacheError(path_ + ": graph feature widths do not match cache header");
    }
    const auto id_len = static_cast<uint32_t>(g.polymer_id.size());
    write_pod(out_, id_len);
    out_.write(g.polymer_id.data(), id_len);
    write_pod(out_, g.cup_index);
    write_pod(out_, g.num_nodes);
    const auto num_edges = g.num_edges();
    write_pod(out_, num_edges);
    for (double v : g.globals.as_array()) write_pod(out_, v);
    write_vec(out_, g.component_id);
    write_vec(out_, g.x);
    for (const auto& [a, b] : g.edges) {
        write_pod(out_, a);
        write_pod(out_, b);
    }
    write_vec(out_, g.e);
    if (!out_) throw CacheError(path_ + ": write failure");
    ++meta_.count;
}

void GraphCacheWriter::finish() {
    if (finished_) return;
    finished_ = true;
    out_.seekp(static_cast<std::streamoff>(kCountFieldOffset));
    write_pod(out_, meta_.count);
    out_.flush();
    if (!out_) throw CacheError(path_ + ": write failure while finishing");
    out_.close();
}

GraphCacheReader::GraphCacheReader(const std::string& path)
    : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw CacheError(path + ": cannot open");
    char magic[4];
    in_.read(magic, 4);
    if (!in_ || std::memcmp(magic, kMagic, 4) != 0) {
        throw CacheError(path + ": not a graph cache file");
    }
    meta_.format_version = read_pod<uint32_t>(in_, path_);
    meta_.schema_version = read_pod<uint32_t>(in_, path_);
    if (meta_.format_version != kCacheFormatVersion) {
        throw CacheError(path + ": unsupported cache format version " +
                         std::to_string(meta_.format_version));
    }
    if (meta_.schema_version != kFeaturizerSchemaVersion) {
        throw CacheError(path + ": featurizer schema version mismatch (file " +
                         std::to_string(meta_.schema_version) + ", expected " +
                         std::to_string(kFeaturizerSchemaVersion) + ")");
    }
    meta_.mode = static_cast<graph::FeatureMode>(read_pod<uint8_t>(in_, path_));
    meta_.atom_dim = read_pod<uint32_t>(in_, path_);
    meta_.bond_dim = read_pod<uint32_t>(in_, path_);
    meta_.count = read_pod<uint64_t>(in_, path_);

    index_.reserve(meta_.count);
    for (uint64_t i = 0; i < meta_.count; ++i) {
        GraphSummary s;
        s.offset = static_cast<uint64_t>(in_.tellg());
        const auto id_len = read_pod<uint32_t>(in_, path_);
        s.polymer_id.resize(id_len);
        in_.read(s.polymer_id.data(), id_len);
        s.cup_index = read_pod<uint32_t>(in_, path_);
        s.num_nodes = read_pod<uint32_t>(in_, path_);
        s.num_edges = read_pod<uint32_t>(in_, path_);
        if (!in_) throw CacheError(path + ": truncated cache file");
        const uint64_t payload = 6 * sizeof(double) +
                                 static_cast<uint64_t>(s.num_nodes) * sizeof(uint32_t) +
                                 static_cast<uint64_t>(s.num_nodes) * meta_.atom_dim * 4 +
                                 static_cast<uint64_t>(s.num_edges) * 2 * sizeof(uint32_t) +
                                 static_cast<uint64_t>(s.num_edges) * meta_.bond_dim * 4;
        in_.seekg(static_cast<std::streamoff>(payload), std::ios::cur);
        if (!in_) throw CacheError(path + ": truncated cache file");
        index_.push_back(std::move(s));
    }
}

graph::PolymerGraph GraphCacheReader::read(size_t i) const {
    if (i >= index_.size()) throw CacheError(path_ + ": graph index out of range");
    const GraphSummary& s = index_[i];
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(s.offset));

    graph::PolymerGraph g;
    const auto id_len = read_pod<uint32_t>(in_, path_);
    g.polymer_id.resize(id_len);
    in_.read(g.polymer_id.data(), id_len);
    g.cup_index = read_pod<uint32_t>(in_, path_);
    g.num_nodes = read_pod<uint32_t>(in_, path_);
    const auto num_edges = read_pod<uint32_t>(in_, path_);
    g.atom_dim = meta_.atom_dim;
    g.bond_dim = meta_.bond_dim;
    double garr[6];
    for (double& v : garr) v = read_pod<double>(in_, path_);
    g.globals.mn = garr[0];
    g.globals.mw = garr[1];
    g.globals.dispersity = garr[2];
    g.globals.m0 = garr[3];
    g.globals.phi1 = garr[4];
    g.globals.phi2 = garr[5];
    read_vec(in_, g.component_id, g.num_nodes, path_);
    read_vec(in_, g.x, static_cast<size_t>(g.num_nodes) * meta_.atom_dim, path_);
    g.edges.resize(num_edges);
    for (auto& [a, b] : g.edges) {
        a = read_pod<uint32_t>(in_, path_);
        b = read_pod<uint32_t>(in_, path_);
    }
    read_vec(in_, g.e, static_cast<size_t>(num_edges) * meta_.bond_dim, path_);
    return g;
}

}  // namespace polytg::io
