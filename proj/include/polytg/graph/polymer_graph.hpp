#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace polytg::graph {

// Global descriptors attached to every graph, in storage order.
// mn, mw, m0 are g/mol; dispersity is Mw/Mn; phi1/phi2 are comonomer
// fractions (phi1 = 1, phi2 = 0 for homopolymers).
struct Globals {
    double mn = 0.0;
    double mw = 0.0;
    double dispersity = 1.0;
    double m0 = 0.0;
    double phi1 = 1.0;
    double phi2 = 0.0;

    std::array<double, 6> as_array() const { return {mn, mw, dispersity, m0, phi1, phi2}; }
};

// A featurized, possibly disconnected polymer graph. Node features are
// row-major |V| x atom_dim, edge features |E| x bond_dim with one row per
// undirected edge.
struct PolymerGraph {
    std::string polymer_id;
    uint32_t cup_index = 0;

    uint32_t num_nodes = 0;
    uint32_t atom_dim = 0;
    uint32_t bond_dim = 0;

    std::vector<float> x;                    // num_nodes * atom_dim
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    std::vector<float> e;                    // edges.size() * bond_dim
    std::vector<uint32_t> component_id;      // per node, chain membership
    Globals globals;

    uint32_t num_edges() const { return static_cast<uint32_t>(edges.size()); }
    uint32_t num_components() const {
        uint32_t c = 0;
        for (uint32_t v : component_id) c = std::max(c, v + 1);
        return c;
    }
};

}  // namespace polytg::graph
