#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "polytg/chem/mol.hpp"
#include "polytg/graph/features.hpp"
#include "polytg/graph/polymer_graph.hpp"
#include "polytg/num/rng.hpp"

namespace polytg::graph {

class AssemblyError : public std::runtime_error {
  public:
    explicit AssemblyError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Construction : uint8_t { LargeGraph = 0, RepeatUnit = 1 };

struct BuildConfig {
    uint32_t cups = 4;
    uint32_t chains_per_cup = 32;
    uint32_t bins = 8;
    uint32_t dp_max = 1000;
    uint64_t seed = 0;
    Construction construction = Construction::LargeGraph;
    FeatureSchema schema;
};

// Chemistry and descriptors for one polymer record, with repeat units
// already parsed (attachment sites intact).
struct PolymerInput {
    std::string id;
    chem::MolGraph unit1;
    chem::MolGraph unit2;          // ignored unless is_copolymer
    bool is_copolymer = false;
    double phi1 = 1.0;
    double phi2 = 0.0;
    double mn = 0.0;               // g/mol
    double mw = 0.0;               // g/mol
    double m0 = 0.0;               // effective repeat-unit mass, g/mol
};

// Joins `dp` repeat units into one connected backbone: attachment
// wildcards are dropped and consecutive units are bonded exit-to-entry
// with a single bond. Copolymer unit choices draw from `choice_rng` with
// probability phi1 for unit1. The result is freshly perceived.
chem::MolGraph assemble_chain(const chem::MolGraph& unit1, const chem::MolGraph* unit2,
                              double phi1, uint32_t dp, num::CounterRng& choice_rng);

// Appends a perceived molecule to `g` as one more component.
void append_component(PolymerGraph& g, const chem::MolGraph& mol, const FeatureSchema& schema,
                      uint32_t component);

// One sampled ensemble ("cup") of chains as a single disconnected graph.
// Chain lengths come from the molar-mass distribution implied by
// (mn, mw, m0); randomness is keyed on (seed, polymer id, cup index).
PolymerGraph build_cup(const PolymerInput& in, const BuildConfig& cfg, uint32_t cup_index);

// All cfg.cups cups for a record (or a single repeat-unit baseline graph
// when cfg.construction == RepeatUnit).
std::vector<PolymerGraph> build_graphs(const PolymerInput& in, const BuildConfig& cfg);

// Baseline: the bare repeat unit(s), wildcards removed, as one graph.
PolymerGraph build_repeat_unit_graph(const PolymerInput& in, const FeatureSchema& schema);

// Three linked copies of one unit with zeroed globals; the unlabeled
// corpus for masked pretraining is made of these.
PolymerGraph build_trimer_graph(const std::string& id, const chem::MolGraph& unit,
                                const FeatureSchema& schema);

}  // namespace polytg::graph
