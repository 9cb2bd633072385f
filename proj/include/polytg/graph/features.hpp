#pragma once

#include <cstdint>

#include "polytg/chem/mol.hpp"

namespace polytg::graph {

enum class FeatureMode : uint8_t { Chemical = 0, TopologyOnly = 1 };

// Chemical mode produces 31-dim atom rows and 14-dim bond rows; the
// topology-only ablation collapses both to a single constant 1.
struct FeatureSchema {
    FeatureMode mode = FeatureMode::Chemical;

    static constexpr uint32_t kChemAtomDim = 31;
    static constexpr uint32_t kChemBondDim = 14;

    uint32_t atom_dim() const { return mode == FeatureMode::Chemical ? kChemAtomDim : 1; }
    uint32_t bond_dim() const { return mode == FeatureMode::Chemical ? kChemBondDim : 1; }
};

// Writes schema.atom_dim() floats to `out`.
void featurize_atom(const FeatureSchema& schema, const chem::Atom& atom,
                    const chem::AtomPerception& info, float* out);

// Writes schema.bond_dim() floats to `out`.
void featurize_bond(const FeatureSchema& schema, const chem::Bond& bond,
                    const chem::BondPerception& info, float* out);

// Class labels for masked-reconstruction targets. Atom classes cover the
// element vocabulary without the attachment wildcard: B..I then other.
inline constexpr int kNumAtomClasses = 11;
inline constexpr int kNumBondClasses = 5;

int atom_class(chem::Element e);
int bond_class(chem::BondOrder o);

}  // namespace polytg::graph
