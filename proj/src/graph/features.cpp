#include "polytg/graph/features.hpp"

#include <algorithm>
#include <cstring>

namespace polytg::graph {

using chem::BondOrder;
using chem::BondStereo;
using chem::Chirality;
using chem::Element;
using chem::Hybridization;

namespace {

int element_slot(Element e) {
    switch (e) {
        case Element::Star: return 0;
        case Element::B: return 1;
        case Element::C: return 2;
        case Element::N: return 3;
        case Element::O: return 4;
        case Element::F: return 5;
        case Element::P: return 6;
        case Element::S: return 7;
        case Element::Cl: return 8;
        case Element::Br: return 9;
        case Element::I: return 10;
        case Element::Other: return 11;
    }
    return 11;
}

int hybridization_slot(Hybridization h) {
    switch (h) {
        case Hybridization::SP: return 0;
        case Hybridization::SP2: return 1;
        case Hybridization::SP3: return 2;
        case Hybridization::Other: return 3;
    }
    return 3;
}

int chirality_slot(Chirality c) {
    switch (c) {
        case Chirality::CW: return 0;
        case Chirality::CCW: return 1;
        case Chirality::Unspecified: return 2;
    }
    return 2;
}

int bond_order_slot(BondOrder o) {
    switch (o) {
        case BondOrder::Single: return 0;
        case BondOrder::Double: return 1;
        case BondOrder::Triple: return 2;
        case BondOrder::Aromatic: return 3;
        case BondOrder::Other: return 4;
    }
    return 4;
}

int stereo_slot(BondStereo s) {
    switch (s) {
        case BondStereo::None: return 0;
        case BondStereo::Z: return 1;
        case BondStereo::E: return 2;
        case BondStereo::Cis: return 3;
        case BondStereo::Trans: return 4;
        case BondStereo::Any: return 5;
        case BondStereo::Other: return 6;
    }
    return 6;
}

}  // namespace

void featurize_atom(const FeatureSchema& schema, const chem::Atom& atom,
                    const chem::AtomPerception& info, float* out) {
    if (schema.mode == FeatureMode::TopologyOnly) {
        out[0] = 1.0f;
        return;
    }
    std::memset(out, 0, sizeof(float) * FeatureSchema::kChemAtomDim);
    out[element_slot(atom.element)] = 1.0f;
    out[12 + hybridization_slot(info.hybridization)] = 1.0f;
    out[16 + chirality_slot(atom.chirality)] = 1.0f;
    const int deg_slot = (info.degree >= 0 && info.degree <= 5) ? info.degree : 6;
    out[19 + deg_slot] = 1.0f;
    out[26] = atom.is_aromatic ? 1.0f : 0.0f;
    out[27] = info.in_ring ? 1.0f : 0.0f;
    out[28] = static_cast<float>(info.num_h);
    out[29] = static_cast<float>(atom.formal_charge);
    out[30] = static_cast<float>(atom.atomic_mass / 100.0);
}

void featurize_bond(const FeatureSchema& schema, const chem::Bond& bond,
                    const chem::BondPerception& info, float* out) {
    if (schema.mode == FeatureMode::TopologyOnly) {
        out[0] = 1.0f;
        return;
    }
    std::memset(out, 0, sizeof(float) * FeatureSchema::kChemBondDim);
    out[bond_order_slot(bond.order)] = 1.0f;
    out[5 + stereo_slot(bond.stereo)] = 1.0f;
    out[12] = info.conjugated ? 1.0f : 0.0f;
    out[13] = info.in_ring ? 1.0f : 0.0f;
}

int atom_class(Element e) {
    const int slot = element_slot(e);
    return slot == 0 ? kNumAtomClasses - 1 : slot - 1;  // wildcard folds into other
}

int bond_class(BondOrder o) { return bond_order_slot(o); }

}  // namespace polytg::graph
