#include <numeric>
#include <vector>

#include "doctest.h"
#include "polytg/chem/psmiles.hpp"
#include "polytg/graph/features.hpp"

using namespace polytg;
using namespace polytg::graph;

namespace {

std::vector<float> atom_row(const FeatureSchema& s, const chem::MolGraph& m, size_t i) {
    std::vector<float> out(s.atom_dim(), -1.0f);
    featurize_atom(s, m.atoms[i], m.atom_info[i], out.data());
    return out;
}

std::vector<float> bond_row(const FeatureSchema& s, const chem::MolGraph& m, size_t i) {
    std::vector<float> out(s.bond_dim(), -1.0f);
    featurize_bond(s, m.bonds[i], m.bond_info[i], out.data());
    return out;
}

float block_sum(const std::vector<float>& v, size_t lo, size_t hi) {
    return std::accumulate(v.begin() + lo, v.begin() + hi, 0.0f);
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("schema dimensions") {
    FeatureSchema chem_schema;
    CHECK(chem_schema.atom_dim() == 31);
    CHECK(chem_schema.bond_dim() == 14);
    FeatureSchema topo{FeatureMode::TopologyOnly};
    CHECK(topo.atom_dim() == 1);
    CHECK(topo.bond_dim() == 1);
}

TEST_CASE("methane carbon feature layout") {
    const chem::MolGraph m = chem::parse_molecule("C");
    FeatureSchema s;
    const auto row = atom_row(s, m, 0);
    REQUIRE(row.size() == 31);
    // One-hot element block [0,12): C sits at slot 2.
    CHECK(row[2] == 1.0f);
    CHECK(block_sum(row, 0, 12) == 1.0f);
    // Hybridization [12,16): SP3 at slot 2.
    CHECK(row[14] == 1.0f);
    CHECK(block_sum(row, 12, 16) == 1.0f);
    // Chirality [16,19): unspecified at slot 2.
    CHECK(row[18] == 1.0f);
    CHECK(block_sum(row, 16, 19) == 1.0f);
    // Degree [19,26): zero bonds.
    CHECK(row[19] == 1.0f);
    CHECK(block_sum(row, 19, 26) == 1.0f);
    CHECK(row[26] == 0.0f);  // aromatic
    CHECK(row[27] == 0.0f);  // in ring
    CHECK(row[28] == 4.0f);  // hydrogens
    CHECK(row[29] == 0.0f);  // charge
    CHECK(row[30] == doctest::Approx(0.12011));  // mass / 100
}

TEST_CASE("every atom row has exact one-hot blocks") {
    FeatureSchema s;
    for (const char* input : {"[*]CC([*])(C)C(=O)OC", "[*]CCOCCS([*])(=O)=O"}) {
        const chem::MolGraph m = chem::parse_repeat_unit(input);
        for (size_t i = 0; i < m.num_atoms(); ++i) {
            CAPTURE(input);
            CAPTURE(i);
            const auto row = atom_row(s, m, i);
            CHECK(block_sum(row, 0, 12) == 1.0f);
            CHECK(block_sum(row, 12, 16) == 1.0f);
            CHECK(block_sum(row, 16, 19) == 1.0f);
            CHECK(block_sum(row, 19, 26) == 1.0f);
        }
    }
}

TEST_CASE("star and charged atoms") {
    FeatureSchema s;
    const chem::MolGraph ru = chem::parse_repeat_unit("[*]CC[*]");
    const auto star = atom_row(s, ru, 0);
    CHECK(star[0] == 1.0f);                  // wildcard element slot
    CHECK(star[12 + 3] == 1.0f);             // hybridization Other
    CHECK(star[28] == 0.0f);
    CHECK(star[30] == 0.0f);                 // massless

    const chem::MolGraph ion = chem::parse_molecule("[NH4+]");
    const auto n = atom_row(s, ion, 0);
    CHECK(n[3] == 1.0f);
    CHECK(n[28] == 4.0f);
    CHECK(n[29] == 1.0f);
}

TEST_CASE("degree one-hot caps at slot six") {
    chem::Atom a;
    chem::AtomPerception info;
    info.degree = 9;
    FeatureSchema s;
    std::vector<float> row(31, -1.0f);
    featurize_atom(s, a, info, row.data());
    CHECK(row[19 + 6] == 1.0f);
    CHECK(block_sum(row, 19, 26) == 1.0f);
}

TEST_CASE("bond feature layout") {
    FeatureSchema s;
    const chem::MolGraph benzene = chem::parse_molecule("c1ccccc1");
    const auto ar = bond_row(s, benzene, 0);
    REQUIRE(ar.size() == 14);
    CHECK(ar[3] == 1.0f);  // aromatic order
    CHECK(block_sum(ar, 0, 5) == 1.0f);
    CHECK(ar[5] == 1.0f);  // stereo none
    CHECK(block_sum(ar, 5, 12) == 1.0f);
    CHECK(ar[12] == 1.0f);  // conjugated
    CHECK(ar[13] == 1.0f);  // in ring

    const chem::MolGraph trans = chem::parse_molecule("F/C=C/F");
    size_t dbl = SIZE_MAX;
    for (size_t i = 0; i < trans.num_bonds(); ++i) {
        if (trans.bonds[i].order == chem::BondOrder::Double) dbl = i;
    }
    REQUIRE(dbl != SIZE_MAX);
    const auto e = bond_row(s, trans, dbl);
    CHECK(e[1] == 1.0f);      // double order
    CHECK(e[5 + 2] == 1.0f);  // stereo E
    CHECK(e[13] == 0.0f);

    const chem::MolGraph ethane = chem::parse_molecule("CC");
    const auto single = bond_row(s, ethane, 0);
    CHECK(single[0] == 1.0f);
    CHECK(single[12] == 0.0f);
}

TEST_CASE("topology-only collapses to a constant") {
    FeatureSchema topo{FeatureMode::TopologyOnly};
    const chem::MolGraph m = chem::parse_molecule("CC(=O)O");
    for (size_t i = 0; i < m.num_atoms(); ++i) {
        const auto row = atom_row(topo, m, i);
        REQUIRE(row.size() == 1);
        CHECK(row[0] == 1.0f);
    }
    for (size_t i = 0; i < m.num_bonds(); ++i) {
        const auto row = bond_row(topo, m, i);
        REQUIRE(row.size() == 1);
        CHECK(row[0] == 1.0f);
    }
}

TEST_CASE("reconstruction class labels") {
    using chem::BondOrder;
    using chem::Element;
    CHECK(atom_class(Element::B) == 0);
    CHECK(atom_class(Element::C) == 1);
    CHECK(atom_class(Element::N) == 2);
    CHECK(atom_class(Element::O) == 3);
    CHECK(atom_class(Element::F) == 4);
    CHECK(atom_class(Element::P) == 5);
    CHECK(atom_class(Element::S) == 6);
    CHECK(atom_class(Element::Cl) == 7);
    CHECK(atom_class(Element::Br) == 8);
    CHECK(atom_class(Element::I) == 9);
    CHECK(atom_class(Element::Other) == 10);
    // The attachment wildcard folds into the catch-all class.
    CHECK(atom_class(Element::Star) == kNumAtomClasses - 1);

    CHECK(bond_class(BondOrder::Single) == 0);
    CHECK(bond_class(BondOrder::Double) == 1);
    CHECK(bond_class(BondOrder::Triple) == 2);
    CHECK(bond_class(BondOrder::Aromatic) == 3);
    CHECK(bond_class(BondOrder::Other) == 4);
    for (Element e : {Element::Star, Element::B, Element::C, Element::I, Element::Other}) {
        CHECK(atom_class(e) >= 0);
        CHECK(atom_class(e) < kNumAtomClasses);
    }
}

}  // TEST_SUITE
