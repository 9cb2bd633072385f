#include <algorithm>
#include <queue>
#include <string>
#include <vector>

#include "doctest.h"
#include "polytg/chem/psmiles.hpp"

using namespace polytg::chem;

namespace {

struct FixtureEntry {
    const char* input;
    bool repeat_unit;
    size_t atoms;
    size_t bonds;
    int total_h;
};

// Hand-verified valence arithmetic: atom count (Star atoms included for
// repeat units), bond count, and summed hydrogen count.
const std::vector<FixtureEntry>& fixture() {
    static const std::vector<FixtureEntry> k = {
        // Repeat units.
        {"[*]CC[*]", true, 4, 3, 4},
        {"[*]CC([*])C", true, 5, 4, 6},
        {"[*]CC([*])(C)C(=O)OC", true, 9, 8, 8},
        {"[*]CCOCCS([*])(=O)=O", true, 10, 9, 8},
        {"[*]CC([*])c1ccccc1", true, 10, 10, 8},
        {"[*]CC([*])C#N", true, 6, 5, 3},
        {"[*]CC([*])Cl", true, 5, 4, 3},
        {"[*]CC([*])(F)F", true, 6, 5, 2},
        {"[*]CC(=O)N[*]", true, 6, 5, 3},
        {"[*]Oc1ccc([*])cc1", true, 9, 9, 4},
        {"[*]c1ccc([*])cc1", true, 8, 8, 4},
        {"[*]CCO[*]", true, 5, 4, 4},
        {"[*]CC([*])C(=O)OC", true, 8, 7, 6},
        {"[*]CC([*])OC(C)=O", true, 8, 7, 6},
        {"[*]CC([*])(C)C", true, 6, 5, 8},
        {"[*]CC([*])O", true, 5, 4, 4},
        {"[*]CC([*])C(=O)O", true, 7, 6, 4},
        {"[*]CC([*])(C)C(=O)OCC", true, 10, 9, 10},
        {"[*]CCCC[*]", true, 6, 5, 8},
        {"[*]CCCCCC[*]", true, 8, 7, 12},
        {"[*]CCCCCCCCCC[*]", true, 12, 11, 20},
        {"[*]CC([*])c1ccc(C)cc1", true, 11, 11, 10},
        {"[*]CC([*])c1ccc(Cl)cc1", true, 11, 11, 7},
        {"[*]CC([*])C(=O)N", true, 7, 6, 5},
        {"[*]CC([*])C(=O)NC(C)C", true, 10, 9, 11},
        {"[*]Cc1ccccc1[*]", true, 9, 9, 6},
        {"[*]OCC(=O)[*]", true, 6, 5, 2},
        {"[*]OC(=O)CC[*]", true, 7, 6, 4},
        {"[*]OCCOC(=O)c1ccc(C(=O)[*])cc1", true, 16, 16, 8},
        // Plain molecules.
        {"C", false, 1, 0, 4},
        {"O", false, 1, 0, 2},
        {"N", false, 1, 0, 3},
        {"P", false, 1, 0, 3},
        {"S", false, 1, 0, 2},
        {"Cl", false, 1, 0, 1},
        {"CCO", false, 3, 2, 6},
        {"C=C", false, 2, 1, 4},
        {"C#C", false, 2, 1, 2},
        {"C=CC=C", false, 4, 3, 6},
        {"c1ccccc1", false, 6, 6, 6},
        {"c1ccncc1", false, 6, 6, 5},
        {"c1cc[nH]c1", false, 5, 5, 5},
        {"c1ccc2ccccc2c1", false, 10, 11, 8},
        {"[NH4+]", false, 1, 0, 4},
        {"[OH-]", false, 1, 0, 1},
        {"[O-]C=O", false, 3, 2, 1},
        {"C[N+](C)(C)C", false, 5, 4, 12},
        {"F/C=C/F", false, 4, 3, 2},
        {"F/C=C\\F", false, 4, 3, 2},
        {"CC(C)(C)C", false, 5, 4, 12},
        {"C1CC1", false, 3, 3, 6},
        {"C1CCCCC1", false, 6, 6, 12},
        {"CC(=O)O", false, 4, 3, 4},
        {"CC(=O)OC", false, 5, 4, 6},
        {"N[C@@H](C)C(=O)O", false, 6, 5, 7},
        {"CSC", false, 3, 2, 6},
        {"CBr", false, 2, 1, 3},
        {"CI", false, 2, 1, 3},
        {"B(O)(O)O", false, 4, 3, 3},
        {"C=C(C)C", false, 4, 3, 8},
        {"CC#N", false, 3, 2, 3},
        {"COC", false, 3, 2, 6},
        {"OO", false, 2, 1, 2},
        {"C%12CC%12", false, 3, 3, 6},
        {"[CH3]C", false, 2, 1, 6},
        {"C1CC1C1CC1", false, 6, 7, 10},
        {"C1CC1C", false, 4, 4, 8},
    };
    return k;
}

MolGraph parse_any(const FixtureEntry& e) {
    return e.repeat_unit ? parse_repeat_unit(e.input) : parse_molecule(e.input);
}

int total_h(const MolGraph& m) {
    int h = 0;
    for (const auto& info : m.atom_info) h += info.num_h;
    return h;
}

// Independent ring-membership oracle: an edge lies on a cycle iff its
// endpoints stay connected after the edge is removed (BFS, not lowlink).
bool on_cycle(const MolGraph& m, size_t skip) {
    const uint32_t src = m.bonds[skip].a;
    const uint32_t dst = m.bonds[skip].b;
    std::vector<char> seen(m.num_atoms(), 0);
    std::queue<uint32_t> q;
    q.push(src);
    seen[src] = 1;
    while (!q.empty()) {
        const uint32_t u = q.front();
        q.pop();
        for (size_t i = 0; i < m.bonds.size(); ++i) {
            if (i == skip) continue;
            const auto& b = m.bonds[i];
            uint32_t v;
            if (b.a == u) v = b.b;
            else if (b.b == u) v = b.a;
            else continue;
            if (!seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
        }
    }
    return seen[dst] != 0;
}

size_t find_bond(const MolGraph& m, uint32_t a, uint32_t b) {
    for (size_t i = 0; i < m.bonds.size(); ++i) {
        if ((m.bonds[i].a == a && m.bonds[i].b == b) ||
            (m.bonds[i].a == b && m.bonds[i].b == a)) {
            return i;
        }
    }
    REQUIRE(false);
    return 0;
}

ParseErrorKind kind_of(const char* input, ParseMode mode) {
    try {
        parse(tokenize(input), mode);
    } catch (const ParseError& e) {
        return e.kind;
    }
    REQUIRE_MESSAGE(false, "expected ParseError for ", input);
    return ParseErrorKind::UnknownToken;
}

}  // namespace

TEST_SUITE("psmiles") {

TEST_CASE("fixture corpus: atom, bond, and hydrogen counts") {
    REQUIRE(fixture().size() >= 50);
    for (const auto& e : fixture()) {
        CAPTURE(e.input);
        const MolGraph m = parse_any(e);
        CHECK(m.num_atoms() == e.atoms);
        CHECK(m.num_bonds() == e.bonds);
        CHECK(total_h(m) == e.total_h);
        CHECK(m.perceived);
        CHECK(m.atom_info.size() == e.atoms);
        CHECK(m.bond_info.size() == e.bonds);
    }
}

TEST_CASE("fixture corpus: handshake, star degree, ring oracle") {
    for (const auto& e : fixture()) {
        CAPTURE(e.input);
        const MolGraph m = parse_any(e);
        size_t degree_sum = 0;
        for (const auto& info : m.atom_info) degree_sum += static_cast<size_t>(info.degree);
        CHECK(degree_sum == 2 * m.num_bonds());
        if (e.repeat_unit) {
            REQUIRE(m.attachment_sites.size() == 2);
            for (uint32_t site : m.attachment_sites) {
                CHECK(m.atoms[site].element == Element::Star);
                CHECK(m.atom_info[site].degree == 1);
                CHECK(m.atom_info[site].num_h == 0);
                CHECK(m.atom_info[site].hybridization == Hybridization::Other);
            }
        } else {
            CHECK(m.attachment_sites.empty());
        }
        // Bridge-based in_ring agrees with the connectivity oracle.
        std::vector<char> atom_on_cycle(m.num_atoms(), 0);
        for (size_t i = 0; i < m.num_bonds(); ++i) {
            const bool cyc = on_cycle(m, i);
            CHECK(m.bond_info[i].in_ring == cyc);
            if (cyc) {
                atom_on_cycle[m.bonds[i].a] = 1;
                atom_on_cycle[m.bonds[i].b] = 1;
            }
        }
        for (size_t i = 0; i < m.num_atoms(); ++i) {
            CHECK(m.atom_info[i].in_ring == (atom_on_cycle[i] != 0));
        }
    }
}

TEST_CASE("fixture corpus: parsing is deterministic") {
    for (const auto& e : fixture()) {
        CAPTURE(e.input);
        const MolGraph a = parse_any(e);
        const MolGraph b = parse_any(e);
        REQUIRE(a.num_atoms() == b.num_atoms());
        REQUIRE(a.num_bonds() == b.num_bonds());
        for (size_t i = 0; i < a.num_atoms(); ++i) {
            CHECK(a.atoms[i].element == b.atoms[i].element);
            CHECK(a.atoms[i].is_aromatic == b.atoms[i].is_aromatic);
            CHECK(a.atoms[i].formal_charge == b.atoms[i].formal_charge);
            CHECK(a.atom_info[i].num_h == b.atom_info[i].num_h);
            CHECK(a.atom_info[i].hybridization == b.atom_info[i].hybridization);
        }
        for (size_t i = 0; i < a.num_bonds(); ++i) {
            CHECK(a.bonds[i].a == b.bonds[i].a);
            CHECK(a.bonds[i].b == b.bonds[i].b);
            CHECK(a.bonds[i].order == b.bonds[i].order);
            CHECK(a.bonds[i].stereo == b.bonds[i].stereo);
        }
    }
}

TEST_CASE("methacrylate repeat unit in detail") {
    const MolGraph m = parse_repeat_unit("[*]CC([*])(C)C(=O)OC");
    REQUIRE(m.num_atoms() == 9);
    // Atom order follows the string: * C C * C C O O C.
    const Element expect[] = {Element::Star, Element::C, Element::C,
                              Element::Star, Element::C, Element::C,
                              Element::O,    Element::O, Element::C};
    for (size_t i = 0; i < 9; ++i) CHECK(m.atoms[i].element == expect[i]);
    const int h[] = {0, 2, 0, 0, 3, 0, 0, 0, 3};
    for (size_t i = 0; i < 9; ++i) {
        CAPTURE(i);
        CHECK(m.atom_info[i].num_h == h[i]);
    }
    CHECK(m.atom_info[1].hybridization == Hybridization::SP3);
    CHECK(m.atom_info[2].hybridization == Hybridization::SP3);
    CHECK(m.atom_info[5].hybridization == Hybridization::SP2);  // carbonyl C
    CHECK(m.atom_info[6].hybridization == Hybridization::SP2);  // carbonyl O
    const size_t co = find_bond(m, 5, 6);
    CHECK(m.bonds[co].order == BondOrder::Double);
    CHECK(m.bond_info[co].conjugated);
    for (const auto& info : m.bond_info) CHECK_FALSE(info.in_ring);
}

TEST_CASE("benzene perception") {
    const MolGraph m = parse_molecule("c1ccccc1");
    REQUIRE(m.num_atoms() == 6);
    REQUIRE(m.num_bonds() == 6);
    for (size_t i = 0; i < 6; ++i) {
        CHECK(m.atoms[i].is_aromatic);
        CHECK(m.atom_info[i].in_ring);
        CHECK(m.atom_info[i].hybridization == Hybridization::SP2);
        CHECK(m.atom_info[i].num_h == 1);
        CHECK(m.atom_info[i].degree == 2);
    }
    for (size_t i = 0; i < 6; ++i) {
        CHECK(m.bonds[i].order == BondOrder::Aromatic);
        CHECK(m.bond_info[i].in_ring);
        CHECK(m.bond_info[i].conjugated);
    }
}

TEST_CASE("hypervalent sulfur maps to Other, not an error") {
    const MolGraph m = parse_repeat_unit("[*]CCOCCS([*])(=O)=O");
    size_t s_idx = SIZE_MAX;
    for (size_t i = 0; i < m.num_atoms(); ++i) {
        if (m.atoms[i].element == Element::S) s_idx = i;
    }
    REQUIRE(s_idx != SIZE_MAX);
    CHECK(m.atom_info[s_idx].num_h == 0);
    CHECK(m.atom_info[s_idx].hybridization == Hybridization::Other);
    CHECK(m.atom_info[s_idx].degree == 4);
}

TEST_CASE("hybridization heuristic") {
    const MolGraph sp = parse_molecule("CC#N");
    CHECK(sp.atom_info[1].hybridization == Hybridization::SP);
    CHECK(sp.atom_info[2].hybridization == Hybridization::SP);
    CHECK(sp.atom_info[0].hybridization == Hybridization::SP3);

    const MolGraph allene = parse_molecule("C=C=C");
    CHECK(allene.atom_info[1].hybridization == Hybridization::SP);  // two doubles
    CHECK(allene.atom_info[0].hybridization == Hybridization::SP2);

    const MolGraph ether = parse_molecule("COC");
    for (const auto& info : ether.atom_info) {
        CHECK(info.hybridization == Hybridization::SP3);
    }
    for (const auto& info : ether.bond_info) CHECK_FALSE(info.conjugated);

    const MolGraph diene = parse_molecule("C=CC=C");
    for (const auto& info : diene.atom_info) {
        CHECK(info.hybridization == Hybridization::SP2);
    }
    for (const auto& info : diene.bond_info) CHECK(info.conjugated);
}

TEST_CASE("double-bond stereo from directional markers") {
    const MolGraph e = parse_molecule("F/C=C/F");
    const size_t eb = find_bond(e, 1, 2);
    CHECK(e.bonds[eb].stereo == BondStereo::E);

    const MolGraph z = parse_molecule("F/C=C\\F");
    const size_t zb = find_bond(z, 1, 2);
    CHECK(z.bonds[zb].stereo == BondStereo::Z);

    // Marker on only one side cannot be resolved.
    const MolGraph one = parse_molecule("F/C=CF");
    CHECK(one.bonds[find_bond(one, 1, 2)].stereo == BondStereo::Any);

    // Conflicting markers on one endpoint.
    const MolGraph conflict = parse_molecule("C(/F)(/F)=CF");
    CHECK(conflict.bonds[find_bond(conflict, 0, 3)].stereo == BondStereo::Any);

    // No markers at all.
    const MolGraph none = parse_molecule("FC=CF");
    CHECK(none.bonds[find_bond(none, 1, 2)].stereo == BondStereo::None);
}

TEST_CASE("tetrahedral chirality markers") {
    const MolGraph cw = parse_molecule("N[C@@H](C)C(=O)O");
    CHECK(cw.atoms[1].chirality == Chirality::CW);
    CHECK(cw.atom_info[1].num_h == 1);

    const MolGraph ccw = parse_molecule("N[C@H](C)C(=O)O");
    CHECK(ccw.atoms[1].chirality == Chirality::CCW);

    const MolGraph plain = parse_molecule("NC(C)C(=O)O");
    for (const auto& a : plain.atoms) CHECK(a.chirality == Chirality::Unspecified);
}

TEST_CASE("formal charge and bracket hydrogens") {
    const MolGraph ammonium = parse_molecule("[NH4+]");
    CHECK(ammonium.atoms[0].formal_charge == 1);
    CHECK(ammonium.atom_info[0].num_h == 4);

    const MolGraph hydroxide = parse_molecule("[OH-]");
    CHECK(hydroxide.atoms[0].formal_charge == -1);
    CHECK(hydroxide.atom_info[0].num_h == 1);

    // Bracket atoms without an H spec get exactly zero hydrogens.
    const MolGraph formate = parse_molecule("[O-]C=O");
    CHECK(formate.atoms[0].formal_charge == -1);
    CHECK(formate.atom_info[0].num_h == 0);
    CHECK(formate.atom_info[1].num_h == 1);

    // Charge raises the effective valence: quaternary N carries no H and
    // no anomaly.
    const MolGraph tma = parse_molecule("C[N+](C)(C)C");
    CHECK(tma.atoms[1].formal_charge == 1);
    CHECK(tma.atom_info[1].num_h == 0);
    CHECK(tma.atom_info[1].hybridization == Hybridization::SP3);
}

TEST_CASE("aromatic bonds inferred between lowercase atoms") {
    const MolGraph m = parse_molecule("c1ccncc1");
    for (const auto& b : m.bonds) CHECK(b.order == BondOrder::Aromatic);
    // Pyridine N: three aromatic-order units consume the full valence.
    size_t n_idx = SIZE_MAX;
    for (size_t i = 0; i < m.num_atoms(); ++i) {
        if (m.atoms[i].element == Element::N) n_idx = i;
    }
    REQUIRE(n_idx != SIZE_MAX);
    CHECK(m.atom_info[n_idx].num_h == 0);
    CHECK(m.atom_info[n_idx].hybridization == Hybridization::SP2);
}

TEST_CASE("fused aromatic carbons are valence anomalies") {
    // Three aromatic bonds sum to 4.5 -> rounds to 5 > 4: hydrogens floor
    // at zero and the hybridization falls back to Other.
    const MolGraph m = parse_molecule("c1ccc2ccccc2c1");
    int n_other = 0;
    for (const auto& info : m.atom_info) {
        if (info.degree == 3) {
            CHECK(info.num_h == 0);
            CHECK(info.hybridization == Hybridization::Other);
            ++n_other;
        } else {
            CHECK(info.num_h == 1);
            CHECK(info.hybridization == Hybridization::SP2);
        }
    }
    CHECK(n_other == 2);
}

TEST_CASE("two-digit ring labels and label reuse") {
    const MolGraph pct = parse_molecule("C%12CC%12");
    CHECK(pct.num_bonds() == 3);
    const MolGraph reuse = parse_molecule("C1CC1C1CC1");
    CHECK(reuse.num_bonds() == 7);
    // The bond joining the two rings is a bridge.
    const size_t mid = find_bond(reuse, 2, 3);
    CHECK_FALSE(reuse.bond_info[mid].in_ring);
    CHECK(reuse.bond_info[find_bond(reuse, 0, 1)].in_ring);
}

TEST_CASE("star atoms: mass zero, single bond order") {
    const MolGraph m = parse_repeat_unit("[*]CC[*]");
    for (uint32_t site : m.attachment_sites) {
        CHECK(m.atoms[site].atomic_mass == 0.0);
        for (const auto& b : m.bonds) {
            if (b.a == site || b.b == site) CHECK(b.order == BondOrder::Single);
        }
    }
}

TEST_CASE("tokenizer output") {
    const auto toks = tokenize("[*]CC[*]");
    REQUIRE(toks.size() == 4);
    for (const auto& t : toks) CHECK(t.kind == TokenKind::Atom);
    CHECK(toks[0].element == Element::Star);
    CHECK(toks[1].element == Element::C);
    CHECK(toks[0].bracket);
    CHECK_FALSE(toks[1].bracket);

    const auto ring = tokenize("C%42CC%42");
    REQUIRE(ring.size() == 5);
    CHECK(ring[1].kind == TokenKind::RingClosure);
    CHECK(ring[1].ring_label == 42);

    const auto bond = tokenize("C=C");
    REQUIRE(bond.size() == 3);
    CHECK(bond[1].kind == TokenKind::Bond);
    CHECK(bond[1].bond == BondToken::Double);
}

TEST_CASE("parse errors carry the right kind") {
    CHECK(kind_of("C1CC", ParseMode::Molecule) == ParseErrorKind::UnclosedRingBond);
    CHECK(kind_of("C=", ParseMode::Molecule) == ParseErrorKind::DanglingBond);
    CHECK(kind_of("=C", ParseMode::Molecule) == ParseErrorKind::DanglingBond);
    CHECK(kind_of("C==C", ParseMode::Molecule) == ParseErrorKind::DanglingBond);
    CHECK(kind_of("C(C", ParseMode::Molecule) == ParseErrorKind::UnbalancedBracket);
    CHECK(kind_of("CC)", ParseMode::Molecule) == ParseErrorKind::UnbalancedBracket);
    CHECK(kind_of("C11", ParseMode::Molecule) == ParseErrorKind::DanglingBond);
    CHECK(kind_of("C=1CCCCC-1", ParseMode::Molecule) == ParseErrorKind::DanglingBond);
    // Repeat-unit attachment constraints.
    CHECK(kind_of("[*]CC", ParseMode::RepeatUnit) == ParseErrorKind::WrongAttachmentCount);
    CHECK(kind_of("CC", ParseMode::RepeatUnit) == ParseErrorKind::WrongAttachmentCount);
    CHECK(kind_of("[*]C([*])[*]", ParseMode::RepeatUnit) ==
          ParseErrorKind::WrongAttachmentCount);
}

TEST_CASE("tokenize errors carry the right kind") {
    auto tok_kind = [](const char* s) {
        try {
            tokenize(s);
        } catch (const ParseError& e) {
            return e.kind;
        }
        REQUIRE(false);
        return ParseErrorKind::UnknownToken;
    };
    CHECK(tok_kind("Cq") == ParseErrorKind::UnknownToken);
    CHECK(tok_kind("[C") == ParseErrorKind::UnbalancedBracket);
    CHECK(tok_kind("C]") == ParseErrorKind::UnbalancedBracket);
    CHECK(tok_kind("[13C]") == ParseErrorKind::UnknownToken);   // isotope label
    CHECK(tok_kind("[C@TH1]") == ParseErrorKind::InvalidChiralContext);
    CHECK(tok_kind("C%1C") == ParseErrorKind::UnknownToken);    // short %nn
    CHECK(tok_kind("") == ParseErrorKind::UnknownToken);
    CHECK(tok_kind("[C+5]") == ParseErrorKind::UnknownToken);   // charge range
}

TEST_CASE("unknown elements collapse to Other") {
    const MolGraph m = parse_molecule("[Si](C)(C)(C)C");
    CHECK(m.atoms[0].element == Element::Other);
    CHECK(m.atom_info[0].num_h == 0);
    CHECK(m.atom_info[0].hybridization == Hybridization::Other);
    CHECK(m.atoms[0].atomic_mass > 27.0);  // Si fallback mass
    CHECK(m.atoms[0].atomic_mass < 29.0);
}

TEST_CASE("convenience wrappers perceive the graph") {
    CHECK(parse_repeat_unit("[*]CC[*]").perceived);
    CHECK(parse_molecule("CC").perceived);
    CHECK_THROWS_AS((void)parse_repeat_unit("CC"), ParseError);
    CHECK_THROWS_AS((void)parse_molecule("C(("), ParseError);
}

}  // TEST_SUITE
