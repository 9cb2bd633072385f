#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace polytg::chem {

// Element vocabulary: the organic subset handled natively plus the Star
// attachment dummy; everything else collapses to Other.
enum class Element : uint8_t { Star, B, C, N, O, F, P, S, Cl, Br, I, Other };

enum class Chirality : uint8_t { CW, CCW, Unspecified };

enum class BondOrder : uint8_t { Single, Double, Triple, Aromatic, Other };

enum class BondStereo : uint8_t { None, Z, E, Cis, Trans, Any, Other };

enum class Hybridization : uint8_t { SP, SP2, SP3, Other };

/// Atomic mass in u; 0 for Star, fallback table for Other symbols.
double element_mass(Element e);
double element_mass_for_symbol(std::string_view symbol);

/// Default valence used for implicit-H perception; -1 when the element
/// has no default (Star, Other).
int default_valence(Element e);

const char* element_symbol(Element e);

struct Atom {
    Element element = Element::C;
    bool is_aromatic = false;
    int formal_charge = 0;
    Chirality chirality = Chirality::Unspecified;
    std::optional<int> explicit_h;  // bracket H count; overrides perception
    double atomic_mass = 0.0;
};

struct Bond {
    uint32_t a = 0;
    uint32_t b = 0;
    BondOrder order = BondOrder::Single;
    BondStereo stereo = BondStereo::None;
};

struct AtomPerception {
    int degree = 0;
    int num_h = 0;  // total H (implicit or bracket-specified)
    bool in_ring = false;
    Hybridization hybridization = Hybridization::SP3;
};

struct BondPerception {
    bool in_ring = false;
    bool conjugated = false;
};

/// Molecular graph as parsed; perception fields are filled exactly once
/// by perceive() and the graph is treated as immutable afterwards.
struct MolGraph {
    std::vector<Atom> atoms;
    std::vector<Bond> bonds;
    std::vector<uint32_t> attachment_sites;  // indices of Star atoms
    std::vector<AtomPerception> atom_info;
    std::vector<BondPerception> bond_info;
    bool perceived = false;

    size_t num_atoms() const { return atoms.size(); }
    size_t num_bonds() const { return bonds.size(); }
};

}  // namespace polytg::chem
