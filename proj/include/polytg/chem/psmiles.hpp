#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polytg/chem/mol.hpp"

namespace polytg::chem {

enum class ParseErrorKind {
    UnknownToken,
    UnbalancedBracket,
    UnclosedRingBond,
    DanglingBond,
    InvalidChiralContext,
    WrongAttachmentCount,
};

struct ParseError : std::runtime_error {
    ParseErrorKind kind;
    size_t position;  // byte offset into the input, or npos
    ParseError(ParseErrorKind k, size_t pos, const std::string& msg)
        : std::runtime_error(msg), kind(k), position(pos) {}
};

enum class TokenKind : uint8_t {
    Atom,         // organic-subset or bracket atom (incl. [*])
    Bond,         // - = # : and directional / backslash
    BranchOpen,
    BranchClose,
    RingClosure,  // digit or %nn
};

// Directional single-bond markers carry their slash for later Z/E
// resolution; order stays Single.
enum class BondToken : uint8_t { Single, Double, Triple, Aromatic, Up, Down };

struct Token {
    TokenKind kind;
    size_t position = 0;
    // Atom payload
    Element element = Element::C;
    bool aromatic = false;
    bool bracket = false;
    int charge = 0;
    Chirality chirality = Chirality::Unspecified;
    int hcount = -1;      // bracket H count; -1 = not a bracket atom
    double mass = 0.0;
    // Bond payload
    BondToken bond = BondToken::Single;
    // Ring closure payload
    int ring_label = 0;
};

enum class ParseMode {
    RepeatUnit,  // require exactly two Star atoms, each of degree 1
    Molecule,    // no attachment-site constraint
};

std::vector<Token> tokenize(std::string_view psmiles);

MolGraph parse(const std::vector<Token>& tokens, ParseMode mode);

/// Fill perception fields: ring membership from bridge finding, implicit
/// hydrogens from default valences, hybridization heuristic, conjugation.
/// Total: anomalies map to Other/0 rather than erroring.
void perceive(MolGraph& mol);

/// tokenize + parse + perceive, requiring a valid repeat unit.
MolGraph parse_repeat_unit(std::string_view psmiles);

/// tokenize + parse + perceive in plain-molecule mode.
MolGraph parse_molecule(std::string_view smiles);

}  // namespace polytg::chem
