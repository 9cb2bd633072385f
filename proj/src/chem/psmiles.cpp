#include "polytg/chem/psmiles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <utility>

namespace polytg::chem {

namespace {

struct SymbolEntry {
    const char* symbol;
    Element element;
};

constexpr std::array<SymbolEntry, 11> kKnownSymbols = {{
    {"B", Element::B}, {"C", Element::C}, {"N", Element::N}, {"O", Element::O},
    {"F", Element::F}, {"P", Element::P}, {"S", Element::S}, {"Cl", Element::Cl},
    {"Br", Element::Br}, {"I", Element::I}, {"*", Element::Star},
}};

// Fallback masses for symbols outside the vocabulary (parsed as Other).
struct MassEntry {
    const char* symbol;
    double mass;
};

constexpr std::array<MassEntry, 18> kFallbackMasses = {{
    {"H", 1.008},   {"Li", 6.94},   {"Na", 22.990}, {"K", 39.098},
    {"Mg", 24.305}, {"Ca", 40.078}, {"Al", 26.982}, {"Si", 28.085},
    {"Ge", 72.630}, {"Sn", 118.71}, {"As", 74.922}, {"Se", 78.971},
    {"Te", 127.60}, {"Zn", 65.38},  {"Fe", 55.845}, {"Cu", 63.546},
    {"Ti", 47.867}, {"Sb", 121.76},
}};

[[noreturn]] void fail(ParseErrorKind kind, size_t pos, const std::string& msg) {
    throw ParseError(kind, pos, msg + " at position " + std::to_string(pos));
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

double element_mass(Element e) {
    switch (e) {
        case Element::Star: return 0.0;
        case Element::B: return 10.811;
        case Element::C: return 12.011;
        case Element::N: return 14.007;
        case Element::O: return 15.999;
        case Element::F: return 18.998;
        case Element::P: return 30.974;
        case Element::S: return 32.06;
        case Element::Cl: return 35.45;
        case Element::Br: return 79.904;
        case Element::I: return 126.904;
        case Element::Other: return 100.0;
    }
    return 0.0;
}

double element_mass_for_symbol(std::string_view symbol) {
    for (const auto& e : kKnownSymbols) {
        if (symbol == e.symbol) return element_mass(e.element);
    }
    for (const auto& e : kFallbackMasses) {
        if (symbol == e.symbol) return e.mass;
    }
    return 100.0;
}

int default_valence(Element e) {
    switch (e) {
        case Element::B: return 3;
        case Element::C: return 4;
        case Element::N: return 3;
        case Element::O: return 2;
        case Element::F: return 1;
        case Element::P: return 3;
        case Element::S: return 2;
        case Element::Cl: return 1;
        case Element::Br: return 1;
        case Element::I: return 1;
        default: return -1;  // Star, Other: no implicit hydrogens
    }
}

const char* element_symbol(Element e) {
    switch (e) {
        case Element::Star: return "*";
        case Element::B: return "B";
        case Element::C: return "C";
        case Element::N: return "N";
        case Element::O: return "O";
        case Element::F: return "F";
        case Element::P: return "P";
        case Element::S: return "S";
        case Element::Cl: return "Cl";
        case Element::Br: return "Br";
        case Element::I: return "I";
        case Element::Other: return "?";
    }
    return "?";
}

namespace {

// Parses the interior of a bracket atom starting just past '['; returns
// the token and leaves i on the char after ']'.
Token lex_bracket_atom(std::string_view s, size_t open_pos, size_t& i) {
    Token t;
    t.kind = TokenKind::Atom;
    t.position = open_pos;
    t.bracket = true;

    if (i < s.size() && is_digit(s[i])) {
        fail(ParseErrorKind::UnknownToken, i, "isotope labels are not supported");
    }

    std::string symbol;
    if (i < s.size() && s[i] == '*') {
        symbol = "*";
        t.element = Element::Star;
        ++i;
    } else if (i < s.size() && (is_upper(s[i]) || is_lower(s[i]))) {
        const bool lower_first = is_lower(s[i]);
        symbol += s[i++];
        if (!lower_first && i < s.size() && is_lower(s[i])) {
            // Two-letter symbols bind greedily except when the trailing
            // letter is a bracket modifier ('H' never lowers, so only
            // element-looking pairs reach here).
            std::string two = symbol + s[i];
            bool known_two = false;
            for (const auto& e : kKnownSymbols) {
                if (two == e.symbol) known_two = true;
            }
            for (const auto& e : kFallbackMasses) {
                if (two == e.symbol) known_two = true;
            }
            if (known_two || (s[i] != 'h')) {
                symbol = two;
                ++i;
            }
        }
        if (lower_first) {
            static constexpr std::string_view kAromaticOk = "bcnops";
            if (symbol.size() != 1 || kAromaticOk.find(symbol[0]) == std::string_view::npos) {
                fail(ParseErrorKind::UnknownToken, open_pos,
                     "unknown aromatic symbol '" + symbol + "'");
            }
            t.aromatic = true;
            symbol[0] = static_cast<char>(symbol[0] - 'a' + 'A');
        }
        t.element = Element::Other;
        for (const auto& e : kKnownSymbols) {
            if (symbol == e.symbol) t.element = e.element;
        }
    } else {
        fail(ParseErrorKind::UnknownToken, i < s.size() ? i : open_pos,
             "expected element symbol in bracket atom");
    }
    t.mass = (t.element == Element::Other) ? element_mass_for_symbol(symbol)
                                           : element_mass(t.element);

    // Chirality.
    if (i < s.size() && s[i] == '@') {
        ++i;
        if (i < s.size() && s[i] == '@') {
            t.chirality = Chirality::CW;
            ++i;
        } else {
            t.chirality = Chirality::CCW;
        }
        if (i < s.size() && (s[i] == '@' || is_upper(s[i]))) {
            // @TH / @AL / @SP / ... extended stereo classes.
            if (s[i] == '@' || s[i] == 'T' || s[i] == 'A' || s[i] == 'S' || s[i] == 'O') {
                fail(ParseErrorKind::InvalidChiralContext, i,
                     "extended chirality classes are not supported");
            }
        }
    }

    // Hydrogen count. Bracket atoms carry an explicit count (0 if absent).
    t.hcount = 0;
    if (i < s.size() && s[i] == 'H') {
        ++i;
        if (i < s.size() && is_digit(s[i])) {
            t.hcount = s[i] - '0';
            ++i;
        } else {
            t.hcount = 1;
        }
    }

    // Formal charge.
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        const char sign_ch = s[i];
        const int sign = sign_ch == '+' ? 1 : -1;
        int mag = 1;
        ++i;
        if (i < s.size() && is_digit(s[i])) {
            mag = s[i] - '0';
            ++i;
        } else {
            while (i < s.size() && s[i] == sign_ch) {
                ++mag;
                ++i;
            }
        }
        t.charge = sign * mag;
        if (t.charge < -4 || t.charge > 4) {
            fail(ParseErrorKind::UnknownToken, open_pos, "formal charge outside [-4, +4]");
        }
    }

    if (i >= s.size() || s[i] != ']') {
        fail(ParseErrorKind::UnbalancedBracket, open_pos, "unterminated bracket atom");
    }
    ++i;
    return t;
}

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
    if (s.empty()) {
        fail(ParseErrorKind::UnknownToken, 0, "empty input");
    }
    std::vector<Token> tokens;
    size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        const size_t pos = i;
        Token t;
        t.position = pos;
        switch (c) {
            case '[': {
                ++i;
                tokens.push_back(lex_bracket_atom(s, pos, i));
                continue;
            }
            case ']':
                fail(ParseErrorKind::UnbalancedBracket, pos, "']' without matching '['");
            case '(':
                t.kind = TokenKind::BranchOpen;
                break;
            case ')':
                t.kind = TokenKind::BranchClose;
                break;
            case '-':
                t.kind = TokenKind::Bond;
                t.bond = BondToken::Single;
                break;
            case '=':
                t.kind = TokenKind::Bond;
                t.bond = BondToken::Double;
                break;
            case '#':
                t.kind = TokenKind::Bond;
                t.bond = BondToken::Triple;
                break;
            case ':':
                t.kind = TokenKind::Bond;
                t.bond = BondToken::Aromatic;
                break;
            case '/':
                t.kind = TokenKind::Bond;
                t.bond = BondToken::Up;
                break;
            case '\\':
                t.kind = TokenKind::Bond;
                t.bond = BondToken::Down;
                break;
            case '%': {
                if (i + 2 >= s.size() || !is_digit(s[i + 1]) || !is_digit(s[i + 2])) {
                    fail(ParseErrorKind::UnknownToken, pos, "'%' needs two digits");
                }
                t.kind = TokenKind::RingClosure;
                t.ring_label = (s[i + 1] - '0') * 10 + (s[i + 2] - '0');
                i += 2;
                break;
            }
            case '*':
                t.kind = TokenKind::Atom;
                t.element = Element::Star;
                t.bracket = true;
                t.hcount = 0;
                t.mass = 0.0;
                break;
            default: {
                if (is_digit(c)) {
                    t.kind = TokenKind::RingClosure;
                    t.ring_label = c - '0';
                    break;
                }
                // Organic subset: two-char symbols first.
                if (c == 'C' && i + 1 < s.size() && s[i + 1] == 'l') {
                    t.kind = TokenKind::Atom;
                    t.element = Element::Cl;
                    ++i;
                    break;
                }
                if (c == 'B' && i + 1 < s.size() && s[i + 1] == 'r') {
                    t.kind = TokenKind::Atom;
                    t.element = Element::Br;
                    ++i;
                    break;
                }
                switch (c) {
                    case 'B': t.element = Element::B; break;
                    case 'C': t.element = Element::C; break;
                    case 'N': t.element = Element::N; break;
                    case 'O': t.element = Element::O; break;
                    case 'F': t.element = Element::F; break;
                    case 'P': t.element = Element::P; break;
                    case 'S': t.element = Element::S; break;
                    case 'I': t.element = Element::I; break;
                    case 'b': t.element = Element::B; t.aromatic = true; break;
                    case 'c': t.element = Element::C; t.aromatic = true; break;
                    case 'n': t.element = Element::N; t.aromatic = true; break;
                    case 'o': t.element = Element::O; t.aromatic = true; break;
                    case 'p': t.element = Element::P; t.aromatic = true; break;
                    case 's': t.element = Element::S; t.aromatic = true; break;
                    default:
                        fail(ParseErrorKind::UnknownToken, pos,
                             std::string("unexpected character '") + c + "'");
                }
                t.kind = TokenKind::Atom;
                break;
            }
        }
        if (t.kind == TokenKind::Atom && t.mass == 0.0 && t.element != Element::Star) {
            t.mass = element_mass(t.element);
        }
        tokens.push_back(t);
        ++i;
    }
    return tokens;
}

namespace {

struct RingOpening {
    uint32_t atom;
    bool has_bond = false;
    BondToken bond = BondToken::Single;
    size_t position = 0;
};

// Directional single-bond marker as written: 'up' means '/'.
struct DirMark {
    uint32_t from;
    uint32_t to;
    bool up;
};

BondOrder order_from_token(BondToken b) {
    switch (b) {
        case BondToken::Double: return BondOrder::Double;
        case BondToken::Triple: return BondOrder::Triple;
        case BondToken::Aromatic: return BondOrder::Aromatic;
        default: return BondOrder::Single;  // Single, Up, Down
    }
}

// Side of substituent `a` relative to double-bond atom `x` implied by a
// directional marker; +1 above, -1 below.
int marker_side(const DirMark& m, uint32_t a, uint32_t x) {
    if (m.from == a && m.to == x) return m.up ? -1 : +1;
    return m.up ? +1 : -1;  // written x -> a
}

void resolve_double_bond_stereo(MolGraph& mol, const std::vector<DirMark>& marks) {
    if (marks.empty()) return;
    for (auto& bond : mol.bonds) {
        if (bond.order != BondOrder::Double) continue;
        // Collect marker-implied sides for each endpoint's neighbors.
        struct Side {
            uint32_t neighbor;
            int side;
        };
        std::array<std::vector<Side>, 2> sides;
        const uint32_t ends[2] = {bond.a, bond.b};
        for (const auto& m : marks) {
            for (int e = 0; e < 2; ++e) {
                const uint32_t x = ends[e];
                if (m.from == x && m.to != ends[1 - e]) {
                    sides[e].push_back({m.to, marker_side(m, m.to, x)});
                } else if (m.to == x && m.from != ends[1 - e]) {
                    sides[e].push_back({m.from, marker_side(m, m.from, x)});
                }
            }
        }
        if (sides[0].empty() && sides[1].empty()) continue;
        if (sides[0].empty() || sides[1].empty()) {
            bond.stereo = BondStereo::Any;
            continue;
        }
        // Two markers on one endpoint must claim opposite sides.
        bool conflict = false;
        for (int e = 0; e < 2; ++e) {
            for (size_t i = 0; i + 1 < sides[e].size(); ++i) {
                for (size_t j = i + 1; j < sides[e].size(); ++j) {
                    if (sides[e][i].side == sides[e][j].side) conflict = true;
                }
            }
        }
        if (conflict) {
            bond.stereo = BondStereo::Any;
            continue;
        }
        auto reference = [](std::vector<Side>& v) {
            return *std::min_element(v.begin(), v.end(), [](const Side& l, const Side& r) {
                return l.neighbor < r.neighbor;
            });
        };
        const Side ra = reference(sides[0]);
        const Side rb = reference(sides[1]);
        bond.stereo = (ra.side == rb.side) ? BondStereo::Z : BondStereo::E;
    }
}

}  // namespace

MolGraph parse(const std::vector<Token>& tokens, ParseMode mode) {
    MolGraph mol;
    std::vector<uint32_t> branch_stack;
    std::map<int, RingOpening> open_rings;
    std::vector<DirMark> dir_marks;

    int prev = -1;
    bool have_pending = false;
    Token pending;  // bond token awaiting its second atom

    auto add_bond = [&](uint32_t a, uint32_t b, BondToken tok, bool tok_explicit,
                        uint32_t dir_from, size_t pos) {
        if (a == b) fail(ParseErrorKind::DanglingBond, pos, "bond joins an atom to itself");
        for (const auto& e : mol.bonds) {
            if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) {
                fail(ParseErrorKind::DanglingBond, pos, "duplicate bond between atoms");
            }
        }
        Bond bond;
        bond.a = a;
        bond.b = b;
        if (tok_explicit) {
            bond.order = order_from_token(tok);
            if (tok == BondToken::Up || tok == BondToken::Down) {
                dir_marks.push_back({dir_from, dir_from == a ? b : a, tok == BondToken::Up});
            }
        } else {
            bond.order = (mol.atoms[a].is_aromatic && mol.atoms[b].is_aromatic)
                             ? BondOrder::Aromatic
                             : BondOrder::Single;
        }
        mol.bonds.push_back(bond);
    };

    for (const auto& t : tokens) {
        switch (t.kind) {
            case TokenKind::Atom: {
                Atom atom;
                atom.element = t.element;
                atom.is_aromatic = t.aromatic;
                atom.formal_charge = t.charge;
                atom.chirality = t.chirality;
                if (t.bracket) atom.explicit_h = t.hcount;
                atom.atomic_mass = t.element == Element::Star ? 0.0 : t.mass;
                const uint32_t idx = static_cast<uint32_t>(mol.atoms.size());
                mol.atoms.push_back(atom);
                if (atom.element == Element::Star) mol.attachment_sites.push_back(idx);
                if (prev >= 0) {
                    add_bond(static_cast<uint32_t>(prev), idx,
                             have_pending ? pending.bond : BondToken::Single, have_pending,
                             static_cast<uint32_t>(prev), t.position);
                } else if (have_pending) {
                    fail(ParseErrorKind::DanglingBond, pending.position,
                         "bond symbol with no preceding atom");
                }
                have_pending = false;
                prev = static_cast<int>(idx);
                break;
            }
            case TokenKind::Bond: {
                if (have_pending) {
                    fail(ParseErrorKind::DanglingBond, t.position, "two consecutive bond symbols");
                }
                if (prev < 0) {
                    fail(ParseErrorKind::DanglingBond, t.position,
                         "bond symbol with no preceding atom");
                }
                pending = t;
                have_pending = true;
                break;
            }
            case TokenKind::BranchOpen: {
                if (prev < 0) {
                    fail(ParseErrorKind::UnbalancedBracket, t.position,
                         "branch opened with no preceding atom");
                }
                if (have_pending) {
                    fail(ParseErrorKind::DanglingBond, pending.position,
                         "bond symbol before '('");
                }
                branch_stack.push_back(static_cast<uint32_t>(prev));
                break;
            }
            case TokenKind::BranchClose: {
                if (branch_stack.empty()) {
                    fail(ParseErrorKind::UnbalancedBracket, t.position, "')' without '('");
                }
                if (have_pending) {
                    fail(ParseErrorKind::DanglingBond, pending.position,
                         "bond symbol before ')'");
                }
                prev = static_cast<int>(branch_stack.back());
                branch_stack.pop_back();
                break;
            }
            case TokenKind::RingClosure: {
                if (prev < 0) {
                    fail(ParseErrorKind::DanglingBond, t.position,
                         "ring closure with no preceding atom");
                }
                auto it = open_rings.find(t.ring_label);
                if (it == open_rings.end()) {
                    RingOpening op;
                    op.atom = static_cast<uint32_t>(prev);
                    op.has_bond = have_pending;
                    if (have_pending) op.bond = pending.bond;
                    op.position = t.position;
                    open_rings.emplace(t.ring_label, op);
                } else {
                    const RingOpening op = it->second;
                    open_rings.erase(it);
                    BondToken tok = BondToken::Single;
                    bool explicit_tok = false;
                    uint32_t dir_from = op.atom;
                    if (op.has_bond && have_pending &&
                        order_from_token(op.bond) != order_from_token(pending.bond)) {
                        fail(ParseErrorKind::DanglingBond, t.position,
                             "conflicting ring-closure bond orders");
                    }
                    if (op.has_bond) {
                        tok = op.bond;
                        explicit_tok = true;
                    } else if (have_pending) {
                        tok = pending.bond;
                        explicit_tok = true;
                        dir_from = static_cast<uint32_t>(prev);
                    }
                    add_bond(op.atom, static_cast<uint32_t>(prev), tok, explicit_tok,
                             dir_from, t.position);
                }
                have_pending = false;
                break;
            }
        }
    }

    if (have_pending) {
        fail(ParseErrorKind::DanglingBond, pending.position, "trailing bond symbol");
    }
    if (!open_rings.empty()) {
        const auto& [label, op] = *open_rings.begin();
        fail(ParseErrorKind::UnclosedRingBond, op.position,
             "unclosed ring-bond label " + std::to_string(label));
    }
    if (!branch_stack.empty()) {
        fail(ParseErrorKind::UnbalancedBracket, tokens.back().position, "unclosed branch");
    }

    resolve_double_bond_stereo(mol, dir_marks);

    if (mode == ParseMode::RepeatUnit) {
        if (mol.attachment_sites.size() != 2) {
            fail(ParseErrorKind::WrongAttachmentCount, 0,
                 "repeat unit needs exactly 2 attachment sites, found " +
                     std::to_string(mol.attachment_sites.size()));
        }
        for (uint32_t site : mol.attachment_sites) {
            int deg = 0;
            for (const auto& b : mol.bonds) {
                if (b.a == site || b.b == site) ++deg;
            }
            if (deg != 1) {
                fail(ParseErrorKind::WrongAttachmentCount, 0,
                     "attachment site must have exactly one bond");
            }
        }
    }
    return mol;
}

namespace {

double bond_order_value(BondOrder o) {
    switch (o) {
        case BondOrder::Single: return 1.0;
        case BondOrder::Double: return 2.0;
        case BondOrder::Triple: return 3.0;
        case BondOrder::Aromatic: return 1.5;
        case BondOrder::Other: return 1.0;
    }
    return 1.0;
}

// Tarjan bridge finding, iterative. A bond is in a ring iff it is not a
// bridge.
std::vector<bool> find_bridges(const MolGraph& mol,
                               const std::vector<std::vector<std::pair<uint32_t, uint32_t>>>& adj) {
    const size_t n = mol.atoms.size();
    std::vector<bool> is_bridge(mol.bonds.size(), false);
    std::vector<int> disc(n, -1), low(n, 0);
    int timer = 0;

    struct Frame {
        uint32_t v;
        uint32_t parent_edge;
        size_t next;
    };
    std::vector<Frame> stack;
    for (uint32_t root = 0; root < n; ++root) {
        if (disc[root] != -1) continue;
        stack.push_back({root, UINT32_MAX, 0});
        disc[root] = low[root] = timer++;
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next < adj[f.v].size()) {
                const auto [to, eidx] = adj[f.v][f.next++];
                if (eidx == f.parent_edge) continue;
                if (disc[to] == -1) {
                    disc[to] = low[to] = timer++;
                    stack.push_back({to, eidx, 0});
                } else {
                    low[f.v] = std::min(low[f.v], disc[to]);
                }
            } else {
                const Frame done = f;
                stack.pop_back();
                if (!stack.empty()) {
                    Frame& up = stack.back();
                    low[up.v] = std::min(low[up.v], low[done.v]);
                    if (low[done.v] > disc[up.v]) is_bridge[done.parent_edge] = true;
                }
            }
        }
    }
    return is_bridge;
}

}  // namespace

void perceive(MolGraph& mol) {
    const size_t n = mol.atoms.size();
    mol.atom_info.assign(n, {});
    mol.bond_info.assign(mol.bonds.size(), {});

    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adj(n);  // (other, bond idx)
    for (uint32_t i = 0; i < mol.bonds.size(); ++i) {
        adj[mol.bonds[i].a].push_back({mol.bonds[i].b, i});
        adj[mol.bonds[i].b].push_back({mol.bonds[i].a, i});
    }

    const std::vector<bool> bridge = find_bridges(mol, adj);
    for (size_t i = 0; i < mol.bonds.size(); ++i) {
        mol.bond_info[i].in_ring = !bridge[i];
        if (mol.bond_info[i].in_ring) {
            mol.atom_info[mol.bonds[i].a].in_ring = true;
            mol.atom_info[mol.bonds[i].b].in_ring = true;
        }
    }

    for (uint32_t v = 0; v < n; ++v) {
        const Atom& atom = mol.atoms[v];
        AtomPerception& info = mol.atom_info[v];
        info.degree = static_cast<int>(adj[v].size());

        double order_sum = 0.0;
        int n_double = 0, n_triple = 0, n_aromatic_bonds = 0;
        for (const auto& [to, eidx] : adj[v]) {
            const BondOrder o = mol.bonds[eidx].order;
            order_sum += bond_order_value(o);
            if (o == BondOrder::Double) ++n_double;
            if (o == BondOrder::Triple) ++n_triple;
            if (o == BondOrder::Aromatic) ++n_aromatic_bonds;
        }
        const long rounded = std::lround(order_sum);

        const int dv = default_valence(atom.element);
        bool anomaly = false;
        int valence_h = 0;
        if (dv >= 0) {
            const long free_val = dv + atom.formal_charge - rounded;
            if (free_val < 0) anomaly = true;
            valence_h = static_cast<int>(std::max(free_val, 0L));
        }
        info.num_h = atom.explicit_h.has_value() ? *atom.explicit_h : valence_h;

        if (atom.element == Element::Other || atom.element == Element::Star || anomaly) {
            info.hybridization = Hybridization::Other;
        } else if (n_triple > 0 || n_double >= 2) {
            info.hybridization = Hybridization::SP;
        } else if (n_double >= 1 || n_aromatic_bonds > 0 || atom.is_aromatic) {
            info.hybridization = Hybridization::SP2;
        } else {
            info.hybridization = Hybridization::SP3;
        }
    }

    for (size_t i = 0; i < mol.bonds.size(); ++i) {
        auto qualifies = [&](uint32_t v) {
            const Hybridization h = mol.atom_info[v].hybridization;
            return h == Hybridization::SP || h == Hybridization::SP2 ||
                   mol.atoms[v].is_aromatic;
        };
        mol.bond_info[i].conjugated = qualifies(mol.bonds[i].a) && qualifies(mol.bonds[i].b);
    }

    mol.perceived = true;
}

MolGraph parse_repeat_unit(std::string_view psmiles) {
    MolGraph mol = parse(tokenize(psmiles), ParseMode::RepeatUnit);
    perceive(mol);
    return mol;
}

MolGraph parse_molecule(std::string_view smiles) {
    MolGraph mol = parse(tokenize(smiles), ParseMode::Molecule);
    perceive(mol);
    return mol;
}

}  // namespace polytg::chem
