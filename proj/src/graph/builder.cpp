#include "polytg/graph/builder.hpp"

#include <utility>

#include "polytg/chem/psmiles.hpp"
#include "polytg/mmd/schulz_zimm.hpp"

namespace polytg::graph {

namespace {

// A repeat unit with its attachment wildcards removed, plus the indices
// (into the stripped atom list) that join to the previous / next unit.
struct StrippedUnit {
    std::vector<chem::Atom> atoms;
    std::vector<chem::Bond> bonds;
    uint32_t entry = 0;
    uint32_t exit = 0;
};

StrippedUnit strip_unit(const chem::MolGraph& unit) {
    if (unit.attachment_sites.size() != 2) {
        throw AssemblyError("repeat unit must have exactly 2 attachment sites");
    }
    const uint32_t n = static_cast<uint32_t>(unit.atoms.size());
    std::vector<uint32_t> remap(n, UINT32_MAX);
    StrippedUnit out;
    for (uint32_t i = 0; i < n; ++i) {
        if (unit.atoms[i].element == chem::Element::Star) continue;
        remap[i] = static_cast<uint32_t>(out.atoms.size());
        out.atoms.push_back(unit.atoms[i]);
    }
    if (out.atoms.empty()) {
        throw AssemblyError("repeat unit has no atoms besides attachment sites");
    }

    auto neighbor_of_site = [&](uint32_t site) -> uint32_t {
        int found = -1;
        int degree = 0;
        for (const auto& b : unit.bonds) {
            if (b.a == site) { found = static_cast<int>(b.b); ++degree; }
            if (b.b == site) { found = static_cast<int>(b.a); ++degree; }
        }
        if (degree != 1 || found < 0 || remap[found] == UINT32_MAX) {
            throw AssemblyError("attachment site must bond exactly one real atom");
        }
        return remap[found];
    };
    out.entry = neighbor_of_site(unit.attachment_sites[0]);
    out.exit = neighbor_of_site(unit.attachment_sites[1]);

    for (const auto& b : unit.bonds) {
        if (remap[b.a] == UINT32_MAX || remap[b.b] == UINT32_MAX) continue;
        chem::Bond nb = b;
        nb.a = remap[b.a];
        nb.b = remap[b.b];
        out.bonds.push_back(nb);
    }
    return out;
}

}  // namespace

chem::MolGraph assemble_chain(const chem::MolGraph& unit1, const chem::MolGraph* unit2,
                              double phi1, uint32_t dp, num::CounterRng& choice_rng) {
    if (dp == 0) throw AssemblyError("chain must contain at least one unit");
    const StrippedUnit s1 = strip_unit(unit1);
    StrippedUnit s2;
    if (unit2 != nullptr) s2 = strip_unit(*unit2);

    chem::MolGraph chain;
    chain.atoms.reserve(static_cast<size_t>(dp) * s1.atoms.size());
    chain.bonds.reserve(static_cast<size_t>(dp) * (s1.bonds.size() + 1));

    int64_t prev_exit = -1;
    for (uint32_t pos = 0; pos < dp; ++pos) {
        const StrippedUnit& u =
            (unit2 != nullptr && choice_rng.next_double() >= phi1) ? s2 : s1;
        const uint32_t offset = static_cast<uint32_t>(chain.atoms.size());
        chain.atoms.insert(chain.atoms.end(), u.atoms.begin(), u.atoms.end());
        for (const auto& b : u.bonds) {
            chem::Bond nb = b;
            nb.a += offset;
            nb.b += offset;
            chain.bonds.push_back(nb);
        }
        if (prev_exit >= 0) {
            chem::Bond link;
            link.a = static_cast<uint32_t>(prev_exit);
            link.b = offset + u.entry;
            link.order = chem::BondOrder::Single;
            chain.bonds.push_back(link);
        }
        prev_exit = offset + u.exit;
    }
    chem::perceive(chain);
    return chain;
}

void append_component(PolymerGraph& g, const chem::MolGraph& mol, const FeatureSchema& schema,
                      uint32_t component) {
    const uint32_t ad = schema.atom_dim();
    const uint32_t bd = schema.bond_dim();
    g.atom_dim = ad;
    g.bond_dim = bd;
    const uint32_t base = g.num_nodes;
    const size_t na = mol.atoms.size();
    g.x.resize(g.x.size() + na * ad);
    for (size_t i = 0; i < na; ++i) {
        featurize_atom(schema, mol.atoms[i], mol.atom_info[i], &g.x[(base + i) * ad]);
    }
    g.e.resize(g.e.size() + mol.bonds.size() * bd);
    const size_t ebase = g.edges.size();
    for (size_t i = 0; i < mol.bonds.size(); ++i) {
        g.edges.emplace_back(base + mol.bonds[i].a, base + mol.bonds[i].b);
        featurize_bond(schema, mol.bonds[i], mol.bond_info[i], &g.e[(ebase + i) * bd]);
    }
    g.component_id.insert(g.component_id.end(), na, component);
    g.num_nodes += static_cast<uint32_t>(na);
}

PolymerGraph build_cup(const PolymerInput& in, const BuildConfig& cfg, uint32_t cup_index) {
    const mmd::MMDParams params = mmd::parameterize(in.mn, in.mw, in.m0, cfg.dp_max);
    const uint64_t cup_key =
        num::mix_keys(num::mix_keys(cfg.seed, num::hash_string(in.id)), cup_index);
    const mmd::ChainSample sample =
        mmd::sample_cup(params, cfg.chains_per_cup, cfg.bins, num::mix_keys(cup_key, 0));
    num::CounterRng choice_rng(num::mix_keys(cup_key, 1));

    PolymerGraph g;
    g.polymer_id = in.id;
    g.cup_index = cup_index;
    g.atom_dim = cfg.schema.atom_dim();
    g.bond_dim = cfg.schema.bond_dim();
    g.globals.mn = in.mn;
    g.globals.mw = in.mw;
    g.globals.dispersity = params.dispersity;
    g.globals.m0 = in.m0;
    g.globals.phi1 = in.phi1;
    g.globals.phi2 = in.phi2;

    uint64_t total_dp = 0;
    for (uint32_t dp : sample.dps) total_dp += dp;
    g.x.reserve(total_dp * (in.unit1.atoms.size() - 2) * g.atom_dim);
    g.component_id.reserve(total_dp * (in.unit1.atoms.size() - 2));

    for (size_t c = 0; c < sample.dps.size(); ++c) {
        const chem::MolGraph chain =
            assemble_chain(in.unit1, in.is_copolymer ? &in.unit2 : nullptr, in.phi1,
                           sample.dps[c], choice_rng);
        append_component(g, chain, cfg.schema, static_cast<uint32_t>(c));
    }
    return g;
}

std::vector<PolymerGraph> build_graphs(const PolymerInput& in, const BuildConfig& cfg) {
    std::vector<PolymerGraph> out;
    if (cfg.construction == Construction::RepeatUnit) {
        out.push_back(build_repeat_unit_graph(in, cfg.schema));
        return out;
    }
    out.reserve(cfg.cups);
    for (uint32_t cup = 0; cup < cfg.cups; ++cup) {
        out.push_back(build_cup(in, cfg, cup));
    }
    return out;
}

PolymerGraph build_repeat_unit_graph(const PolymerInput& in, const FeatureSchema& schema) {
    PolymerGraph g;
    g.polymer_id = in.id;
    g.cup_index = 0;
    g.atom_dim = schema.atom_dim();
    g.bond_dim = schema.bond_dim();
    g.globals.mn = in.mn;
    g.globals.mw = in.mw;
    g.globals.dispersity = in.mn > 0 ? in.mw / in.mn : 1.0;
    g.globals.m0 = in.m0;
    g.globals.phi1 = in.phi1;
    g.globals.phi2 = in.phi2;

    auto add_unit = [&](const chem::MolGraph& unit, uint32_t component) {
        const StrippedUnit s = strip_unit(unit);
        chem::MolGraph bare;
        bare.atoms = s.atoms;
        bare.bonds = s.bonds;
        chem::perceive(bare);
        append_component(g, bare, schema, component);
    };
    add_unit(in.unit1, 0);
    if (in.is_copolymer) add_unit(in.unit2, 1);
    return g;
}

PolymerGraph build_trimer_graph(const std::string& id, const chem::MolGraph& unit,
                                const FeatureSchema& schema) {
    num::CounterRng rng(0);
    const chem::MolGraph trimer = assemble_chain(unit, nullptr, 1.0, 3, rng);
    PolymerGraph g;
    g.polymer_id = id;
    g.cup_index = 0;
    g.atom_dim = schema.atom_dim();
    g.bond_dim = schema.bond_dim();
    g.globals = Globals{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    append_component(g, trimer, schema, 0);
    return g;
}

}  // namespace polytg::graph
