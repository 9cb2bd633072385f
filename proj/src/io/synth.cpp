#include "polytg/io/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "polytg/chem/psmiles.hpp"
#include "polytg/graph/builder.hpp"
#include "polytg/num/rng.hpp"

namespace polytg::io {

namespace {

constexpr double kHydrogenMass = 1.008;

// Vinyl side groups; paired with the backbones below.
constexpr std::array<const char*, 12> kSideGroups = {
    "C",       "CC",        "CCC",        "Cl",        "F",           "C#N",
    "c1ccccc1", "C(=O)OC",  "C(=O)OCC",   "OC(=O)C",   "OC",          "C(C)C",
};

constexpr std::array<const char*, 10> kBackbones = {
    "[*]CCO[*]",
    "[*]CC(C)O[*]",
    "[*]CCCO[*]",
    "[*]CCOCCO[*]",
    "[*]CC(=O)O[*]",
    "[*]CCCC(=O)O[*]",
    "[*]CCCC(=O)NCC[*]",
    "[*]c1ccc([*])cc1",
    "[*]Cc1ccc([*])cc1",
    "[*]CCOCCS([*])(=O)=O",
};

std::string random_unit(num::CounterRng& rng) {
    // 60% substituted vinyl, 40% special backbone.
    if (rng.next_double() < 0.6) {
        const auto& s1 = kSideGroups[rng.next_below(kSideGroups.size())];
        if (rng.next_double() < 0.35) {
            const auto& s2 = kSideGroups[rng.next_below(kSideGroups.size())];
            return std::string("[*]CC([*])(") + s1 + ")" + s2;
        }
        return std::string("[*]CC([*])") + s1;
    }
    return kBackbones[rng.next_below(kBackbones.size())];
}

double chain_mass(const chem::MolGraph& unit, uint32_t dp) {
    num::CounterRng rng(0);
    const chem::MolGraph chain = graph::assemble_chain(unit, nullptr, 1.0, dp, rng);
    double m = 0.0;
    for (size_t i = 0; i < chain.atoms.size(); ++i) {
        m += chain.atoms[i].atomic_mass + chain.atom_info[i].num_h * kHydrogenMass;
    }
    return m;
}

// Composition score of one bare repeat unit, in Kelvin. Rings and
// branching stiffen the backbone; ether oxygens plasticize; N/S/halogen
// content raises Tg moderately.
double unit_score(const std::string& psmiles) {
    const chem::MolGraph unit = chem::parse_repeat_unit(psmiles);
    num::CounterRng rng(0);
    const chem::MolGraph bare = graph::assemble_chain(unit, nullptr, 1.0, 1, rng);
    const double n = static_cast<double>(bare.atoms.size());
    double ring = 0, ox = 0, ni = 0, su = 0, hal = 0, branch = 0;
    for (size_t i = 0; i < bare.atoms.size(); ++i) {
        const auto e = bare.atoms[i].element;
        if (bare.atom_info[i].in_ring) ring += 1;
        if (e == chem::Element::O) ox += 1;
        if (e == chem::Element::N) ni += 1;
        if (e == chem::Element::S) su += 1;
        if (e == chem::Element::F || e == chem::Element::Cl || e == chem::Element::Br ||
            e == chem::Element::I) {
            hal += 1;
        }
        if (bare.atom_info[i].degree >= 3) branch += 1;
    }
    return 185.0 + 230.0 * ring / n - 130.0 * ox / n + 150.0 * ni / n + 95.0 * su / n +
           120.0 * hal / n + 150.0 * branch / n;
}

}  // namespace

double unit_mass(const chem::MolGraph& unit) {
    return chain_mass(unit, 3) - chain_mass(unit, 2);
}

double truth_tg(const std::string& psmiles1, const std::string& psmiles2, double phi1,
                double mn, double dispersity) {
    const double t1 = unit_score(psmiles1);
    double fox;
    if (psmiles2.empty()) {
        fox = t1;
    } else {
        const double t2 = unit_score(psmiles2);
        fox = 1.0 / (phi1 / t1 + (1.0 - phi1) / t2);
    }
    return fox - 60000.0 / mn + 6.0 * (dispersity - 1.0);
}

std::vector<PolymerRecord> generate_dataset(const SynthConfig& cfg) {
    if (cfg.n_polymers == 0) throw std::invalid_argument("n_polymers must be positive");
    num::CounterRng rng(num::mix_keys(cfg.seed, num::hash_string("synth-dataset")));
    const auto n_homo = static_cast<size_t>(
        std::lround(static_cast<double>(cfg.n_polymers) * 180.0 / 381.0));

    std::vector<PolymerRecord> out;
    out.reserve(cfg.n_polymers);
    for (size_t i = 0; i < cfg.n_polymers; ++i) {
        PolymerRecord r;
        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "SYN-%04zu", i + 1);
        r.id = idbuf;
        r.psmiles1 = random_unit(rng);
        const bool copoly = i >= n_homo;
        if (copoly) {
            do {
                r.psmiles2 = random_unit(rng);
            } while (r.psmiles2 == r.psmiles1);
            r.phi1 = 0.15 + 0.7 * rng.next_double();
            r.phi2 = 1.0 - r.phi1;
        }

        const double lo = std::log(cfg.mn_lo), hi = std::log(cfg.mn_hi);
        r.mn = std::exp(lo + (hi - lo) * rng.next_double());
        const double dispersity =
            rng.next_double() < cfg.monodisperse_frac ? 1.0 : 1.05 + 1.95 * rng.next_double();
        r.mw = r.mn * dispersity;

        const double m0_1 = unit_mass(chem::parse_repeat_unit(r.psmiles1));
        if (copoly) {
            const double m0_2 = unit_mass(chem::parse_repeat_unit(r.psmiles2));
            r.m0_1 = m0_1;
            r.m0_2 = m0_2;
            r.m0 = r.phi1 * m0_1 + r.phi2 * m0_2;
        } else {
            r.m0 = m0_1;
        }

        const double tg = truth_tg(r.psmiles1, r.psmiles2, r.phi1, r.mn, dispersity) +
                          cfg.noise_sd * rng.next_normal();
        r.tg = std::clamp(tg, 173.0, 506.0);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::string> generate_corpus(size_t n, uint64_t seed) {
    num::CounterRng rng(num::mix_keys(seed, num::hash_string("synth-corpus")));
    std::vector<std::string> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(random_unit(rng));
    return out;
}

}  // namespace polytg::io
