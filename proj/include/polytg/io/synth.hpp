#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polytg/chem/mol.hpp"
#include "polytg/io/dataset.hpp"

namespace polytg::io {

// Synthetic-dataset generator. Repeat units come from a fragment grammar
// (vinyl backbones with substituents, ethers, esters, amides, aromatics)
// so every emitted string is valid by construction. Ground-truth Tg is a
// documented function of unit composition, chain length, and dispersity,
// plus Gaussian noise, so models can genuinely learn from the data and
// leakage tests are meaningful.
struct SynthConfig {
    size_t n_polymers = 381;
    uint64_t seed = 0;
    double mn_lo = 1000.0;   // log-uniform molar-mass range, g/mol
    double mn_hi = 16000.0;
    double monodisperse_frac = 0.1;
    double noise_sd = 2.0;   // Kelvin
};

// Exact repeat-unit mass including implicit hydrogens, computed as the
// mass difference between a 3-unit and a 2-unit chain so junction
// hydrogens are accounted for.
double unit_mass(const chem::MolGraph& unit);

// Deterministic part of the synthetic ground truth, in Kelvin:
// a Fox-rule mix of per-unit composition scores, a Flory-Fox 1/Mn
// penalty, and a linear dispersity term; no noise, no clipping.
double truth_tg(const std::string& psmiles1, const std::string& psmiles2, double phi1,
                double mn, double dispersity);

// Homo/copolymer split mirrors the 180:381 ratio of the reference set.
std::vector<PolymerRecord> generate_dataset(const SynthConfig& cfg);

// Homopolymer repeat units for the pretraining corpus, one per line.
std::vector<std::string> generate_corpus(size_t n, uint64_t seed);

}  // namespace polytg::io
