#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "polytg/num/special.hpp"

namespace polytg::mmd {

struct InvalidDescriptors : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Schulz-Zimm chain-length distribution expressed as Gamma(k, theta)
/// over degrees of polymerization, with the scale rescaled so the 99th
/// percentile does not exceed dp_max.
struct MMDParams {
    double k = 0.0;        // shape, 1/(dispersity - 1)
    double theta = 0.0;    // scale in repeat units, after capping
    double dp_n = 0.0;     // number-average degree of polymerization
    double dispersity = 1.0;
    double m0_eff = 0.0;   // g/mol
    int dp_max = 1000;
    bool monodisperse = false;
};

struct ChainSample {
    std::vector<int> dps;        // one DP per chain, in [1, dp_max]
    std::vector<int> bin_index;  // quantile bin of each chain
};

/// CDF of Gamma(k, 1) at x, i.e. the regularized lower incomplete gamma.
double gamma_cdf(double x, double k);

/// Inverse CDF of Gamma(k, theta): the x > 0 with gamma_cdf(x/theta, k) = p.
/// Bracketing plus Newton/bisection; throws ConvergenceFailure after 200
/// iterations without meeting tolerance.
double gamma_quantile(double p, double k, double theta);

/// Derive (k, theta) from molar-mass descriptors and apply the
/// 99th-percentile cap.  Dispersity within 1e-6 of 1 is treated as
/// monodisperse (the Gamma parameterization is singular there).
MMDParams parameterize(double mn, double mw, double m0_eff, int dp_max = 1000);

/// Stratified inverse-CDF sample: n_chains/n_bins uniform draws per
/// equal-probability quantile bin, mapped through the quantile function,
/// rounded and clamped to [1, dp_max].  Deterministic given rng_seed.
ChainSample sample_cup(const MMDParams& params, int n_chains, int n_bins,
                       uint64_t rng_seed);

}  // namespace polytg::mmd
