#include "polytg/mmd/schulz_zimm.hpp"

#include <algorithm>
#include <cmath>

#include "polytg/num/rng.hpp"

namespace polytg::mmd {

using num::ConvergenceFailure;
using num::NonFiniteInput;

double gamma_cdf(double x, double k) {
    return num::gamma_p(k, x);
}

namespace {

// Wilson-Hilferty starting point for the Gamma(k, 1) quantile.
double quantile_initial_guess(double p, double k) {
    const double z = num::normal_quantile(p);
    const double c = 1.0 - 1.0 / (9.0 * k) + z / (3.0 * std::sqrt(k));
    double x = k * c * c * c;
    if (!(x > 0.0) || !std::isfinite(x)) x = k;
    return x;
}

}  // namespace

double gamma_quantile(double p, double k, double theta) {
    if (!std::isfinite(p) || !std::isfinite(k) || !std::isfinite(theta)) {
        throw NonFiniteInput("gamma_quantile: non-finite input");
    }
    if (!(p > 0.0 && p < 1.0) || k <= 0.0 || theta <= 0.0) {
        throw NonFiniteInput("gamma_quantile: requires p in (0,1), k > 0, theta > 0");
    }

    // Solve in the tail with better relative precision: lower tail on
    // P(k,x) - p, upper tail on (1-p) - Q(k,x).  Both increase in x.
    const bool upper = p > 0.5;
    const double target = upper ? 1.0 - p : p;
    auto residual = [&](double x) {
        return upper ? target - num::gamma_q(k, x) : num::gamma_p(k, x) - target;
    };

    double x = quantile_initial_guess(p, k);
    double lo = 0.0, hi = x;
    // Expand until the bracket straddles the root.
    int expand = 0;
    while (residual(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++expand > 400) throw ConvergenceFailure("gamma_quantile bracket expansion", expand);
    }
    if (residual(lo) > 0.0) lo = 0.0;

    const int max_iter = 200;
    for (int it = 0; it < max_iter; ++it) {
        const double fx = residual(x);
        if (fx >= 0.0) hi = x; else lo = x;
        const double dfx = num::gamma_pdf(k, x);
        double next = x;
        bool newton_ok = false;
        if (dfx > 0.0 && std::isfinite(dfx)) {
            next = x - fx / dfx;
            newton_ok = next > lo && next < hi;
        }
        if (!newton_ok) next = 0.5 * (lo + hi);
        const double step = std::fabs(next - x);
        x = next;
        // Only a relative step criterion: an absolute residual tolerance
        // would accept any point of the deep tail, where the CDF is flat
        // in absolute terms while the quantile is still well defined.
        if (step <= 1e-13 * std::max(x, 1e-300)) return x * theta;
    }
    // Accept a relative 1e-9 bracket even if the residual tolerance was
    // not met (flat CDF regions in the extreme tails).
    if (hi - lo <= 1e-9 * std::max(hi, 1e-300)) return 0.5 * (lo + hi) * theta;
    throw ConvergenceFailure("gamma_quantile did not converge", max_iter);
}

MMDParams parameterize(double mn, double mw, double m0_eff, int dp_max) {
    if (!std::isfinite(mn) || !std::isfinite(mw) || !std::isfinite(m0_eff) ||
        mn <= 0.0 || m0_eff <= 0.0 || mw < mn) {
        throw InvalidDescriptors("parameterize: need mw >= mn > 0 and m0_eff > 0");
    }
    MMDParams out;
    out.dp_n = mn / m0_eff;
    out.dispersity = mw / mn;
    out.m0_eff = m0_eff;
    out.dp_max = dp_max;
    if (out.dispersity <= 1.0 + 1e-6) {
        out.monodisperse = true;
        return out;
    }
    out.k = 1.0 / (out.dispersity - 1.0);
    out.theta = out.dp_n / out.k;
    const double q99 = gamma_quantile(0.99, out.k, out.theta);
    out.theta *= std::min(1.0, static_cast<double>(dp_max) / q99);
    return out;
}

ChainSample sample_cup(const MMDParams& params, int n_chains, int n_bins,
                       uint64_t rng_seed) {
    if (n_bins <= 0 || n_chains <= 0 || n_chains % n_bins != 0) {
        throw std::invalid_argument("sample_cup: n_chains must be a positive multiple of n_bins");
    }
    ChainSample out;
    out.dps.reserve(n_chains);
    out.bin_index.reserve(n_chains);
    const int per_bin = n_chains / n_bins;
    num::CounterRng rng(rng_seed);

    auto clamp_dp = [&](double x) {
        const double r = std::round(x);
        return static_cast<int>(std::clamp(r, 1.0, static_cast<double>(params.dp_max)));
    };

    if (params.monodisperse) {
        const int dp = clamp_dp(params.dp_n);
        for (int b = 0; b < n_bins; ++b) {
            for (int j = 0; j < per_bin; ++j) {
                out.dps.push_back(dp);
                out.bin_index.push_back(b);
            }
        }
        return out;
    }

    for (int b = 0; b < n_bins; ++b) {
        for (int j = 0; j < per_bin; ++j) {
            double u = (b + rng.next_double()) / n_bins;
            // Keep u strictly inside (0, 1); the quantile function is
            // undefined at the endpoints and the DP clamp dominates the
            // truncated sliver of tail mass anyway.
            u = std::clamp(u, 1e-15, 1.0 - 1e-12);
            const double x = gamma_quantile(u, params.k, params.theta);
            out.dps.push_back(clamp_dp(x));
            out.bin_index.push_back(b);
        }
    }
    return out;
}

}  // namespace polytg::mmd
