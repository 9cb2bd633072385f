#pragma once

#include <stdexcept>
#include <string>

namespace polytg::num {

struct NonFiniteInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConvergenceFailure : std::runtime_error {
    int iterations;
    ConvergenceFailure(const std::string& what, int iters)
        : std::runtime_error(what + " (after " + std::to_string(iters) + " iterations)"),
          iterations(iters) {}
};

/// Regularized lower incomplete gamma P(k, x).  Series for x < k+1,
/// continued fraction otherwise; absolute accuracy better than 1e-12.
double gamma_p(double k, double x);

/// Regularized upper incomplete gamma Q(k, x) = 1 - P(k, x), computed
/// directly in the upper tail so it keeps relative precision there.
double gamma_q(double k, double x);

/// Density of Gamma(k, 1) at x, i.e. x^{k-1} e^{-x} / Gamma(k).
double gamma_pdf(double k, double x);

/// Regularized incomplete beta I_x(a, b).
double inc_beta(double a, double b, double x);

/// Standard normal CDF.
double normal_cdf(double z);

/// Standard normal quantile, accurate to ~1e-15 for p in (0, 1).
double normal_quantile(double p);

}  // namespace polytg::num
