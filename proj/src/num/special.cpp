#include "polytg/num/special.hpp"

#include <cmath>
#include <limits>

namespace polytg::num {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-16;
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;

// Series expansion of P(k, x), valid (and fast) for x < k + 1.
double gamma_p_series(double k, double x) {
    double ap = k;
    double sum = 1.0 / k;
    double term = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) {
            return sum * std::exp(-x + k * std::log(x) - std::lgamma(k));
        }
    }
    throw ConvergenceFailure("gamma_p series did not converge", kMaxIter);
}

// Modified Lentz continued fraction for Q(k, x), valid for x >= k + 1.
double gamma_q_contfrac(double k, double x) {
    double b = x + 1.0 - k;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        double an = -i * (i - k);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) {
            return h * std::exp(-x + k * std::log(x) - std::lgamma(k));
        }
    }
    throw ConvergenceFailure("gamma_q continued fraction did not converge", kMaxIter);
}

void check_gamma_args(double k, double x) {
    if (!std::isfinite(k) || !std::isfinite(x)) {
        throw NonFiniteInput("incomplete gamma: non-finite input");
    }
    if (k <= 0.0 || x < 0.0) {
        throw NonFiniteInput("incomplete gamma: requires k > 0 and x >= 0");
    }
}

// Continued fraction for the incomplete beta (Numerical Recipes betacf).
double beta_contfrac(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw ConvergenceFailure("inc_beta continued fraction did not converge", kMaxIter);
}

}  // namespace

double gamma_p(double k, double x) {
    check_gamma_args(k, x);
    if (x == 0.0) return 0.0;
    if (x < k + 1.0) return gamma_p_series(k, x);
    return 1.0 - gamma_q_contfrac(k, x);
}

double gamma_q(double k, double x) {
    check_gamma_args(k, x);
    if (x == 0.0) return 1.0;
    if (x < k + 1.0) return 1.0 - gamma_p_series(k, x);
    return gamma_q_contfrac(k, x);
}

double gamma_pdf(double k, double x) {
    check_gamma_args(k, x);
    if (x == 0.0) {
        if (k < 1.0) return std::numeric_limits<double>::infinity();
        if (k == 1.0) return 1.0;
        return 0.0;
    }
    return std::exp((k - 1.0) * std::log(x) - x - std::lgamma(k));
}

double inc_beta(double a, double b, double x) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(x)) {
        throw NonFiniteInput("inc_beta: non-finite input");
    }
    if (a <= 0.0 || b <= 0.0 || x < 0.0 || x > 1.0) {
        throw NonFiniteInput("inc_beta: requires a, b > 0 and x in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    // Use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) to stay in the
    // fast-converging region of the continued fraction.
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_contfrac(a, b, x) / a;
    }
    return 1.0 - front * beta_contfrac(b, a, 1.0 - x) / b;
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw NonFiniteInput("normal_quantile: p must lie strictly in (0, 1)");
    }
    // Acklam's rational approximation, then one Halley refinement.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

}  // namespace polytg::num
