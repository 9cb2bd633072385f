#include "polytg/eval/stats.hpp"

#include <cmath>

#include "polytg/num/special.hpp"

namespace polytg::eval {

double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty vector");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("sample_std needs at least two values");
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

void check_pair_sizes(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("size mismatch between paired vectors");
    if (a.empty()) throw std::invalid_argument("empty paired vectors");
}

}  // namespace

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_pair_sizes(pred, truth);
    double ss = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(pred.size()));
}

double mae(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_pair_sizes(pred, truth);
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double r_squared(const std::vector<double>& pred, const std::vector<double>& truth) {
    check_pair_sizes(pred, truth);
    const double m = mean(truth);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        ss_tot += (truth[i] - m) * (truth[i] - m);
    }
    if (ss_tot == 0.0) throw ZeroVariance("r_squared: constant truth values");
    return 1.0 - ss_res / ss_tot;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    check_pair_sizes(a, b);
    const size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired_t_test needs at least two pairs");

    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];

    bool all_equal = true;
    for (size_t i = 1; i < n; ++i) {
        if (d[i] != d[0]) {
            all_equal = false;
            break;
        }
    }
    if (all_equal) throw ZeroVariance("paired_t_test: all differences identical");

    TTestResult r;
    r.df = static_cast<int>(n) - 1;
    const double sd = sample_std(d);
    r.t = mean(d) / (sd / std::sqrt(static_cast<double>(n)));
    // Two-sided p from the regularized incomplete beta:
    //   p = I_x(df/2, 1/2) with x = df / (df + t^2).
    const double df = static_cast<double>(r.df);
    const double x = df / (df + r.t * r.t);
    r.p = num::inc_beta(0.5 * df, 0.5, x);
    return r;
}

}  // namespace polytg::eval
