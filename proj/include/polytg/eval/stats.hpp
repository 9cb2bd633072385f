#pragma once

#include <stdexcept>
#include <vector>

namespace polytg::eval {

class ZeroVariance : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

double mean(const std::vector<double>& v);
// Sample standard deviation (n - 1 denominator).
double sample_std(const std::vector<double>& v);

double rmse(const std::vector<double>& pred, const std::vector<double>& truth);
double mae(const std::vector<double>& pred, const std::vector<double>& truth);
// Coefficient of determination; 1 - SS_res / SS_tot.
double r_squared(const std::vector<double>& pred, const std::vector<double>& truth);

struct TTestResult {
    double t = 0.0;
    int df = 0;
    double p = 1.0;  // two-sided
};

// Paired two-sided t-test on matched samples a and b. Throws ZeroVariance
// when every difference is identical, std::invalid_argument on size
// mismatch or fewer than two pairs.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace polytg::eval
