#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace polytg::train {

class TooFewSamples : public std::invalid_argument {
  public:
    explicit TooFewSamples(size_t n)
        : std::invalid_argument("quantile transform needs at least 10 samples, got " +
                                std::to_string(n)) {}
};

// Monotone map from the empirical target distribution to a standard
// normal. Fit stores up to `max_knots` (quantile, probability) knots at
// probabilities (i + 0.5) / m; transform interpolates the empirical CDF
// and applies the normal quantile, inverse goes back the same way.
// Out-of-range inputs clamp to the edge knots.
class QuantileTransform {
  public:
    QuantileTransform() = default;

    static QuantileTransform fit(std::vector<double> values, size_t max_knots = 1000);

    // Rebuilds a transform from serialized knots.
    static QuantileTransform from_knots(std::vector<double> quantiles,
                                        std::vector<double> probs);

    double transform(double v) const;
    double inverse(double s) const;

    size_t size() const { return q_.size(); }
    const std::vector<double>& knot_quantiles() const { return q_; }
    const std::vector<double>& knot_probs() const { return p_; }

  private:
    std::vector<double> q_;  // ascending empirical quantiles
    std::vector<double> p_;  // strictly increasing probabilities in (0, 1)
};

}  // namespace polytg::train
