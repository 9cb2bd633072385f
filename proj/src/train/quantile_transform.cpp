#include "polytg/train/quantile_transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polytg/num/special.hpp"

namespace polytg::train {

QuantileTransform QuantileTransform::fit(std::vector<double> values, size_t max_knots) {
    if (values.size() < 10) throw TooFewSamples(values.size());
    if (max_knots == 0) throw std::invalid_argument("max_knots must be positive");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite target value");
    }
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    const size_t m = std::min(n, max_knots);

    QuantileTransform t;
    t.q_.resize(m);
    t.p_.resize(m);
    for (size_t i = 0; i < m; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
        t.p_[i] = p;
        // Empirical quantile with midpoint plotting positions: order
        // statistic j sits at probability (j + 0.5) / n, so when m == n
        // each knot lands exactly on a data point.
        double pos = p * static_cast<double>(n) - 0.5;
        pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, n - 1);
        const double frac = pos - static_cast<double>(lo);
        t.q_[i] = values[lo] * (1.0 - frac) + values[hi] * frac;
    }
    return t;
}

QuantileTransform QuantileTransform::from_knots(std::vector<double> quantiles,
                                                std::vector<double> probs) {
    if (quantiles.size() != probs.size() || quantiles.empty()) {
        throw std::invalid_argument("knot arrays must be non-empty and equal length");
    }
    for (size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0 || probs[i] >= 1.0 ||
            (i > 0 && (probs[i] <= probs[i - 1] || quantiles[i] < quantiles[i - 1]))) {
            throw std::invalid_argument("knots must be sorted with probs in (0, 1)");
        }
    }
    QuantileTransform t;
    t.q_ = std::move(quantiles);
    t.p_ = std::move(probs);
    return t;
}

double QuantileTransform::transform(double v) const {
    if (q_.empty()) throw std::logic_error("transform used before fit");
    double p;
    if (v <= q_.front()) {
        p = p_.front();
    } else if (v >= q_.back()) {
        p = p_.back();
    } else {
        // First knot with q >= v; ties form a flat run mapped to the
        // middle of its probability range.
        const auto it = std::lower_bound(q_.begin(), q_.end(), v);
        const size_t hi = static_cast<size_t>(it - q_.begin());
        if (q_[hi] == v) {
            size_t last = hi;
            while (last + 1 < q_.size() && q_[last + 1] == v) ++last;
            p = 0.5 * (p_[hi] + p_[last]);
        } else {
            const size_t lo = hi - 1;
            const double frac = (v - q_[lo]) / (q_[hi] - q_[lo]);
            p = p_[lo] + frac * (p_[hi] - p_[lo]);
        }
    }
    return num::normal_quantile(p);
}

double QuantileTransform::inverse(double s) const {
    if (q_.empty()) throw std::logic_error("inverse used before fit");
    double p = num::normal_cdf(s);
    p = std::clamp(p, p_.front(), p_.back());
    const auto it = std::lower_bound(p_.begin(), p_.end(), p);
    size_t hi = static_cast<size_t>(it - p_.begin());
    if (hi == 0) return q_.front();
    if (hi >= p_.size()) return q_.back();
    const size_t lo = hi - 1;
    const double frac = (p - p_[lo]) / (p_[hi] - p_[lo]);
    return q_[lo] * (1.0 - frac) + q_[hi] * frac;
}

}  // namespace polytg::train
