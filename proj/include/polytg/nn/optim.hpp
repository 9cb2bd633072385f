#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "polytg/nn/tensor.hpp"

namespace polytg::nn {

// AdamW with decoupled weight decay applied to every parameter.
template <typename Real>
class AdamW {
  public:
    struct Config {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        double weight_decay = 0.0;
    };

    AdamW(std::vector<Tensor<Real>> params, Config cfg)
        : params_(std::move(params)), cfg_(cfg) {
        m_.resize(params_.size());
        v_.resize(params_.size());
        for (size_t i = 0; i < params_.size(); ++i) {
            m_[i].assign(params_[i]->numel(), Real(0));
            v_[i].assign(params_[i]->numel(), Real(0));
        }
    }

    void zero_grad() {
        for (auto& p : params_) p->zero_grad();
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i];
            p->ensure_grad();
            for (int64_t j = 0; j < p->numel(); ++j) {
                const double g = static_cast<double>(p->grad[j]);
                double m = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g;
                double v = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g * g;
                m_[i][j] = static_cast<Real>(m);
                v_[i][j] = static_cast<Real>(v);
                const double update = (m / bc1) / (std::sqrt(v / bc2) + cfg_.eps) +
                                      cfg_.weight_decay * static_cast<double>(p->val[j]);
                p->val[j] = static_cast<Real>(static_cast<double>(p->val[j]) - cfg_.lr * update);
            }
        }
    }

    double lr() const { return cfg_.lr; }
    void set_lr(double lr) { cfg_.lr = lr; }

  private:
    std::vector<Tensor<Real>> params_;
    Config cfg_;
    int64_t t_ = 0;
    std::vector<std::vector<Real>> m_, v_;
};

// Half-cosine decay from base_lr at t=0 to 0 at t=total.
inline double cosine_anneal(double base_lr, int64_t t, int64_t total) {
    if (total <= 0) return base_lr;
    const double frac = static_cast<double>(t) / static_cast<double>(total);
    return base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * frac));
}

// Multiplies the learning rate by `factor` once the monitored metric has
// gone `patience`+1 consecutive epochs without relative improvement.
class ReduceLROnPlateau {
  public:
    ReduceLROnPlateau(double factor, int patience, double min_lr, double threshold = 1e-4)
        : factor_(factor), min_lr_(min_lr), threshold_(threshold), patience_(patience) {}

    // Feed the new metric value; returns the (possibly reduced) lr.
    double update(double lr, double metric) {
        if (metric < best_ * (1.0 - threshold_)) {
            best_ = metric;
            bad_epochs_ = 0;
        } else {
            ++bad_epochs_;
        }
        if (bad_epochs_ > patience_) {
            lr = std::max(lr * factor_, min_lr_);
            bad_epochs_ = 0;
        }
        return lr;
    }

  private:
    double factor_;
    double min_lr_;
    double threshold_;
    int patience_;
    int bad_epochs_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace polytg::nn
