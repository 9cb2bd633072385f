#pragma once

// Minimal dense reverse-mode autodiff. Tensors are 2-D, row-major,
// reference-counted nodes in a DAG; each non-leaf node carries a closure
// that scatters its gradient into its parents.

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace polytg::nn {

namespace detail {
inline thread_local bool g_grad_enabled = true;
}

inline bool grad_enabled() { return detail::g_grad_enabled; }

// Disables graph construction for its scope (evaluation / inference).
class NoGradGuard {
  public:
    NoGradGuard() : prev_(detail::g_grad_enabled) { detail::g_grad_enabled = false; }
    ~NoGradGuard() { detail::g_grad_enabled = prev_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

  private:
    bool prev_;
};

template <typename Real>
struct TensorData {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<Real> val;
    std::vector<Real> grad;
    bool requires_grad = false;
    std::function<void()> backfn;
    std::vector<std::shared_ptr<TensorData>> parents;

    int64_t numel() const { return rows * cols; }

    // Zeroes the gradient buffer only when it is absent or mis-sized, so
    // accumulation across consumers (and across batches, for leaves
    // between optimizer.zero_grad calls) works.
    void ensure_grad() {
        if (static_cast<int64_t>(grad.size()) != numel()) grad.assign(numel(), Real(0));
    }

    void zero_grad() { grad.assign(numel(), Real(0)); }

    Real& at(int64_t r, int64_t c) { return val[r * cols + c]; }
    Real at(int64_t r, int64_t c) const { return val[r * cols + c]; }
    Real item() const { return val.at(0); }
};

template <typename Real>
using Tensor = std::shared_ptr<TensorData<Real>>;

template <typename Real>
Tensor<Real> make_tensor(int64_t rows, int64_t cols, bool requires_grad = false) {
    auto t = std::make_shared<TensorData<Real>>();
    t->rows = rows;
    t->cols = cols;
    t->val.assign(rows * cols, Real(0));
    t->requires_grad = requires_grad;
    return t;
}

template <typename Real>
Tensor<Real> make_tensor(int64_t rows, int64_t cols, std::vector<Real> values,
                         bool requires_grad = false) {
    if (static_cast<int64_t>(values.size()) != rows * cols) {
        throw std::invalid_argument("tensor value count does not match shape");
    }
    auto t = std::make_shared<TensorData<Real>>();
    t->rows = rows;
    t->cols = cols;
    t->val = std::move(values);
    t->requires_grad = requires_grad;
    return t;
}

// Runs reverse-mode accumulation from a scalar root. Consumed graph edges
// are released afterwards so intermediate buffers free eagerly; leaf
// gradients accumulate until explicitly zeroed.
template <typename Real>
void backward(const Tensor<Real>& root) {
    if (root->numel() != 1) throw std::invalid_argument("backward needs a scalar root");
    if (!root->requires_grad) return;

    // Iterative post-order DFS for topological order. `order` shares
    // ownership: clearing a child's parent list below must not free a
    // node whose backfn has yet to run.
    std::vector<Tensor<Real>> order;
    std::unordered_set<TensorData<Real>*> visited;
    struct Frame {
        Tensor<Real> node;
        size_t next_parent;
    };
    std::vector<Frame> stack{{root, 0}};
    visited.insert(root.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            Tensor<Real> p = f.node->parents[f.next_parent++];
            if (p->requires_grad && visited.insert(p.get()).second) {
                stack.push_back({std::move(p), 0});
            }
        } else {
            order.push_back(std::move(f.node));
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] = Real(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorData<Real>* node = it->get();
        if (node->backfn) {
            node->backfn();
            node->backfn = nullptr;
            node->parents.clear();
        }
    }
}

}  // namespace polytg::nn
