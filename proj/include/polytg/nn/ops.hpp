#pragma once

// Differentiable ops over Tensor. Forward compute goes through the
// OpenMP kernels; backward closures capture parent tensors by shared_ptr
// and the output node by raw pointer (the graph keeps it alive, and a
// shared_ptr there would be a reference cycle).

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "polytg/nn/kernels.hpp"
#include "polytg/nn/tensor.hpp"
#include "polytg/num/rng.hpp"

namespace polytg::nn {

using Kern = ParK;

using IndexVec = std::shared_ptr<const std::vector<uint32_t>>;
using SegIndex = std::shared_ptr<const SegmentIndex>;

namespace detail {

template <typename Real>
Tensor<Real> make_result(int64_t rows, int64_t cols,
                         std::initializer_list<Tensor<Real>> inputs) {
    auto out = make_tensor<Real>(rows, cols);
    if (grad_enabled()) {
        for (const auto& in : inputs) {
            if (in->requires_grad) out->requires_grad = true;
        }
        if (out->requires_grad) {
            out->parents.assign(inputs.begin(), inputs.end());
        }
    }
    return out;
}

template <typename Real>
void check_same_shape(const Tensor<Real>& a, const Tensor<Real>& b) {
    if (a->rows != b->rows || a->cols != b->cols) {
        throw std::invalid_argument("shape mismatch");
    }
}

}  // namespace detail

// ---------------------------------------------------------------- matmul

template <typename Real>
Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b) {
    if (a->cols != b->rows) throw std::invalid_argument("matmul inner dim mismatch");
    auto out = detail::make_result<Real>(a->rows, b->cols, {a, b});
    Kern::matmul(a->val.data(), b->val.data(), out->val.data(), a->rows, a->cols, b->cols);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, b, o] {
            if (a->requires_grad) {
                a->ensure_grad();
                std::vector<Real> tmp(a->numel());
                Kern::matmul_nt(o->grad.data(), b->val.data(), tmp.data(), a->rows, b->cols,
                                a->cols);
                Kern::map2(a->grad.data(), tmp.data(), a->grad.data(), a->numel(),
                           [](Real x, Real y) { return x + y; });
            }
            if (b->requires_grad) {
                b->ensure_grad();
                std::vector<Real> tmp(b->numel());
                Kern::matmul_tn(a->val.data(), o->grad.data(), tmp.data(), b->rows, a->rows,
                                b->cols);
                Kern::map2(b->grad.data(), tmp.data(), b->grad.data(), b->numel(),
                           [](Real x, Real y) { return x + y; });
            }
        };
    }
    return out;
}

// ----------------------------------------------------------- elementwise

namespace detail {

template <typename Real, typename Fwd, typename BwdA, typename BwdB>
Tensor<Real> binary_op(const Tensor<Real>& a, const Tensor<Real>& b, Fwd fwd, BwdA dfda,
                       BwdB dfdb) {
    check_same_shape(a, b);
    auto out = make_result<Real>(a->rows, a->cols, {a, b});
    Kern::map2(a->val.data(), b->val.data(), out->val.data(), a->numel(), fwd);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, b, o, dfda, dfdb] {
            const int64_t n = o->numel();
            if (a->requires_grad) {
                a->ensure_grad();
                for (int64_t i = 0; i < n; ++i) {
                    a->grad[i] += o->grad[i] * dfda(a->val[i], b->val[i]);
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (int64_t i = 0; i < n; ++i) {
                    b->grad[i] += o->grad[i] * dfdb(a->val[i], b->val[i]);
                }
            }
        };
    }
    return out;
}

template <typename Real, typename Fwd, typename Bwd>
Tensor<Real> unary_op(const Tensor<Real>& a, Fwd fwd, Bwd dfdx) {
    auto out = make_result<Real>(a->rows, a->cols, {a});
    Kern::map1(a->val.data(), out->val.data(), a->numel(), fwd);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, o, dfdx] {
            a->ensure_grad();
            const int64_t n = o->numel();
            for (int64_t i = 0; i < n; ++i) a->grad[i] += o->grad[i] * dfdx(a->val[i]);
        };
    }
    return out;
}

}  // namespace detail

template <typename Real>
Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b) {
    return detail::binary_op(
        a, b, [](Real x, Real y) { return x + y; }, [](Real, Real) { return Real(1); },
        [](Real, Real) { return Real(1); });
}

template <typename Real>
Tensor<Real> sub(const Tensor<Real>& a, const Tensor<Real>& b) {
    return detail::binary_op(
        a, b, [](Real x, Real y) { return x - y; }, [](Real, Real) { return Real(1); },
        [](Real, Real) { return Real(-1); });
}

template <typename Real>
Tensor<Real> mul(const Tensor<Real>& a, const Tensor<Real>& b) {
    return detail::binary_op(
        a, b, [](Real x, Real y) { return x * y; }, [](Real, Real y) { return y; },
        [](Real x, Real) { return x; });
}

template <typename Real>
Tensor<Real> div(const Tensor<Real>& a, const Tensor<Real>& b) {
    return detail::binary_op(
        a, b, [](Real x, Real y) { return x / y; }, [](Real, Real y) { return Real(1) / y; },
        [](Real x, Real y) { return -x / (y * y); });
}

template <typename Real>
Tensor<Real> scale(const Tensor<Real>& a, double c) {
    const Real rc = static_cast<Real>(c);
    return detail::unary_op(
        a, [rc](Real x) { return x * rc; }, [rc](Real) { return rc; });
}

template <typename Real>
Tensor<Real> add_const(const Tensor<Real>& a, double c) {
    const Real rc = static_cast<Real>(c);
    return detail::unary_op(
        a, [rc](Real x) { return x + rc; }, [](Real) { return Real(1); });
}

template <typename Real>
Tensor<Real> relu(const Tensor<Real>& a) {
    return detail::unary_op(
        a, [](Real x) { return x > Real(0) ? x : Real(0); },
        [](Real x) { return x > Real(0) ? Real(1) : Real(0); });
}

template <typename Real>
Tensor<Real> leaky_relu(const Tensor<Real>& a, double slope) {
    const Real s = static_cast<Real>(slope);
    return detail::unary_op(
        a, [s](Real x) { return x > Real(0) ? x : s * x; },
        [s](Real x) { return x > Real(0) ? Real(1) : s; });
}

// Exact (erf-based) GELU.
template <typename Real>
Tensor<Real> gelu(const Tensor<Real>& a) {
    constexpr double kInvSqrt2 = 0.7071067811865475244;
    constexpr double kInvSqrt2Pi = 0.3989422804014326779;
    return detail::unary_op(
        a,
        [](Real x) {
            return static_cast<Real>(0.5 * static_cast<double>(x) *
                                     (1.0 + std::erf(static_cast<double>(x) * kInvSqrt2)));
        },
        [](Real x) {
            const double xd = static_cast<double>(x);
            const double cdf = 0.5 * (1.0 + std::erf(xd * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * xd * xd);
            return static_cast<Real>(cdf + xd * pdf);
        });
}

// out = max(sqrt(a), floor); gradient is blocked where the floor engages,
// which also avoids the infinite sqrt slope at zero.
template <typename Real>
Tensor<Real> sqrt_floored(const Tensor<Real>& a, double floor) {
    const Real f = static_cast<Real>(floor);
    return detail::unary_op(
        a,
        [f](Real x) {
            const Real r = std::sqrt(std::max(x, Real(0)));
            return std::max(r, f);
        },
        [f](Real x) {
            const Real r = std::sqrt(std::max(x, Real(0)));
            return r > f ? Real(1) / (Real(2) * r) : Real(0);
        });
}

// ------------------------------------------------------------ broadcasts

template <typename Real>
Tensor<Real> add_rowvec(const Tensor<Real>& a, const Tensor<Real>& v) {
    if (v->rows != 1 || v->cols != a->cols) {
        throw std::invalid_argument("add_rowvec needs a 1 x cols vector");
    }
    auto out = detail::make_result<Real>(a->rows, a->cols, {a, v});
    const int64_t R = a->rows, C = a->cols;
    detail::for_each_index<true>(R, a->numel(), [&](int64_t r) {
        for (int64_t c = 0; c < C; ++c) out->val[r * C + c] = a->val[r * C + c] + v->val[c];
    });
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, v, o, R, C] {
            if (a->requires_grad) {
                a->ensure_grad();
                Kern::map2(a->grad.data(), o->grad.data(), a->grad.data(), a->numel(),
                           [](Real x, Real g) { return x + g; });
            }
            if (v->requires_grad) {
                v->ensure_grad();
                std::vector<Real> cs(C);
                Kern::colsum(o->grad.data(), cs.data(), R, C);
                for (int64_t c = 0; c < C; ++c) v->grad[c] += cs[c];
            }
        };
    }
    return out;
}

template <typename Real>
Tensor<Real> mul_rowvec(const Tensor<Real>& a, const Tensor<Real>& v) {
    if (v->rows != 1 || v->cols != a->cols) {
        throw std::invalid_argument("mul_rowvec needs a 1 x cols vector");
    }
    auto out = detail::make_result<Real>(a->rows, a->cols, {a, v});
    const int64_t R = a->rows, C = a->cols;
    detail::for_each_index<true>(R, a->numel(), [&](int64_t r) {
        for (int64_t c = 0; c < C; ++c) out->val[r * C + c] = a->val[r * C + c] * v->val[c];
    });
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, v, o, R, C] {
            if (a->requires_grad) {
                a->ensure_grad();
                detail::for_each_index<true>(R, o->numel(), [&](int64_t r) {
                    for (int64_t c = 0; c < C; ++c) {
                        a->grad[r * C + c] += o->grad[r * C + c] * v->val[c];
                    }
                });
            }
            if (v->requires_grad) {
                v->ensure_grad();
                for (int64_t c = 0; c < C; ++c) {
                    Real acc = 0;
                    for (int64_t r = 0; r < R; ++r) {
                        acc += o->grad[r * C + c] * a->val[r * C + c];
                    }
                    v->grad[c] += acc;
                }
            }
        };
    }
    return out;
}

// out = a * s where s is a 1x1 tensor.
template <typename Real>
Tensor<Real> mul_scalar(const Tensor<Real>& a, const Tensor<Real>& s) {
    if (s->numel() != 1) throw std::invalid_argument("mul_scalar needs a 1x1 tensor");
    auto out = detail::make_result<Real>(a->rows, a->cols, {a, s});
    const Real sv = s->val[0];
    Kern::map1(a->val.data(), out->val.data(), a->numel(), [sv](Real x) { return x * sv; });
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, s, o, sv] {
            if (a->requires_grad) {
                a->ensure_grad();
                const int64_t n = o->numel();
                for (int64_t i = 0; i < n; ++i) a->grad[i] += o->grad[i] * sv;
            }
            if (s->requires_grad) {
                s->ensure_grad();
                Real acc = 0;
                const int64_t n = o->numel();
                for (int64_t i = 0; i < n; ++i) acc += o->grad[i] * a->val[i];
                s->grad[0] += acc;
            }
        };
    }
    return out;
}

// out[r, :] = a[r, :] * s[r] where s is rows x 1.
template <typename Real>
Tensor<Real> scale_rows(const Tensor<Real>& a, const Tensor<Real>& s) {
    if (s->rows != a->rows || s->cols != 1) {
        throw std::invalid_argument("scale_rows needs a rows x 1 tensor");
    }
    auto out = detail::make_result<Real>(a->rows, a->cols, {a, s});
    const int64_t R = a->rows, C = a->cols;
    detail::for_each_index<true>(R, a->numel(), [&](int64_t r) {
        const Real sv = s->val[r];
        for (int64_t c = 0; c < C; ++c) out->val[r * C + c] = a->val[r * C + c] * sv;
    });
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, s, o, R, C] {
            if (a->requires_grad) {
                a->ensure_grad();
                detail::for_each_index<true>(R, o->numel(), [&](int64_t r) {
                    const Real sv = s->val[r];
                    for (int64_t c = 0; c < C; ++c) {
                        a->grad[r * C + c] += o->grad[r * C + c] * sv;
                    }
                });
            }
            if (s->requires_grad) {
                s->ensure_grad();
                detail::for_each_index<true>(R, o->numel(), [&](int64_t r) {
                    Real acc = 0;
                    for (int64_t c = 0; c < C; ++c) {
                        acc += o->grad[r * C + c] * a->val[r * C + c];
                    }
                    s->grad[r] += acc;
                });
            }
        };
    }
    return out;
}

template <typename Real>
Tensor<Real> concat_cols(const Tensor<Real>& a, const Tensor<Real>& b) {
    if (a->rows != b->rows) throw std::invalid_argument("concat_cols row mismatch");
    const int64_t R = a->rows, Ca = a->cols, Cb = b->cols;
    auto out = detail::make_result<Real>(R, Ca + Cb, {a, b});
    detail::for_each_index<true>(R, R * (Ca + Cb), [&](int64_t r) {
        Real* o = out->val.data() + r * (Ca + Cb);
        const Real* pa = a->val.data() + r * Ca;
        const Real* pb = b->val.data() + r * Cb;
        std::copy(pa, pa + Ca, o);
        std::copy(pb, pb + Cb, o + Ca);
    });
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, b, o, R, Ca, Cb] {
            if (a->requires_grad) {
                a->ensure_grad();
                detail::for_each_index<true>(R, R * Ca, [&](int64_t r) {
                    for (int64_t c = 0; c < Ca; ++c) {
                        a->grad[r * Ca + c] += o->grad[r * (Ca + Cb) + c];
                    }
                });
            }
            if (b->requires_grad) {
                b->ensure_grad();
                detail::for_each_index<true>(R, R * Cb, [&](int64_t r) {
                    for (int64_t c = 0; c < Cb; ++c) {
                        b->grad[r * Cb + c] += o->grad[r * (Ca + Cb) + Ca + c];
                    }
                });
            }
        };
    }
    return out;
}

// -------------------------------------------------------- gather/segment

template <typename Real>
Tensor<Real> gather_rows(const Tensor<Real>& a, IndexVec idx) {
    const int64_t R = static_cast<int64_t>(idx->size());
    auto out = detail::make_result<Real>(R, a->cols, {a});
    Kern::gather_rows(a->val.data(), idx->data(), out->val.data(), R, a->cols);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, idx, o, R] {
            a->ensure_grad();
            Kern::scatter_add_rows(o->grad.data(), idx->data(), a->grad.data(), R, a->cols);
        };
    }
    return out;
}

template <typename Real>
Tensor<Real> segment_sum(const Tensor<Real>& a, SegIndex si) {
    auto out = detail::make_result<Real>(si->num_segments, a->cols, {a});
    Kern::segment_sum(a->val.data(), out->val.data(), *si, a->cols);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, si, o] {
            a->ensure_grad();
            const int64_t C = a->cols;
            detail::for_each_index<true>(
                si->num_segments, static_cast<int64_t>(si->order.size()) * C, [&](int64_t s) {
                    for (uint32_t e = si->offsets[s]; e < si->offsets[s + 1]; ++e) {
                        const int64_t r = si->order[e];
                        for (int64_t c = 0; c < C; ++c) {
                            a->grad[r * C + c] += o->grad[s * C + c];
                        }
                    }
                });
        };
    }
    return out;
}

template <typename Real>
Tensor<Real> segment_mean(const Tensor<Real>& a, SegIndex si) {
    auto out = detail::make_result<Real>(si->num_segments, a->cols, {a});
    Kern::segment_mean(a->val.data(), out->val.data(), *si, a->cols);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, si, o] {
            a->ensure_grad();
            const int64_t C = a->cols;
            detail::for_each_index<true>(
                si->num_segments, static_cast<int64_t>(si->order.size()) * C, [&](int64_t s) {
                    const uint32_t n = si->offsets[s + 1] - si->offsets[s];
                    if (n == 0) return;
                    const Real inv = Real(1) / Real(n);
                    for (uint32_t e = si->offsets[s]; e < si->offsets[s + 1]; ++e) {
                        const int64_t r = si->order[e];
                        for (int64_t c = 0; c < C; ++c) {
                            a->grad[r * C + c] += o->grad[s * C + c] * inv;
                        }
                    }
                });
        };
    }
    return out;
}

template <typename Real>
Tensor<Real> segment_max(const Tensor<Real>& a, SegIndex si) {
    auto out = detail::make_result<Real>(si->num_segments, a->cols, {a});
    auto argmax = std::make_shared<std::vector<uint32_t>>(
        static_cast<size_t>(si->num_segments) * a->cols);
    Kern::segment_max(a->val.data(), out->val.data(), argmax->data(), *si, a->cols);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, argmax, o] {
            a->ensure_grad();
            const int64_t C = a->cols;
            const int64_t S = o->rows;
            for (int64_t s = 0; s < S; ++s) {
                for (int64_t c = 0; c < C; ++c) {
                    const uint32_t r = (*argmax)[s * C + c];
                    if (r != UINT32_MAX) a->grad[static_cast<int64_t>(r) * C + c] += o->grad[s * C + c];
                }
            }
        };
    }
    return out;
}

// Softmax within segments over a rows x 1 score column.
template <typename Real>
Tensor<Real> segment_softmax(const Tensor<Real>& a, SegIndex si) {
    if (a->cols != 1) throw std::invalid_argument("segment_softmax expects a column");
    auto out = detail::make_result<Real>(a->rows, 1, {a});
    Kern::segment_softmax_fwd(a->val.data(), out->val.data(), *si);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, si, o] {
            a->ensure_grad();
            Kern::segment_softmax_bwd(o->val.data(), o->grad.data(), a->grad.data(), *si);
        };
    }
    return out;
}

// Copies `a` with the given rows overwritten by broadcast vector v.
template <typename Real>
Tensor<Real> replace_rows(const Tensor<Real>& a, IndexVec rows, const Tensor<Real>& v) {
    if (v->rows != 1 || v->cols != a->cols) {
        throw std::invalid_argument("replace_rows needs a 1 x cols vector");
    }
    auto out = detail::make_result<Real>(a->rows, a->cols, {a, v});
    out->val = a->val;
    const int64_t C = a->cols;
    auto replaced = std::make_shared<std::vector<uint8_t>>(a->rows, uint8_t{0});
    for (uint32_t r : *rows) {
        (*replaced)[r] = 1;
        std::copy(v->val.begin(), v->val.end(), out->val.begin() + static_cast<int64_t>(r) * C);
    }
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, v, o, replaced, C] {
            const int64_t R = o->rows;
            if (a->requires_grad) {
                a->ensure_grad();
                detail::for_each_index<true>(R, o->numel(), [&](int64_t r) {
                    if ((*replaced)[r]) return;
                    for (int64_t c = 0; c < C; ++c) a->grad[r * C + c] += o->grad[r * C + c];
                });
            }
            if (v->requires_grad) {
                v->ensure_grad();
                for (int64_t r = 0; r < R; ++r) {
                    if (!(*replaced)[r]) continue;
                    for (int64_t c = 0; c < C; ++c) v->grad[c] += o->grad[r * C + c];
                }
            }
        };
    }
    return out;
}

// --------------------------------------------------------------- dropout

// Inverted dropout; the mask is drawn serially from `rng` so results are
// a pure function of the rng state.
template <typename Real>
Tensor<Real> dropout(const Tensor<Real>& a, double p, num::CounterRng& rng) {
    if (p <= 0.0) return a;
    if (p >= 1.0) throw std::invalid_argument("dropout probability must be < 1");
    auto out = detail::make_result<Real>(a->rows, a->cols, {a});
    const Real keep_scale = static_cast<Real>(1.0 / (1.0 - p));
    auto mask = std::make_shared<std::vector<uint8_t>>(a->numel());
    for (int64_t i = 0; i < a->numel(); ++i) {
        const bool keep = rng.next_double() >= p;
        (*mask)[i] = keep ? 1 : 0;
        out->val[i] = keep ? a->val[i] * keep_scale : Real(0);
    }
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, mask, o, keep_scale] {
            a->ensure_grad();
            const int64_t n = o->numel();
            for (int64_t i = 0; i < n; ++i) {
                if ((*mask)[i]) a->grad[i] += o->grad[i] * keep_scale;
            }
        };
    }
    return out;
}

// ------------------------------------------------------------ reductions

template <typename Real>
Tensor<Real> sum_all(const Tensor<Real>& a) {
    auto out = detail::make_result<Real>(1, 1, {a});
    Real acc = 0;
    for (Real v : a->val) acc += v;
    out->val[0] = acc;
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [a, o] {
            a->ensure_grad();
            const Real g = o->grad[0];
            for (int64_t i = 0; i < a->numel(); ++i) a->grad[i] += g;
        };
    }
    return out;
}

template <typename Real>
Tensor<Real> mean_all(const Tensor<Real>& a) {
    if (a->numel() == 0) throw std::invalid_argument("mean of empty tensor");
    return scale(sum_all(a), 1.0 / static_cast<double>(a->numel()));
}

// --------------------------------------------------------------- losses

// Mean Huber loss of pred (rows x 1) against fixed targets.
template <typename Real>
Tensor<Real> huber_mean(const Tensor<Real>& pred, const std::vector<Real>& target,
                        double delta) {
    if (pred->cols != 1 || pred->rows != static_cast<int64_t>(target.size())) {
        throw std::invalid_argument("huber_mean shape mismatch");
    }
    const int64_t R = pred->rows;
    const Real d = static_cast<Real>(delta);
    auto out = detail::make_result<Real>(1, 1, {pred});
    Real acc = 0;
    for (int64_t r = 0; r < R; ++r) {
        const Real e = pred->val[r] - target[r];
        const Real ae = std::abs(e);
        acc += ae <= d ? Real(0.5) * e * e : d * (ae - Real(0.5) * d);
    }
    out->val[0] = acc / Real(R);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [pred, target, o, d, R] {
            pred->ensure_grad();
            const Real g = o->grad[0] / Real(R);
            for (int64_t r = 0; r < R; ++r) {
                const Real e = pred->val[r] - target[r];
                pred->grad[r] += g * (std::abs(e) <= d ? e : (e > 0 ? d : -d));
            }
        };
    }
    return out;
}

// Mean cross entropy over rows of logits against integer labels.
template <typename Real>
Tensor<Real> cross_entropy_mean(const Tensor<Real>& logits, const std::vector<int>& labels) {
    if (logits->rows != static_cast<int64_t>(labels.size()) || logits->rows == 0) {
        throw std::invalid_argument("cross_entropy_mean shape mismatch");
    }
    const int64_t R = logits->rows, C = logits->cols;
    auto probs = std::make_shared<std::vector<Real>>(logits->val);
    Real acc = 0;
    for (int64_t r = 0; r < R; ++r) {
        Real* row = probs->data() + r * C;
        Real mx = row[0];
        for (int64_t c = 1; c < C; ++c) mx = std::max(mx, row[c]);
        Real z = 0;
        for (int64_t c = 0; c < C; ++c) {
            row[c] = std::exp(row[c] - mx);
            z += row[c];
        }
        const Real inv = Real(1) / z;
        for (int64_t c = 0; c < C; ++c) row[c] *= inv;
        acc -= std::log(std::max(row[labels[r]], Real(1e-30)));
    }
    auto out = detail::make_result<Real>(1, 1, {logits});
    out->val[0] = acc / Real(R);
    if (out->requires_grad) {
        auto* o = out.get();
        out->backfn = [logits, probs, labels, o, R, C] {
            logits->ensure_grad();
            const Real g = o->grad[0] / Real(R);
            for (int64_t r = 0; r < R; ++r) {
                for (int64_t c = 0; c < C; ++c) {
                    const Real onehot = (c == labels[r]) ? Real(1) : Real(0);
                    logits->grad[r * C + c] += g * ((*probs)[r * C + c] - onehot);
                }
            }
        };
    }
    return out;
}

// ---------------------------------------------------------- convenience

template <typename Real>
Tensor<Real> linear(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b) {
    return add_rowvec(matmul(x, w), b);
}

}  // namespace polytg::nn
