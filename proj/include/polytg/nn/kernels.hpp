#pragma once

// Dense and segment compute kernels. Each kernel body is written once and
// instantiated under two policies: `seq` (plain loops) and `par` (OpenMP).
// Parallel loops split work so each output element is owned by exactly one
// thread and in-output accumulation order never depends on the thread
// count, so both policies produce bit-identical results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace polytg::nn {

// Element -> segment assignment reorganized for segment-major traversal.
// `order` lists element indices grouped by segment, ascending inside each
// segment; segment s owns order[offsets[s] .. offsets[s+1]).
struct SegmentIndex {
    uint32_t num_segments = 0;
    std::vector<uint32_t> order;
    std::vector<uint32_t> offsets;

    static SegmentIndex build(const std::vector<uint32_t>& seg_of, uint32_t num_segments) {
        SegmentIndex si;
        si.num_segments = num_segments;
        si.offsets.assign(num_segments + 1, 0);
        for (uint32_t s : seg_of) si.offsets[s + 1]++;
        for (uint32_t s = 0; s < num_segments; ++s) si.offsets[s + 1] += si.offsets[s];
        si.order.resize(seg_of.size());
        std::vector<uint32_t> cursor(si.offsets.begin(), si.offsets.end() - 1);
        for (uint32_t i = 0; i < seg_of.size(); ++i) si.order[cursor[seg_of[i]]++] = i;
        return si;
    }

    uint32_t count(uint32_t s) const { return offsets[s + 1] - offsets[s]; }
};

namespace detail {

// Work-size threshold below which spinning up threads costs more than it
// saves.
inline constexpr int64_t kParGrain = 1 << 12;

template <bool Parallel, typename F>
void for_each_index(int64_t n, int64_t work, F&& f) {
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static) if (work > kParGrain)
        for (int64_t i = 0; i < n; ++i) f(i);
    } else {
        (void)work;
        for (int64_t i = 0; i < n; ++i) f(i);
    }
}

template <bool Parallel>
struct Kernels {
    // C[M x N] = A[M x K] * B[K x N]
    template <typename Real>
    static void matmul(const Real* A, const Real* B, Real* C, int64_t M, int64_t K, int64_t N) {
        for_each_index<Parallel>(M, M * K * N, [&](int64_t i) {
            Real* c = C + i * N;
            std::fill(c, c + N, Real(0));
            const Real* a = A + i * K;
            for (int64_t k = 0; k < K; ++k) {
                const Real av = a[k];
                const Real* b = B + k * N;
                for (int64_t j = 0; j < N; ++j) c[j] += av * b[j];
            }
        });
    }

    // C[M x N] = A[M x K] * B[N x K]^T
    template <typename Real>
    static void matmul_nt(const Real* A, const Real* B, Real* C, int64_t M, int64_t K,
                          int64_t N) {
        for_each_index<Parallel>(M, M * K * N, [&](int64_t i) {
            const Real* a = A + i * K;
            for (int64_t j = 0; j < N; ++j) {
                const Real* b = B + j * K;
                Real acc = 0;
                for (int64_t k = 0; k < K; ++k) acc += a[k] * b[k];
                C[i * N + j] = acc;
            }
        });
    }

    // C[M x N] = A[K x M]^T * B[K x N]
    template <typename Real>
    static void matmul_tn(const Real* A, const Real* B, Real* C, int64_t M, int64_t K,
                          int64_t N) {
        for_each_index<Parallel>(M, M * K * N, [&](int64_t i) {
            Real* c = C + i * N;
            std::fill(c, c + N, Real(0));
            for (int64_t k = 0; k < K; ++k) {
                const Real av = A[k * M + i];
                const Real* b = B + k * N;
                for (int64_t j = 0; j < N; ++j) c[j] += av * b[j];
            }
        });
    }

    // out[1 x C] = sum over rows
    template <typename Real>
    static void colsum(const Real* X, Real* out, int64_t R, int64_t C) {
        for_each_index<Parallel>(C, R * C, [&](int64_t c) {
            Real acc = 0;
            for (int64_t r = 0; r < R; ++r) acc += X[r * C + c];
            out[c] = acc;
        });
    }

    template <typename Real>
    static void segment_sum(const Real* X, Real* Y, const SegmentIndex& si, int64_t C) {
        const auto work = static_cast<int64_t>(si.order.size()) * C;
        for_each_index<Parallel>(si.num_segments, work, [&](int64_t s) {
            Real* y = Y + s * C;
            std::fill(y, y + C, Real(0));
            for (uint32_t e = si.offsets[s]; e < si.offsets[s + 1]; ++e) {
                const Real* x = X + static_cast<int64_t>(si.order[e]) * C;
                for (int64_t c = 0; c < C; ++c) y[c] += x[c];
            }
        });
    }

    template <typename Real>
    static void segment_mean(const Real* X, Real* Y, const SegmentIndex& si, int64_t C) {
        const auto work = static_cast<int64_t>(si.order.size()) * C;
        for_each_index<Parallel>(si.num_segments, work, [&](int64_t s) {
            Real* y = Y + s * C;
            std::fill(y, y + C, Real(0));
            const uint32_t n = si.offsets[s + 1] - si.offsets[s];
            if (n == 0) return;
            for (uint32_t e = si.offsets[s]; e < si.offsets[s + 1]; ++e) {
                const Real* x = X + static_cast<int64_t>(si.order[e]) * C;
                for (int64_t c = 0; c < C; ++c) y[c] += x[c];
            }
            const Real inv = Real(1) / Real(n);
            for (int64_t c = 0; c < C; ++c) y[c] *= inv;
        });
    }

    // argmax records the winning element row per (segment, column); empty
    // segments yield 0 with argmax UINT32_MAX.
    template <typename Real>
    static void segment_max(const Real* X, Real* Y, uint32_t* argmax, const SegmentIndex& si,
                            int64_t C) {
        const auto work = static_cast<int64_t>(si.order.size()) * C;
        for_each_index<Parallel>(si.num_segments, work, [&](int64_t s) {
            Real* y = Y + s * C;
            uint32_t* am = argmax + s * C;
            for (int64_t c = 0; c < C; ++c) {
                y[c] = 0;
                am[c] = UINT32_MAX;
            }
            bool first = true;
            for (uint32_t e = si.offsets[s]; e < si.offsets[s + 1]; ++e) {
                const uint32_t row = si.order[e];
                const Real* x = X + static_cast<int64_t>(row) * C;
                for (int64_t c = 0; c < C; ++c) {
                    if (first || x[c] > y[c]) {
                        y[c] = x[c];
                        am[c] = row;
                    }
                }
                first = false;
            }
        });
    }

    // Y[r] = X[idx[r]]
    template <typename Real>
    static void gather_rows(const Real* X, const uint32_t* idx, Real* Y, int64_t R, int64_t C) {
        for_each_index<Parallel>(R, R * C, [&](int64_t r) {
            const Real* x = X + static_cast<int64_t>(idx[r]) * C;
            Real* y = Y + r * C;
            for (int64_t c = 0; c < C; ++c) y[c] = x[c];
        });
    }

    // Y[idx[r]] += X[r]; parallel across columns so each (row, col) cell
    // has one writer and row accumulation order stays ascending.
    template <typename Real>
    static void scatter_add_rows(const Real* X, const uint32_t* idx, Real* Y, int64_t R,
                                 int64_t C) {
        for_each_index<Parallel>(C, R * C, [&](int64_t c) {
            for (int64_t r = 0; r < R; ++r) {
                Y[static_cast<int64_t>(idx[r]) * C + c] += X[r * C + c];
            }
        });
    }

    // In-segment softmax over single-column scores.
    template <typename Real>
    static void segment_softmax_fwd(const Real* X, Real* Y, const SegmentIndex& si) {
        const auto work = static_cast<int64_t>(si.order.size());
        for_each_index<Parallel>(si.num_segments, work, [&](int64_t s) {
            const uint32_t b = si.offsets[s], e = si.offsets[s + 1];
            if (b == e) return;
            Real mx = X[si.order[b]];
            for (uint32_t i = b + 1; i < e; ++i) mx = std::max(mx, X[si.order[i]]);
            Real z = 0;
            for (uint32_t i = b; i < e; ++i) {
                const Real v = std::exp(X[si.order[i]] - mx);
                Y[si.order[i]] = v;
                z += v;
            }
            const Real inv = Real(1) / z;
            for (uint32_t i = b; i < e; ++i) Y[si.order[i]] *= inv;
        });
    }

    // dX += alpha * (dY - sum_over_segment(alpha * dY))
    template <typename Real>
    static void segment_softmax_bwd(const Real* alpha, const Real* dY, Real* dX,
                                    const SegmentIndex& si) {
        const auto work = static_cast<int64_t>(si.order.size());
        for_each_index<Parallel>(si.num_segments, work, [&](int64_t s) {
            Real dot = 0;
            for (uint32_t i = si.offsets[s]; i < si.offsets[s + 1]; ++i) {
                const uint32_t r = si.order[i];
                dot += alpha[r] * dY[r];
            }
            for (uint32_t i = si.offsets[s]; i < si.offsets[s + 1]; ++i) {
                const uint32_t r = si.order[i];
                dX[r] += alpha[r] * (dY[r] - dot);
            }
        });
    }

    template <typename Real, typename F>
    static void map1(const Real* X, Real* Y, int64_t n, F f) {
        for_each_index<Parallel>(n, n, [&](int64_t i) { Y[i] = f(X[i]); });
    }

    template <typename Real, typename F>
    static void map2(const Real* A, const Real* B, Real* Y, int64_t n, F f) {
        for_each_index<Parallel>(n, n, [&](int64_t i) { Y[i] = f(A[i], B[i]); });
    }
};

}  // namespace detail

// ParK is what the ops layer uses; SeqK is the serial reference the tests
// and the benchmark compare against.
using ParK = detail::Kernels<true>;
using SeqK = detail::Kernels<false>;

}  // namespace polytg::nn
