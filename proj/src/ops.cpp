#include "swincross/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace swincross {

namespace {

constexpr std::size_t kNoSource = std::numeric_limits<std::size_t>::max();

std::vector<std::size_t> contiguous_strides(const Shape& s) {
    std::vector<std::size_t> st(s.size());
    std::size_t acc = 1;
    for (std::size_t i = s.size(); i-- > 0;) {
        st[i] = acc;
        acc *= s[i];
    }
    return st;
}

// Offsets of both operands for every flat output index under broadcasting.
struct BroadcastPlan {
    Shape out;
    std::vector<std::size_t> stride_a, stride_b;
    bool same = false;

    template <typename F>
    void for_each(F&& f) const {
        const std::size_t n = shape_numel(out);
        if (same) {
            for (std::size_t o = 0; o < n; ++o) f(o, o, o);
            return;
        }
        const std::size_t r = out.size();
        std::vector<std::size_t> idx(r, 0);
        std::size_t ia = 0, ib = 0;
        for (std::size_t o = 0; o < n; ++o) {
            f(o, ia, ib);
            for (std::size_t d = r; d-- > 0;) {
                ++idx[d];
                ia += stride_a[d];
                ib += stride_b[d];
                if (idx[d] < out[d]) break;
                ia -= stride_a[d] * out[d];
                ib -= stride_b[d] * out[d];
                idx[d] = 0;
            }
        }
    }
};

BroadcastPlan plan_broadcast(const Shape& a, const Shape& b, const char* op) {
    BroadcastPlan p;
    if (a == b) {
        p.out = a;
        p.same = true;
        return p;
    }
    const std::size_t r = std::max(a.size(), b.size());
    const auto sa = contiguous_strides(a);
    const auto sb = contiguous_strides(b);
    p.out.assign(r, 1);
    p.stride_a.assign(r, 0);
    p.stride_b.assign(r, 0);
    for (std::size_t i = 0; i < r; ++i) {
        const bool in_a = i >= r - a.size();
        const bool in_b = i >= r - b.size();
        const std::size_t da = in_a ? a[i - (r - a.size())] : 1;
        const std::size_t db = in_b ? b[i - (r - b.size())] : 1;
        if (da != db && da != 1 && db != 1) {
            throw DimensionError(std::string(op) + ": cannot broadcast shapes " + shape_to_string(a) +
                                 " and " + shape_to_string(b));
        }
        p.out[i] = std::max(da, db);
        if (in_a && da != 1) p.stride_a[i] = sa[i - (r - a.size())];
        if (in_b && db != 1) p.stride_b[i] = sb[i - (r - b.size())];
    }
    return p;
}

void require_rank(const Shape& s, std::size_t rank, const char* op) {
    if (s.size() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                             shape_to_string(s));
    }
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
    if (a != b) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_to_string(a) + " vs " +
                             shape_to_string(b));
    }
}

template <typename T>
void require_vector(const Tensor<T>& v, std::size_t n, const char* op, const char* what) {
    if (v.rank() != 1 || v.dim(0) != n) {
        throw DimensionError(std::string(op) + ": " + what + " must have shape (" + std::to_string(n) +
                             "), got " + shape_to_string(v.shape()));
    }
}

// Elementwise map with derivative expressed through input x and output y.
template <typename T, typename Fwd, typename Deriv>
Tensor<T> unary(const char* op, const Tensor<T>& x, Fwd fwd, Deriv deriv) {
    auto src = x.data();
    std::vector<T> out(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) out[i] = fwd(src[i]);
    return detail::make_result<T>(op, x.shape(), std::move(out), {&x}, [deriv](Node<T>& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(in.data[i], self.data[i]);
    });
}

// Valid output index range [lo, hi) along one axis for kernel tap k.
inline void tap_range(long n, long out_n, long stride, long pad, long k, long& lo, long& hi) {
    lo = pad > k ? (pad - k + stride - 1) / stride : 0;
    const long top = n - 1 + pad - k;
    hi = top < 0 ? 0 : std::min(out_n, top / stride + 1);
    if (lo > hi) lo = hi;
}

struct ConvGeometry {
    long cin, cout, h, w, d, kh, kw, kd, stride, pad, oh, ow, od;
    long in_plane() const { return h * w * d; }
    long out_plane() const { return oh * ow * od; }
};

// Visits the rows of one kernel tap (a, b, c) whose output height index lies
// in [y0, y1): f(out_offset, in_offset, od_lo, od_hi, kd_shift) within a single
// channel plane, with out_offset relative to the start of row y0.
template <typename F>
void for_each_tap_row(const ConvGeometry& g, long y0, long y1, long a, long b, long c, F&& f) {
    long h_lo, h_hi, w_lo, w_hi, d_lo, d_hi;
    tap_range(g.h, g.oh, g.stride, g.pad, a, h_lo, h_hi);
    tap_range(g.w, g.ow, g.stride, g.pad, b, w_lo, w_hi);
    tap_range(g.d, g.od, g.stride, g.pad, c, d_lo, d_hi);
    if (d_lo >= d_hi) return;
    for (long y = std::max(h_lo, y0); y < std::min(h_hi, y1); ++y) {
        const long iy = y * g.stride + a - g.pad;
        for (long x = w_lo; x < w_hi; ++x) {
            const long ix = x * g.stride + b - g.pad;
            f(((y - y0) * g.ow + x) * g.od, (iy * g.w + ix) * g.d, d_lo, d_hi, c - g.pad);
        }
    }
}

// Output height rows per slab, so a slab's column matrix stays cache sized.
inline long conv_slab_rows(const ConvGeometry& g) {
    constexpr long kSlabVoxels = 1024;
    return std::clamp(kSlabVoxels / (g.ow * g.od), 1L, std::max(1L, g.oh));
}

// Column matrix [cin * taps, n] of output rows [y0, y1), n = (y1 - y0) * ow * od:
// the input value each output voxel reads through each tap, zero in padding.
template <typename T>
void im2col_slab(const ConvGeometry& g, const T* x, long y0, long y1, T* col) {
    const long n = (y1 - y0) * g.ow * g.od, taps = g.kh * g.kw * g.kd, s = g.stride;
    std::fill_n(col, g.cin * taps * n, T(0));
    for (long ci = 0; ci < g.cin; ++ci) {
        const T* in = x + ci * g.in_plane();
        for (long t = 0; t < taps; ++t) {
            T* dst = col + (ci * taps + t) * n;
            for_each_tap_row(g, y0, y1, t / (g.kw * g.kd), (t / g.kd) % g.kw, t % g.kd,
                             [&](long oo, long io, long lo, long hi, long shift) {
                                 for (long z = lo; z < hi; ++z) dst[oo + z] = in[io + z * s + shift];
                             });
        }
    }
}

// Adjoint of im2col_slab: accumulates col back into the input planes.
template <typename T>
void col2im_slab(const ConvGeometry& g, const T* col, long y0, long y1, T* x) {
    const long n = (y1 - y0) * g.ow * g.od, taps = g.kh * g.kw * g.kd, s = g.stride;
    for (long ci = 0; ci < g.cin; ++ci) {
        T* in = x + ci * g.in_plane();
        for (long t = 0; t < taps; ++t) {
            const T* src = col + (ci * taps + t) * n;
            for_each_tap_row(g, y0, y1, t / (g.kw * g.kd), (t / g.kd) % g.kw, t % g.kd,
                             [&](long oo, long io, long lo, long hi, long shift) {
                                 for (long z = lo; z < hi; ++z) in[io + z * s + shift] += src[oo + z];
                             });
        }
    }
}

// C[m, n] += A * B[k, n] with row strides ldb and ldc, where
// A(i, p) = a[i * ars + p * aks]. Four rows of C are accumulated at once over
// a column chunk held in local buffers.
template <typename T>
[[gnu::always_inline]] inline void gemm_kernel(long m, long n, long k, const T* a, long ars, long aks, const T* b,
                                               long ldb, T* c, long ldc) {
    constexpr long kChunk = 64;
    for (long j0 = 0; j0 < n; j0 += kChunk) {
        const long nj = std::min(kChunk, n - j0);
        long i = 0;
        for (; i + 4 <= m; i += 4) {
            T acc[4][kChunk];
            for (long r = 0; r < 4; ++r) std::copy_n(c + (i + r) * ldc + j0, nj, acc[r]);
            for (long p = 0; p < k; ++p) {
                const T* brow = b + p * ldb + j0;
                const T w0 = a[i * ars + p * aks], w1 = a[(i + 1) * ars + p * aks];
                const T w2 = a[(i + 2) * ars + p * aks], w3 = a[(i + 3) * ars + p * aks];
                for (long j = 0; j < nj; ++j) {
                    acc[0][j] += w0 * brow[j];
                    acc[1][j] += w1 * brow[j];
                    acc[2][j] += w2 * brow[j];
                    acc[3][j] += w3 * brow[j];
                }
            }
            for (long r = 0; r < 4; ++r) std::copy_n(acc[r], nj, c + (i + r) * ldc + j0);
        }
        for (; i < m; ++i) {
            T* crow = c + i * ldc + j0;
            for (long p = 0; p < k; ++p) {
                const T w = a[i * ars + p * aks];
                const T* brow = b + p * ldb + j0;
                for (long j = 0; j < nj; ++j) crow[j] += w * brow[j];
            }
        }
    }
}

// AVX2 clones without FMA run the same operations in the same order, so
// results are identical on either path.
#if defined(__GNUC__) && defined(__x86_64__)
#define SWINCROSS_CLONES [[gnu::target_clones("avx2", "default")]]
#else
#define SWINCROSS_CLONES
#endif

SWINCROSS_CLONES void gemm_acc(long m, long n, long k, const float* a, long ars, long aks, const float* b, long ldb,
                               float* c, long ldc) {
    gemm_kernel(m, n, k, a, ars, aks, b, ldb, c, ldc);
}

SWINCROSS_CLONES void gemm_acc(long m, long n, long k, const double* a, long ars, long aks, const double* b, long ldb,
                               double* c, long ldc) {
    gemm_kernel(m, n, k, a, ars, aks, b, ldb, c, ldc);
}

// Dot product summed in eight interleaved lanes.
template <typename T>
T dot_lanes(const T* x, const T* y, long n) {
    constexpr long kLanes = 8;
    T acc[kLanes] = {};
    long j = 0;
    for (; j + kLanes <= n; j += kLanes) {
        for (long l = 0; l < kLanes; ++l) acc[l] += x[j + l] * y[j + l];
    }
    T s = 0;
    for (; j < n; ++j) s += x[j] * y[j];
    for (long l = 0; l < kLanes; ++l) s += acc[l];
    return s;
}

template <typename T>
Tensor<T> gather_impl(const char* op, const Tensor<T>& x, Shape out_shape, std::vector<std::size_t> source) {
    auto src = x.data();
    std::vector<T> out(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) out[i] = source[i] == kNoSource ? T(0) : src[source[i]];
    return detail::make_result<T>(op, std::move(out_shape), std::move(out), {&x},
                                  [source = std::move(source)](Node<T>& self) {
                                      auto& in = *self.inputs[0];
                                      if (!in.requires_grad) return;
                                      auto& g = in.grad_buffer();
                                      for (std::size_t i = 0; i < source.size(); ++i) {
                                          if (source[i] != kNoSource) g[source[i]] += self.grad[i];
                                      }
                                  });
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    auto plan = plan_broadcast(a.shape(), b.shape(), "add");
    std::vector<T> out(shape_numel(plan.out));
    auto da = a.data();
    auto db = b.data();
    plan.for_each([&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = da[ia] + db[ib]; });
    Shape shape = plan.out;
    return detail::make_result<T>("add", std::move(shape), std::move(out), {&a, &b}, [plan](Node<T>& self) {
        auto& na = *self.inputs[0];
        auto& nb = *self.inputs[1];
        const auto& g = self.grad;
        if (na.requires_grad) {
            auto& ga = na.grad_buffer();
            plan.for_each([&](std::size_t o, std::size_t ia, std::size_t) { ga[ia] += g[o]; });
        }
        if (nb.requires_grad) {
            auto& gb = nb.grad_buffer();
            plan.for_each([&](std::size_t o, std::size_t, std::size_t ib) { gb[ib] += g[o]; });
        }
    });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    auto plan = plan_broadcast(a.shape(), b.shape(), "sub");
    std::vector<T> out(shape_numel(plan.out));
    auto da = a.data();
    auto db = b.data();
    plan.for_each([&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = da[ia] - db[ib]; });
    Shape shape = plan.out;
    return detail::make_result<T>("sub", std::move(shape), std::move(out), {&a, &b}, [plan](Node<T>& self) {
        auto& na = *self.inputs[0];
        auto& nb = *self.inputs[1];
        const auto& g = self.grad;
        if (na.requires_grad) {
            auto& ga = na.grad_buffer();
            plan.for_each([&](std::size_t o, std::size_t ia, std::size_t) { ga[ia] += g[o]; });
        }
        if (nb.requires_grad) {
            auto& gb = nb.grad_buffer();
            plan.for_each([&](std::size_t o, std::size_t, std::size_t ib) { gb[ib] -= g[o]; });
        }
    });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    auto plan = plan_broadcast(a.shape(), b.shape(), "mul");
    std::vector<T> out(shape_numel(plan.out));
    auto da = a.data();
    auto db = b.data();
    plan.for_each([&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = da[ia] * db[ib]; });
    Shape shape = plan.out;
    return detail::make_result<T>("mul", std::move(shape), std::move(out), {&a, &b}, [plan](Node<T>& self) {
        auto& na = *self.inputs[0];
        auto& nb = *self.inputs[1];
        const auto& g = self.grad;
        if (na.requires_grad) {
            auto& ga = na.grad_buffer();
            plan.for_each([&](std::size_t o, std::size_t ia, std::size_t ib) { ga[ia] += g[o] * nb.data[ib]; });
        }
        if (nb.requires_grad) {
            auto& gb = nb.grad_buffer();
            plan.for_each([&](std::size_t o, std::size_t ia, std::size_t ib) { gb[ib] += g[o] * na.data[ia]; });
        }
    });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
    return unary<T>("scale", x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T value) {
    return unary<T>("add_scalar", x, [value](T v) { return v + value; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sa.size() < 2 || sb.size() < 2) {
        throw DimensionError("matmul: operands need rank >= 2, got " + shape_to_string(sa) + " and " +
                             shape_to_string(sb));
    }
    const std::size_t m = sa[sa.size() - 2], k = sa.back(), n = sb.back();
    if (sb[sb.size() - 2] != k) {
        throw DimensionError("matmul: inner dimensions differ for " + shape_to_string(sa) + " x " +
                             shape_to_string(sb));
    }
    const Shape batch_a(sa.begin(), sa.end() - 2);
    const Shape batch_b(sb.begin(), sb.end() - 2);
    auto plan = plan_broadcast(batch_a, batch_b, "matmul");
    Shape out_shape = plan.out;
    out_shape.push_back(m);
    out_shape.push_back(n);
    const std::size_t batches = shape_numel(plan.out);
    MacCounter::add(static_cast<std::uint64_t>(batches) * m * k * n);
    const long lm = static_cast<long>(m), lk = static_cast<long>(k), ln = static_cast<long>(n);

    std::vector<T> out(batches * m * n, T(0));
    const T* pa = a.data().data();
    const T* pb = b.data().data();
    plan.for_each([&](std::size_t o, std::size_t ia, std::size_t ib) {
        const T* A = pa + ia * m * k;
        const T* B = pb + ib * k * n;
        T* C = out.data() + o * m * n;
        gemm_acc(lm, ln, lk, A, lk, 1L, B, ln, C, ln);
    });
    return detail::make_result<T>(
        "matmul", std::move(out_shape), std::move(out), {&a, &b}, [plan, m, k, n](Node<T>& self) {
            auto& na = *self.inputs[0];
            auto& nb = *self.inputs[1];
            const T* g = self.grad.data();
            if (na.requires_grad) {
                auto& ga = na.grad_buffer();
                plan.for_each([&](std::size_t o, std::size_t ia, std::size_t ib) {
                    const T* G = g + o * m * n;
                    const T* B = nb.data.data() + ib * k * n;
                    T* dA = ga.data() + ia * m * k;
                    for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t p = 0; p < k; ++p) {
                            T s = 0;
                            for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[p * n + j];
                            dA[i * k + p] += s;
                        }
                    }
                });
            }
            if (nb.requires_grad) {
                auto& gb = nb.grad_buffer();
                plan.for_each([&](std::size_t o, std::size_t ia, std::size_t ib) {
                    const T* G = g + o * m * n;
                    const T* A = na.data.data() + ia * m * k;
                    T* dB = gb.data() + ib * k * n;
                    gemm_acc(static_cast<long>(k), static_cast<long>(n), static_cast<long>(m), A, 1L,
                             static_cast<long>(k), G, static_cast<long>(n), dB, static_cast<long>(n));
                });
            }
        });
}

template <typename T>
Tensor<T> transpose_last(const Tensor<T>& x) {
    const auto r = x.rank();
    if (r < 2) throw DimensionError("transpose_last: rank < 2 for " + shape_to_string(x.shape()));
    std::vector<std::size_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    std::swap(perm[r - 1], perm[r - 2]);
    return permute(x, perm);
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    if (weight.rank() != 2 || x.rank() < 1 || x.dim(-1) != weight.dim(0)) {
        throw DimensionError("linear: input " + shape_to_string(x.shape()) + " incompatible with weight " +
                             shape_to_string(weight.shape()));
    }
    Tensor<T> y = x.rank() == 1 ? reshape(matmul(reshape(x, {1, x.dim(0)}), weight), {weight.dim(1)})
                                : matmul(x, weight);
    if (bias.defined()) {
        require_vector(bias, weight.dim(1), "linear", "bias");
        y = add(y, bias);
    }
    return y;
}

template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& x) {
    if (x.rank() == 0 || x.dim(-1) == 0) throw DimensionError("softmax_lastdim: empty last dimension");
    const std::size_t n = x.dim(-1);
    const std::size_t rows = x.numel() / n;
    auto src = x.data();
    std::vector<T> out(src.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const T* in = src.data() + r * n;
        T* y = out.data() + r * n;
        T mx = in[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, in[j]);
        T total = 0;
        for (std::size_t j = 0; j < n; ++j) {
            y[j] = std::exp(in[j] - mx);
            total += y[j];
        }
        for (std::size_t j = 0; j < n; ++j) y[j] /= total;
    }
    return detail::make_result<T>("softmax", x.shape(), std::move(out), {&x}, [n, rows](Node<T>& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
            const T* y = self.data.data() + r * n;
            const T* dy = self.grad.data() + r * n;
            T dot = 0;
            for (std::size_t j = 0; j < n; ++j) dot += dy[j] * y[j];
            for (std::size_t j = 0; j < n; ++j) g[r * n + j] += y[j] * (dy[j] - dot);
        }
    });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
    if (!(eps > T(0))) throw ConfigError("layer_norm: eps must be positive");
    if (x.rank() == 0) throw DimensionError("layer_norm: scalar input");
    const std::size_t c = x.dim(-1);
    require_vector(gamma, c, "layer_norm", "gamma");
    require_vector(beta, c, "layer_norm", "beta");
    const std::size_t rows = x.numel() / c;
    auto src = x.data();
    auto gm = gamma.data();
    auto bt = beta.data();
    std::vector<T> out(src.size()), xhat(src.size()), rstd(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* in = src.data() + r * c;
        T mu = 0;
        for (std::size_t j = 0; j < c; ++j) mu += in[j];
        mu /= static_cast<T>(c);
        T var = 0;
        for (std::size_t j = 0; j < c; ++j) var += (in[j] - mu) * (in[j] - mu);
        var /= static_cast<T>(c);
        rstd[r] = T(1) / std::sqrt(var + eps);
        for (std::size_t j = 0; j < c; ++j) {
            xhat[r * c + j] = (in[j] - mu) * rstd[r];
            out[r * c + j] = gm[j] * xhat[r * c + j] + bt[j];
        }
    }
    return detail::make_result<T>(
        "layer_norm", x.shape(), std::move(out), {&x, &gamma, &beta},
        [c, rows, xhat = std::move(xhat), rstd = std::move(rstd)](Node<T>& self) {
            auto& nx = *self.inputs[0];
            auto& ng = *self.inputs[1];
            auto& nb = *self.inputs[2];
            const T* dy = self.grad.data();
            if (ng.requires_grad) {
                auto& gg = ng.grad_buffer();
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t j = 0; j < c; ++j) gg[j] += dy[r * c + j] * xhat[r * c + j];
                }
            }
            if (nb.requires_grad) {
                auto& gb = nb.grad_buffer();
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t j = 0; j < c; ++j) gb[j] += dy[r * c + j];
                }
            }
            if (nx.requires_grad) {
                auto& gx = nx.grad_buffer();
                const T* gm = ng.data.data();
                const T cn = static_cast<T>(c);
                for (std::size_t r = 0; r < rows; ++r) {
                    T sum_g = 0, sum_gx = 0;
                    for (std::size_t j = 0; j < c; ++j) {
                        const T gj = dy[r * c + j] * gm[j];
                        sum_g += gj;
                        sum_gx += gj * xhat[r * c + j];
                    }
                    for (std::size_t j = 0; j < c; ++j) {
                        const T gj = dy[r * c + j] * gm[j];
                        gx[r * c + j] += rstd[r] / cn * (cn * gj - sum_g - xhat[r * c + j] * sum_gx);
                    }
                }
            }
        });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
    constexpr T inv_sqrt2 = T(0.70710678118654752440);
    constexpr T inv_sqrt2pi = T(0.39894228040143267794);
    return unary<T>(
        "gelu", x, [](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); },
        [](T v, T) { return T(0.5) * (T(1) + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(T(-0.5) * v * v); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    return unary<T>(
        "sigmoid", x,
        [](T v) {
            if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
            const T e = std::exp(v);
            return e / (T(1) + e);
        },
        [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
    return unary<T>(
        "leaky_relu", x, [slope](T v) { return v > T(0) ? v : slope * v; },
        [slope](T v, T) { return v > T(0) ? T(1) : slope; });
}

template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride,
                 std::size_t pad) {
    require_rank(x.shape(), 4, "conv3d input");
    require_rank(weight.shape(), 5, "conv3d weight");
    if (stride == 0) throw DimensionError("conv3d: stride must be positive");
    if (weight.dim(1) != x.dim(0)) {
        throw DimensionError("conv3d: weight " + shape_to_string(weight.shape()) + " expects " +
                             std::to_string(weight.dim(1)) + " input channels, input has shape " +
                             shape_to_string(x.shape()));
    }
    ConvGeometry g{};
    g.cin = static_cast<long>(x.dim(0));
    g.cout = static_cast<long>(weight.dim(0));
    g.h = static_cast<long>(x.dim(1));
    g.w = static_cast<long>(x.dim(2));
    g.d = static_cast<long>(x.dim(3));
    g.kh = static_cast<long>(weight.dim(2));
    g.kw = static_cast<long>(weight.dim(3));
    g.kd = static_cast<long>(weight.dim(4));
    g.stride = static_cast<long>(stride);
    g.pad = static_cast<long>(pad);
    const long p2 = 2 * g.pad;
    if (g.h + p2 < g.kh || g.w + p2 < g.kw || g.d + p2 < g.kd) {
        throw DimensionError("conv3d: kernel " + shape_to_string(weight.shape()) + " larger than padded input " +
                             shape_to_string(x.shape()));
    }
    g.oh = (g.h + p2 - g.kh) / g.stride + 1;
    g.ow = (g.w + p2 - g.kw) / g.stride + 1;
    g.od = (g.d + p2 - g.kd) / g.stride + 1;
    if (bias.defined()) require_vector(bias, static_cast<std::size_t>(g.cout), "conv3d", "bias");

    std::vector<T> out(static_cast<std::size_t>(g.cout * g.out_plane()), T(0));
    if (bias.defined()) {
        auto b = bias.data();
        for (long co = 0; co < g.cout; ++co) {
            std::fill_n(out.begin() + co * g.out_plane(), g.out_plane(), b[static_cast<std::size_t>(co)]);
        }
    }
    const T* px = x.data().data();
    const T* pw = weight.data().data();
    const long ktot = g.cin * g.kh * g.kw * g.kd, plane = g.out_plane(), rows = conv_slab_rows(g);
    std::vector<T> col(static_cast<std::size_t>(ktot * rows * g.ow * g.od));
    for (long y0 = 0; y0 < g.oh; y0 += rows) {
        const long y1 = std::min(g.oh, y0 + rows), off = y0 * g.ow * g.od, n = (y1 - y0) * g.ow * g.od;
        im2col_slab(g, px, y0, y1, col.data());
        gemm_acc(g.cout, n, ktot, pw, ktot, 1L, col.data(), n, out.data() + off, plane);
    }
    Shape shape{static_cast<std::size_t>(g.cout), static_cast<std::size_t>(g.oh), static_cast<std::size_t>(g.ow),
                static_cast<std::size_t>(g.od)};
    return detail::make_result<T>("conv3d", std::move(shape), std::move(out), {&x, &weight, &bias},
                                  [g](Node<T>& self) {
                                      auto& nx = *self.inputs[0];
                                      auto& nw = *self.inputs[1];
                                      auto& nb = *self.inputs[2];
                                      const T* dy = self.grad.data();
                                      if (nb.requires_grad) {
                                          auto& gb = nb.grad_buffer();
                                          for (long co = 0; co < g.cout; ++co) {
                                              T acc = 0;
                                              for (long i = 0; i < g.out_plane(); ++i) acc += dy[co * g.out_plane() + i];
                                              gb[static_cast<std::size_t>(co)] += acc;
                                          }
                                      }
                                      const long plane = g.out_plane(), ktot = g.cin * g.kh * g.kw * g.kd;
                                      const long rows = conv_slab_rows(g);
                                      std::vector<T> col(static_cast<std::size_t>(ktot * rows * g.ow * g.od));
                                      for (long y0 = 0; y0 < g.oh; y0 += rows) {
                                          const long y1 = std::min(g.oh, y0 + rows);
                                          const long off = y0 * g.ow * g.od, n = (y1 - y0) * g.ow * g.od;
                                          if (nw.requires_grad) {
                                              auto& gw = nw.grad_buffer();
                                              im2col_slab(g, nx.data.data(), y0, y1, col.data());
                                              for (long co = 0; co < g.cout; ++co) {
                                                  for (long kk = 0; kk < ktot; ++kk) {
                                                      gw[static_cast<std::size_t>(co * ktot + kk)] +=
                                                          dot_lanes(dy + co * plane + off, col.data() + kk * n, n);
                                                  }
                                              }
                                          }
                                          if (nx.requires_grad) {
                                              std::fill_n(col.begin(), ktot * n, T(0));
                                              gemm_acc(ktot, n, g.cout, nw.data.data(), 1L, ktot, dy + off, plane,
                                                       col.data(), n);
                                              col2im_slab(g, col.data(), y0, y1, nx.grad_buffer().data());
                                          }
                                      }
                                  });
}

template <typename T>
Tensor<T> conv_transpose3d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride) {
    require_rank(x.shape(), 4, "conv_transpose3d input");
    require_rank(weight.shape(), 5, "conv_transpose3d weight");
    if (stride != 2 || weight.dim(2) != 2 || weight.dim(3) != 2 || weight.dim(4) != 2) {
        throw DimensionError("conv_transpose3d: only kernel 2 with stride 2 is supported, got kernel " +
                             shape_to_string(weight.shape()) + " stride " + std::to_string(stride));
    }
    if (weight.dim(0) != x.dim(0)) {
        throw DimensionError("conv_transpose3d: weight " + shape_to_string(weight.shape()) +
                             " incompatible with input " + shape_to_string(x.shape()));
    }
    const std::size_t cin = x.dim(0), cout = weight.dim(1);
    const std::size_t h = x.dim(1), w = x.dim(2), d = x.dim(3);
    const std::size_t oh = 2 * h, ow = 2 * w, od = 2 * d;
    const std::size_t in_plane = h * w * d, out_plane = oh * ow * od;
    if (bias.defined()) require_vector(bias, cout, "conv_transpose3d", "bias");

    std::vector<T> out(cout * out_plane, T(0));
    if (bias.defined()) {
        auto b = bias.data();
        for (std::size_t co = 0; co < cout; ++co) std::fill_n(out.begin() + co * out_plane, out_plane, b[co]);
    }
    // Visits (weight index, output row offset, input row offset, kd) for every tap.
    auto visit = [=](auto&& f) {
        for (std::size_t co = 0; co < cout; ++co) {
            for (std::size_t ci = 0; ci < cin; ++ci) {
                for (std::size_t a = 0; a < 2; ++a) {
                    for (std::size_t b = 0; b < 2; ++b) {
                        for (std::size_t c = 0; c < 2; ++c) {
                            const std::size_t widx = (((ci * cout + co) * 2 + a) * 2 + b) * 2 + c;
                            for (std::size_t y = 0; y < h; ++y) {
                                for (std::size_t z = 0; z < w; ++z) {
                                    const std::size_t oo = co * out_plane + ((2 * y + a) * ow + 2 * z + b) * od + c;
                                    const std::size_t io = ci * in_plane + (y * w + z) * d;
                                    f(widx, oo, io);
                                }
                            }
                        }
                    }
                }
            }
        }
    };
    const T* px = x.data().data();
    const T* pw = weight.data().data();
    visit([&](std::size_t widx, std::size_t oo, std::size_t io) {
        const T wv = pw[widx];
        T* orow = out.data() + oo;
        const T* irow = px + io;
        for (std::size_t k = 0; k < d; ++k) orow[2 * k] += wv * irow[k];
    });
    Shape shape{cout, oh, ow, od};
    return detail::make_result<T>(
        "conv_transpose3d", std::move(shape), std::move(out), {&x, &weight, &bias},
        [visit, cout, out_plane, d](Node<T>& self) {
            auto& nx = *self.inputs[0];
            auto& nw = *self.inputs[1];
            auto& nb = *self.inputs[2];
            const T* dy = self.grad.data();
            if (nb.requires_grad) {
                auto& gb = nb.grad_buffer();
                for (std::size_t co = 0; co < cout; ++co) {
                    T acc = 0;
                    for (std::size_t i = 0; i < out_plane; ++i) acc += dy[co * out_plane + i];
                    gb[co] += acc;
                }
            }
            if (nw.requires_grad) {
                auto& gw = nw.grad_buffer();
                const T* px = nx.data.data();
                visit([&](std::size_t widx, std::size_t oo, std::size_t io) {
                    T acc = 0;
                    for (std::size_t k = 0; k < d; ++k) acc += dy[oo + 2 * k] * px[io + k];
                    gw[widx] += acc;
                });
            }
            if (nx.requires_grad) {
                auto& gx = nx.grad_buffer();
                const T* pw = nw.data.data();
                visit([&](std::size_t widx, std::size_t oo, std::size_t io) {
                    const T wv = pw[widx];
                    for (std::size_t k = 0; k < d; ++k) gx[io + k] += wv * dy[oo + 2 * k];
                });
            }
        });
}

template <typename T>
Tensor<T> instance_norm3d(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
    if (!(eps > T(0))) throw ConfigError("instance_norm3d: eps must be positive");
    require_rank(x.shape(), 4, "instance_norm3d");
    const std::size_t c = x.dim(0);
    const std::size_t s = x.numel() / c;
    require_vector(gamma, c, "instance_norm3d", "gamma");
    require_vector(beta, c, "instance_norm3d", "beta");
    auto src = x.data();
    auto gm = gamma.data();
    auto bt = beta.data();
    std::vector<T> out(src.size()), xhat(src.size()), rstd(c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        const T* in = src.data() + ch * s;
        T mu = 0;
        for (std::size_t i = 0; i < s; ++i) mu += in[i];
        mu /= static_cast<T>(s);
        T var = 0;
        for (std::size_t i = 0; i < s; ++i) var += (in[i] - mu) * (in[i] - mu);
        var /= static_cast<T>(s);
        rstd[ch] = T(1) / std::sqrt(var + eps);
        for (std::size_t i = 0; i < s; ++i) {
            xhat[ch * s + i] = (in[i] - mu) * rstd[ch];
            out[ch * s + i] = gm[ch] * xhat[ch * s + i] + bt[ch];
        }
    }
    return detail::make_result<T>(
        "instance_norm3d", x.shape(), std::move(out), {&x, &gamma, &beta},
        [c, s, xhat = std::move(xhat), rstd = std::move(rstd)](Node<T>& self) {
            auto& nx = *self.inputs[0];
            auto& ng = *self.inputs[1];
            auto& nb = *self.inputs[2];
            const T* dy = self.grad.data();
            for (std::size_t ch = 0; ch < c; ++ch) {
                const T* g = dy + ch * s;
                const T* xh = xhat.data() + ch * s;
                T sum_g = 0, sum_gx = 0;
                for (std::size_t i = 0; i < s; ++i) {
                    sum_g += g[i];
                    sum_gx += g[i] * xh[i];
                }
                if (ng.requires_grad) ng.grad_buffer()[ch] += sum_gx;
                if (nb.requires_grad) nb.grad_buffer()[ch] += sum_g;
                if (nx.requires_grad) {
                    auto& gx = nx.grad_buffer();
                    const T gm = ng.data[ch];
                    const T sn = static_cast<T>(s);
                    for (std::size_t i = 0; i < s; ++i) {
                        gx[ch * s + i] += gm * rstd[ch] / sn * (sn * g[i] - sum_g - xh[i] * sum_gx);
                    }
                }
            }
        });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " + shape_to_string(shape));
    }
    std::vector<T> out(x.data().begin(), x.data().end());
    return detail::make_result<T>("reshape", std::move(shape), std::move(out), {&x}, [](Node<T>& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& perm) {
    const auto& s = x.shape();
    const std::size_t r = s.size();
    std::vector<bool> seen(r, false);
    if (perm.size() != r) throw DimensionError("permute: permutation rank differs from " + shape_to_string(s));
    for (auto p : perm) {
        if (p >= r || seen[p]) throw DimensionError("permute: invalid permutation for " + shape_to_string(s));
        seen[p] = true;
    }
    const auto in_strides = contiguous_strides(s);
    Shape out_shape(r);
    std::vector<std::size_t> step(r);
    for (std::size_t i = 0; i < r; ++i) {
        out_shape[i] = s[perm[i]];
        step[i] = in_strides[perm[i]];
    }
    const std::size_t n = x.numel();
    std::vector<std::size_t> source(n);
    std::vector<std::size_t> idx(r, 0);
    std::size_t off = 0;
    for (std::size_t o = 0; o < n; ++o) {
        source[o] = off;
        for (std::size_t d = r; d-- > 0;) {
            ++idx[d];
            off += step[d];
            if (idx[d] < out_shape[d]) break;
            off -= step[d] * out_shape[d];
            idx[d] = 0;
        }
    }
    return gather_impl<T>("permute", x, std::move(out_shape), std::move(source));
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
    if (parts.empty()) throw DimensionError("concat: no inputs");
    const Shape& first = parts[0].shape();
    if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_to_string(first));
    Shape out_shape = first;
    out_shape[axis] = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        bool ok = s.size() == first.size();
        for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == first[i];
        if (!ok) {
            throw DimensionError("concat: shape " + shape_to_string(s) + " incompatible with " +
                                 shape_to_string(first) + " along axis " + std::to_string(axis));
        }
        out_shape[axis] += s[axis];
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
    for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];
    std::vector<std::size_t> block(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) block[k] = parts[k].dim(static_cast<std::ptrdiff_t>(axis)) * inner;
    const std::size_t row = out_shape[axis] * inner;

    std::vector<T> out(shape_numel(out_shape));
    for (std::size_t o = 0; o < outer; ++o) {
        std::size_t pos = o * row;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            auto src = parts[k].data();
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * block[k]), block[k], out.begin() + static_cast<std::ptrdiff_t>(pos));
            pos += block[k];
        }
    }
    std::vector<const Tensor<T>*> inputs;
    for (const auto& p : parts) inputs.push_back(&p);
    return detail::make_result<T>("concat", std::move(out_shape), std::move(out), inputs,
                                  [outer, row, block](Node<T>& self) {
                                      for (std::size_t o = 0; o < outer; ++o) {
                                          std::size_t pos = o * row;
                                          for (std::size_t k = 0; k < block.size(); ++k) {
                                              auto& in = *self.inputs[k];
                                              if (in.requires_grad) {
                                                  auto& g = in.grad_buffer();
                                                  for (std::size_t i = 0; i < block[k]; ++i) g[o * block[k] + i] += self.grad[pos + i];
                                              }
                                              pos += block[k];
                                          }
                                      }
                                  });
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t start, std::size_t length) {
    const auto& s = x.shape();
    if (axis >= s.size() || length == 0 || start + length > s[axis]) {
        throw DimensionError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + length) +
                             ") invalid on axis " + std::to_string(axis) + " of " + shape_to_string(s));
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    Shape out_shape = s;
    out_shape[axis] = length;
    std::vector<std::size_t> source;
    source.reserve(outer * length * inner);
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t base = (o * s[axis] + start) * inner;
        for (std::size_t i = 0; i < length * inner; ++i) source.push_back(base + i);
    }
    return gather_impl<T>("slice", x, std::move(out_shape), std::move(source));
}

template <typename T>
Tensor<T> roll(const Tensor<T>& x, const std::vector<std::ptrdiff_t>& shifts) {
    const auto& s = x.shape();
    if (shifts.size() > s.size()) throw DimensionError("roll: more shifts than axes for " + shape_to_string(s));
    const auto strides = contiguous_strides(s);
    const std::size_t r = s.size();
    const std::size_t n = x.numel();
    std::vector<std::size_t> source(n);
    std::vector<std::size_t> idx(r, 0);
    for (std::size_t o = 0; o < n; ++o) {
        std::size_t off = 0;
        for (std::size_t d = 0; d < r; ++d) {
            std::size_t i = idx[d];
            if (d < shifts.size()) {
                const auto len = static_cast<std::ptrdiff_t>(s[d]);
                auto shifted = (static_cast<std::ptrdiff_t>(i) - shifts[d]) % len;
                if (shifted < 0) shifted += len;
                i = static_cast<std::size_t>(shifted);
            }
            off += i * strides[d];
        }
        source[o] = off;
        for (std::size_t d = r; d-- > 0;) {
            if (++idx[d] < s[d]) break;
            idx[d] = 0;
        }
    }
    return gather_impl<T>("roll", x, s, std::move(source));
}

template <typename T>
Tensor<T> pad_end(const Tensor<T>& x, const std::vector<std::size_t>& pads) {
    const auto& s = x.shape();
    if (pads.size() > s.size()) throw DimensionError("pad_end: more pads than axes for " + shape_to_string(s));
    Shape out_shape = s;
    for (std::size_t i = 0; i < pads.size(); ++i) out_shape[i] += pads[i];
    if (out_shape == s) return x;
    const auto strides = contiguous_strides(s);
    const std::size_t r = s.size();
    const std::size_t n = shape_numel(out_shape);
    std::vector<std::size_t> source(n);
    std::vector<std::size_t> idx(r, 0);
    for (std::size_t o = 0; o < n; ++o) {
        std::size_t off = 0;
        bool inside = true;
        for (std::size_t d = 0; d < r; ++d) {
            if (idx[d] >= s[d]) inside = false;
            off += idx[d] * strides[d];
        }
        source[o] = inside ? off : kNoSource;
        for (std::size_t d = r; d-- > 0;) {
            if (++idx[d] < out_shape[d]) break;
            idx[d] = 0;
        }
    }
    return gather_impl<T>("pad_end", x, std::move(out_shape), std::move(source));
}

template <typename T>
Tensor<T> gather(const Tensor<T>& x, Shape out_shape, std::vector<std::size_t> source) {
    if (shape_numel(out_shape) != source.size()) throw DimensionError("gather: index count differs from output shape");
    for (auto s : source) {
        if (s != kNoSource && s >= x.numel()) throw DimensionError("gather: source index out of range");
    }
    return gather_impl<T>("gather", x, std::move(out_shape), std::move(source));
}

template <typename T>
Tensor<T> index_select_rows(const Tensor<T>& table, std::span<const std::size_t> indices) {
    require_rank(table.shape(), 2, "index_select_rows");
    const std::size_t rows = table.dim(0), cols = table.dim(1);
    std::vector<std::size_t> source;
    source.reserve(indices.size() * cols);
    for (auto r : indices) {
        if (r >= rows) throw DimensionError("index_select_rows: row index out of range");
        for (std::size_t c = 0; c < cols; ++c) source.push_back(r * cols + c);
    }
    return gather_impl<T>("index_select_rows", table, Shape{indices.size(), cols}, std::move(source));
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
    T acc = 0;
    for (T v : x.data()) acc += v;
    return detail::make_result<T>("sum", Shape{1}, std::vector<T>{acc}, {&x}, [](Node<T>& self) {
        auto& in = *self.inputs[0];
        if (!in.requires_grad) return;
        auto& g = in.grad_buffer();
        for (auto& v : g) v += self.grad[0];
    });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
    return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& target) {
    require_same_shape(logits.shape(), target.shape(), "bce_with_logits");
    auto z = logits.data();
    auto t = target.data();
    const T n = static_cast<T>(z.size());
    T acc = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        acc += std::max(z[i], T(0)) - z[i] * t[i] + std::log1p(std::exp(-std::abs(z[i])));
    }
    return detail::make_result<T>("bce_with_logits", Shape{1}, std::vector<T>{acc / n}, {&logits, &target},
                                  [n](Node<T>& self) {
                                      auto& nz = *self.inputs[0];
                                      const auto& nt = *self.inputs[1];
                                      if (!nz.requires_grad) return;
                                      auto& g = nz.grad_buffer();
                                      const T scale = self.grad[0] / n;
                                      for (std::size_t i = 0; i < g.size(); ++i) {
                                          const T v = nz.data[i];
                                          const T p = v >= T(0) ? T(1) / (T(1) + std::exp(-v)) : std::exp(v) / (T(1) + std::exp(v));
                                          g[i] += scale * (p - nt.data[i]);
                                      }
                                  });
}

template <typename T>
Tensor<T> soft_dice_loss(const Tensor<T>& prob, const Tensor<T>& target, T smooth) {
    require_same_shape(prob.shape(), target.shape(), "soft_dice_loss");
    auto p = prob.data();
    auto t = target.data();
    T inter = 0, total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        inter += p[i] * t[i];
        total += p[i] + t[i];
    }
    const T num = T(2) * inter + smooth;
    const T den = total + smooth;
    return detail::make_result<T>("soft_dice_loss", Shape{1}, std::vector<T>{T(1) - num / den}, {&prob, &target},
                                  [num, den](Node<T>& self) {
                                      auto& np = *self.inputs[0];
                                      const auto& nt = *self.inputs[1];
                                      if (!np.requires_grad) return;
                                      auto& g = np.grad_buffer();
                                      const T upstream = self.grad[0];
                                      for (std::size_t i = 0; i < g.size(); ++i) {
                                          g[i] -= upstream * (T(2) * nt.data[i] * den - num) / (den * den);
                                      }
                                  });
}

#define SWINCROSS_INSTANTIATE(T)                                                                              \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                            \
    template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                                            \
    template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                            \
    template Tensor<T> scale<T>(const Tensor<T>&, T);                                                         \
    template Tensor<T> add_scalar<T>(const Tensor<T>&, T);                                                    \
    template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                                         \
    template Tensor<T> transpose_last<T>(const Tensor<T>&);                                                   \
    template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                       \
    template Tensor<T> softmax_lastdim<T>(const Tensor<T>&);                                                  \
    template Tensor<T> layer_norm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);                \
    template Tensor<T> gelu<T>(const Tensor<T>&);                                                             \
    template Tensor<T> sigmoid<T>(const Tensor<T>&);                                                          \
    template Tensor<T> leaky_relu<T>(const Tensor<T>&, T);                                                    \
    template Tensor<T> conv3d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t); \
    template Tensor<T> conv_transpose3d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t);    \
    template Tensor<T> instance_norm3d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);           \
    template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                                                   \
    template Tensor<T> permute<T>(const Tensor<T>&, const std::vector<std::size_t>&);                         \
    template Tensor<T> concat<T>(const std::vector<Tensor<T>>&, std::size_t);                                 \
    template Tensor<T> slice<T>(const Tensor<T>&, std::size_t, std::size_t, std::size_t);                     \
    template Tensor<T> roll<T>(const Tensor<T>&, const std::vector<std::ptrdiff_t>&);                         \
    template Tensor<T> pad_end<T>(const Tensor<T>&, const std::vector<std::size_t>&);                         \
    template Tensor<T> gather<T>(const Tensor<T>&, Shape, std::vector<std::size_t>);                          \
    template Tensor<T> index_select_rows<T>(const Tensor<T>&, std::span<const std::size_t>);                  \
    template Tensor<T> sum<T>(const Tensor<T>&);                                                              \
    template Tensor<T> mean<T>(const Tensor<T>&);                                                             \
    template Tensor<T> bce_with_logits<T>(const Tensor<T>&, const Tensor<T>&);                                \
    template Tensor<T> soft_dice_loss<T>(const Tensor<T>&, const Tensor<T>&, T);

SWINCROSS_INSTANTIATE(float)
SWINCROSS_INSTANTIATE(double)

#undef SWINCROSS_INSTANTIATE

}  // namespace swincross
