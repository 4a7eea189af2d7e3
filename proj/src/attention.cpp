#include "swincross/attention.hpp"

#include <cmath>
#include <string>

#include "swincross/ops.hpp"

namespace swincross {

std::vector<std::size_t> relative_position_index(const Resolution& window, std::size_t table_extent) {
    for (int i = 0; i < 3; ++i) {
        if (window[i] == 0 || window[i] > table_extent) {
            throw DimensionError("relative_position_index: window extent " + std::to_string(window[i]) +
                                 " exceeds bias table extent " + std::to_string(table_extent));
        }
    }
    const std::size_t n = window[0] * window[1] * window[2];
    const std::size_t span = 2 * table_extent - 1;
    std::vector<std::array<std::size_t, 3>> pos;
    pos.reserve(n);
    for (std::size_t h = 0; h < window[0]; ++h)
        for (std::size_t w = 0; w < window[1]; ++w)
            for (std::size_t d = 0; d < window[2]; ++d) pos.push_back({h, w, d});
    std::vector<std::size_t> index(n * n);
    const std::size_t off = table_extent - 1;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t rh = pos[i][0] + off - pos[j][0];
            const std::size_t rw = pos[i][1] + off - pos[j][1];
            const std::size_t rd = pos[i][2] + off - pos[j][2];
            index[i * n + j] = (rh * span + rw) * span + rd;
        }
    }
    return index;
}

template <typename T>
Tensor<T> relative_position_bias(const AttentionParams<T>& p, const Resolution& window) {
    const std::size_t span = 2 * p.window_size - 1;
    const auto& table = p.rel_bias_table;
    if (!table.defined() || table.rank() != 2 || table.dim(0) != span * span * span || table.dim(1) != p.heads) {
        throw DimensionError("relative_position_bias: table must have shape (" + std::to_string(span * span * span) +
                             "," + std::to_string(p.heads) + ")");
    }
    const auto index = relative_position_index(window, p.window_size);
    const std::size_t nn = index.size();
    const std::size_t n = window[0] * window[1] * window[2];
    std::vector<std::size_t> source(p.heads * nn);
    for (std::size_t h = 0; h < p.heads; ++h) {
        for (std::size_t ij = 0; ij < nn; ++ij) source[h * nn + ij] = index[ij] * p.heads + h;
    }
    return gather(table, {p.heads, n, n}, std::move(source));
}

template <typename T>
QKV<T> qkv_project(const Tensor<T>& tokens, const AttentionParams<T>& p) {
    if (tokens.rank() != 3) throw DimensionError("qkv_project: tokens must be [n_windows, N, C], got " + shape_to_string(tokens.shape()));
    const std::size_t c = p.dim();
    if (tokens.dim(2) != c) {
        throw DimensionError("qkv_project: token channels " + std::to_string(tokens.dim(2)) +
                             " differ from projection input " + std::to_string(c));
    }
    if (p.heads == 0 || c % p.heads != 0) {
        throw ConfigError("qkv_project: " + std::to_string(p.heads) + " heads do not divide " + std::to_string(c));
    }
    const std::size_t nw = tokens.dim(0), n = tokens.dim(1), dk = c / p.heads;
    auto x = linear(tokens, p.qkv_weight, Tensor<T>());
    x = reshape(x, {nw, n, 3, p.heads, dk});
    x = permute(x, {2, 0, 3, 1, 4});
    QKV<T> out;
    out.q = reshape(slice(x, 0, 0, 1), {nw, p.heads, n, dk});
    out.k = reshape(slice(x, 0, 1, 1), {nw, p.heads, n, dk});
    out.v = reshape(slice(x, 0, 2, 1), {nw, p.heads, n, dk});
    if (p.q_bias.defined()) out.q = add(out.q, reshape(p.q_bias, {p.heads, 1, dk}));
    if (p.v_bias.defined()) out.v = add(out.v, reshape(p.v_bias, {p.heads, 1, dk}));
    return out;
}

template <typename T>
Tensor<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, const Tensor<T>& bias,
                               const Tensor<T>& mask, Tensor<T>* weights) {
    if (q.rank() != 4 || q.shape() != k.shape() || q.shape() != v.shape()) {
        throw DimensionError("scaled_dot_attention: q, k, v must share shape [n_windows, heads, N, dk]");
    }
    const std::size_t nw = q.dim(0), heads = q.dim(1), n = q.dim(2), dk = q.dim(3);
    auto scores = scale(matmul(q, transpose_last(k)), T(1) / std::sqrt(static_cast<T>(dk)));
    if (bias.defined()) {
        if (bias.shape() != Shape{heads, n, n}) {
            throw DimensionError("scaled_dot_attention: bias shape " + shape_to_string(bias.shape()) + " expected " +
                                 shape_to_string({heads, n, n}));
        }
        scores = add(scores, bias);
    }
    if (mask.defined()) {
        if (mask.shape() != Shape{nw, n, n}) {
            throw DimensionError("scaled_dot_attention: mask shape " + shape_to_string(mask.shape()) + " expected " +
                                 shape_to_string({nw, n, n}));
        }
        scores = add(scores, reshape(mask, {nw, 1, n, n}));
    }
    auto attn = softmax_lastdim(scores);
    if (weights != nullptr) *weights = attn;
    auto out = matmul(attn, v);
    out = permute(out, {0, 2, 1, 3});
    return reshape(out, {nw, n, heads * dk});
}

namespace {

template <typename T>
Tensor<T> window_bias(const AttentionParams<T>& p, const Resolution& window) {
    return p.rel_bias_table.defined() ? relative_position_bias(p, window) : Tensor<T>();
}

template <typename T>
WindowBatch<T> with_tokens(const WindowBatch<T>& like, Tensor<T> tokens) {
    WindowBatch<T> out;
    out.tokens = std::move(tokens);
    out.window = like.window;
    out.source_resolution = like.source_resolution;
    return out;
}

}  // namespace

template <typename T>
WindowBatch<T> window_self_attention(const WindowBatch<T>& s, const AttentionParams<T>& p, const Tensor<T>& mask,
                                     Tensor<T>* weights) {
    const auto qkv = qkv_project(s.tokens, p);
    auto out = scaled_dot_attention(qkv.q, qkv.k, qkv.v, window_bias(p, s.window), mask, weights);
    return with_tokens(s, linear(out, p.proj_weight, p.proj_bias));
}

template <typename T>
std::pair<WindowBatch<T>, WindowBatch<T>> cross_modal_window_attention(
    const WindowBatch<T>& s1, const WindowBatch<T>& s2, const AttentionParams<T>& p1, const AttentionParams<T>& p2,
    const Tensor<T>& mask, bool values_from_other_modality, Tensor<T>* weights1, Tensor<T>* weights2) {
    if (s1.tokens.shape() != s2.tokens.shape() || s1.window != s2.window) {
        throw DimensionError("cross_modal_window_attention: modality shapes differ: " +
                             shape_to_string(s1.tokens.shape()) + " vs " + shape_to_string(s2.tokens.shape()));
    }
    const auto a = qkv_project(s1.tokens, p1);
    const auto b = qkv_project(s2.tokens, p2);
    const auto& v1 = values_from_other_modality ? b.v : a.v;
    const auto& v2 = values_from_other_modality ? a.v : b.v;
    auto o1 = scaled_dot_attention(a.q, b.k, v1, window_bias(p1, s1.window), mask, weights1);
    auto o2 = scaled_dot_attention(b.q, a.k, v2, window_bias(p2, s2.window), mask, weights2);
    return {with_tokens(s1, linear(o1, p1.proj_weight, p1.proj_bias)),
            with_tokens(s2, linear(o2, p2.proj_weight, p2.proj_bias))};
}

#define SWINCROSS_INSTANTIATE(T)                                                                                     \
    template Tensor<T> relative_position_bias<T>(const AttentionParams<T>&, const Resolution&);                      \
    template QKV<T> qkv_project<T>(const Tensor<T>&, const AttentionParams<T>&);                                     \
    template Tensor<T> scaled_dot_attention<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                 \
                                               const Tensor<T>&, const Tensor<T>&, Tensor<T>*);                      \
    template WindowBatch<T> window_self_attention<T>(const WindowBatch<T>&, const AttentionParams<T>&,               \
                                                     const Tensor<T>&, Tensor<T>*);                                  \
    template std::pair<WindowBatch<T>, WindowBatch<T>> cross_modal_window_attention<T>(                              \
        const WindowBatch<T>&, const WindowBatch<T>&, const AttentionParams<T>&, const AttentionParams<T>&,          \
        const Tensor<T>&, bool, Tensor<T>*, Tensor<T>*);

SWINCROSS_INSTANTIATE(float)
SWINCROSS_INSTANTIATE(double)

#undef SWINCROSS_INSTANTIATE

}  // namespace swincross
