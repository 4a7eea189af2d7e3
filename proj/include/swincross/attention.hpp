#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "swincross/tensor.hpp"
#include "swincross/windowing.hpp"

namespace swincross {

// Weights of one multi-head window attention. The query/key/value projections
// are fused into one [C, 3C] matrix whose column blocks are Q | K | V; inside
// each block, head h owns columns [h*dk, (h+1)*dk). Keys carry no bias: a key
// bias shifts every score of a query row by the same amount and cancels in the
// softmax.
template <typename T>
struct AttentionParams {
    std::size_t heads = 1;
    std::size_t window_size = 1;  // extent M the bias table was sized for
    Tensor<T> qkv_weight;         // [C, 3C]
    Tensor<T> q_bias;             // [C] or undefined
    Tensor<T> v_bias;             // [C] or undefined
    Tensor<T> proj_weight;        // [C, C]
    Tensor<T> proj_bias;          // [C] or undefined
    Tensor<T> rel_bias_table;     // [(2M-1)^3, heads] or undefined

    std::size_t dim() const { return qkv_weight.dim(0); }
    std::size_t head_dim() const { return dim() / heads; }
};

template <typename T>
struct QKV {
    Tensor<T> q, k, v;  // each [n_windows, heads, N, dk]
};

// Flat offsets into a (2M-1)^3 table for every token pair (i, j) of a window,
// row-major [N, N]. The index depends only on the 3D offset pos(i) - pos(j).
std::vector<std::size_t> relative_position_index(const Resolution& window, std::size_t table_extent);

// bias[h, i, j] = table[index(i, j), h]; shape [heads, N, N].
template <typename T>
Tensor<T> relative_position_bias(const AttentionParams<T>& p, const Resolution& window);

template <typename T>
QKV<T> qkv_project(const Tensor<T>& tokens, const AttentionParams<T>& p);

// softmax(q k^T / sqrt(dk) + bias + mask) v with heads merged back to
// [n_windows, N, heads*dk]. bias is [heads, N, N], mask [n_windows, N, N];
// either may be undefined. When weights is non-null it receives the
// [n_windows, heads, N, N] attention matrix.
template <typename T>
Tensor<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, const Tensor<T>& bias,
                               const Tensor<T>& mask, Tensor<T>* weights = nullptr);

// W-MSA, or SW-MSA when a shift mask is given. The window batch must already
// be shifted for the masked variant.
template <typename T>
WindowBatch<T> window_self_attention(const WindowBatch<T>& s, const AttentionParams<T>& p, const Tensor<T>& mask,
                                     Tensor<T>* weights = nullptr);

// Cross-modal window attention. Queries come from the modality itself and keys
// from the other one; values come from the query's own modality unless
// values_from_other_modality is set.
template <typename T>
std::pair<WindowBatch<T>, WindowBatch<T>> cross_modal_window_attention(
    const WindowBatch<T>& s1, const WindowBatch<T>& s2, const AttentionParams<T>& p1, const AttentionParams<T>& p2,
    const Tensor<T>& mask, bool values_from_other_modality = false, Tensor<T>* weights1 = nullptr,
    Tensor<T>* weights2 = nullptr);

}  // namespace swincross
