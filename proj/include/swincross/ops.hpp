#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "swincross/tensor.hpp"

// Differentiable operators. Every operator is a pure function of its inputs,
// sums in a fixed left-to-right order over flat indices, and records a
// backward closure when any input requires grad.
namespace swincross {

// Elementwise binary ops with numpy-style broadcasting (shapes aligned right).
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T> Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) { return add(a, b); }
template <typename T> Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) { return sub(a, b); }
template <typename T> Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) { return mul(a, b); }

template <typename T> Tensor<T> scale(const Tensor<T>& x, T factor);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& x, T value);

// a[..., m, k] x b[..., k, n] -> [..., m, n]; batch dims broadcast.
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> transpose_last(const Tensor<T>& x);
// x[..., in] * weight[in, out] + bias[out]; bias may be undefined.
template <typename T> Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T> Tensor<T> softmax_lastdim(const Tensor<T>& x);
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps);

// Exact (erf) GELU.
template <typename T> Tensor<T> gelu(const Tensor<T>& x);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T> Tensor<T> leaky_relu(const Tensor<T>& x, T slope);

// x[C_in, H, W, D], weight[C_out, C_in, kh, kw, kd], bias[C_out] or undefined.
template <typename T>
Tensor<T> conv3d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride,
                 std::size_t pad);
// x[C_in, H, W, D], weight[C_in, C_out, 2, 2, 2]; only stride 2 with kernel 2 is supported.
template <typename T>
Tensor<T> conv_transpose3d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                           std::size_t stride = 2);
// Per-channel normalization over the spatial extent of x[C, H, W, D].
template <typename T>
Tensor<T> instance_norm3d(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps);

template <typename T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);
template <typename T> Tensor<T> permute(const Tensor<T>& x, const std::vector<std::size_t>& perm);
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);
template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t start, std::size_t length);
// out[i] = x[(i - shift) mod n] along each of the leading shifts.size() axes.
template <typename T> Tensor<T> roll(const Tensor<T>& x, const std::vector<std::ptrdiff_t>& shifts);
// Zero-pads the high end of each leading axis.
template <typename T> Tensor<T> pad_end(const Tensor<T>& x, const std::vector<std::size_t>& pads);
// out[i] = x.flat[source[i]]; gradients scatter-add back.
template <typename T>
Tensor<T> gather(const Tensor<T>& x, Shape out_shape, std::vector<std::size_t> source);
// Rows of table[R, H] selected by indices -> [indices.size(), H].
template <typename T>
Tensor<T> index_select_rows(const Tensor<T>& table, std::span<const std::size_t> indices);

template <typename T> Tensor<T> sum(const Tensor<T>& x);
template <typename T> Tensor<T> mean(const Tensor<T>& x);

// Mean binary cross-entropy on logits; target is treated as a constant.
template <typename T> Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& target);
// 1 - (2 sum(p t) + smooth) / (sum(p) + sum(t) + smooth); target is a constant.
template <typename T>
Tensor<T> soft_dice_loss(const Tensor<T>& prob, const Tensor<T>& target, T smooth = T(1));

}  // namespace swincross
