#pragma once

#include <array>
#include <string>

#include "swincross/encoder.hpp"

namespace swincross {

// conv3x3 -> instance norm -> leaky ReLU, twice, plus a shortcut that is the
// identity when channel counts match and a 1x1x1 convolution otherwise.
// The 3x3 convolutions carry no bias: instance norm would cancel it.
template <typename T>
struct ResidualBlockParams {
    ConvParams<T> conv1;
    NormParams<T> norm1;
    ConvParams<T> conv2;
    NormParams<T> norm2;
    ConvParams<T> shortcut;  // weight undefined for the identity shortcut
};

// Level i works at the resolution of pyramid level i with channels[i]
// channels: [modalities, C, 2C, 4C, 8C, 16C].
template <typename T>
struct DecoderParams {
    std::array<std::size_t, 6> channels{};
    std::array<ResidualBlockParams<T>, 6> skip_blocks;
    std::array<ConvParams<T>, 5> up;  // up[i]: level i+1 -> level i, weight [c(i+1), c(i), 2, 2, 2]
    std::array<ResidualBlockParams<T>, 5> post_blocks;  // 2 c(i) -> c(i) after concatenation
    ConvParams<T> head;  // [out_channels, c0, 1, 1, 1]
};

constexpr double kLeakySlope = 0.01;

template <typename T>
ResidualBlockParams<T> register_residual_block(ParameterSet<T>& ps, const std::string& name, std::size_t in,
                                               std::size_t out);

template <typename T>
DecoderParams<T> register_decoder(const SwinCrossConfig& cfg, ParameterSet<T>& params,
                                  const std::string& prefix = "decoder");

// x [C_in, H, W, D] -> [C_out, H, W, D].
template <typename T>
Tensor<T> residual_block(const Tensor<T>& x, const ResidualBlockParams<T>& p);

// Pre-sigmoid output [H, W, D, 1] cropped to pyramid.input_resolution.
template <typename T>
Tensor<T> decode_logits(const FeaturePyramid<T>& pyramid, const DecoderParams<T>& params);

// sigmoid(decode_logits); values in (0, 1).
template <typename T>
Tensor<T> decode(const FeaturePyramid<T>& pyramid, const DecoderParams<T>& params);

}  // namespace swincross
