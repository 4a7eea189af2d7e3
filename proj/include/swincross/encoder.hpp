#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "swincross/attention.hpp"
#include "swincross/config.hpp"
#include "swincross/parameters.hpp"
#include "swincross/windowing.hpp"

namespace swincross {

template <typename T>
struct LinearParams {
    Tensor<T> weight;  // [in, out]
    Tensor<T> bias;    // [out] or undefined
};

template <typename T>
struct NormParams {
    Tensor<T> gamma, beta;
};

template <typename T>
struct ConvParams {
    Tensor<T> weight;  // [out, in, k, k, k]
    Tensor<T> bias;    // [out] or undefined
};

// One pre-norm transformer layer: x + Attn(LN(x)), then x + MLP(LN(x)).
template <typename T>
struct TransformerLayerParams {
    NormParams<T> norm1;
    AttentionParams<T> attn;
    NormParams<T> norm2;
    LinearParams<T> fc1, fc2;
};

// Windowed layer followed by its shifted-window partner.
template <typename T>
struct BlockPairParams {
    TransformerLayerParams<T> windowed, shifted;
};

template <typename T>
struct PatchMergingParams {
    NormParams<T> norm;       // over 8C
    LinearParams<T> reduction;  // [8C, 2C], no bias
};

template <typename T>
struct BranchParams {
    ConvParams<T> patch_embed;
    std::array<PatchMergingParams<T>, 4> merge;
    std::array<std::vector<BlockPairParams<T>>, 4> blocks;
};

// Two branches in cross-modal mode, one stream in baseline mode.
template <typename T>
struct EncoderParams {
    std::vector<BranchParams<T>> branches;
};

template <typename T>
EncoderParams<T> register_encoder(const SwinCrossConfig& cfg, ParameterSet<T>& params,
                                  const std::string& prefix = "encoder");

// Per-stage grids, one per branch.
template <typename T>
struct BranchState {
    std::vector<Tensor<T>> grids;
    std::size_t stage = 0;  // index of the next stage to run
};

template <typename T>
struct StageResult {
    BranchState<T> state;
    Tensor<T> skip;
};

// Six levels, channel-last: raw input [H,W,D,2], embedding [H/2,..,C], then
// the four stage skips [H/2^i, .., C*2^(i-1)] for i = 2..5.
template <typename T>
struct FeaturePyramid {
    std::array<Tensor<T>, 6> levels;
    Resolution input_resolution{};  // before padding
};

// volume [C_in, H, W, D] -> grid [H/2, W/2, D/2, C] via a stride-2 kernel-2 convolution.
template <typename T>
Tensor<T> patch_embed(const Tensor<T>& volume, const ConvParams<T>& p);

// Concatenates each 2x2x2 neighbourhood (channel index (dh*4 + dw*2 + dd)*C + c),
// layer-normalizes and projects 8C -> 2C.
template <typename T>
Tensor<T> patch_merging(const Tensor<T>& grid, const PatchMergingParams<T>& p);

template <typename T>
Tensor<T> mlp(const Tensor<T>& x, const LinearParams<T>& fc1, const LinearParams<T>& fc2);

template <typename T>
Tensor<T> self_attention_layer(const Tensor<T>& grid, const TransformerLayerParams<T>& p, const SwinCrossConfig& cfg,
                               bool shifted);

template <typename T>
std::pair<Tensor<T>, Tensor<T>> cross_attention_layer(const Tensor<T>& g1, const Tensor<T>& g2,
                                                      const TransformerLayerParams<T>& p1,
                                                      const TransformerLayerParams<T>& p2,
                                                      const SwinCrossConfig& cfg, bool shifted);

template <typename T>
Tensor<T> self_block_pair(const Tensor<T>& grid, const BlockPairParams<T>& p, const SwinCrossConfig& cfg);

template <typename T>
std::pair<Tensor<T>, Tensor<T>> cma_block_pair(const Tensor<T>& g1, const Tensor<T>& g2, const BlockPairParams<T>& p1,
                                               const BlockPairParams<T>& p2, const SwinCrossConfig& cfg);

// Cross-modal: x_k = merge(in_k), y = blocks(x), out_k = x_k + y_k, skip = y_1 + y_2.
// Baseline: x = merge(in), out = skip = blocks(x).
template <typename T>
StageResult<T> run_stage(const BranchState<T>& state, const EncoderParams<T>& params, const SwinCrossConfig& cfg);

// Pads the volume [H,W,D,2] with zeros to a multiple of cfg.volume_multiple()
// and builds the feature pyramid.
template <typename T>
FeaturePyramid<T> encode(const Tensor<T>& volume, const EncoderParams<T>& params, const SwinCrossConfig& cfg);

}  // namespace swincross
