#include "swincross/encoder.hpp"

#include <string>

#include "swincross/ops.hpp"

namespace swincross {

namespace {

constexpr double kLayerNormEps = 1e-5;

template <typename T>
NormParams<T> add_norm(ParameterSet<T>& ps, const std::string& name, std::size_t dim) {
    return {ps.add(name + ".gamma", {dim}, Init::ones), ps.add(name + ".beta", {dim}, Init::zeros)};
}

template <typename T>
LinearParams<T> add_linear(ParameterSet<T>& ps, const std::string& name, std::size_t in, std::size_t out, bool bias) {
    LinearParams<T> p;
    p.weight = ps.add(name + ".weight", {in, out}, Init::trunc_normal);
    if (bias) p.bias = ps.add(name + ".bias", {out}, Init::zeros);
    return p;
}

template <typename T>
TransformerLayerParams<T> add_layer(ParameterSet<T>& ps, const std::string& name, std::size_t dim, std::size_t heads,
                                    const SwinCrossConfig& cfg) {
    TransformerLayerParams<T> p;
    p.norm1 = add_norm(ps, name + ".norm1", dim);
    p.attn.heads = heads;
    p.attn.window_size = cfg.window_size;
    p.attn.qkv_weight = ps.add(name + ".attn.qkv.weight", {dim, 3 * dim}, Init::trunc_normal);
    p.attn.q_bias = ps.add(name + ".attn.q_bias", {dim}, Init::zeros);
    p.attn.v_bias = ps.add(name + ".attn.v_bias", {dim}, Init::zeros);
    p.attn.proj_weight = ps.add(name + ".attn.proj.weight", {dim, dim}, Init::trunc_normal);
    p.attn.proj_bias = ps.add(name + ".attn.proj.bias", {dim}, Init::zeros);
    if (cfg.use_rel_pos_bias) {
        const std::size_t span = 2 * cfg.window_size - 1;
        p.attn.rel_bias_table = ps.add(name + ".attn.rel_bias_table", {span * span * span, heads}, Init::trunc_normal);
    }
    p.norm2 = add_norm(ps, name + ".norm2", dim);
    const std::size_t hidden = cfg.mlp_hidden(dim);
    p.fc1 = add_linear(ps, name + ".mlp.fc1", dim, hidden, true);
    p.fc2 = add_linear(ps, name + ".mlp.fc2", hidden, dim, true);
    return p;
}

struct WindowPlan {
    Resolution res{}, window{}, shift{}, padded{};
    bool shifted() const { return shift != Resolution{0, 0, 0}; }
};

WindowPlan plan_windows(const Resolution& res, const SwinCrossConfig& cfg, bool shifted) {
    WindowPlan plan;
    plan.res = res;
    plan.window = effective_window(res, cfg.window_size);
    plan.shift = shifted ? effective_shift(res, cfg.window_size, cfg.shift()) : Resolution{0, 0, 0};
    plan.padded = padded_resolution(res, plan.window);
    return plan;
}

template <typename T>
WindowBatch<T> to_windows(const Tensor<T>& grid, const WindowPlan& plan) {
    auto x = pad_to_window_multiple(grid, plan.window);
    if (plan.shifted()) x = cyclic_shift(x, plan.shift);
    return window_partition(x, plan.window);
}

template <typename T>
Tensor<T> from_windows(const WindowBatch<T>& w, const WindowPlan& plan) {
    auto x = window_reverse(w);
    if (plan.shifted()) x = reverse_cyclic_shift(x, plan.shift);
    return crop_to(x, plan.res);
}

template <typename T>
Tensor<T> plan_mask(const WindowPlan& plan) {
    return plan.shifted() ? compute_shift_mask<T>(plan.padded, plan.window, plan.shift) : Tensor<T>();
}

template <typename T>
Tensor<T> mlp_residual(const Tensor<T>& x, const TransformerLayerParams<T>& p) {
    return add(x, mlp(layer_norm(x, p.norm2.gamma, p.norm2.beta, T(kLayerNormEps)), p.fc1, p.fc2));
}

template <typename T>
Tensor<T> channels_first_to_grid(const Tensor<T>& x) {
    return permute(x, {1, 2, 3, 0});
}

}  // namespace

template <typename T>
EncoderParams<T> register_encoder(const SwinCrossConfig& cfg, ParameterSet<T>& ps, const std::string& prefix) {
    cfg.validate();
    EncoderParams<T> enc;
    const bool cross = cfg.block_mode == BlockMode::cross_modal;
    const std::size_t in_channels = cross ? 1 : cfg.modalities;
    const std::size_t k = cfg.patch_size;
    for (std::size_t b = 0; b < cfg.branch_count(); ++b) {
        const std::string bp = prefix + ".branch" + std::to_string(b);
        BranchParams<T> br;
        br.patch_embed.weight = ps.add(bp + ".patch_embed.weight", {cfg.embed_dim, in_channels, k, k, k}, Init::trunc_normal);
        br.patch_embed.bias = ps.add(bp + ".patch_embed.bias", {cfg.embed_dim}, Init::zeros);
        for (std::size_t s = 0; s < 4; ++s) {
            const std::string sp = bp + ".stage" + std::to_string(s);
            const std::size_t in_dim = cfg.embed_dim << s;
            const std::size_t dim = cfg.stage_dim(s);
            br.merge[s].norm = add_norm(ps, sp + ".merge.norm", 8 * in_dim);
            br.merge[s].reduction = add_linear(ps, sp + ".merge.reduction", 8 * in_dim, dim, false);
            for (std::size_t j = 0; j < cfg.depths[s] / 2; ++j) {
                const std::string pp = sp + ".pair" + std::to_string(j);
                BlockPairParams<T> pair;
                pair.windowed = add_layer(ps, pp + ".windowed", dim, cfg.heads[s], cfg);
                pair.shifted = add_layer(ps, pp + ".shifted", dim, cfg.heads[s], cfg);
                br.blocks[s].push_back(std::move(pair));
            }
        }
        enc.branches.push_back(std::move(br));
    }
    return enc;
}

template <typename T>
Tensor<T> patch_embed(const Tensor<T>& volume, const ConvParams<T>& p) {
    if (volume.rank() != 4) {
        throw DimensionError("patch_embed: expected volume [C_in,H,W,D], got " + shape_to_string(volume.shape()));
    }
    for (std::size_t a = 1; a < 4; ++a) {
        if (volume.dim(static_cast<std::ptrdiff_t>(a)) % 2 != 0) {
            throw DimensionError("patch_embed: spatial dims must be even, got " + shape_to_string(volume.shape()));
        }
    }
    return channels_first_to_grid(conv3d(volume, p.weight, p.bias, 2, 0));
}

template <typename T>
Tensor<T> patch_merging(const Tensor<T>& grid, const PatchMergingParams<T>& p) {
    const Resolution res = grid_resolution(grid);
    if (res[0] % 2 || res[1] % 2 || res[2] % 2) {
        throw DimensionError("patch_merging: spatial dims must be even, got " + shape_to_string(grid.shape()));
    }
    const std::size_t c = grid.dim(3);
    auto x = reshape(grid, {res[0] / 2, 2, res[1] / 2, 2, res[2] / 2, 2, c});
    x = permute(x, {0, 2, 4, 1, 3, 5, 6});
    x = reshape(x, {res[0] / 2, res[1] / 2, res[2] / 2, 8 * c});
    x = layer_norm(x, p.norm.gamma, p.norm.beta, T(kLayerNormEps));
    return linear(x, p.reduction.weight, p.reduction.bias);
}

template <typename T>
Tensor<T> mlp(const Tensor<T>& x, const LinearParams<T>& fc1, const LinearParams<T>& fc2) {
    return linear(gelu(linear(x, fc1.weight, fc1.bias)), fc2.weight, fc2.bias);
}

template <typename T>
Tensor<T> self_attention_layer(const Tensor<T>& grid, const TransformerLayerParams<T>& p, const SwinCrossConfig& cfg,
                               bool shifted) {
    const auto plan = plan_windows(grid_resolution(grid), cfg, shifted);
    auto normed = layer_norm(grid, p.norm1.gamma, p.norm1.beta, T(kLayerNormEps));
    auto attended = window_self_attention(to_windows(normed, plan), p.attn, plan_mask<T>(plan));
    auto x = add(grid, from_windows(attended, plan));
    return mlp_residual(x, p);
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> cross_attention_layer(const Tensor<T>& g1, const Tensor<T>& g2,
                                                      const TransformerLayerParams<T>& p1,
                                                      const TransformerLayerParams<T>& p2,
                                                      const SwinCrossConfig& cfg, bool shifted) {
    if (g1.shape() != g2.shape()) {
        throw DimensionError("cross_attention_layer: branch grids differ: " + shape_to_string(g1.shape()) + " vs " +
                             shape_to_string(g2.shape()));
    }
    const auto plan = plan_windows(grid_resolution(g1), cfg, shifted);
    const auto mask = plan_mask<T>(plan);
    auto n1 = layer_norm(g1, p1.norm1.gamma, p1.norm1.beta, T(kLayerNormEps));
    auto n2 = layer_norm(g2, p2.norm1.gamma, p2.norm1.beta, T(kLayerNormEps));
    auto [a1, a2] = cross_modal_window_attention(to_windows(n1, plan), to_windows(n2, plan), p1.attn, p2.attn, mask,
                                                 cfg.values_from_other_modality);
    auto x1 = add(g1, from_windows(a1, plan));
    auto x2 = add(g2, from_windows(a2, plan));
    return {mlp_residual(x1, p1), mlp_residual(x2, p2)};
}

template <typename T>
Tensor<T> self_block_pair(const Tensor<T>& grid, const BlockPairParams<T>& p, const SwinCrossConfig& cfg) {
    return self_attention_layer(self_attention_layer(grid, p.windowed, cfg, false), p.shifted, cfg, true);
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> cma_block_pair(const Tensor<T>& g1, const Tensor<T>& g2, const BlockPairParams<T>& p1,
                                               const BlockPairParams<T>& p2, const SwinCrossConfig& cfg) {
    auto [y1, y2] = cross_attention_layer(g1, g2, p1.windowed, p2.windowed, cfg, false);
    return cross_attention_layer(y1, y2, p1.shifted, p2.shifted, cfg, true);
}

template <typename T>
StageResult<T> run_stage(const BranchState<T>& state, const EncoderParams<T>& params, const SwinCrossConfig& cfg) {
    const std::size_t s = state.stage;
    if (s >= 4) throw ConfigError("run_stage: all four stages already ran");
    if (state.grids.size() != params.branches.size()) {
        throw DimensionError("run_stage: " + std::to_string(state.grids.size()) + " branch grids for " +
                             std::to_string(params.branches.size()) + " parameter branches");
    }
    StageResult<T> out;
    out.state.stage = s + 1;
    if (params.branches.size() == 1) {
        auto y = patch_merging(state.grids[0], params.branches[0].merge[s]);
        for (const auto& pair : params.branches[0].blocks[s]) y = self_block_pair(y, pair, cfg);
        out.state.grids = {y};
        out.skip = y;
        return out;
    }
    if (params.branches.size() != 2) throw ConfigError("run_stage: cross-modal fusion needs exactly two branches");
    auto x1 = patch_merging(state.grids[0], params.branches[0].merge[s]);
    auto x2 = patch_merging(state.grids[1], params.branches[1].merge[s]);
    auto y1 = x1, y2 = x2;
    for (std::size_t j = 0; j < params.branches[0].blocks[s].size(); ++j) {
        std::tie(y1, y2) = cma_block_pair(y1, y2, params.branches[0].blocks[s][j], params.branches[1].blocks[s][j], cfg);
    }
    out.state.grids = {add(x1, y1), add(x2, y2)};
    out.skip = add(y1, y2);
    return out;
}

template <typename T>
FeaturePyramid<T> encode(const Tensor<T>& volume, const EncoderParams<T>& params, const SwinCrossConfig& cfg) {
    if (volume.rank() != 4 || volume.dim(3) != cfg.modalities) {
        throw DimensionError("encode: expected volume [H,W,D," + std::to_string(cfg.modalities) + "], got " +
                             shape_to_string(volume.shape()));
    }
    FeaturePyramid<T> pyr;
    pyr.input_resolution = grid_resolution(volume);
    const auto padded = padded_resolution(pyr.input_resolution, cube(cfg.volume_multiple()));
    const auto& r = pyr.input_resolution;
    auto x = pad_end(volume, {padded[0] - r[0], padded[1] - r[1], padded[2] - r[2]});
    pyr.levels[0] = x;

    auto channels_first = permute(x, {3, 0, 1, 2});  // [2, H, W, D]
    BranchState<T> state;
    if (params.branches.size() == 1) {
        state.grids.push_back(patch_embed(channels_first, params.branches[0].patch_embed));
        pyr.levels[1] = state.grids[0];
    } else {
        for (std::size_t b = 0; b < params.branches.size(); ++b) {
            state.grids.push_back(patch_embed(slice(channels_first, 0, b, 1), params.branches[b].patch_embed));
        }
        pyr.levels[1] = add(state.grids[0], state.grids[1]);
    }
    for (std::size_t s = 0; s < 4; ++s) {
        auto result = run_stage(state, params, cfg);
        pyr.levels[s + 2] = result.skip;
        state = std::move(result.state);
    }
    return pyr;
}

#define SWINCROSS_INSTANTIATE(T)                                                                                    \
    template EncoderParams<T> register_encoder<T>(const SwinCrossConfig&, ParameterSet<T>&, const std::string&);   \
    template Tensor<T> patch_embed<T>(const Tensor<T>&, const ConvParams<T>&);                                      \
    template Tensor<T> patch_merging<T>(const Tensor<T>&, const PatchMergingParams<T>&);                            \
    template Tensor<T> mlp<T>(const Tensor<T>&, const LinearParams<T>&, const LinearParams<T>&);                    \
    template Tensor<T> self_attention_layer<T>(const Tensor<T>&, const TransformerLayerParams<T>&,                  \
                                               const SwinCrossConfig&, bool);                                       \
    template std::pair<Tensor<T>, Tensor<T>> cross_attention_layer<T>(                                              \
        const Tensor<T>&, const Tensor<T>&, const TransformerLayerParams<T>&, const TransformerLayerParams<T>&,     \
        const SwinCrossConfig&, bool);                                                                              \
    template Tensor<T> self_block_pair<T>(const Tensor<T>&, const BlockPairParams<T>&, const SwinCrossConfig&);     \
    template std::pair<Tensor<T>, Tensor<T>> cma_block_pair<T>(const Tensor<T>&, const Tensor<T>&,                  \
                                                               const BlockPairParams<T>&, const BlockPairParams<T>&, \
                                                               const SwinCrossConfig&);                             \
    template StageResult<T> run_stage<T>(const BranchState<T>&, const EncoderParams<T>&, const SwinCrossConfig&);   \
    template FeaturePyramid<T> encode<T>(const Tensor<T>&, const EncoderParams<T>&, const SwinCrossConfig&);

SWINCROSS_INSTANTIATE(float)
SWINCROSS_INSTANTIATE(double)

#undef SWINCROSS_INSTANTIATE

}  // namespace swincross
