#include "swincross/decoder.hpp"

#include "swincross/ops.hpp"

namespace swincross {

namespace {

constexpr double kInstanceNormEps = 1e-5;

template <typename T>
Tensor<T> to_channels_first(const Tensor<T>& grid) {
    return permute(grid, {3, 0, 1, 2});
}

}  // namespace

template <typename T>
ResidualBlockParams<T> register_residual_block(ParameterSet<T>& ps, const std::string& name, std::size_t in,
                                               std::size_t out) {
    ResidualBlockParams<T> p;
    p.conv1.weight = ps.add(name + ".conv1.weight", {out, in, 3, 3, 3}, Init::trunc_normal);
    p.norm1 = {ps.add(name + ".norm1.gamma", {out}, Init::ones), ps.add(name + ".norm1.beta", {out}, Init::zeros)};
    p.conv2.weight = ps.add(name + ".conv2.weight", {out, out, 3, 3, 3}, Init::trunc_normal);
    p.norm2 = {ps.add(name + ".norm2.gamma", {out}, Init::ones), ps.add(name + ".norm2.beta", {out}, Init::zeros)};
    if (in != out) {
        p.shortcut.weight = ps.add(name + ".shortcut.weight", {out, in, 1, 1, 1}, Init::trunc_normal);
        p.shortcut.bias = ps.add(name + ".shortcut.bias", {out}, Init::zeros);
    }
    return p;
}

template <typename T>
DecoderParams<T> register_decoder(const SwinCrossConfig& cfg, ParameterSet<T>& ps, const std::string& prefix) {
    cfg.validate();
    DecoderParams<T> d;
    d.channels[0] = cfg.modalities;
    for (std::size_t i = 1; i < 6; ++i) d.channels[i] = cfg.embed_dim << (i - 1);
    const auto& c = d.channels;
    for (std::size_t i = 0; i < 6; ++i) {
        d.skip_blocks[i] = register_residual_block(ps, prefix + ".skip_block" + std::to_string(i), c[i], c[i]);
    }
    for (std::size_t i = 5; i-- > 0;) {
        const std::string up = prefix + ".up" + std::to_string(i);
        d.up[i].weight = ps.add(up + ".weight", {c[i + 1], c[i], 2, 2, 2}, Init::trunc_normal);
        d.up[i].bias = ps.add(up + ".bias", {c[i]}, Init::zeros);
        d.post_blocks[i] = register_residual_block(ps, prefix + ".post_block" + std::to_string(i), 2 * c[i], c[i]);
    }
    d.head.weight = ps.add(prefix + ".head.weight", {cfg.out_channels, c[0], 1, 1, 1}, Init::trunc_normal);
    d.head.bias = ps.add(prefix + ".head.bias", {cfg.out_channels}, Init::zeros);
    return d;
}

template <typename T>
Tensor<T> residual_block(const Tensor<T>& x, const ResidualBlockParams<T>& p) {
    const T slope = T(kLeakySlope);
    const T eps = T(kInstanceNormEps);
    auto y = conv3d(x, p.conv1.weight, p.conv1.bias, 1, 1);
    y = leaky_relu(instance_norm3d(y, p.norm1.gamma, p.norm1.beta, eps), slope);
    y = conv3d(y, p.conv2.weight, p.conv2.bias, 1, 1);
    y = leaky_relu(instance_norm3d(y, p.norm2.gamma, p.norm2.beta, eps), slope);
    auto shortcut = p.shortcut.weight.defined() ? conv3d(x, p.shortcut.weight, p.shortcut.bias, 1, 0) : x;
    return add(y, shortcut);
}

template <typename T>
Tensor<T> decode_logits(const FeaturePyramid<T>& pyramid, const DecoderParams<T>& params) {
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& level = pyramid.levels[i];
        if (!level.defined() || level.rank() != 4 || level.dim(3) != params.channels[i]) {
            throw DimensionError("decode: pyramid level " + std::to_string(i) + " has shape " +
                                 (level.defined() ? shape_to_string(level.shape()) : std::string("undefined")) +
                                 ", expected " + std::to_string(params.channels[i]) + " channels");
        }
        if (i > 0) {
            const auto& prev = pyramid.levels[i - 1].shape();
            const auto& cur = level.shape();
            for (std::size_t a = 0; a < 3; ++a) {
                if (prev[a] != 2 * cur[a]) {
                    throw DimensionError("decode: level " + std::to_string(i) + " shape " + shape_to_string(cur) +
                                         " is not half of level " + std::to_string(i - 1) + " " + shape_to_string(prev));
                }
            }
        }
    }
    auto x = residual_block(to_channels_first(pyramid.levels[5]), params.skip_blocks[5]);
    for (std::size_t i = 5; i-- > 0;) {
        auto up = conv_transpose3d(x, params.up[i].weight, params.up[i].bias, 2);
        auto skip = residual_block(to_channels_first(pyramid.levels[i]), params.skip_blocks[i]);
        x = residual_block(concat<T>({up, skip}, 0), params.post_blocks[i]);
    }
    auto logits = conv3d(x, params.head.weight, params.head.bias, 1, 0);
    auto grid = permute(logits, {1, 2, 3, 0});
    return crop_to(grid, pyramid.input_resolution);
}

template <typename T>
Tensor<T> decode(const FeaturePyramid<T>& pyramid, const DecoderParams<T>& params) {
    return sigmoid(decode_logits(pyramid, params));
}

#define SWINCROSS_INSTANTIATE(T)                                                                                  \
    template ResidualBlockParams<T> register_residual_block<T>(ParameterSet<T>&, const std::string&, std::size_t, \
                                                               std::size_t);                                      \
    template DecoderParams<T> register_decoder<T>(const SwinCrossConfig&, ParameterSet<T>&, const std::string&);  \
    template Tensor<T> residual_block<T>(const Tensor<T>&, const ResidualBlockParams<T>&);                        \
    template Tensor<T> decode_logits<T>(const FeaturePyramid<T>&, const DecoderParams<T>&);                       \
    template Tensor<T> decode<T>(const FeaturePyramid<T>&, const DecoderParams<T>&);

SWINCROSS_INSTANTIATE(float)
SWINCROSS_INSTANTIATE(double)

#undef SWINCROSS_INSTANTIATE

}  // namespace swincross
