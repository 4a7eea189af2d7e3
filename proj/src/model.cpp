#include "swincross/model.hpp"

#include <algorithm>

#include "swincross/ops.hpp"

namespace swincross {

namespace {

// Exchanges slices i and j along one axis, in place.
template <typename T>
void swap_channels(Tensor<T> t, std::size_t axis, std::size_t i, std::size_t j) {
    const auto& s = t.shape();
    std::size_t outer = 1, inner = 1;
    for (std::size_t a = 0; a < axis; ++a) outer *= s[a];
    for (std::size_t a = axis + 1; a < s.size(); ++a) inner *= s[a];
    auto data = t.mutable_data();
    for (std::size_t o = 0; o < outer; ++o) {
        T* base = data.data() + o * s[axis] * inner;
        std::swap_ranges(base + i * inner, base + (i + 1) * inner, base + j * inner);
    }
}

std::string group_of(const std::string& name) {
    const std::size_t depth = name.rfind("encoder.", 0) == 0 ? 3 : 2;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < depth; ++k) {
        pos = name.find('.', pos);
        if (pos == std::string::npos) return name;
        if (k + 1 < depth) ++pos;
    }
    return name.substr(0, pos);
}

}  // namespace

template <typename T>
Model<T> Model<T>::build(const SwinCrossConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Model m;
    m.cfg_ = cfg;
    m.encoder_ = register_encoder(cfg, m.params_);
    m.decoder_ = register_decoder(cfg, m.params_);
    m.params_.initialize(seed);
    return m;
}

template <typename T>
FeaturePyramid<T> Model<T>::encode(const Tensor<T>& volume) const {
    if (!all_finite(volume)) throw NumericError("forward: input volume contains NaN or Inf");
    return swincross::encode(volume, encoder_, cfg_);
}

template <typename T>
Tensor<T> Model<T>::forward_logits(const Tensor<T>& volume) const {
    return decode_logits(encode(volume), decoder_);
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& volume) const {
    return sigmoid(forward_logits(volume));
}

template <typename T>
std::vector<std::pair<std::string, std::size_t>> Model<T>::param_breakdown() const {
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& p : params_.items()) {
        const auto group = group_of(p.name);
        if (out.empty() || out.back().first != group) out.emplace_back(group, 0);
        out.back().second += p.tensor.numel();
    }
    return out;
}

template <typename T>
Model<T> Model<T>::clone() const {
    return cast<T>();
}

template <typename T>
template <typename U>
Model<U> Model<T>::cast() const {
    Model<U> out = Model<U>::build(cfg_, 0);
    const auto& src = params_.items();
    const auto& dst = out.parameters().items();
    for (std::size_t i = 0; i < src.size(); ++i) {
        auto from = src[i].tensor.data();
        Tensor<U> to = dst[i].tensor;
        auto values = to.mutable_data();
        for (std::size_t k = 0; k < values.size(); ++k) values[k] = static_cast<U>(from[k]);
    }
    return out;
}

template <typename T>
Model<T> Model<T>::with_swapped_modalities() const {
    Model out = clone();
    if (cfg_.block_mode == BlockMode::cross_modal) {
        const std::string b0 = "encoder.branch0.", b1 = "encoder.branch1.";
        for (const auto& p : out.params_.items()) {
            std::string other;
            if (p.name.rfind(b0, 0) == 0) other = b1 + p.name.substr(b0.size());
            else if (p.name.rfind(b1, 0) == 0) other = b0 + p.name.substr(b1.size());
            else continue;
            auto from = params_.get(other).data();
            Tensor<T> to = p.tensor;
            std::copy(from.begin(), from.end(), to.mutable_data().begin());
        }
    } else {
        swap_channels(out.params_.get("encoder.branch0.patch_embed.weight"), 1, 0, 1);
    }
    // Level-0 skip path sees the raw channels in swapped order: permute both
    // sides of its residual block, then the concatenated inputs of post_block0.
    auto& ps = out.params_;
    swap_channels(ps.get("decoder.skip_block0.conv1.weight"), 0, 0, 1);
    swap_channels(ps.get("decoder.skip_block0.conv1.weight"), 1, 0, 1);
    swap_channels(ps.get("decoder.skip_block0.conv2.weight"), 0, 0, 1);
    swap_channels(ps.get("decoder.skip_block0.conv2.weight"), 1, 0, 1);
    for (const char* n : {"decoder.skip_block0.norm1.gamma", "decoder.skip_block0.norm1.beta",
                          "decoder.skip_block0.norm2.gamma", "decoder.skip_block0.norm2.beta"}) {
        swap_channels(ps.get(n), 0, 0, 1);
    }
    const std::size_t offset = decoder_.channels[0];  // upsampled channels come first
    swap_channels(ps.get("decoder.post_block0.conv1.weight"), 1, offset, offset + 1);
    swap_channels(ps.get("decoder.post_block0.shortcut.weight"), 1, offset, offset + 1);
    return out;
}

template class Model<float>;
template class Model<double>;
template Model<double> Model<float>::cast<double>() const;
template Model<float> Model<double>::cast<float>() const;

}  // namespace swincross
