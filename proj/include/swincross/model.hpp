#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "swincross/config.hpp"
#include "swincross/decoder.hpp"
#include "swincross/encoder.hpp"
#include "swincross/parameters.hpp"

namespace swincross {

// SwinCross (cross-modal mode) or the single-stream baseline, depending on
// cfg.block_mode. Move-only: parameter tensors are shared handles.
template <typename T>
class Model {
   public:
    // Validates cfg, registers every parameter and initializes from seed.
    static Model build(const SwinCrossConfig& cfg, std::uint64_t seed);

    Model(Model&&) noexcept = default;
    Model& operator=(Model&&) noexcept = default;
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    const SwinCrossConfig& config() const { return cfg_; }
    ParameterSet<T>& parameters() { return params_; }
    const ParameterSet<T>& parameters() const { return params_; }
    const EncoderParams<T>& encoder() const { return encoder_; }
    const DecoderParams<T>& decoder() const { return decoder_; }

    // volume [H, W, D, 2] with finite values.
    FeaturePyramid<T> encode(const Tensor<T>& volume) const;
    Tensor<T> forward_logits(const Tensor<T>& volume) const;
    // Probabilities [H, W, D, 1].
    Tensor<T> forward(const Tensor<T>& volume) const;

    std::size_t param_count() const { return params_.total_count(); }
    // (module path, parameter count) in enumeration order. Encoder entries are
    // grouped three levels deep (encoder.branch0.stage1), decoder entries two
    // levels deep (decoder.up3).
    std::vector<std::pair<std::string, std::size_t>> param_breakdown() const;

    // Copy with independent parameter storage.
    Model clone() const;
    template <typename U>
    Model<U> cast() const;

    // Model that produces the same output when the two input channels are
    // swapped: branch parameters exchanged and every weight that reads the raw
    // input channels permuted accordingly.
    Model with_swapped_modalities() const;

   private:
    Model() = default;

    SwinCrossConfig cfg_;
    ParameterSet<T> params_;
    EncoderParams<T> encoder_;
    DecoderParams<T> decoder_;
};

}  // namespace swincross
