#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

#include <json.hpp>

namespace swincross {

enum class BlockMode { cross_modal, single_stream_baseline };

std::string to_string(BlockMode mode);
BlockMode block_mode_from_string(const std::string& s);

struct SwinCrossConfig {
    std::size_t embed_dim = 48;
    std::size_t patch_size = 2;
    std::array<std::size_t, 4> depths{2, 4, 2, 2};
    std::array<std::size_t, 4> heads{3, 6, 12, 24};
    std::size_t window_size = 7;
    std::optional<std::size_t> shift_size;  // unset: floor(window_size / 2)
    double mlp_ratio = 4.0;
    std::size_t modalities = 2;
    std::size_t out_channels = 1;
    bool use_rel_pos_bias = true;
    bool values_from_other_modality = false;
    BlockMode block_mode = BlockMode::cross_modal;

    std::size_t shift() const { return shift_size.value_or(window_size / 2); }
    // Channel width of stage i (0-based): C * 2^(i+1).
    std::size_t stage_dim(std::size_t stage) const { return embed_dim << (stage + 1); }
    std::size_t mlp_hidden(std::size_t dim) const;
    std::size_t encoder_layer_count() const;
    // Spatial multiple every input extent is padded up to.
    std::size_t volume_multiple() const { return patch_size << 4; }
    std::size_t branch_count() const { return block_mode == BlockMode::cross_modal ? modalities : 1; }

    // Throws ConfigError naming the first violated invariant.
    void validate() const;

    // Small configuration used for finite-difference checks.
    static SwinCrossConfig tiny();
    // Configuration used by train-toy when no config file is given.
    static SwinCrossConfig toy();
};

nlohmann::json to_json(const SwinCrossConfig& cfg);
// Missing keys keep their defaults; unknown keys and bad values raise ConfigError.
SwinCrossConfig config_from_json(const nlohmann::json& j);
SwinCrossConfig load_config(const std::string& path);

}  // namespace swincross
