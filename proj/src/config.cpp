#include "swincross/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "swincross/errors.hpp"

namespace swincross {

std::string to_string(BlockMode mode) {
    return mode == BlockMode::cross_modal ? "cross_modal" : "single_stream_baseline";
}

BlockMode block_mode_from_string(const std::string& s) {
    if (s == "cross_modal") return BlockMode::cross_modal;
    if (s == "single_stream_baseline") return BlockMode::single_stream_baseline;
    throw ConfigError("block_mode: unknown value '" + s + "' (expected cross_modal or single_stream_baseline)");
}

std::size_t SwinCrossConfig::mlp_hidden(std::size_t dim) const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(dim) * mlp_ratio));
}

std::size_t SwinCrossConfig::encoder_layer_count() const {
    return depths[0] + depths[1] + depths[2] + depths[3];
}

void SwinCrossConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("invalid config: " + msg); };
    if (embed_dim == 0) fail("embed_dim must be positive");
    if (patch_size != 2) fail("patch_size " + std::to_string(patch_size) + " unsupported (only 2)");
    if (modalities != 2) fail("modalities must be 2, got " + std::to_string(modalities));
    if (out_channels != 1) fail("out_channels must be 1, got " + std::to_string(out_channels));
    if (window_size == 0) fail("window_size must be at least 1");
    if (shift() >= window_size && shift() != 0) {
        fail("shift_size " + std::to_string(shift()) + " must be smaller than window_size " +
             std::to_string(window_size));
    }
    if (!(mlp_ratio > 0.0) || !std::isfinite(mlp_ratio)) fail("mlp_ratio must be positive");
    for (std::size_t i = 0; i < 4; ++i) {
        const std::string at = "[" + std::to_string(i) + "]";
        if (depths[i] == 0 || depths[i] % 2 != 0) {
            fail("depths" + at + " = " + std::to_string(depths[i]) +
                 " must be a positive even number (windowed/shifted pairs)");
        }
        // C * 2^i divides the stage width C * 2^(i+1), so this also covers the attention split.
        const std::size_t base = embed_dim << i;
        if (heads[i] == 0 || base % heads[i] != 0) {
            fail("heads" + at + " = " + std::to_string(heads[i]) + " does not divide " + std::to_string(base) +
                 " (embed_dim * 2^" + std::to_string(i) + ")");
        }
        if (mlp_hidden(stage_dim(i)) == 0) fail("mlp_ratio gives an empty hidden layer at stage " + std::to_string(i));
    }
}

SwinCrossConfig SwinCrossConfig::tiny() {
    SwinCrossConfig c;
    c.embed_dim = 8;
    c.depths = {2, 2, 2, 2};
    c.heads = {1, 2, 4, 8};
    c.window_size = 2;
    return c;
}

SwinCrossConfig SwinCrossConfig::toy() {
    SwinCrossConfig c;
    c.embed_dim = 8;
    c.depths = {2, 2, 2, 2};
    c.heads = {1, 2, 4, 8};
    c.window_size = 4;
    return c;
}

nlohmann::json to_json(const SwinCrossConfig& cfg) {
    nlohmann::json j;
    j["embed_dim"] = cfg.embed_dim;
    j["patch_size"] = cfg.patch_size;
    j["depths"] = cfg.depths;
    j["heads"] = cfg.heads;
    j["window_size"] = cfg.window_size;
    j["shift_size"] = cfg.shift();
    j["mlp_ratio"] = cfg.mlp_ratio;
    j["modalities"] = cfg.modalities;
    j["out_channels"] = cfg.out_channels;
    j["use_rel_pos_bias"] = cfg.use_rel_pos_bias;
    j["values_from_other_modality"] = cfg.values_from_other_modality;
    j["block_mode"] = to_string(cfg.block_mode);
    return j;
}

SwinCrossConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    static const std::set<std::string> known = {"embed_dim",   "patch_size",       "depths",
                                                "heads",       "window_size",      "shift_size",
                                                "mlp_ratio",   "modalities",       "out_channels",
                                                "use_rel_pos_bias", "values_from_other_modality", "block_mode"};
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) throw ConfigError("config: unknown key '" + item.key() + "'");
    }
    SwinCrossConfig c;
    auto read = [&](const char* key, auto& dst) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(dst);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
        }
    };
    auto read_uint = [&](const char* key, std::size_t& dst) {
        if (!j.contains(key)) return;
        if (!j.at(key).is_number_unsigned()) throw ConfigError(std::string("config: '") + key + "' must be a non-negative integer");
        dst = j.at(key).get<std::size_t>();
    };
    auto read_stages = [&](const char* key, std::array<std::size_t, 4>& dst) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (!v.is_array() || v.size() != 4) throw ConfigError(std::string("config: '") + key + "' must list 4 stages");
        for (std::size_t i = 0; i < 4; ++i) {
            if (!v[i].is_number_unsigned()) throw ConfigError(std::string("config: '") + key + "' entries must be non-negative integers");
            dst[i] = v[i].get<std::size_t>();
        }
    };
    read_uint("embed_dim", c.embed_dim);
    read_uint("patch_size", c.patch_size);
    read_stages("depths", c.depths);
    read_stages("heads", c.heads);
    read_uint("window_size", c.window_size);
    if (j.contains("shift_size") && !j.at("shift_size").is_null()) {
        std::size_t s = 0;
        read_uint("shift_size", s);
        c.shift_size = s;
    }
    if (j.contains("mlp_ratio") && !j.at("mlp_ratio").is_number()) throw ConfigError("config: 'mlp_ratio' must be a number");
    read("mlp_ratio", c.mlp_ratio);
    read_uint("modalities", c.modalities);
    read_uint("out_channels", c.out_channels);
    read("use_rel_pos_bias", c.use_rel_pos_bias);
    read("values_from_other_modality", c.values_from_other_modality);
    if (j.contains("block_mode")) {
        std::string mode;
        read("block_mode", mode);
        c.block_mode = block_mode_from_string(mode);
    }
    c.validate();
    return c;
}

SwinCrossConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (in " + path + ")");
    }
}

}  // namespace swincross
