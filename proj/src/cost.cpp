#include "swincross/cost.hpp"

#include <algorithm>
#include <random>

#include "swincross/attention.hpp"

namespace swincross {

std::uint64_t windowed_attention_macs(std::uint64_t tokens, std::uint64_t channels, std::uint64_t window_volume) {
    return 4 * tokens * channels * channels + 2 * window_volume * tokens * channels;
}

std::uint64_t dense_attention_macs(std::uint64_t tokens, std::uint64_t channels) {
    return 4 * tokens * channels * channels + 2 * tokens * tokens * channels;
}

std::vector<StageCost> attention_cost(const SwinCrossConfig& cfg, const Resolution& volume) {
    cfg.validate();
    const Resolution padded = padded_resolution(volume, cube(cfg.volume_multiple()));
    std::vector<StageCost> out;
    for (std::size_t s = 0; s < 4; ++s) {
        StageCost c;
        c.stage = s;
        const std::size_t div = std::size_t{4} << s;
        const Resolution res{padded[0] / div, padded[1] / div, padded[2] / div};
        c.resolution = res;
        c.window = effective_window(res, cfg.window_size);
        c.grid = padded_resolution(res, c.window);
        c.tokens = c.grid[0] * c.grid[1] * c.grid[2];
        c.channels = cfg.stage_dim(s);
        c.window_volume = c.window[0] * c.window[1] * c.window[2];
        c.windowed_macs = windowed_attention_macs(c.tokens, c.channels, c.window_volume);
        c.dense_tokens = res[0] * res[1] * res[2];
        c.dense_macs = dense_attention_macs(c.dense_tokens, c.channels);
        out.push_back(c);
    }
    return out;
}

std::uint64_t measure_attention_macs(const Resolution& grid, std::size_t channels, std::size_t heads,
                                     const Resolution& window, AttentionMode mode, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    auto random_tensor = [&](Shape s) {
        std::vector<float> v(shape_numel(s));
        for (auto& x : v) x = u(rng);
        return Tensor<float>(std::move(s), std::move(v));
    };
    AttentionParams<float> p;
    p.heads = heads;
    p.qkv_weight = random_tensor({channels, 3 * channels});
    p.q_bias = random_tensor({channels});
    p.v_bias = random_tensor({channels});
    p.proj_weight = random_tensor({channels, channels});
    p.proj_bias = random_tensor({channels});
    const auto x = random_tensor({grid[0], grid[1], grid[2], channels});
    const Resolution win = mode == AttentionMode::dense ? grid : window;
    p.window_size = std::max({win[0], win[1], win[2]});
    NoGradGuard no_grad;
    MacCounter counter;
    window_self_attention(window_partition(x, win), p, Tensor<float>());
    return counter.count();
}

}  // namespace swincross
