#include <doctest.h>

#include "swincross/cost.hpp"

using namespace swincross;

TEST_CASE("closed forms") {
    CHECK(windowed_attention_macs(64, 8, 8) == 4u * 64 * 64 + 2u * 8 * 64 * 8);
    CHECK(dense_attention_macs(64, 8) == 4u * 64 * 64 + 2u * 64 * 64 * 8);
    CHECK(windowed_attention_macs(343, 48, 343) == dense_attention_macs(343, 48));
    const std::uint64_t c = 16, n = 27;
    const auto attn_w = [&](std::uint64_t t) { return windowed_attention_macs(t, c, n) - 4 * t * c * c; };
    const auto attn_d = [&](std::uint64_t t) { return dense_attention_macs(t, c) - 4 * t * c * c; };
    for (std::uint64_t t : {216u, 432u, 864u}) {
        CHECK(attn_w(2 * t) == 2 * attn_w(t));
        CHECK(attn_d(2 * t) == 4 * attn_d(t));
    }
}

TEST_CASE("instrumented attention matches the closed forms") {
    for (const std::size_t n : {4u, 8u}) {
        const Resolution grid{n, n, n};
        const std::uint64_t t = n * n * n;
        CHECK(measure_attention_macs(grid, 8, 2, cube(2), AttentionMode::windowed) == windowed_attention_macs(t, 8, 8));
        CHECK(measure_attention_macs(grid, 8, 2, cube(2), AttentionMode::dense) == dense_attention_macs(t, 8));
        const auto ratio_num = measure_attention_macs(grid, 8, 2, cube(2), AttentionMode::windowed) - 4 * t * 64;
        const auto ratio_den = measure_attention_macs(grid, 8, 2, cube(2), AttentionMode::dense) - 4 * t * 64;
        CHECK(ratio_num * t == ratio_den * 8);
    }
    CHECK(measure_attention_macs({4, 4, 2}, 6, 3, {2, 2, 1}, AttentionMode::windowed) ==
          windowed_attention_macs(32, 6, 4));
}

TEST_CASE("per-stage costs for the default configuration") {
    const auto cost = attention_cost(SwinCrossConfig{}, {64, 64, 64});
    REQUIRE(cost.size() == 4);
    const std::size_t res[4] = {16, 8, 4, 2};
    for (std::size_t s = 0; s < 4; ++s) {
        CHECK(cost[s].resolution == cube(res[s]));
        CHECK(cost[s].channels == (96u << s));
        const auto& e = cost[s];
        CHECK(e.windowed_macs == windowed_attention_macs(e.tokens, e.channels, e.window_volume));
        CHECK(e.dense_macs == dense_attention_macs(e.dense_tokens, e.channels));
    }
    CHECK(cost[0].window == cube(7));
    CHECK(cost[0].grid == cube(21));
    CHECK(cost[3].window == cube(2));
    CHECK(cost[3].windowed_macs == cost[3].dense_macs);
}
