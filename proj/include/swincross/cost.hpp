#pragma once

#include <cstdint>
#include <vector>

#include "swincross/config.hpp"
#include "swincross/windowing.hpp"

namespace swincross {

// Multiply-adds of one attention layer on one branch over T tokens of width C:
// QKV and output projections 4 T C^2, plus Q K^T and A V over windows of N
// tokens, 2 N T C.
std::uint64_t windowed_attention_macs(std::uint64_t tokens, std::uint64_t channels, std::uint64_t window_volume);
std::uint64_t dense_attention_macs(std::uint64_t tokens, std::uint64_t channels);

struct StageCost {
    std::size_t stage = 0;  // 0-based
    Resolution resolution{};  // token grid of the stage
    Resolution grid{};      // token grid after padding to the window multiple
    Resolution window{};    // effective window
    std::uint64_t tokens = 0;  // of the padded grid
    std::uint64_t dense_tokens = 0;
    std::uint64_t channels = 0;
    std::uint64_t window_volume = 0;
    std::uint64_t windowed_macs = 0;
    std::uint64_t dense_macs = 0;  // over the unpadded grid
};

// One attention layer per stage for a volume of the given spatial size.
std::vector<StageCost> attention_cost(const SwinCrossConfig& cfg, const Resolution& volume);

enum class AttentionMode { windowed, dense };

// Runs one self-attention layer on a random grid of the given resolution
// (a multiple of the window when windowed) and returns the multiply-adds
// counted by matmul. dense treats the whole grid as a single window.
std::uint64_t measure_attention_macs(const Resolution& grid, std::size_t channels, std::size_t heads,
                                     const Resolution& window, AttentionMode mode, std::uint64_t seed = 0);

}  // namespace swincross
