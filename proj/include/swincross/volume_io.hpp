#pragma once

#include <array>
#include <string>
#include <vector>

#include "swincross/tensor.hpp"

// Raw volume format: <stem>.vol.json (shape, dtype "f32", endianness
// "little", spacing, channel_names) next to <stem>.vol.bin holding the values
// row-major over [H, W, D, C] as little-endian 32-bit floats.
namespace swincross {

struct Volume {
    Tensor<float> data;  // [H, W, D, C]
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<std::string> channel_names;
};

// Accepts "<stem>", "<stem>.vol.json" or "<stem>.vol.bin"; returns the stem.
std::string volume_stem(const std::string& path);

void write_volume(const std::string& path, const Volume& volume);
Volume read_volume(const std::string& path);

}  // namespace swincross
