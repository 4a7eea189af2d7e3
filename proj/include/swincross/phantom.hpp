#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "swincross/tensor.hpp"

namespace swincross {

struct VolumeSample {
    Tensor<float> volume;  // [H, W, D, 2]: channel 0 PET-like, channel 1 CT-like
    Tensor<float> mask;    // [H, W, D], values 0/1
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::vector<std::string> modality_names{"pet", "ct"};
    std::uint64_t seed = 0;
};

// Two-modality phantom on a size^3 grid. The tumour is an anisotropic
// ellipsoid. Channel 0 holds an isotropic Gaussian blob centred off the tumour
// plus N(0, 0.05) noise; channel 1 holds the tumour's boundary shell, two
// distractor shells away from it, and the same noise level. size >= 16.
VolumeSample make_phantom(std::size_t size, std::uint64_t seed);

// Fraction of mask boundary voxels (mask voxels with a face neighbour outside
// the mask) that carry a channel-1 shell value above 0.5.
double shell_boundary_overlap(const VolumeSample& sample);

// Best Dice reachable by thresholding channel 0 alone, over 199 thresholds
// spread evenly between its minimum and maximum.
double pet_threshold_baseline(const VolumeSample& sample);

}  // namespace swincross
