#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swincross/tensor.hpp"

namespace swincross {

// 2|A n B| / (|A| + |B|) over binary grids of equal shape; 1.0 when both are
// empty. Throws DimensionError on shape mismatch and std::invalid_argument on
// values other than 0 and 1.
double dice(const Tensor<float>& pred, const Tensor<float>& truth);

// 1 where prob >= t, else 0. t must lie in (0, 1).
Tensor<float> threshold(const Tensor<float>& prob, double t = 0.5);

struct FoldSplit {
    std::size_t k = 0;
    std::vector<std::size_t> assignment;  // fold of ids[i]

    std::vector<std::vector<std::size_t>> folds() const;  // indices into ids, per fold
};

// Seeded shuffle, then position i goes to fold i mod k.
FoldSplit make_folds(const std::vector<std::string>& ids, std::size_t k = 5, std::uint64_t seed = 0);

}  // namespace swincross
