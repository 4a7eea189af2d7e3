#include "swincross/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace swincross {

double dice(const Tensor<float>& pred, const Tensor<float>& truth) {
    if (pred.shape() != truth.shape()) {
        throw DimensionError("dice: shape mismatch " + shape_to_string(pred.shape()) + " vs " +
                             shape_to_string(truth.shape()));
    }
    auto a = pred.data();
    auto b = truth.data();
    std::size_t inter = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((a[i] != 0.0f && a[i] != 1.0f) || (b[i] != 0.0f && b[i] != 1.0f)) {
            throw std::invalid_argument("dice: non-binary value at flat index " + std::to_string(i));
        }
        const bool x = a[i] == 1.0f, y = b[i] == 1.0f;
        na += x;
        nb += y;
        inter += x && y;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

Tensor<float> threshold(const Tensor<float>& prob, double t) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("threshold: t must lie in (0, 1), got " + std::to_string(t));
    auto p = prob.data();
    std::vector<float> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = static_cast<double>(p[i]) >= t ? 1.0f : 0.0f;
    return Tensor<float>(prob.shape(), std::move(out));
}

std::vector<std::vector<std::size_t>> FoldSplit::folds() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
    return out;
}

FoldSplit make_folds(const std::vector<std::string>& ids, std::size_t k, std::uint64_t seed) {
    if (k == 0 || k > ids.size()) {
        throw std::invalid_argument("make_folds: k = " + std::to_string(k) + " must be between 1 and the " +
                                    std::to_string(ids.size()) + " ids");
    }
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    FoldSplit split;
    split.k = k;
    split.assignment.assign(ids.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) split.assignment[order[pos]] = pos % k;
    return split;
}

}  // namespace swincross
