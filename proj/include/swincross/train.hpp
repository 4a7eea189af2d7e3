#pragma once

#include <functional>
#include <vector>

#include "swincross/model.hpp"
#include "swincross/phantom.hpp"

namespace swincross {

template <typename T>
class Adam {
   public:
    Adam(ParameterSet<T>& params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    // Applies one update from the grads currently stored on the parameters.
    void step();

   private:
    ParameterSet<T>& params_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// soft Dice on sigmoid(logits) plus mean BCE on logits, equal weights.
template <typename T>
Tensor<T> segmentation_loss(const Tensor<T>& logits, const Tensor<T>& target);

struct TrainOptions {
    std::size_t steps = 500;
    double lr = 2e-3;
    // Called after every step with (step index from 0, loss before the update).
    std::function<void(std::size_t, double)> on_step;
};

struct TrainResult {
    std::vector<double> losses;  // losses[i]: loss at step i, before its update
    double final_dice = 0.0;     // hard Dice at threshold 0.5 after the last update
    Tensor<float> final_prob;    // [H, W, D, 1]
};

// Full-batch training on one sample. Deterministic for a fixed model state.
// Throws NumericError naming the step when the loss stops being finite.
template <typename T>
TrainResult train_toy(Model<T>& model, const VolumeSample& sample, const TrainOptions& options);

}  // namespace swincross
