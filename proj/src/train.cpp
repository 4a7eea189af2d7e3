#include "swincross/train.hpp"

#include <cmath>

#include "swincross/metrics.hpp"
#include "swincross/ops.hpp"

namespace swincross {

template <typename T>
Adam<T>::Adam(ParameterSet<T>& params, double lr, double beta1, double beta2, double eps)
    : params_(params), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_.items()) {
        m_.emplace_back(p.tensor.numel(), 0.0);
        v_.emplace_back(p.tensor.numel(), 0.0);
    }
}

template <typename T>
void Adam<T>::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const auto& items = params_.items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        Tensor<T> p = items[i].tensor;
        if (!p.has_grad()) continue;
        auto g = p.grad();
        auto w = p.mutable_data();
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double gk = static_cast<double>(g[k]);
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * gk;
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * gk * gk;
            const double update = lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
            w[k] = static_cast<T>(static_cast<double>(w[k]) - update);
        }
    }
}

template <typename T>
Tensor<T> segmentation_loss(const Tensor<T>& logits, const Tensor<T>& target) {
    return add(soft_dice_loss(sigmoid(logits), target), bce_with_logits(logits, target));
}

template <typename T>
TrainResult train_toy(Model<T>& model, const VolumeSample& sample, const TrainOptions& options) {
    if (options.steps == 0) throw ConfigError("train_toy: steps must be at least 1");
    const auto volume = convert<T>(sample.volume);
    const auto& ms = sample.mask.shape();
    const auto target = convert<T>(Tensor<float>({ms[0], ms[1], ms[2], 1}, std::vector<float>(sample.mask.data().begin(), sample.mask.data().end())));
    Adam<T> adam(model.parameters(), options.lr);
    TrainResult result;
    for (std::size_t step = 0; step < options.steps; ++step) {
        auto loss = segmentation_loss(model.forward_logits(volume), target);
        const double value = static_cast<double>(loss.item());
        if (!std::isfinite(value)) throw NumericError("train_toy: non-finite loss at step " + std::to_string(step));
        backward(loss);
        adam.step();
        result.losses.push_back(value);
        if (options.on_step) options.on_step(step, value);
    }
    NoGradGuard no_grad;
    result.final_prob = convert<float>(model.forward(volume));
    result.final_dice = dice(threshold(result.final_prob, 0.5), convert<float>(target));
    return result;
}

template class Adam<float>;
template class Adam<double>;
template Tensor<float> segmentation_loss<float>(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> segmentation_loss<double>(const Tensor<double>&, const Tensor<double>&);
template TrainResult train_toy<float>(Model<float>&, const VolumeSample&, const TrainOptions&);
template TrainResult train_toy<double>(Model<double>&, const VolumeSample&, const TrainOptions&);

}  // namespace swincross
