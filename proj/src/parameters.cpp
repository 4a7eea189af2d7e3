#include "swincross/parameters.hpp"

#include <cmath>
#include <random>

namespace swincross {

template <typename T>
Tensor<T> ParameterSet<T>::add(const std::string& name, Shape shape, Init init) {
    if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    Tensor<T> t(std::move(shape), init == Init::ones ? T(1) : T(0));
    t.set_requires_grad(true);
    index_.emplace(name, items_.size());
    items_.push_back({name, t, init});
    return t;
}

template <typename T>
const Tensor<T>& ParameterSet<T>::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return items_[it->second].tensor;
}

template <typename T>
std::size_t ParameterSet<T>::total_count() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += p.tensor.numel();
    return n;
}

template <typename T>
void ParameterSet<T>::initialize(std::uint64_t seed, double stddev) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, stddev);
    for (auto& p : items_) {
        auto data = p.tensor.mutable_data();
        for (auto& v : data) {
            switch (p.init) {
                case Init::zeros: v = T(0); break;
                case Init::ones: v = T(1); break;
                case Init::trunc_normal: {
                    double x;
                    do {
                        x = normal(rng);
                    } while (std::abs(x) > 2.0 * stddev);
                    v = static_cast<T>(x);
                    break;
                }
            }
        }
    }
}

template <typename T>
void ParameterSet<T>::zero_grad() {
    for (auto& p : items_) p.tensor.zero_grad();
}

template class ParameterSet<float>;
template class ParameterSet<double>;

}  // namespace swincross
