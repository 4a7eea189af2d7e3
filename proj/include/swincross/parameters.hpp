#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "swincross/tensor.hpp"

namespace swincross {

enum class Init { trunc_normal, zeros, ones };

template <typename T>
struct Parameter {
    std::string name;  // dot-separated path, unique within a model
    Tensor<T> tensor;
    Init init = Init::zeros;
};

// Named parameters in registration order. Module structs hold handles onto the
// same tensors, so writes through either side are shared.
template <typename T>
class ParameterSet {
   public:
    Tensor<T> add(const std::string& name, Shape shape, Init init);

    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    const Tensor<T>& get(const std::string& name) const;
    const std::vector<Parameter<T>>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    std::size_t total_count() const;

    // Draws every parameter in enumeration order from one seeded stream:
    // truncated normal (cut at 2 std) for trunc_normal, constants otherwise.
    void initialize(std::uint64_t seed, double stddev = 0.02);

    void zero_grad();

   private:
    std::vector<Parameter<T>> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace swincross
