#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "swincross/errors.hpp"

namespace swincross {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// One value in the recorded computation graph. Tensors are handles onto nodes;
// op results keep their inputs alive until backward() releases the graph.
template <typename T>
struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
    bool leaf = true;
    bool consumed = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward_fn;

    std::vector<T>& grad_buffer() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
        return grad;
    }
};

bool grad_enabled();

// Disables graph recording for the current thread while alive.
class NoGradGuard {
   public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

   private:
    bool previous_;
};

// Counts multiply-adds performed by matmul on the current thread while alive.
// Scopes nest; every active counter sees the same increments.
class MacCounter {
   public:
    MacCounter();
    ~MacCounter();
    MacCounter(const MacCounter&) = delete;
    MacCounter& operator=(const MacCounter&) = delete;

    std::uint64_t count() const { return count_; }

    static void add(std::uint64_t macs);

   private:
    std::uint64_t count_ = 0;
    MacCounter* parent_;
};

template <typename T>
class Tensor {
   public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(Shape shape, T fill = T(0));
    Tensor(Shape shape, std::vector<T> values);

    static Tensor scalar(T value) { return Tensor(Shape{1}, std::vector<T>{value}); }
    static Tensor from_node(std::shared_ptr<Node<T>> node);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    // Negative axes count from the end.
    std::size_t dim(std::ptrdiff_t axis) const;
    std::size_t numel() const;

    std::span<const T> data() const;
    // Direct write access; intended for parameters, optimizers and finite differences.
    std::span<T> mutable_data();
    T item() const;
    T at(const std::vector<std::size_t>& index) const;

    bool requires_grad() const;
    Tensor& set_requires_grad(bool on = true);
    bool has_grad() const;
    std::span<const T> grad() const;
    std::span<T> mutable_grad();
    void zero_grad();

    // Copy of the values with no graph history.
    Tensor detach() const;

    const std::shared_ptr<Node<T>>& node() const { return node_; }

   private:
    std::shared_ptr<Node<T>> node_;
};

template <typename To, typename From>
Tensor<To> convert(const Tensor<From>& x) {
    std::vector<To> out(x.numel());
    auto src = x.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<To>(src[i]);
    return Tensor<To>(x.shape(), std::move(out));
}

// Runs reverse-mode differentiation from a one-element loss. By default the
// grads of every reachable leaf are reset first; pass accumulate=true to add
// onto existing grads instead. The graph is released afterwards, so a second
// call on the same loss raises GraphError.
template <typename T>
void backward(const Tensor<T>& loss, bool accumulate = false);

template <typename T>
bool all_finite(const Tensor<T>& x);

namespace detail {

// Wraps freshly computed values as an op result. The backward closure is kept
// only when recording is enabled and some input requires grad.
template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data,
                      std::initializer_list<const Tensor<T>*> inputs,
                      std::function<void(Node<T>&)> backward_fn);

template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data,
                      const std::vector<const Tensor<T>*>& inputs,
                      std::function<void(Node<T>&)> backward_fn);

}  // namespace detail

}  // namespace swincross
