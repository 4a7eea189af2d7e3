#include "swincross/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace swincross {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

namespace {
thread_local bool g_grad_enabled = true;
thread_local MacCounter* g_mac_counter = nullptr;
}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

MacCounter::MacCounter() : parent_(g_mac_counter) { g_mac_counter = this; }
MacCounter::~MacCounter() { g_mac_counter = parent_; }

void MacCounter::add(std::uint64_t macs) {
    for (auto* c = g_mac_counter; c != nullptr; c = c->parent_) c->count_ += macs;
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<Node<T>>()) {
    node_->data.assign(shape_numel(shape), fill);
    node_->shape = std::move(shape);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : node_(std::make_shared<Node<T>>()) {
    if (shape_numel(shape) != values.size()) {
        throw DimensionError("Tensor: shape " + shape_to_string(shape) + " needs " +
                             std::to_string(shape_numel(shape)) + " values, got " +
                             std::to_string(values.size()));
    }
    node_->shape = std::move(shape);
    node_->data = std::move(values);
}

template <typename T>
Tensor<T> Tensor<T>::from_node(std::shared_ptr<Node<T>> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
}

template <typename T>
const Shape& Tensor<T>::shape() const {
    if (!node_) throw DimensionError("Tensor: use of undefined tensor");
    return node_->shape;
}

template <typename T>
std::size_t Tensor<T>::dim(std::ptrdiff_t axis) const {
    const auto& s = shape();
    const auto r = static_cast<std::ptrdiff_t>(s.size());
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= r) {
        throw DimensionError("Tensor::dim: axis out of range for shape " + shape_to_string(s));
    }
    return s[static_cast<std::size_t>(axis)];
}

template <typename T>
std::size_t Tensor<T>::numel() const {
    return defined() ? node_->data.size() : 0;
}

template <typename T>
std::span<const T> Tensor<T>::data() const {
    shape();
    return node_->data;
}

template <typename T>
std::span<T> Tensor<T>::mutable_data() {
    shape();
    return node_->data;
}

template <typename T>
T Tensor<T>::item() const {
    if (numel() != 1) {
        throw DimensionError("Tensor::item: expected one element, shape " + shape_to_string(shape()));
    }
    return node_->data[0];
}

template <typename T>
T Tensor<T>::at(const std::vector<std::size_t>& index) const {
    const auto& s = shape();
    if (index.size() != s.size()) throw DimensionError("Tensor::at: rank mismatch");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (index[i] >= s[i]) throw DimensionError("Tensor::at: index out of range");
        flat = flat * s[i] + index[i];
    }
    return node_->data[flat];
}

template <typename T>
bool Tensor<T>::requires_grad() const {
    return node_ && node_->requires_grad;
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
    shape();
    if (!node_->leaf) throw GraphError("set_requires_grad: only leaf tensors can be marked");
    node_->requires_grad = on;
    return *this;
}

template <typename T>
bool Tensor<T>::has_grad() const {
    return node_ && node_->grad.size() == node_->data.size();
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
    if (!has_grad()) throw GraphError("Tensor::grad: no gradient has been computed");
    return node_->grad;
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
    shape();
    return node_->grad_buffer();
}

template <typename T>
void Tensor<T>::zero_grad() {
    if (node_) node_->grad.assign(node_->data.size(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
    return Tensor(shape(), node_->data);
}

template <typename T>
void backward(const Tensor<T>& loss, bool accumulate) {
    if (!loss.defined() || loss.numel() != 1) {
        throw GraphError("backward: loss must have exactly one element, got shape " +
                         (loss.defined() ? shape_to_string(loss.shape()) : std::string("undefined")));
    }
    Node<T>* root = loss.node().get();
    if (root->consumed) throw GraphError("backward: graph already consumed");
    if (!root->requires_grad) throw GraphError("backward: loss does not depend on any tensor requiring grad");

    // Iterative post-order DFS gives a topological order (inputs before users).
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> visited;
    std::vector<std::pair<Node<T>*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node<T>* child = node->inputs[next++].get();
            if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    for (auto* node : order) {
        if (node->leaf) {
            if (!accumulate) node->grad.assign(node->data.size(), T(0));
            else node->grad_buffer();
        } else {
            node->grad.assign(node->data.size(), T(0));
        }
    }
    root->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* node = *it;
        if (!node->leaf && node->backward_fn) node->backward_fn(*node);
    }
    for (auto* node : order) {
        if (node->leaf) continue;
        node->backward_fn = nullptr;
        node->inputs.clear();
        node->grad.clear();
        node->grad.shrink_to_fit();
        node->consumed = true;
    }
}

template <typename T>
bool all_finite(const Tensor<T>& x) {
    for (T v : x.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

namespace detail {

template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data,
                      const std::vector<const Tensor<T>*>& inputs,
                      std::function<void(Node<T>&)> backward_fn) {
    auto node = std::make_shared<Node<T>>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    node->leaf = false;
    node->op = op;
    bool needs = false;
    if (grad_enabled()) {
        for (const auto* in : inputs) {
            if (in != nullptr && in->requires_grad()) needs = true;
        }
    }
    if (needs) {
        node->requires_grad = true;
        for (const auto* in : inputs) {
            // Undefined optional inputs keep their slot so closures can index positionally.
            node->inputs.push_back(in != nullptr && in->defined() ? in->node() : nullptr);
        }
        // Null slots are skipped by the DFS via requires_grad on a dummy node.
        for (auto& in : node->inputs) {
            if (!in) in = std::make_shared<Node<T>>();
        }
        node->backward_fn = std::move(backward_fn);
    }
    return Tensor<T>::from_node(std::move(node));
}

template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> data,
                      std::initializer_list<const Tensor<T>*> inputs,
                      std::function<void(Node<T>&)> backward_fn) {
    return make_result(op, std::move(shape), std::move(data), std::vector<const Tensor<T>*>(inputs),
                       std::move(backward_fn));
}

}  // namespace detail

#define SWINCROSS_INSTANTIATE(T)                                                                    \
    template class Tensor<T>;                                                                       \
    template void backward<T>(const Tensor<T>&, bool);                                              \
    template bool all_finite<T>(const Tensor<T>&);                                                  \
    template Tensor<T> detail::make_result<T>(const char*, Shape, std::vector<T>,                   \
                                              std::initializer_list<const Tensor<T>*>,              \
                                              std::function<void(Node<T>&)>);                       \
    template Tensor<T> detail::make_result<T>(const char*, Shape, std::vector<T>,                   \
                                              const std::vector<const Tensor<T>*>&,                 \
                                              std::function<void(Node<T>&)>);

SWINCROSS_INSTANTIATE(float)
SWINCROSS_INSTANTIATE(double)

#undef SWINCROSS_INSTANTIATE

}  // namespace swincross
