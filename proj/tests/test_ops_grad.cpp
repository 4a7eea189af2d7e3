#include <doctest.h>

#include "test_support.hpp"

using namespace swincross;
using namespace swincross::testing;

namespace {

using Inputs = std::vector<Tensor<double>>;
using Op = std::function<Tensor<double>(const Inputs&)>;

void check_op(const std::string& name, const std::vector<Shape>& shapes, const Op& op, double tol = 1e-6,
              double lo = -1.0, double hi = 1.0) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        Inputs in;
        for (const auto& s : shapes) in.push_back(random_leaf(s, rng, lo, hi));
        const double err = op_grad_error(in, op, seed);
        INFO(name << " seed " << seed << " error " << err);
        CHECK(err < tol);
    }
}

}  // namespace

TEST_CASE("elementwise gradients match finite differences") {
    check_op("add broadcast", {{2, 3, 4}, {3, 1}}, [](const Inputs& x) { return add(x[0], x[1]); });
    check_op("sub broadcast", {{4}, {2, 3, 4}}, [](const Inputs& x) { return sub(x[0], x[1]); });
    check_op("mul broadcast", {{2, 1, 4}, {3, 4}}, [](const Inputs& x) { return mul(x[0], x[1]); });
    check_op("scale", {{5}}, [](const Inputs& x) { return scale(x[0], 2.5); });
    check_op("add_scalar", {{5}}, [](const Inputs& x) { return add_scalar(x[0], -0.5); });
    check_op("gelu", {{3, 7}}, [](const Inputs& x) { return gelu(x[0]); }, 1e-6, -3.0, 3.0);
    check_op("sigmoid", {{3, 7}}, [](const Inputs& x) { return sigmoid(x[0]); }, 1e-6, -6.0, 6.0);
    check_op("leaky_relu", {{3, 7}}, [](const Inputs& x) { return leaky_relu(x[0], 0.01); });
}

TEST_CASE("linear algebra gradients match finite differences") {
    check_op("matmul", {{2, 3, 4}, {4, 5}}, [](const Inputs& x) { return matmul(x[0], x[1]); });
    check_op("matmul batched", {{2, 1, 3, 4}, {3, 4, 2}}, [](const Inputs& x) { return matmul(x[0], x[1]); });
    check_op("transpose_last", {{2, 3, 4}}, [](const Inputs& x) { return transpose_last(x[0]); });
    check_op("linear", {{2, 3, 4}, {4, 5}, {5}}, [](const Inputs& x) { return linear(x[0], x[1], x[2]); });
    check_op("linear no bias", {{6, 4}, {4, 3}},
             [](const Inputs& x) { return linear(x[0], x[1], Tensor<double>()); });
}

TEST_CASE("normalization and softmax gradients match finite differences") {
    check_op("softmax", {{3, 6}}, [](const Inputs& x) { return softmax_lastdim(x[0]); }, 1e-6, -3.0, 3.0);
    check_op("layer_norm", {{4, 6}, {6}, {6}},
             [](const Inputs& x) { return layer_norm(x[0], x[1], x[2], 1e-5); });
    check_op("instance_norm3d", {{3, 2, 3, 2}, {3}, {3}},
             [](const Inputs& x) { return instance_norm3d(x[0], x[1], x[2], 1e-5); });
}

TEST_CASE("convolution gradients match finite differences") {
    check_op("conv3d k3 p1", {{2, 4, 3, 4}, {3, 2, 3, 3, 3}, {3}},
             [](const Inputs& x) { return conv3d(x[0], x[1], x[2], 1, 1); });
    check_op("conv3d k1", {{3, 2, 2, 3}, {2, 3, 1, 1, 1}, {2}},
             [](const Inputs& x) { return conv3d(x[0], x[1], x[2], 1, 0); });
    check_op("conv3d stride 2", {{2, 4, 4, 4}, {2, 2, 2, 2, 2}},
             [](const Inputs& x) { return conv3d(x[0], x[1], Tensor<double>(), 2, 0); });
    check_op("conv_transpose3d", {{3, 2, 1, 2}, {3, 2, 2, 2, 2}, {2}},
             [](const Inputs& x) { return conv_transpose3d(x[0], x[1], x[2]); });
}

TEST_CASE("shape operator gradients match finite differences") {
    check_op("reshape", {{2, 3, 4}}, [](const Inputs& x) { return reshape(x[0], {4, 6}); });
    check_op("permute", {{2, 3, 4}}, [](const Inputs& x) { return permute(x[0], {2, 0, 1}); });
    check_op("concat", {{2, 3}, {2, 2}}, [](const Inputs& x) { return concat(Inputs{x[0], x[1]}, 1); });
    check_op("slice", {{4, 3}}, [](const Inputs& x) { return slice(x[0], 0, 1, 2); });
    check_op("roll", {{3, 4, 2}}, [](const Inputs& x) { return roll(x[0], {-1, 2}); });
    check_op("pad_end", {{2, 3, 2}}, [](const Inputs& x) { return pad_end(x[0], {1, 0, 2}); });
    check_op("gather repeat", {{5}},
             [](const Inputs& x) { return gather(x[0], {2, 3}, {0, 4, 4, 1, 0, 2}); });
    const std::vector<std::size_t> rows{2, 0, 2};
    check_op("index_select_rows", {{3, 2}}, [&](const Inputs& x) { return index_select_rows(x[0], rows); });
}

TEST_CASE("loss gradients match finite differences") {
    std::mt19937_64 rng(11);
    auto target = random_tensor<double>({2, 3, 2}, rng, 0.0, 1.0);
    for (auto& v : target.mutable_data()) v = v > 0.5 ? 1.0 : 0.0;
    check_op("sum", {{2, 3}}, [](const Inputs& x) { return sum(x[0]); });
    check_op("mean", {{2, 3}}, [](const Inputs& x) { return mean(x[0]); });
    check_op("bce_with_logits", {{2, 3, 2}}, [&](const Inputs& x) { return bce_with_logits(x[0], target); }, 1e-6,
             -4.0, 4.0);
    check_op("soft_dice_loss", {{2, 3, 2}}, [&](const Inputs& x) { return soft_dice_loss(x[0], target); }, 1e-6,
             0.0, 1.0);
}

TEST_CASE("grad_check of a sum of squares is exact to rounding") {
    std::mt19937_64 rng(3);
    auto w = random_leaf({4, 5}, rng);
    GradCheckOptions opts;
    opts.seed = 1;
    opts.eps = 1e-4;
    const auto rep = grad_check([&] { return sum(mul(w, w)); }, {{"w", w}}, opts);
    CHECK(rep.max_rel_error < 1e-10);
    CHECK(rep.entries.size() == 20);
}
