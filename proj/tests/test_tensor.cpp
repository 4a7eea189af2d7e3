#include <doctest.h>

#include <cmath>
#include <cstring>

#include "swincross/errors.hpp"
#include "test_support.hpp"

using namespace swincross;
using namespace swincross::testing;

TEST_CASE("sum(w * x) has gradient x") {
    std::mt19937_64 rng(1);
    auto w = random_leaf({3, 4}, rng);
    const auto x = random_tensor<double>({3, 4}, rng);
    backward(sum(mul(w, x)));
    REQUIRE(w.has_grad());
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(w.grad()[i] == x.data()[i]);
}

TEST_CASE("sum(w^2) has gradient 2w") {
    std::mt19937_64 rng(2);
    auto w = random_leaf({5}, rng);
    backward(sum(mul(w, w)));
    for (std::size_t i = 0; i < w.numel(); ++i) CHECK(w.grad()[i] == doctest::Approx(2 * w.data()[i]).epsilon(1e-15));
}

TEST_CASE("backward resets grads unless asked to accumulate") {
    std::mt19937_64 rng(3);
    auto w = random_leaf({4}, rng);
    backward(sum(w));
    backward(sum(w));
    for (double g : w.grad()) CHECK(g == 1.0);
    backward(sum(w), true);
    for (double g : w.grad()) CHECK(g == 2.0);
}

TEST_CASE("backward rejects non-scalar losses and consumed graphs") {
    std::mt19937_64 rng(4);
    auto w = random_leaf({3}, rng);
    CHECK_THROWS_AS(backward(scale(w, 2.0)), GraphError);
    const auto loss = sum(mul(w, w));
    backward(loss);
    CHECK_THROWS_AS(backward(loss), GraphError);
}

TEST_CASE("no-grad scope records no graph") {
    std::mt19937_64 rng(5);
    auto w = random_leaf({3}, rng);
    Tensor<double> y;
    {
        NoGradGuard guard;
        CHECK_FALSE(grad_enabled());
        y = sum(mul(w, w));
    }
    CHECK(grad_enabled());
    CHECK_FALSE(y.requires_grad());
    CHECK_THROWS_AS(backward(y), GraphError);
}

TEST_CASE("requires_grad can only be set on leaves") {
    std::mt19937_64 rng(6);
    auto w = random_leaf({3}, rng);
    auto y = scale(w, 2.0);
    CHECK(y.requires_grad());
    CHECK_THROWS(y.set_requires_grad(false));
}

TEST_CASE("shared subexpressions accumulate gradient from every use") {
    std::mt19937_64 rng(7);
    auto w = random_leaf({4}, rng);
    const auto y = scale(w, 3.0);
    backward(sum(add(y, mul(y, y))));
    for (std::size_t i = 0; i < 4; ++i) {
        const double expect = 3.0 + 2.0 * 9.0 * w.data()[i];
        CHECK(w.grad()[i] == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("tensor construction validates value counts and axes") {
    CHECK_THROWS_AS(Tensor<float>({2, 3}, std::vector<float>(5)), DimensionError);
    const Tensor<float> t({2, 3, 4});
    CHECK(t.dim(-1) == 4);
    CHECK(t.dim(0) == 2);
    CHECK_THROWS_AS(t.dim(3), DimensionError);
    CHECK(t.at({1, 2, 3}) == 0.0f);
}

TEST_CASE("operators are bitwise deterministic") {
    std::mt19937_64 rng(8);
    const auto a = random_tensor<float>({2, 5, 6}, rng);
    const auto b = random_tensor<float>({6, 3}, rng);
    const auto r1 = softmax_lastdim(gelu(matmul(a, b)));
    const auto r2 = softmax_lastdim(gelu(matmul(a, b)));
    CHECK(std::memcmp(r1.data().data(), r2.data().data(), r1.numel() * sizeof(float)) == 0);
}

TEST_CASE("softmax rows are distributions") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        const auto x = random_tensor<double>({7, 9}, rng, -20.0, 20.0);
        const auto y = softmax_lastdim(x);
        for (std::size_t r = 0; r < 7; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < 9; ++c) {
                const double v = y.at({r, c});
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                s += v;
            }
            CHECK(std::abs(s - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("reshape and permute round trips are bitwise") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(seed);
        const auto x = random_tensor<float>({2, 3, 4, 5}, rng);
        const auto back = permute(permute(x, {3, 1, 0, 2}), {2, 1, 3, 0});
        const auto flat = reshape(reshape(x, {6, 20}), {2, 3, 4, 5});
        CHECK(back.shape() == x.shape());
        CHECK(std::memcmp(back.data().data(), x.data().data(), x.numel() * sizeof(float)) == 0);
        CHECK(std::memcmp(flat.data().data(), x.data().data(), x.numel() * sizeof(float)) == 0);
    }
}

TEST_CASE("matmul counts batch * m * k * n multiply-adds") {
    std::mt19937_64 rng(9);
    const auto a = random_tensor<float>({3, 4, 5}, rng);
    const auto b = random_tensor<float>({5, 6}, rng);
    MacCounter outer;
    {
        MacCounter inner;
        matmul(a, b);
        CHECK(inner.count() == 3u * 4 * 5 * 6);
    }
    matmul(a, b);
    CHECK(outer.count() == 2u * 3 * 4 * 5 * 6);
}

TEST_CASE("convert between precisions") {
    const Tensor<double> d({3}, std::vector<double>{0.5, -1.25, 3.0});
    const auto f = convert<float>(d);
    CHECK(f.data()[1] == -1.25f);
    CHECK(convert<double>(f).data()[2] == 3.0);
}

TEST_CASE("all_finite detects NaN and infinity") {
    Tensor<float> t({3}, std::vector<float>{1.0f, 2.0f, 3.0f});
    CHECK(all_finite(t));
    t.mutable_data()[1] = std::nanf("");
    CHECK_FALSE(all_finite(t));
    t.mutable_data()[1] = INFINITY;
    CHECK_FALSE(all_finite(t));
}
