#include <doctest.h>

#include <cmath>
#include <cstring>

#include "swincross/encoder.hpp"
#include "swincross/errors.hpp"
#include "swincross/gradcheck.hpp"
#include "test_support.hpp"

using namespace swincross;
using namespace swincross::testing;

namespace {

SwinCrossConfig small_config(std::size_t window = 2) {
    SwinCrossConfig cfg;
    cfg.embed_dim = 4;
    cfg.depths = {2, 2, 2, 2};
    cfg.heads = {2, 2, 2, 2};
    cfg.window_size = window;
    return cfg;
}

// Initialized parameters plus uniform noise, so norms and biases are generic.
template <typename T>
void randomize(ParameterSet<T>& ps, std::uint64_t seed, double amount = 0.3) {
    ps.initialize(seed);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(-amount, amount);
    for (const auto& p : ps.items()) {
        Tensor<T> t = p.tensor;
        for (auto& v : t.mutable_data()) v += static_cast<T>(u(rng));
    }
}

template <typename T>
std::vector<Parameter<T>> params_matching(const ParameterSet<T>& ps, const std::string& key) {
    std::vector<Parameter<T>> out;
    for (const auto& p : ps.items())
        if (p.name.find(key) != std::string::npos) out.push_back(p);
    return out;
}

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
    return a.shape() == b.shape() && std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(T)) == 0;
}

}  // namespace

TEST_CASE("patch embedding matches a strided-sum oracle") {
    std::mt19937_64 rng(1);
    const auto volume = random_tensor<double>({1, 4, 6, 2}, rng);
    ConvParams<double> p{random_tensor<double>({3, 1, 2, 2, 2}, rng), random_tensor<double>({3}, rng)};
    const auto grid = patch_embed(volume, p);
    REQUIRE(grid.shape() == Shape{2, 3, 1, 3});
    for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t w = 0; w < 3; ++w)
            for (std::size_t c = 0; c < 3; ++c) {
                double s = p.bias.data()[c];
                for (std::size_t a = 0; a < 2; ++a)
                    for (std::size_t b = 0; b < 2; ++b)
                        for (std::size_t e = 0; e < 2; ++e)
                            s += p.weight.at({c, 0, a, b, e}) * volume.at({0, 2 * h + a, 2 * w + b, e});
                CHECK(grid.at({h, w, 0, c}) == doctest::Approx(s).epsilon(1e-13));
            }
    CHECK_THROWS_AS(patch_embed(random_tensor<double>({1, 3, 4, 4}, rng), p), DimensionError);
}

TEST_CASE("patch merging concatenates 2x2x2 neighbourhoods, normalizes and projects") {
    std::mt19937_64 rng(2);
    const std::size_t c = 3;
    const auto grid = random_tensor<double>({4, 2, 2, c}, rng);
    PatchMergingParams<double> p{{random_tensor<double>({8 * c}, rng), random_tensor<double>({8 * c}, rng)},
                                 {random_tensor<double>({8 * c, 2 * c}, rng), Tensor<double>()}};
    const auto out = patch_merging(grid, p);
    REQUIRE(out.shape() == Shape{2, 1, 1, 2 * c});
    for (std::size_t h = 0; h < 2; ++h) {
        std::vector<double> cat(8 * c);
        for (std::size_t dh = 0; dh < 2; ++dh)
            for (std::size_t dw = 0; dw < 2; ++dw)
                for (std::size_t dd = 0; dd < 2; ++dd)
                    for (std::size_t k = 0; k < c; ++k)
                        cat[(dh * 4 + dw * 2 + dd) * c + k] = grid.at({2 * h + dh, dw, dd, k});
        double mu = 0.0, var = 0.0;
        for (double v : cat) mu += v;
        mu /= static_cast<double>(cat.size());
        for (double v : cat) var += (v - mu) * (v - mu);
        var /= static_cast<double>(cat.size());
        for (std::size_t i = 0; i < cat.size(); ++i)
            cat[i] = (cat[i] - mu) / std::sqrt(var + 1e-5) * p.norm.gamma.data()[i] + p.norm.beta.data()[i];
        for (std::size_t o = 0; o < 2 * c; ++o) {
            double s = 0.0;
            for (std::size_t i = 0; i < cat.size(); ++i) s += cat[i] * p.reduction.weight.at({i, o});
            CHECK(out.at({h, 0, 0, o}) == doctest::Approx(s).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(patch_merging(random_tensor<double>({3, 2, 2, c}, rng), p), DimensionError);
}

TEST_CASE("block pair gradients match finite differences") {
    const auto cfg = small_config(2);
    for (const bool cross : {false, true}) {
        for (std::uint64_t seed = 0; seed < 2; ++seed) {
            CAPTURE(cross);
            CAPTURE(seed);
            ParameterSet<double> ps;
            const auto enc = register_encoder(cfg, ps);
            randomize(ps, seed);
            std::mt19937_64 rng(seed + 40);
            auto g1 = random_leaf({4, 4, 4, 8}, rng);
            auto g2 = random_leaf({4, 4, 4, 8}, rng);
            const auto probe = random_tensor<double>({4, 4, 4, 8}, rng);
            auto params = params_matching(ps, "branch0.stage0.pair0");
            if (cross) {
                for (auto& p : params_matching(ps, "branch1.stage0.pair0")) params.push_back(p);
            }
            params.push_back({"g1", g1, Init::zeros});
            params.push_back({"g2", g2, Init::zeros});
            const auto& p1 = enc.branches[0].blocks[0][0];
            const auto& p2 = enc.branches[1].blocks[0][0];
            auto f = [&] {
                if (!cross) return sum(mul(self_block_pair(g1, p1, cfg), probe));
                const auto [y1, y2] = cma_block_pair(g1, g2, p1, p2, cfg);
                return add(sum(mul(y1, probe)), sum(mul(y2, probe)));
            };
            GradCheckOptions opt;
            opt.eps = 3e-5;
            opt.coords_per_param = 8;
            opt.seed = seed;
            const auto report = grad_check(f, params, opt);
            INFO(report.worst.param);
            CHECK(report.max_rel_error < 1e-6);
        }
    }
}

TEST_CASE("tied cross-modal block pair on identical grids is the self-attention block pair") {
    const auto cfg = small_config(2);
    ParameterSet<double> ps;
    const auto enc = register_encoder(cfg, ps);
    randomize(ps, 3);
    std::mt19937_64 rng(3);
    const auto g = random_tensor<double>({4, 4, 4, 8}, rng);
    const auto& p = enc.branches[0].blocks[0][0];
    const auto self = self_block_pair(g, p, cfg);
    const auto [y1, y2] = cma_block_pair(g, g, p, p, cfg);
    for (std::size_t i = 0; i < self.numel(); ++i) {
        CHECK(std::abs(y1.data()[i] - self.data()[i]) < 1e-12);
        CHECK(std::abs(y2.data()[i] - self.data()[i]) < 1e-12);
    }
}

TEST_CASE("shifted layer on a grid no larger than the window is the unshifted layer") {
    const auto cfg = small_config(4);
    ParameterSet<double> ps;
    const auto enc = register_encoder(cfg, ps);
    randomize(ps, 4);
    std::mt19937_64 rng(4);
    const auto g = random_tensor<double>({4, 2, 4, 8}, rng);
    const auto& layer = enc.branches[0].blocks[0][0].windowed;
    CHECK(bitwise_equal(self_attention_layer(g, layer, cfg, true), self_attention_layer(g, layer, cfg, false)));
}

TEST_CASE("stage residual wiring with identity blocks") {
    auto cfg = small_config(2);
    ParameterSet<double> ps;
    const auto enc = register_encoder(cfg, ps);
    randomize(ps, 5);
    for (const auto& p : ps.items()) {
        if (p.name.find(".attn.proj.") != std::string::npos || p.name.find(".mlp.fc2.") != std::string::npos) {
            Tensor<double> t = p.tensor;
            for (auto& v : t.mutable_data()) v = 0.0;
        }
    }
    std::mt19937_64 rng(5);
    BranchState<double> state;
    state.grids = {random_tensor<double>({4, 4, 4, 4}, rng), random_tensor<double>({4, 4, 4, 4}, rng)};
    const auto r = run_stage(state, enc, cfg);
    const auto x1 = patch_merging(state.grids[0], enc.branches[0].merge[0]);
    const auto x2 = patch_merging(state.grids[1], enc.branches[1].merge[0]);
    CHECK(r.state.stage == 1);
    CHECK(bitwise_equal(r.state.grids[0], add(x1, x1)));
    CHECK(bitwise_equal(r.state.grids[1], add(x2, x2)));
    CHECK(bitwise_equal(r.skip, add(x1, x2)));

    cfg.block_mode = BlockMode::single_stream_baseline;
    ParameterSet<double> bs;
    const auto base = register_encoder(cfg, bs);
    randomize(bs, 6);
    BranchState<double> single;
    single.grids = {random_tensor<double>({4, 4, 4, 4}, rng)};
    const auto rb = run_stage(single, base, cfg);
    CHECK(bitwise_equal(rb.skip, rb.state.grids[0]));
    state.stage = 4;
    CHECK_THROWS_AS(run_stage(state, enc, cfg), ConfigError);
}

TEST_CASE("encoder pyramid shapes and layer count") {
    SwinCrossConfig cfg;
    cfg.embed_dim = 6;
    cfg.heads = {1, 2, 4, 8};
    ParameterSet<float> ps;
    const auto enc = register_encoder(cfg, ps);
    ps.initialize(0);
    std::mt19937_64 rng(7);
    const auto pyr = encode(random_tensor<float>({64, 64, 64, 2}, rng), enc, cfg);
    const std::array<Shape, 6> expect{Shape{64, 64, 64, 2}, Shape{32, 32, 32, 6}, Shape{16, 16, 16, 12},
                                      Shape{8, 8, 8, 24},   Shape{4, 4, 4, 48},   Shape{2, 2, 2, 96}};
    for (std::size_t i = 0; i < 6; ++i) CHECK(pyr.levels[i].shape() == expect[i]);
    CHECK(cfg.encoder_layer_count() == 10);
    CHECK(SwinCrossConfig::tiny().encoder_layer_count() == 8);
}

TEST_CASE("encoder pads volumes to the working multiple") {
    const auto cfg = SwinCrossConfig::tiny();
    ParameterSet<float> ps;
    const auto enc = register_encoder(cfg, ps);
    ps.initialize(1);
    std::mt19937_64 rng(8);
    const auto pyr = encode(random_tensor<float>({20, 16, 33, 2}, rng), enc, cfg);
    CHECK(pyr.input_resolution == Resolution{20, 16, 33});
    CHECK(pyr.levels[0].shape() == Shape{32, 32, 64, 2});
    CHECK(pyr.levels[5].shape() == Shape{1, 1, 2, 16 * cfg.embed_dim});
    CHECK_THROWS_AS(encode(random_tensor<float>({16, 16, 16, 3}, rng), enc, cfg), DimensionError);
}
