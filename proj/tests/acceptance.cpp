// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// usage: swincross_acceptance <swincross-cli> <work-dir> [criterion ...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "swincross/attention.hpp"
#include "swincross/checkpoint.hpp"
#include "swincross/encoder.hpp"
#include "swincross/cost.hpp"
#include "swincross/fileutil.hpp"
#include "swincross/metrics.hpp"
#include "swincross/model.hpp"
#include "swincross/volume_io.hpp"
#include "swincross/windowing.hpp"
#include "test_support.hpp"

using namespace swincross;
using namespace swincross::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

template <typename T>
bool bitwise_equal(const Tensor<T>& a, const Tensor<T>& b) {
    return a.shape() == b.shape() && std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(T)) == 0;
}

double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

struct CliRun {
    int exit_code = -1;
    double seconds = 0.0;
    nlohmann::json manifest;
};

// Runs the CLI with output captured in <log>, returning its manifest.
CliRun run_cli(const std::string& cli, const std::string& args, const fs::path& manifest, const fs::path& log) {
    const std::string cmd = "\"" + cli + "\" " + args + " --manifest \"" + manifest.string() + "\" > \"" +
                            log.string() + "\" 2>&1";
    const auto start = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (fs::exists(manifest)) r.manifest = nlohmann::json::parse(read_file(manifest.string()));
    return r;
}

Outcome gradient_correctness(const std::string& cli, const fs::path& work) {
    const auto r = run_cli(cli, "gradcheck --seed 0 --count 5 --tol 1e-4", work / "gradcheck.json",
                           work / "gradcheck.log");
    if (r.manifest.is_null() || !r.manifest["metrics"].contains("max_rel_error")) {
        return {false, "gradcheck produced no metrics (exit " + std::to_string(r.exit_code) + ")"};
    }
    const double err = r.manifest["metrics"]["max_rel_error"].get<double>();
    const bool pass = r.exit_code == 0 && err <= 1e-4 && r.seconds < 300.0;
    return {pass, "max relative error " + fmt("%.3e", err) + " (tol 1e-4) over 5 seeds at " +
                      r.manifest["metrics"]["worst"].get<std::string>() + ", " + fmt("%.1f", r.seconds) +
                      " s (limit 300 s)"};
}

Outcome cma_degeneration() {
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t heads = 1 + rng() % 3, c = heads * (1 + rng() % 4);
        const Resolution win{1 + rng() % 3, 1 + rng() % 3, 1 + rng() % 3};
        const std::size_t m = std::max({win[0], win[1], win[2]});
        AttentionParams<double> p;
        p.heads = heads;
        p.window_size = m;
        p.qkv_weight = random_tensor<double>({c, 3 * c}, rng);
        p.q_bias = random_tensor<double>({c}, rng);
        p.v_bias = random_tensor<double>({c}, rng);
        p.proj_weight = random_tensor<double>({c, c}, rng);
        p.proj_bias = random_tensor<double>({c}, rng);
        if (trial % 2 == 0) p.rel_bias_table = random_tensor<double>({(2 * m - 1) * (2 * m - 1) * (2 * m - 1), heads}, rng);
        const std::size_t nw = 1 + rng() % 4;
        WindowBatch<double> s{random_tensor<double>({nw, win[0] * win[1] * win[2], c}, rng), win,
                              {win[0] * nw, win[1], win[2]}};
        const auto self = window_self_attention(s, p, Tensor<double>());
        const auto [a1, a2] = cross_modal_window_attention(s, s, p, p, Tensor<double>());
        worst = std::max({worst, max_abs_diff(a1.tokens, self.tokens), max_abs_diff(a2.tokens, self.tokens)});
    }
    return {worst <= 1e-6, "max |CMA - W-MSA| " + fmt("%.3e", worst) + " over 20 configurations (tol 1e-6)"};
}

Outcome shift_mask() {
    const Resolution res{4, 4, 4};
    const std::size_t m = 2, s = 1;
    std::mt19937_64 rng(3);
    AttentionParams<double> p;
    p.heads = 2;
    p.window_size = m;
    p.qkv_weight = random_tensor<double>({4, 12}, rng, -3.0, 3.0);
    p.proj_weight = random_tensor<double>({4, 4}, rng);
    p.rel_bias_table = random_tensor<double>({27, 2}, rng);
    const auto grid = random_tensor<double>({4, 4, 4, 4}, rng, -3.0, 3.0);
    const auto mask = compute_shift_mask<double>(res, m, s);
    Tensor<double> weights;
    window_self_attention(window_partition(cyclic_shift(grid, cube(s)), m), p, mask, &weights);
    double worst = 0.0;
    std::size_t cross_pairs = 0, mask_errors = 0;
    for (std::size_t w = 0; w < 8; ++w) {
        const Resolution origin{(w / 4) * m, ((w / 2) % 2) * m, (w % 2) * m};
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j) {
                const Resolution a{origin[0] + i / 4, origin[1] + (i / 2) % 2, origin[2] + i % 2};
                const Resolution b{origin[0] + j / 4, origin[1] + (j / 2) % 2, origin[2] + j % 2};
                bool same = true;
                for (int ax = 0; ax < 3; ++ax) same &= (a[ax] + s >= res[ax]) == (b[ax] + s >= res[ax]);
                mask_errors += (mask.at({w, i, j}) == 0.0) != same;
                if (same) continue;
                ++cross_pairs;
                for (std::size_t h = 0; h < 2; ++h) worst = std::max(worst, weights.at({w, h, i, j}));
            }
    }
    return {worst < 1e-12 && mask_errors == 0 && cross_pairs > 0,
            "max cross-region weight " + fmt("%.3e", worst) + " over " + std::to_string(cross_pairs) +
                " pairs, " + std::to_string(mask_errors) + " mask entries disagree with the region oracle"};
}

Outcome roundtrips(const fs::path& work) {
    std::size_t failures = 0;
    SwinCrossConfig small;
    small.embed_dim = 4;
    small.depths = {2, 2, 2, 2};
    small.heads = {1, 2, 4, 8};
    small.window_size = 2;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t m = 1 + seed % 3;
        const auto g = random_tensor<float>({2 * m, m, 3 * m, 1 + seed % 3}, rng);
        failures += !bitwise_equal(window_reverse(window_partition(g, m)), g);
        const Resolution sh{seed % (2 * m), 0, (seed + 1) % (3 * m)};
        failures += !bitwise_equal(reverse_cyclic_shift(cyclic_shift(g, sh), sh), g);
        const Resolution r{g.dim(0), g.dim(1), g.dim(2)};
        failures += !bitwise_equal(crop_to(pad_to_window_multiple(g, 4), r), g);

        Volume v;
        v.data = random_tensor<float>({3, 4, 5, 2}, rng, -1e4, 1e4);
        const auto stem = (work / ("roundtrip_vol" + std::to_string(seed))).string();
        write_volume(stem, v);
        failures += !bitwise_equal(read_volume(stem).data, v.data);

        const auto model = Model<float>::build(small, seed);
        const auto dir = (work / ("roundtrip_ckpt" + std::to_string(seed))).string();
        save_checkpoint(model, dir);
        const auto loaded = load_checkpoint<float>(dir);
        const auto& a = model.parameters().items();
        const auto& b = loaded.parameters().items();
        for (std::size_t i = 0; i < a.size(); ++i) failures += !bitwise_equal(a[i].tensor, b[i].tensor);
        const auto x = random_tensor<float>({16, 16, 16, 2}, rng);
        failures += !bitwise_equal(model.forward(x), loaded.forward(x));
    }
    return {failures == 0, "partition, shift, pad/crop, volume and checkpoint over 10 seeds each: " +
                               std::to_string(failures) + " mismatches"};
}

Outcome pyramid_shapes() {
    const SwinCrossConfig cfg;
    ParameterSet<float> ps;
    const auto enc = register_encoder(cfg, ps);
    ps.initialize(0);
    std::mt19937_64 rng(5);
    const auto pyr = encode(random_tensor<float>({64, 64, 64, 2}, rng), enc, cfg);
    const std::array<Shape, 6> expect{Shape{64, 64, 64, 2}, Shape{32, 32, 32, 48}, Shape{16, 16, 16, 96},
                                      Shape{8, 8, 8, 192},  Shape{4, 4, 4, 384},    Shape{2, 2, 2, 768}};
    bool ok = cfg.encoder_layer_count() == 10;
    std::string shapes;
    for (std::size_t i = 0; i < 6; ++i) {
        ok &= pyr.levels[i].shape() == expect[i];
        shapes += (i ? " " : "") + shape_to_string(pyr.levels[i].shape());
    }
    return {ok, "skips " + shapes + ", encoder layers " + std::to_string(cfg.encoder_layer_count())};
}

Outcome swap_symmetry() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto model = Model<double>::build(SwinCrossConfig::tiny(), seed);
        const auto swapped = model.with_swapped_modalities();
        std::mt19937_64 rng(seed);
        const auto x = random_tensor<double>({16, 16, 16, 2}, rng);
        const auto xs = concat<double>({slice(x, 3, 1, 1), slice(x, 3, 0, 1)}, 3);
        worst = std::max(worst, max_abs_diff(model.forward(x), swapped.forward(xs)));
    }
    return {worst <= 1e-6, "max probability change " + fmt("%.3e", worst) + " over 3 seeds (tol 1e-6)"};
}

Outcome toy_overfit(const std::string& cli, const fs::path& work) {
    const auto out = work / "train_toy";
    const auto r = run_cli(cli, "train-toy --size 32 --steps 500 --seed 0 --out \"" + out.string() + "\"",
                           out.string() + ".json", work / "train_toy.log");
    if (r.manifest.is_null() || !r.manifest["metrics"].contains("final_dice")) {
        return {false, "train-toy produced no Dice (exit " + std::to_string(r.exit_code) + ")"};
    }
    const double d = r.manifest["metrics"]["final_dice"].get<double>();
    return {r.exit_code == 0 && d >= 0.95 && r.seconds < 1800.0,
            "final Dice " + fmt("%.4f", d) + " (need >= 0.95), " + fmt("%.1f", r.seconds) + " s (limit 1800 s)"};
}

Outcome ablation(const std::string& cli, const fs::path& work) {
    std::string detail;
    bool ok = true;
    for (const std::string mode : {"cross_modal", "single_stream_baseline"}) {
        const auto out = work / ("ablate_" + mode);
        const auto r = run_cli(cli,
                               "ablate --mode " + mode + " --size 32 --steps 200 --seed 0 --out \"" + out.string() +
                                   "\"",
                               out / "run_manifest.json", work / ("ablate_" + mode + ".log"));
        const bool has = !r.manifest.is_null() && r.manifest["metrics"].contains("final_dice") &&
                         r.manifest["metrics"].value("block_mode", "") == mode;
        ok &= r.exit_code == 0 && has;
        detail += (detail.empty() ? "" : ", ") + mode + " Dice " +
                  (has ? fmt("%.4f", r.manifest["metrics"]["final_dice"].get<double>()) : std::string("missing"));
    }
    return {ok, detail + " (seed 0, 200 steps each, no ordering asserted)"};
}

Outcome attention_cost_check() {
    bool ok = true;
    std::string detail;
    for (const std::size_t n : {4u, 8u}) {
        const std::uint64_t t = n * n * n, c = 8, mv = 8;
        const auto w = measure_attention_macs(cube(n), c, 2, cube(2), AttentionMode::windowed);
        const auto d = measure_attention_macs(cube(n), c, 2, cube(2), AttentionMode::dense);
        ok &= w == 4 * t * c * c + 2 * mv * t * c;
        ok &= d == 4 * t * c * c + 2 * t * t * c;
        // Attention terms: (w - 4TC^2) / (d - 4TC^2) == M^3 / T.
        ok &= (w - 4 * t * c * c) * t == (d - 4 * t * c * c) * mv;
        detail += (detail.empty() ? "" : "; ") + std::to_string(n) + "^3: windowed " + std::to_string(w) +
                  ", dense " + std::to_string(d);
    }
    return {ok, detail + " (closed forms and M^3/T ratio exact)"};
}

Outcome dice_oracle() {
    std::mt19937_64 rng(10);
    std::size_t failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::bernoulli_distribution pa(0.02 + 0.96 * trial / 100.0), pb(0.5);
        Tensor<float> a({8, 8, 8}), b({8, 8, 8});
        std::size_t inter = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < 512; ++i) {
            const bool x = pa(rng), y = pb(rng);
            a.mutable_data()[i] = x ? 1.0f : 0.0f;
            b.mutable_data()[i] = y ? 1.0f : 0.0f;
            inter += x && y;
            na += x;
            nb += y;
        }
        const double expect = na + nb == 0 ? 1.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
        failures += dice(a, b) != expect;
        failures += dice(a, b) != dice(b, a);
        failures += na > 0 && dice(a, a) != 1.0;
    }
    return {failures == 0, "100 random 8^3 pairs: " + std::to_string(failures) + " disagreements with voxel counts"};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: swincross_acceptance <swincross-cli> <work-dir> [criterion ...]\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = argv[2];
    fs::remove_all(work);
    fs::create_directories(work);
    std::set<int> only;
    for (int i = 3; i < argc; ++i) only.insert(std::atoi(argv[i]));

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient correctness", [&] { return gradient_correctness(cli, work); }},
        {"CMA degeneration", cma_degeneration},
        {"shifted-window mask", shift_mask},
        {"roundtrip identities", [&] { return roundtrips(work); }},
        {"pyramid shape contract", pyramid_shapes},
        {"modality-swap symmetry", swap_symmetry},
        {"toy overfit", [&] { return toy_overfit(cli, work); }},
        {"structural ablation", [&] { return ablation(cli, work); }},
        {"attention cost", attention_cost_check},
        {"Dice oracle", dice_oracle},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
