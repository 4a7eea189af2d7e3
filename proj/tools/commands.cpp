#include "commands.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "swincross/checkpoint.hpp"
#include "swincross/config.hpp"
#include "swincross/cost.hpp"
#include "swincross/errors.hpp"
#include "swincross/fileutil.hpp"
#include "swincross/gradcheck.hpp"
#include "swincross/metrics.hpp"
#include "swincross/model.hpp"
#include "swincross/phantom.hpp"
#include "swincross/train.hpp"
#include "swincross/volume_io.hpp"

namespace swincross::cli {

namespace {

SwinCrossConfig resolve_config(const std::string& path, const SwinCrossConfig& fallback, RunManifest& m) {
    SwinCrossConfig cfg = path.empty() ? fallback : load_config(path);
    cfg.validate();
    m.config_path = path;
    m.config = to_json(cfg);
    return cfg;
}

std::string join(const std::string& dir, const std::string& name) {
    return dir.empty() || dir.back() == '/' ? dir + name : dir + "/" + name;
}

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Tensor<float> mask_volume(const Tensor<float>& mask) {
    const auto& s = mask.shape();
    return Tensor<float>({s[0], s[1], s[2], 1}, std::vector<float>(mask.data().begin(), mask.data().end()));
}

}  // namespace

int run_forward(const ForwardOptions& o, RunManifest& m) {
    const auto cfg = resolve_config(o.config, SwinCrossConfig{}, m);
    auto model = Model<float>::build(cfg, 0);
    load_checkpoint_into(o.ckpt, model);
    const auto input = read_volume(o.input);
    if (input.data.rank() != 4 || input.data.dim(3) != cfg.modalities) {
        throw DimensionError("input " + o.input + " has shape " + shape_to_string(input.data.shape()) +
                             ", expected [H, W, D, " + std::to_string(cfg.modalities) + "]");
    }
    NoGradGuard no_grad;
    Volume out;
    out.data = model.forward(input.data);
    out.spacing = input.spacing;
    out.channel_names = {"probability"};
    write_volume(o.output, out);
    m.outputs.push_back(volume_stem(o.output) + ".vol.json");
    m.outputs.push_back(volume_stem(o.output) + ".vol.bin");
    std::cout << "wrote " << volume_stem(o.output) << " " << shape_to_string(out.data.shape()) << "\n";
    return 0;
}

int run_gradcheck(const GradCheckCommandOptions& o, RunManifest& m) {
    const auto cfg = resolve_config(o.config, SwinCrossConfig::tiny(), m);
    if (o.count == 0) throw ConfigError("--count must be at least 1");
    double overall = 0.0;
    std::string overall_worst;
    nlohmann::json per_seed = nlohmann::json::array();
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < o.count; ++i) {
        const std::uint64_t seed = o.seed + i;
        seeds.push_back(seed);
        ModelGradCheckOptions opts;
        opts.input_size = o.size;
        opts.check.eps = o.eps;
        opts.check.coords_per_param = o.coords;
        opts.check.seed = seed;
        const auto start = std::chrono::steady_clock::now();
        const auto report = check_model_gradients(cfg, opts);
        const double secs = seconds_since(start);
        const std::string worst = report.worst.param + "[" + std::to_string(report.worst.index) + "]";
        std::cout << "seed " << seed << ": max relative error " << format("%.3e", report.max_rel_error) << " at "
                  << worst << " (analytic " << format("%.6e", report.worst.analytic) << ", numeric "
                  << format("%.6e", report.worst.numeric) << "), " << report.entries.size() << " coordinates, "
                  << format("%.1f", secs) << " s\n";
        per_seed.push_back({{"seed", seed},
                            {"max_rel_error", report.max_rel_error},
                            {"worst", worst},
                            {"coordinates", report.entries.size()},
                            {"seconds", secs}});
        if (i == 0 || report.max_rel_error > overall) {
            overall = report.max_rel_error;
            overall_worst = worst;
        }
    }
    m.seeds["model"] = seeds;
    m.metrics["per_seed"] = per_seed;
    m.metrics["max_rel_error"] = overall;
    m.metrics["worst"] = overall_worst;
    m.metrics["eps"] = o.eps;
    m.metrics["tol"] = o.tol;
    const bool ok = overall <= o.tol;
    m.metrics["passed"] = ok;
    std::cout << "worst parameter " << overall_worst << " max relative error " << format("%.3e", overall)
              << (ok ? " <= " : " > ") << "tol " << format("%.1e", o.tol) << (ok ? ": PASS" : ": FAIL") << "\n";
    return ok ? 0 : 1;
}

int run_params(const ParamsOptions& o, RunManifest& m) {
    const auto cfg = resolve_config(o.config, SwinCrossConfig{}, m);
    const auto model = Model<float>::build(cfg, 0);
    std::cout << "total " << model.param_count() << "\n";
    nlohmann::json modules = nlohmann::json::array();
    for (const auto& [name, count] : model.param_breakdown()) {
        std::cout << name << " " << count << "\n";
        modules.push_back({{"module", name}, {"count", count}});
    }
    m.metrics["total"] = model.param_count();
    m.metrics["modules"] = modules;
    return 0;
}

int run_train_toy(const TrainToyOptions& o, RunManifest& m) {
    SwinCrossConfig fallback = SwinCrossConfig::toy();
    SwinCrossConfig cfg = o.config.empty() ? fallback : load_config(o.config);
    if (!o.mode.empty()) cfg.block_mode = block_mode_from_string(o.mode);
    cfg.validate();
    m.config_path = o.config;
    m.config = to_json(cfg);
    if (o.out.empty()) throw ConfigError("--out is required");
    m.seeds["phantom"] = o.seed;
    m.seeds["model"] = o.seed;

    const auto sample = make_phantom(o.size, o.seed);
    auto model = Model<float>::build(cfg, o.seed);
    ensure_directory(o.out);
    TrainOptions topts;
    topts.steps = o.steps;
    topts.lr = o.lr;
    topts.on_step = [&](std::size_t step, double loss) {
        if (step % 50 == 0 || step + 1 == o.steps) std::cout << "step " << step << " loss " << format("%.6f", loss) << "\n";
    };
    const auto start = std::chrono::steady_clock::now();
    const auto result = train_toy(model, sample, topts);
    const double secs = seconds_since(start);

    std::ostringstream csv;
    csv << "step,loss\n";
    for (std::size_t i = 0; i < result.losses.size(); ++i) csv << i << "," << format("%.9g", result.losses[i]) << "\n";
    const std::string loss_path = join(o.out, "loss.csv");
    write_file_atomic(loss_path, csv.str());
    const std::string ckpt = join(o.out, "checkpoint");
    save_checkpoint(model, ckpt);
    Volume pred;
    pred.data = result.final_prob;
    pred.spacing = sample.spacing;
    pred.channel_names = {"probability"};
    const std::string pred_stem = join(o.out, "prediction");
    write_volume(pred_stem, pred);

    m.outputs = {loss_path, join(ckpt, kManifestFile), join(ckpt, kPayloadFile), pred_stem + ".vol.json",
                 pred_stem + ".vol.bin"};
    m.metrics["block_mode"] = to_string(cfg.block_mode);
    m.metrics["final_dice"] = result.final_dice;
    m.metrics["first_loss"] = result.losses.front();
    m.metrics["final_loss"] = result.losses.back();
    m.metrics["steps"] = o.steps;
    m.metrics["size"] = o.size;
    m.metrics["lr"] = o.lr;
    m.metrics["param_count"] = model.param_count();
    m.metrics["train_seconds"] = secs;
    std::cout << "block mode " << to_string(cfg.block_mode) << ", " << model.param_count() << " parameters, "
              << format("%.1f", secs) << " s\n";
    std::cout << "final dice " << format("%.4f", result.final_dice) << "\n";
    return 0;
}

int run_eval(const EvalOptions& o, RunManifest& m) {
    const auto pred = read_volume(o.pred);
    const auto truth = read_volume(o.truth);
    double d = 0.0;
    try {
        d = dice(threshold(pred.data, o.threshold), truth.data);
    } catch (const DimensionError&) {
        throw DimensionError("prediction " + o.pred + " " + shape_to_string(pred.data.shape()) +
                             " and truth " + o.truth + " " + shape_to_string(truth.data.shape()) + " differ in shape");
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("truth " + o.truth + ": " + e.what());
    }
    m.metrics["dice"] = d;
    m.metrics["threshold"] = o.threshold;
    std::cout << format("%.4f", d) << "\n";
    return 0;
}

int run_phantom(const PhantomOptions& o, RunManifest& m) {
    if (o.out.empty()) throw ConfigError("--out is required");
    const auto sample = make_phantom(o.size, o.seed);
    ensure_directory(o.out);
    Volume image;
    image.data = sample.volume;
    image.spacing = sample.spacing;
    image.channel_names = sample.modality_names;
    Volume mask;
    mask.data = mask_volume(sample.mask);
    mask.spacing = sample.spacing;
    mask.channel_names = {"mask"};
    const std::string image_stem = join(o.out, "image");
    const std::string mask_stem = join(o.out, "mask");
    write_volume(image_stem, image);
    write_volume(mask_stem, mask);
    m.seeds["phantom"] = o.seed;
    m.outputs = {image_stem + ".vol.json", image_stem + ".vol.bin", mask_stem + ".vol.json", mask_stem + ".vol.bin"};
    double voxels = 0.0;
    for (float v : sample.mask.data()) voxels += v;
    const double overlap = shell_boundary_overlap(sample);
    const double baseline = pet_threshold_baseline(sample);
    m.metrics["mask_voxels"] = voxels;
    m.metrics["shell_boundary_overlap"] = overlap;
    m.metrics["pet_threshold_dice"] = baseline;
    std::cout << "mask voxels " << static_cast<std::size_t>(voxels) << ", shell boundary overlap "
              << format("%.4f", overlap) << ", channel-0 threshold dice " << format("%.4f", baseline) << "\n";
    return 0;
}

int run_bench_attn(const BenchAttnOptions& o, RunManifest& m) {
    const auto cfg = resolve_config(o.config, SwinCrossConfig{}, m);
    AttentionMode mode;
    if (o.mode == "windowed") mode = AttentionMode::windowed;
    else if (o.mode == "dense") mode = AttentionMode::dense;
    else throw ConfigError("--mode must be windowed or dense, got '" + o.mode + "'");
    if (o.sizes.empty()) throw ConfigError("--sizes is empty");
    m.seeds["weights"] = o.seed;

    std::ostringstream csv;
    csv << "size,stage,grid,tokens,channels,window_volume,mode,macs,closed_form,seconds\n";
    nlohmann::json rows = nlohmann::json::array();
    bool all_equal = true;
    for (std::size_t size : o.sizes) {
        for (const auto& c : attention_cost(cfg, cube(size))) {
            const auto start = std::chrono::steady_clock::now();
            const bool windowed = mode == AttentionMode::windowed;
            const Resolution& g = windowed ? c.grid : c.resolution;
            const auto macs = measure_attention_macs(g, c.channels, cfg.heads[c.stage], c.window, mode, o.seed);
            const double secs = seconds_since(start);
            const auto closed = windowed ? c.windowed_macs : c.dense_macs;
            const auto tokens = windowed ? c.tokens : c.dense_tokens;
            all_equal = all_equal && macs == closed;
            const std::string grid =
                std::to_string(g[0]) + "x" + std::to_string(g[1]) + "x" + std::to_string(g[2]);
            csv << size << "," << c.stage << "," << grid << "," << tokens << "," << c.channels << ","
                << (windowed ? c.window_volume : tokens) << "," << o.mode << "," << macs
                << "," << closed << "," << format("%.6f", secs) << "\n";
            rows.push_back({{"size", size}, {"stage", c.stage}, {"tokens", tokens}, {"channels", c.channels},
                            {"macs", macs}, {"closed_form", closed}, {"seconds", secs}});
        }
    }
    std::cout << csv.str();
    if (!o.csv.empty()) {
        write_file_atomic(o.csv, csv.str());
        m.outputs.push_back(o.csv);
    }
    m.metrics["rows"] = rows;
    m.metrics["macs_match_closed_form"] = all_equal;
    if (!all_equal) std::cerr << "bench-attn: measured multiply-adds differ from the closed form\n";
    return all_equal ? 0 : 1;
}

}  // namespace swincross::cli
