#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "run_manifest.hpp"
#include "swincross/fileutil.hpp"

namespace fs = std::filesystem;
using namespace swincross::cli;

namespace {

std::string default_manifest(const std::string& out_dir) {
    return out_dir.empty() ? "run_manifest.json" : (fs::path(out_dir) / "run_manifest.json").string();
}

// Parses args (without the program name), runs the selected subcommand and
// writes its manifest.
int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"SwinCross: dual-branch 3D shifted-window transformer for two-modality segmentation"};
    app.require_subcommand(1);
    std::string manifest_path;

    ForwardOptions fwd;
    auto* forward = app.add_subcommand("forward", "Run inference and write a probability volume");
    forward->add_option("--config", fwd.config, "Config JSON")->required();
    forward->add_option("--ckpt", fwd.ckpt, "Checkpoint directory")->required();
    forward->add_option("--input", fwd.input, "Input volume [H,W,D,2]")->required();
    forward->add_option("--output", fwd.output, "Output volume stem")->required();

    GradCheckCommandOptions gc;
    auto* gradcheck = app.add_subcommand("gradcheck", "Compare full-model gradients with central differences");
    gradcheck->add_option("--config", gc.config, "Config JSON (default: tiny config)");
    gradcheck->add_option("--seed", gc.seed, "First seed")->capture_default_str();
    gradcheck->add_option("--count", gc.count, "Number of consecutive seeds")->capture_default_str();
    gradcheck->add_option("--eps", gc.eps, "Central-difference step")->capture_default_str();
    gradcheck->add_option("--tol", gc.tol, "Maximum accepted relative error")->capture_default_str();
    gradcheck->add_option("--size", gc.size, "Input edge length")->capture_default_str();
    gradcheck->add_option("--coords", gc.coords, "Sampled coordinates per parameter tensor")->capture_default_str();

    ParamsOptions po;
    auto* params = app.add_subcommand("params", "Print total and per-module parameter counts");
    params->add_option("--config", po.config, "Config JSON (default: default config)");

    TrainToyOptions tt;
    auto* train = app.add_subcommand("train-toy", "Overfit one synthetic phantom");
    TrainToyOptions ab;
    auto* ablate = app.add_subcommand("ablate", "Train the toy task under one block composition");
    for (auto [cmd, o] : {std::pair{train, &tt}, std::pair{ablate, &ab}}) {
        cmd->add_option("--config", o->config, "Config JSON (default: toy config)");
        cmd->add_option("--size", o->size, "Phantom edge length")->capture_default_str();
        cmd->add_option("--steps", o->steps, "Optimizer steps")->capture_default_str();
        cmd->add_option("--seed", o->seed, "Phantom and model seed")->capture_default_str();
        cmd->add_option("--lr", o->lr, "Adam learning rate")->capture_default_str();
        cmd->add_option("--out", o->out, "Output directory")->required();
    }
    ablate->add_option("--mode", ab.mode, "cross_modal or single_stream_baseline")
        ->required()
        ->check(CLI::IsMember({"cross_modal", "single_stream_baseline"}));

    EvalOptions ev;
    auto* eval = app.add_subcommand("eval", "Dice between a thresholded prediction and a mask");
    eval->add_option("--pred", ev.pred, "Probability volume")->required();
    eval->add_option("--truth", ev.truth, "Binary mask volume")->required();
    eval->add_option("--threshold", ev.threshold, "Probability threshold")->capture_default_str();

    PhantomOptions ph;
    auto* phantom = app.add_subcommand("phantom", "Write a synthetic two-modality phantom");
    phantom->add_option("--size", ph.size, "Edge length")->capture_default_str();
    phantom->add_option("--seed", ph.seed, "Seed")->capture_default_str();
    phantom->add_option("--out", ph.out, "Output directory")->required();

    BenchAttnOptions ba;
    auto* bench = app.add_subcommand("bench-attn", "Per-stage attention multiply-adds and timings (CSV)");
    bench->add_option("--config", ba.config, "Config JSON (default: default config)");
    bench->add_option("--sizes", ba.sizes, "Volume edge lengths")->delimiter(',')->capture_default_str();
    bench->add_option("--mode", ba.mode, "windowed or dense")
        ->capture_default_str()
        ->check(CLI::IsMember({"windowed", "dense"}));
    bench->add_option("--seed", ba.seed, "Weight seed")->capture_default_str();
    bench->add_option("--csv", ba.csv, "Also write the table to this file");

    std::string replay_path;
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a run manifest");
    replay->add_option("manifest", replay_path, "Run manifest JSON")->required();

    for (auto* sub : app.get_subcommands({})) {
        if (sub != replay) sub->add_option("--manifest", manifest_path, "Where to write the run manifest");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (replay->parsed()) {
        try {
            const auto recorded = manifest_from_json(nlohmann::json::parse(swincross::read_file(replay_path)));
            return run_cli(recorded.args);
        } catch (const std::exception& e) {
            std::cerr << "error: replay " << replay_path << ": " << e.what() << "\n";
            return 2;
        }
    }

    RunManifest m;
    m.args = args;
    m.started_at = utc_timestamp();
    int code = 0;
    std::string out_dir;
    try {
        if (forward->parsed()) {
            m.command = "forward";
            code = run_forward(fwd, m);
        } else if (gradcheck->parsed()) {
            m.command = "gradcheck";
            code = run_gradcheck(gc, m);
        } else if (params->parsed()) {
            m.command = "params";
            code = run_params(po, m);
        } else if (train->parsed()) {
            m.command = "train-toy";
            out_dir = tt.out;
            code = run_train_toy(tt, m);
        } else if (ablate->parsed()) {
            m.command = "ablate";
            out_dir = ab.out;
            code = run_train_toy(ab, m);
        } else if (eval->parsed()) {
            m.command = "eval";
            code = run_eval(ev, m);
        } else if (phantom->parsed()) {
            m.command = "phantom";
            out_dir = ph.out;
            code = run_phantom(ph, m);
        } else if (bench->parsed()) {
            m.command = "bench-attn";
            code = run_bench_attn(ba, m);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << m.command << ": " << e.what() << "\n";
        m.error = e.what();
        code = 2;
    }
    m.exit_code = code;
    m.finished_at = utc_timestamp();
    const std::string path = manifest_path.empty() ? default_manifest(out_dir) : manifest_path;
    try {
        const auto parent = fs::path(path).parent_path();
        if (parent.empty() || fs::exists(parent)) swincross::write_file_atomic(path, m.to_json().dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "error: cannot write run manifest " << path << ": " << e.what() << "\n";
        if (code == 0) code = 2;
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args);
}
