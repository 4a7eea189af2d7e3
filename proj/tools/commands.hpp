#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "run_manifest.hpp"

// Subcommand bodies. Each fills the manifest's seeds, outputs and metrics,
// prints its report to stdout and returns the process exit code.
namespace swincross::cli {

struct ForwardOptions {
    std::string config, ckpt, input, output;
};

struct GradCheckCommandOptions {
    std::string config;
    std::uint64_t seed = 0;
    std::size_t count = 1;
    double eps = 2e-5;
    double tol = 1e-4;
    std::size_t size = 16;
    std::size_t coords = 1;
};

struct ParamsOptions {
    std::string config;
};

struct TrainToyOptions {
    std::string config;
    std::size_t size = 32;
    std::size_t steps = 500;
    std::uint64_t seed = 0;
    double lr = 2e-3;
    std::string out;
    std::string mode;  // block composition override; empty keeps the config's
};

struct EvalOptions {
    std::string pred, truth;
    double threshold = 0.5;
};

struct PhantomOptions {
    std::size_t size = 32;
    std::uint64_t seed = 0;
    std::string out;
};

struct BenchAttnOptions {
    std::string config;
    std::vector<std::size_t> sizes{32, 64};
    std::string mode = "windowed";
    std::uint64_t seed = 0;
    std::string csv;
};

int run_forward(const ForwardOptions& o, RunManifest& m);
int run_gradcheck(const GradCheckCommandOptions& o, RunManifest& m);
int run_params(const ParamsOptions& o, RunManifest& m);
int run_train_toy(const TrainToyOptions& o, RunManifest& m);
int run_eval(const EvalOptions& o, RunManifest& m);
int run_phantom(const PhantomOptions& o, RunManifest& m);
int run_bench_attn(const BenchAttnOptions& o, RunManifest& m);

}  // namespace swincross::cli
