#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "swincross/config.hpp"
#include "swincross/parameters.hpp"

namespace swincross {

struct GradCheckOptions {
    double eps = 1e-5;  // must lie in [1e-6, 1e-4]
    std::size_t coords_per_param = 64;
    std::uint64_t seed = 0;
};

struct GradCheckEntry {
    std::string param;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    GradCheckEntry worst;
    std::vector<GradCheckEntry> entries;
};

// |a - fd| / max(|a|, |fd|, 1e-8) with fd the central difference.
double relative_error(double analytic, double numeric);

// Compares analytic gradients of the scalar f against central differences at
// up to coords_per_param seeded coordinates of every parameter. f is
// re-evaluated without graph recording for the differences.
GradCheckReport grad_check(const std::function<Tensor<double>()>& f, const std::vector<Parameter<double>>& params,
                           const GradCheckOptions& options = {});

struct ModelGradCheckOptions {
    std::size_t input_size = 16;
    // One coordinate per parameter tensor; check.seed also drives the model,
    // input and probe.
    GradCheckOptions check{2e-5, 1, 0};
    // Parameter point of the check: initialized weights plus N(0, jitter)
    // noise, with decoder instance-norm gains and shifts moved so that
    // leaky-ReLU inputs sit away from the kink, where an eps-sized step would
    // straddle it.
    double encoder_jitter = 0.2;
    double decoder_jitter = 0.05;
    double norm_gain = 0.5;
    double norm_shift = 2.0;
};

// Checks d/dtheta mean(probe * logits) for the full model at a random input of
// input_size^3 x 2, probe entries of magnitude in [0.5, 1.5] with random signs.
GradCheckReport check_model_gradients(const SwinCrossConfig& cfg, const ModelGradCheckOptions& options = {});

}  // namespace swincross
