#include "swincross/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "swincross/model.hpp"
#include "swincross/ops.hpp"

namespace swincross {

namespace {

double evaluate(const std::function<Tensor<double>()>& f) {
    const auto out = f();
    if (!out.defined() || out.numel() != 1) {
        throw GraphError("grad_check: function must return one element, got " +
                         (out.defined() ? shape_to_string(out.shape()) : std::string("undefined")));
    }
    const double v = out.item();
    if (!std::isfinite(v)) throw NumericError("grad_check: function value is not finite");
    return v;
}

std::vector<std::size_t> sample_coords(std::size_t numel, std::size_t budget, std::mt19937_64& rng) {
    std::vector<std::size_t> all(numel);
    std::iota(all.begin(), all.end(), 0);
    if (numel <= budget) return all;
    for (std::size_t i = 0; i < budget; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (numel - i));
        std::swap(all[i], all[j]);
    }
    all.resize(budget);
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<Tensor<double>()>& f, const std::vector<Parameter<double>>& params,
                           const GradCheckOptions& options) {
    if (!(options.eps >= 1e-6 && options.eps <= 1e-4)) {
        throw ConfigError("grad_check: eps " + std::to_string(options.eps) + " outside [1e-6, 1e-4]");
    }
    for (const auto& p : params) {
        Tensor<double> t = p.tensor;
        t.zero_grad();
    }
    {
        auto loss = f();
        if (!loss.defined() || loss.numel() != 1) {
            throw GraphError("grad_check: function must return one element");
        }
        if (!all_finite(loss)) throw NumericError("grad_check: function value is not finite");
        backward(loss);
    }
    std::vector<std::vector<double>> analytic;
    for (const auto& p : params) {
        if (p.tensor.has_grad()) analytic.emplace_back(p.tensor.grad().begin(), p.tensor.grad().end());
        else analytic.emplace_back(p.tensor.numel(), 0.0);
    }

    GradCheckReport report;
    std::mt19937_64 rng(options.seed);
    NoGradGuard no_grad;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor<double> t = params[pi].tensor;
        auto data = t.mutable_data();
        for (std::size_t idx : sample_coords(t.numel(), options.coords_per_param, rng)) {
            const double saved = data[idx];
            data[idx] = saved + options.eps;
            const double plus = evaluate(f);
            data[idx] = saved - options.eps;
            const double minus = evaluate(f);
            data[idx] = saved;
            GradCheckEntry e;
            e.param = params[pi].name;
            e.index = idx;
            e.analytic = analytic[pi][idx];
            e.numeric = (plus - minus) / (2.0 * options.eps);
            e.rel_error = relative_error(e.analytic, e.numeric);
            if (report.entries.empty() || e.rel_error > report.max_rel_error) {
                report.max_rel_error = e.rel_error;
                report.worst = e;
            }
            report.entries.push_back(std::move(e));
        }
    }
    return report;
}

GradCheckReport check_model_gradients(const SwinCrossConfig& cfg, const ModelGradCheckOptions& options) {
    const std::uint64_t seed = options.check.seed;
    auto model = Model<double>::build(cfg, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& p : model.parameters().items()) {
        const bool decoder = p.name.starts_with("decoder.");
        const double jitter = decoder ? options.decoder_jitter : options.encoder_jitter;
        const bool norm = decoder && p.name.find(".norm") != std::string::npos;
        Tensor<double> t = p.tensor;
        for (auto& v : t.mutable_data()) {
            if (norm && p.name.ends_with(".gamma")) v = options.norm_gain;
            if (norm && p.name.ends_with(".beta")) v = options.norm_shift;
            v += jitter * normal(rng);
        }
    }
    const std::size_t n = options.input_size;
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::vector<double> input(n * n * n * cfg.modalities);
    for (auto& v : input) v = uniform(rng);
    std::vector<double> probe(n * n * n);
    const double norm = 1.0 / static_cast<double>(probe.size());
    for (auto& v : probe) {
        v = (1.0 + 0.5 * uniform(rng)) * norm;
        if (rng() & 1) v = -v;
    }
    const Tensor<double> volume({n, n, n, cfg.modalities}, std::move(input));
    const Tensor<double> weights({n, n, n, 1}, std::move(probe));
    return grad_check([&] { return sum(mul(model.forward_logits(volume), weights)); }, model.parameters().items(),
                      options.check);
}

}  // namespace swincross
