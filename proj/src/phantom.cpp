#include "swincross/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "swincross/metrics.hpp"

namespace swincross {

namespace {

constexpr double kNoiseSigma = 0.05;

struct Sphere {
    std::array<double, 3> center;
    double radius;
};

bool is_boundary(const std::vector<float>& mask, std::size_t n, std::size_t i, std::size_t j, std::size_t k) {
    auto at = [&](long a, long b, long c) {
        if (a < 0 || b < 0 || c < 0 || a >= static_cast<long>(n) || b >= static_cast<long>(n) || c >= static_cast<long>(n)) return 0.0f;
        return mask[(static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)) * n + static_cast<std::size_t>(c)];
    };
    const long a = static_cast<long>(i), b = static_cast<long>(j), c = static_cast<long>(k);
    if (at(a, b, c) != 1.0f) return false;
    return at(a - 1, b, c) == 0.0f || at(a + 1, b, c) == 0.0f || at(a, b - 1, c) == 0.0f || at(a, b + 1, c) == 0.0f ||
           at(a, b, c - 1) == 0.0f || at(a, b, c + 1) == 0.0f;
}

}  // namespace

VolumeSample make_phantom(std::size_t size, std::uint64_t seed) {
    if (size < 16) throw std::invalid_argument("make_phantom: size " + std::to_string(size) + " is below 16");
    const std::size_t n = size;
    const double nd = static_cast<double>(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, kNoiseSigma);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    // Tumour ellipsoid with a random axis order.
    std::array<double, 3> radii{0.26 * nd * uniform(0.9, 1.1), 0.17 * nd * uniform(0.9, 1.1),
                                0.12 * nd * uniform(0.9, 1.1)};
    for (std::size_t i = 2; i > 0; --i) std::swap(radii[i], radii[static_cast<std::size_t>(rng() % (i + 1))]);
    std::array<double, 3> center{};
    for (int a = 0; a < 3; ++a) {
        const double lo = radii[a] + 1.0, hi = nd - 2.0 - radii[a];
        center[a] = std::clamp(nd / 2.0 + uniform(-nd / 16.0, nd / 16.0), lo, hi);
    }
    auto ellipsoid = [&](double x, double y, double z, double grow) {
        const double u = (x - center[0]) / (radii[0] + grow), v = (y - center[1]) / (radii[1] + grow),
                     w = (z - center[2]) / (radii[2] + grow);
        return u * u + v * v + w * w;
    };

    // PET blob: isotropic, displaced from the tumour centre.
    const double r_mean = (radii[0] + radii[1] + radii[2]) / 3.0;
    std::array<double, 3> dir{noise(rng), noise(rng), noise(rng)};
    const double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]) + 1e-12;
    std::array<double, 3> blob{};
    for (int a = 0; a < 3; ++a) blob[a] = center[a] + 0.35 * r_mean * dir[a] / len;
    const double sigma = 0.9 * r_mean;

    // Distractor shells that keep clear of the tumour and of each other.
    std::vector<Sphere> distractors;
    const double dr = std::max(2.5, 0.09 * nd);
    for (int attempt = 0; attempt < 1000 && distractors.size() < 2; ++attempt) {
        Sphere s{{uniform(dr + 1, nd - dr - 2), uniform(dr + 1, nd - dr - 2), uniform(dr + 1, nd - dr - 2)}, dr};
        bool clear = true;
        for (const auto& o : distractors) {
            double d2 = 0;
            for (int a = 0; a < 3; ++a) d2 += (s.center[a] - o.center[a]) * (s.center[a] - o.center[a]);
            if (std::sqrt(d2) < s.radius + o.radius + 3.0) clear = false;
        }
        // Sample the distractor ball surface region against a grown ellipsoid.
        for (long i = -static_cast<long>(dr) - 2; clear && i <= static_cast<long>(dr) + 2; ++i)
            for (long j = -static_cast<long>(dr) - 2; clear && j <= static_cast<long>(dr) + 2; ++j)
                for (long k = -static_cast<long>(dr) - 2; clear && k <= static_cast<long>(dr) + 2; ++k) {
                    if (std::sqrt(double(i * i + j * j + k * k)) > dr + 1.5) continue;
                    if (ellipsoid(s.center[0] + i, s.center[1] + j, s.center[2] + k, 2.0) <= 1.0) clear = false;
                }
        if (clear) distractors.push_back(s);
    }

    std::vector<float> mask(n * n * n, 0.0f);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (ellipsoid(double(i), double(j), double(k), 0.0) <= 1.0) mask[(i * n + j) * n + k] = 1.0f;

    std::vector<float> volume(n * n * n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t v = (i * n + j) * n + k;
                double d2 = 0;
                const std::array<double, 3> p{double(i), double(j), double(k)};
                for (int a = 0; a < 3; ++a) d2 += (p[a] - blob[a]) * (p[a] - blob[a]);
                const double pet = std::exp(-d2 / (2.0 * sigma * sigma));
                double ct = is_boundary(mask, n, i, j, k) ? 1.0 : 0.0;
                for (const auto& s : distractors) {
                    double e2 = 0;
                    for (int a = 0; a < 3; ++a) e2 += (p[a] - s.center[a]) * (p[a] - s.center[a]);
                    if (std::abs(std::sqrt(e2) - s.radius) <= 0.5) ct = 1.0;
                }
                volume[v * 2 + 0] = static_cast<float>(pet + noise(rng));
                volume[v * 2 + 1] = static_cast<float>(ct + noise(rng));
            }
        }
    }
    VolumeSample sample;
    sample.volume = Tensor<float>({n, n, n, 2}, std::move(volume));
    sample.mask = Tensor<float>({n, n, n}, std::move(mask));
    sample.seed = seed;
    return sample;
}

double shell_boundary_overlap(const VolumeSample& sample) {
    const std::size_t n = sample.mask.dim(0);
    const std::vector<float> mask(sample.mask.data().begin(), sample.mask.data().end());
    auto vol = sample.volume.data();
    std::size_t boundary = 0, hit = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                if (!is_boundary(mask, n, i, j, k)) continue;
                ++boundary;
                if (vol[((i * n + j) * n + k) * 2 + 1] > 0.5f) ++hit;
            }
    return boundary == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(boundary);
}

double pet_threshold_baseline(const VolumeSample& sample) {
    auto vol = sample.volume.data();
    const std::size_t voxels = sample.mask.numel();
    std::vector<float> pet(voxels);
    for (std::size_t v = 0; v < voxels; ++v) pet[v] = vol[v * 2];
    const auto [lo, hi] = std::minmax_element(pet.begin(), pet.end());
    double best = 0.0;
    for (int step = 1; step < 200; ++step) {
        const float t = *lo + (*hi - *lo) * static_cast<float>(step) / 200.0f;
        std::vector<float> pred(voxels);
        for (std::size_t v = 0; v < voxels; ++v) pred[v] = pet[v] >= t ? 1.0f : 0.0f;
        best = std::max(best, dice(Tensor<float>(sample.mask.shape(), std::move(pred)), sample.mask));
    }
    return best;
}

}  // namespace swincross
