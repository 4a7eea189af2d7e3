#include "swincross/windowing.hpp"

#include <string>

#include "swincross/ops.hpp"

namespace swincross {

namespace {

std::string res_to_string(const Resolution& r) {
    return "(" + std::to_string(r[0]) + "," + std::to_string(r[1]) + "," + std::to_string(r[2]) + ")";
}

void require_grid(const Shape& s, const char* op) {
    if (s.size() != 4) throw DimensionError(std::string(op) + ": expected grid [H,W,D,C], got " + shape_to_string(s));
}

}  // namespace

template <typename T>
std::size_t WindowBatch<T>::num_windows() const {
    return tokens.dim(0);
}

template <typename T>
Resolution grid_resolution(const Tensor<T>& grid) {
    require_grid(grid.shape(), "grid_resolution");
    return {grid.dim(0), grid.dim(1), grid.dim(2)};
}

Resolution effective_window(const Resolution& res, std::size_t window) {
    if (window == 0) throw ConfigError("window size must be at least 1");
    Resolution out{};
    for (int i = 0; i < 3; ++i) out[i] = res[i] <= window ? res[i] : window;
    return out;
}

Resolution effective_shift(const Resolution& res, std::size_t window, std::size_t shift) {
    Resolution out{};
    for (int i = 0; i < 3; ++i) out[i] = res[i] <= window ? 0 : shift;
    return out;
}

Resolution padded_resolution(const Resolution& res, const Resolution& window) {
    Resolution out{};
    for (int i = 0; i < 3; ++i) {
        if (window[i] == 0) throw ConfigError("window size must be at least 1");
        out[i] = (res[i] + window[i] - 1) / window[i] * window[i];
    }
    return out;
}

template <typename T>
Tensor<T> pad_to_window_multiple(const Tensor<T>& grid, const Resolution& window) {
    const Resolution res = grid_resolution(grid);
    const Resolution padded = padded_resolution(res, window);
    return pad_end(grid, {padded[0] - res[0], padded[1] - res[1], padded[2] - res[2]});
}

template <typename T>
Tensor<T> pad_to_window_multiple(const Tensor<T>& grid, std::size_t window) {
    return pad_to_window_multiple(grid, cube(window));
}

template <typename T>
Tensor<T> crop_to(const Tensor<T>& grid, const Resolution& res) {
    const Resolution have = grid_resolution(grid);
    if (have == res) return grid;
    Tensor<T> out = grid;
    for (std::size_t axis = 0; axis < 3; ++axis) {
        if (res[axis] > have[axis]) {
            throw DimensionError("crop_to: target " + res_to_string(res) + " exceeds grid " + res_to_string(have));
        }
        if (res[axis] < have[axis]) out = slice(out, axis, 0, res[axis]);
    }
    return out;
}

template <typename T>
WindowBatch<T> window_partition(const Tensor<T>& grid, const Resolution& window) {
    const Resolution res = grid_resolution(grid);
    for (int i = 0; i < 3; ++i) {
        if (window[i] == 0 || res[i] % window[i] != 0) {
            throw DimensionError("window_partition: grid " + res_to_string(res) + " not divisible by window " +
                                 res_to_string(window) + "; pad first");
        }
    }
    const std::size_t c = grid.dim(3);
    const std::size_t nh = res[0] / window[0], nw = res[1] / window[1], nd = res[2] / window[2];
    auto x = reshape(grid, {nh, window[0], nw, window[1], nd, window[2], c});
    x = permute(x, {0, 2, 4, 1, 3, 5, 6});
    WindowBatch<T> out;
    out.tokens = reshape(x, {nh * nw * nd, window[0] * window[1] * window[2], c});
    out.window = window;
    out.source_resolution = res;
    return out;
}

template <typename T>
WindowBatch<T> window_partition(const Tensor<T>& grid, std::size_t window) {
    return window_partition(grid, cube(window));
}

template <typename T>
Tensor<T> window_reverse(const WindowBatch<T>& windows) {
    const auto& w = windows.window;
    const auto& res = windows.source_resolution;
    const auto& s = windows.tokens.shape();
    bool ok = s.size() == 3;
    for (int i = 0; ok && i < 3; ++i) ok = w[i] > 0 && res[i] % w[i] == 0;
    const std::size_t nh = ok ? res[0] / w[0] : 0, nw = ok ? res[1] / w[1] : 0, nd = ok ? res[2] / w[2] : 0;
    if (!ok || s[0] != nh * nw * nd || s[1] != w[0] * w[1] * w[2]) {
        throw DimensionError("window_reverse: tokens " + shape_to_string(s) + " inconsistent with window " +
                             res_to_string(w) + " over grid " + res_to_string(res));
    }
    const std::size_t c = s[2];
    auto x = reshape(windows.tokens, {nh, nw, nd, w[0], w[1], w[2], c});
    x = permute(x, {0, 3, 1, 4, 2, 5, 6});
    return reshape(x, {res[0], res[1], res[2], c});
}

namespace {

template <typename T>
Tensor<T> roll_grid(const Tensor<T>& grid, const Resolution& shift, int sign, const char* op) {
    const Resolution res = grid_resolution(grid);
    for (int i = 0; i < 3; ++i) {
        if (shift[i] >= res[i] && shift[i] != 0) {
            throw DimensionError(std::string(op) + ": shift " + res_to_string(shift) + " out of range for grid " +
                                 res_to_string(res));
        }
    }
    if (shift == Resolution{0, 0, 0}) return grid;
    return roll(grid, {sign * static_cast<std::ptrdiff_t>(shift[0]), sign * static_cast<std::ptrdiff_t>(shift[1]),
                       sign * static_cast<std::ptrdiff_t>(shift[2])});
}

}  // namespace

template <typename T>
Tensor<T> cyclic_shift(const Tensor<T>& grid, const Resolution& shift) {
    return roll_grid(grid, shift, -1, "cyclic_shift");
}

template <typename T>
Tensor<T> reverse_cyclic_shift(const Tensor<T>& grid, const Resolution& shift) {
    return roll_grid(grid, shift, +1, "reverse_cyclic_shift");
}

std::vector<int> shift_region_labels(const Resolution& res, const Resolution& window, const Resolution& shift) {
    auto axis_label = [&](int axis, std::size_t p) {
        if (shift[axis] == 0) return 0;
        if (p < res[axis] - window[axis]) return 0;
        if (p < res[axis] - shift[axis]) return 1;
        return 2;
    };
    std::vector<int> labels(res[0] * res[1] * res[2]);
    std::size_t i = 0;
    for (std::size_t h = 0; h < res[0]; ++h) {
        for (std::size_t w = 0; w < res[1]; ++w) {
            for (std::size_t d = 0; d < res[2]; ++d) {
                labels[i++] = axis_label(0, h) * 9 + axis_label(1, w) * 3 + axis_label(2, d);
            }
        }
    }
    return labels;
}

template <typename T>
Tensor<T> compute_shift_mask(const Resolution& res, const Resolution& window, const Resolution& shift) {
    for (int i = 0; i < 3; ++i) {
        if (window[i] == 0 || res[i] % window[i] != 0) {
            throw DimensionError("compute_shift_mask: grid " + res_to_string(res) + " not divisible by window " +
                                 res_to_string(window));
        }
        if (shift[i] >= window[i] && shift[i] != 0) {
            throw ConfigError("compute_shift_mask: shift " + res_to_string(shift) + " must be smaller than window " +
                              res_to_string(window));
        }
    }
    const auto labels = shift_region_labels(res, window, shift);
    // Partition the label grid exactly like the tokens.
    std::vector<double> as_values(labels.begin(), labels.end());
    Tensor<double> label_grid({res[0], res[1], res[2], 1}, std::move(as_values));
    const auto windows = window_partition(label_grid, window);
    const std::size_t nwin = windows.num_windows();
    const std::size_t n = windows.window_volume();
    auto lab = windows.tokens.data();
    std::vector<T> mask(nwin * n * n, T(0));
    for (std::size_t w = 0; w < nwin; ++w) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (lab[w * n + i] != lab[w * n + j]) mask[(w * n + i) * n + j] = static_cast<T>(kMaskValue);
            }
        }
    }
    return Tensor<T>({nwin, n, n}, std::move(mask));
}

template <typename T>
Tensor<T> compute_shift_mask(const Resolution& res, std::size_t window, std::size_t shift) {
    if (shift >= window) {
        throw ConfigError("compute_shift_mask: shift " + std::to_string(shift) + " must be smaller than window " +
                          std::to_string(window));
    }
    return compute_shift_mask<T>(res, cube(window), cube(shift));
}

#define SWINCROSS_INSTANTIATE(T)                                                                         \
    template struct WindowBatch<T>;                                                                      \
    template Resolution grid_resolution<T>(const Tensor<T>&);                                            \
    template Tensor<T> pad_to_window_multiple<T>(const Tensor<T>&, const Resolution&);                   \
    template Tensor<T> pad_to_window_multiple<T>(const Tensor<T>&, std::size_t);                         \
    template Tensor<T> crop_to<T>(const Tensor<T>&, const Resolution&);                                  \
    template WindowBatch<T> window_partition<T>(const Tensor<T>&, const Resolution&);                    \
    template WindowBatch<T> window_partition<T>(const Tensor<T>&, std::size_t);                          \
    template Tensor<T> window_reverse<T>(const WindowBatch<T>&);                                         \
    template Tensor<T> cyclic_shift<T>(const Tensor<T>&, const Resolution&);                             \
    template Tensor<T> reverse_cyclic_shift<T>(const Tensor<T>&, const Resolution&);                     \
    template Tensor<T> compute_shift_mask<T>(const Resolution&, const Resolution&, const Resolution&);    \
    template Tensor<T> compute_shift_mask<T>(const Resolution&, std::size_t, std::size_t);

SWINCROSS_INSTANTIATE(float)
SWINCROSS_INSTANTIATE(double)

#undef SWINCROSS_INSTANTIATE

}  // namespace swincross
