#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "swincross/tensor.hpp"

// Token grids are channel-last tensors [H, W, D, C]. Windows are enumerated in
// row-major order over (H/Mh, W/Mw, D/Md) and tokens inside a window in
// row-major order over the Mh x Mw x Md cube.
namespace swincross {

using Resolution = std::array<std::size_t, 3>;

// Additive attention bias for token pairs from different pre-shift regions.
constexpr double kMaskValue = -1e9;

template <typename T>
struct WindowBatch {
    Tensor<T> tokens;  // [n_windows, Mh*Mw*Md, C]
    Resolution window{};
    Resolution source_resolution{};  // padded grid the windows were cut from

    std::size_t num_windows() const;
    std::size_t window_volume() const { return window[0] * window[1] * window[2]; }
};

inline Resolution cube(std::size_t m) { return {m, m, m}; }

template <typename T>
Resolution grid_resolution(const Tensor<T>& grid);

// Per axis: a grid no larger than the window gets one window spanning the axis
// and no shift; otherwise the configured window and shift apply.
Resolution effective_window(const Resolution& res, std::size_t window);
Resolution effective_shift(const Resolution& res, std::size_t window, std::size_t shift);

Resolution padded_resolution(const Resolution& res, const Resolution& window);

template <typename T>
Tensor<T> pad_to_window_multiple(const Tensor<T>& grid, const Resolution& window);
template <typename T>
Tensor<T> pad_to_window_multiple(const Tensor<T>& grid, std::size_t window);
// Keeps the low corner [0, res) of each spatial axis.
template <typename T>
Tensor<T> crop_to(const Tensor<T>& grid, const Resolution& res);

template <typename T>
WindowBatch<T> window_partition(const Tensor<T>& grid, const Resolution& window);
template <typename T>
WindowBatch<T> window_partition(const Tensor<T>& grid, std::size_t window);
template <typename T>
Tensor<T> window_reverse(const WindowBatch<T>& windows);

// Rolls the grid by -shift on every spatial axis: out[p] = in[(p + shift) mod n].
template <typename T>
Tensor<T> cyclic_shift(const Tensor<T>& grid, const Resolution& shift);
// Inverse roll by +shift.
template <typename T>
Tensor<T> reverse_cyclic_shift(const Tensor<T>& grid, const Resolution& shift);

// Pre-shift region id of every token of the shifted grid, row-major over res.
// Along an axis with shift s > 0 the slices [0, n-M), [n-M, n-s), [n-s, n) get
// ids 0, 1, 2; the 3D id is h*9 + w*3 + d.
std::vector<int> shift_region_labels(const Resolution& res, const Resolution& window, const Resolution& shift);

// [n_windows, N, N] with 0 for same-region pairs and kMaskValue otherwise.
template <typename T>
Tensor<T> compute_shift_mask(const Resolution& res, const Resolution& window, const Resolution& shift);
template <typename T>
Tensor<T> compute_shift_mask(const Resolution& res, std::size_t window, std::size_t shift);

}  // namespace swincross
