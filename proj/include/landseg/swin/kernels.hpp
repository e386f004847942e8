#pragma once

#include <memory>
#include <vector>

#include "landseg/tensor.hpp"

namespace landseg::nn {

/// Row gather over an [H, W, C] map flattened to H*W rows. Entry -1 yields a
/// zero row (padding).
using RowIndex = std::vector<int>;

/// Sparse linear map between spatial grids: output row r is
/// sum_k weight[k] * input row index[k] for k in [offset[r], offset[r+1]).
struct SpatialMap {
  int in_rows = 0;
  int out_rows = 0;
  std::vector<int> offset;
  std::vector<int> index;
  std::vector<double> weight;
};

// --- index maps ------------------------------------------------------------

/// Window-major order: output row (w * M*M + t) takes input row of token t of
/// window w, windows enumerated row-major over the (H/M) x (W/M) window grid.
RowIndex window_partition_index(int height, int width, int window);
/// Inverse of window_partition_index.
RowIndex window_reverse_index(int height, int width, int window);
/// out[i][j] = x[(i + s) mod H][(j + s) mod W]; negative s undoes a shift.
RowIndex cyclic_shift_index(int height, int width, int shift);
/// Zero-pads bottom/right from (H, W) to (Hp, Wp).
RowIndex pad_index(int height, int width, int padded_height, int padded_width);
/// Crops the top-left (H, W) region of an (Hp, Wp) map.
RowIndex crop_index(int padded_height, int padded_width, int height, int width);
/// Patch gather: output row (p * patch*patch + dy*patch + dx) is pixel
/// (patch * pr + dy, patch * pc + dx) of patch p = pr * (W/patch) + pc.
RowIndex patch_index(int height, int width, int patch);
/// 2x2 neighbourhood gather in the order (0,0), (1,0), (0,1), (1,1) as
/// (row offset, col offset).
RowIndex merge_index(int height, int width);
/// 3x3 neighbourhood gather with edge replication, (dy, dx) row-major.
RowIndex conv3x3_index(int height, int width);
/// result[i] = outer[inner[i]] with -1 propagated.
RowIndex compose(const RowIndex& outer, const RowIndex& inner);

/// Bilinear resize with half-pixel centers (align_corners = false); rows of
/// the output are restricted to the top-left crop_h x crop_w region when given.
SpatialMap bilinear_map(int in_h, int in_w, int out_h, int out_w, int crop_h = -1, int crop_w = -1);
/// Adaptive average pooling to out x out bins [floor(i*in/out), ceil((i+1)*in/out)).
SpatialMap adaptive_avg_pool_map(int in_h, int in_w, int out);

// --- tensor-level helpers (no autograd) -------------------------------------

template <typename T>
BasicTensor<T> gather_rows(const BasicTensor<T>& x, const RowIndex& rows, Shape out_shape);

template <typename T>
BasicTensor<T> apply_spatial(const BasicTensor<T>& x, const SpatialMap& map, Shape out_shape);

/// [H, W, C] -> [nW, M*M, C].
template <typename T>
BasicTensor<T> window_partition(const BasicTensor<T>& x, int window);
/// [nW, M*M, C] -> [H, W, C].
template <typename T>
BasicTensor<T> window_reverse(const BasicTensor<T>& windows, int window, int height, int width);
/// [H, W, C] rolled so out[i][j] = x[(i+s) mod H][(j+s) mod W].
template <typename T>
BasicTensor<T> cyclic_shift(const BasicTensor<T>& x, int shift);

inline constexpr float kMaskValue = -1.0e4f;

/// Per-window additive attention mask of shape [nW, M*M, M*M] (0 or -1e4) for
/// a map cyclically shifted by s; all zeros when s == 0.
Tensor shift_attention_mask(int height, int width, int window, int shift);

/// (M*M) x (M*M) row-major indices into a (2M-1)^2 bias table.
std::vector<int> relative_position_index(int window);

// --- windowed multi-head attention ------------------------------------------

struct AttentionGeometry {
  int windows = 0;  // nW
  int tokens = 0;   // N = M*M
  int channels = 0; // C
  int heads = 0;
  std::shared_ptr<const std::vector<int>> rel_index;  // N*N
  std::shared_ptr<const Tensor> mask;                 // [nW, N, N] or null
};

/// qkv: [nW, N, 3C] laid out as (q | k | v), head h owning channels
/// [h*d, (h+1)*d) of each part. bias_table: [(2M-1)^2, heads].
/// Writes out [nW, N, C] and, when probs is non-null, the softmax weights
/// [nW, heads, N, N]. Rows whose every entry is masked produce zeros.
template <typename T>
void attention_forward(const AttentionGeometry& geo, const T* qkv, const T* bias_table, T* out, T* probs);

/// Accumulates gradients for qkv and the bias table from d_out.
template <typename T>
void attention_backward(const AttentionGeometry& geo, const T* qkv, const T* probs, const T* d_out, T* d_qkv,
                        T* d_bias_table);

}  // namespace landseg::nn
