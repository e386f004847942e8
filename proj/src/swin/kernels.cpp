#include "landseg/swin/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "landseg/error.hpp"

namespace landseg::nn {

namespace {

void require_divisible(int height, int width, int window, const char* what) {
  if (window <= 0 || height <= 0 || width <= 0 || height % window != 0 || width % window != 0) {
    throw UsageError(std::string(what) + ": spatial dims (" + std::to_string(height) + ", " + std::to_string(width) +
                     ") not divisible by " + std::to_string(window));
  }
}

int wrap(int v, int n) {
  const int r = v % n;
  return r < 0 ? r + n : r;
}

}  // namespace

RowIndex window_partition_index(int height, int width, int window) {
  require_divisible(height, width, window, "window_partition");
  const int wcols = width / window;
  const int nwin = (height / window) * wcols;
  RowIndex idx(static_cast<std::size_t>(height) * width);
  std::size_t k = 0;
  for (int w = 0; w < nwin; ++w) {
    const int r0 = (w / wcols) * window;
    const int c0 = (w % wcols) * window;
    for (int dy = 0; dy < window; ++dy) {
      for (int dx = 0; dx < window; ++dx) idx[k++] = (r0 + dy) * width + c0 + dx;
    }
  }
  return idx;
}

RowIndex window_reverse_index(int height, int width, int window) {
  const RowIndex fwd = window_partition_index(height, width, window);
  RowIndex inv(fwd.size());
  for (std::size_t k = 0; k < fwd.size(); ++k) inv[fwd[k]] = static_cast<int>(k);
  return inv;
}

RowIndex cyclic_shift_index(int height, int width, int shift) {
  RowIndex idx(static_cast<std::size_t>(height) * width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) idx[i * width + j] = wrap(i + shift, height) * width + wrap(j + shift, width);
  }
  return idx;
}

RowIndex pad_index(int height, int width, int padded_height, int padded_width) {
  RowIndex idx(static_cast<std::size_t>(padded_height) * padded_width, -1);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) idx[i * padded_width + j] = i * width + j;
  }
  return idx;
}

RowIndex crop_index(int padded_height, int padded_width, int height, int width) {
  (void)padded_height;
  RowIndex idx(static_cast<std::size_t>(height) * width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) idx[i * width + j] = i * padded_width + j;
  }
  return idx;
}

RowIndex patch_index(int height, int width, int patch) {
  require_divisible(height, width, patch, "patch_embed");
  const int pcols = width / patch;
  const int npatch = (height / patch) * pcols;
  RowIndex idx(static_cast<std::size_t>(height) * width);
  std::size_t k = 0;
  for (int p = 0; p < npatch; ++p) {
    const int r0 = (p / pcols) * patch;
    const int c0 = (p % pcols) * patch;
    for (int dy = 0; dy < patch; ++dy) {
      for (int dx = 0; dx < patch; ++dx) idx[k++] = (r0 + dy) * width + c0 + dx;
    }
  }
  return idx;
}

RowIndex merge_index(int height, int width) {
  if (height % 2 != 0 || width % 2 != 0) throw UsageError("patch_merging needs even spatial dims");
  RowIndex idx(static_cast<std::size_t>(height) * width);
  static constexpr int kOffsets[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  std::size_t k = 0;
  for (int i = 0; i < height / 2; ++i) {
    for (int j = 0; j < width / 2; ++j) {
      for (const auto& off : kOffsets) idx[k++] = (2 * i + off[0]) * width + 2 * j + off[1];
    }
  }
  return idx;
}

RowIndex conv3x3_index(int height, int width) {
  RowIndex idx(static_cast<std::size_t>(height) * width * 9);
  std::size_t k = 0;
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          idx[k++] = std::clamp(i + dy, 0, height - 1) * width + std::clamp(j + dx, 0, width - 1);
        }
      }
    }
  }
  return idx;
}

RowIndex compose(const RowIndex& outer, const RowIndex& inner) {
  RowIndex out(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) out[i] = inner[i] < 0 ? -1 : outer[inner[i]];
  return out;
}

namespace {

// Half-pixel source coordinate, PyTorch align_corners=False convention.
void bilinear_axis(int in, int out, int o, int& i0, int& i1, double& frac) {
  const double scale = static_cast<double>(in) / out;
  double src = (o + 0.5) * scale - 0.5;
  if (src < 0.0) src = 0.0;
  i0 = std::min(static_cast<int>(std::floor(src)), in - 1);
  i1 = std::min(i0 + 1, in - 1);
  frac = src - i0;
}

}  // namespace

SpatialMap bilinear_map(int in_h, int in_w, int out_h, int out_w, int crop_h, int crop_w) {
  if (crop_h < 0) crop_h = out_h;
  if (crop_w < 0) crop_w = out_w;
  SpatialMap m;
  m.in_rows = in_h * in_w;
  m.out_rows = crop_h * crop_w;
  m.offset.reserve(m.out_rows + 1);
  m.offset.push_back(0);
  for (int r = 0; r < crop_h; ++r) {
    int y0, y1;
    double fy;
    bilinear_axis(in_h, out_h, r, y0, y1, fy);
    for (int c = 0; c < crop_w; ++c) {
      int x0, x1;
      double fx;
      bilinear_axis(in_w, out_w, c, x0, x1, fx);
      const int rows[4] = {y0 * in_w + x0, y0 * in_w + x1, y1 * in_w + x0, y1 * in_w + x1};
      const double ws[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
      for (int k = 0; k < 4; ++k) {
        if (ws[k] == 0.0) continue;
        m.index.push_back(rows[k]);
        m.weight.push_back(ws[k]);
      }
      m.offset.push_back(static_cast<int>(m.index.size()));
    }
  }
  return m;
}

SpatialMap adaptive_avg_pool_map(int in_h, int in_w, int out) {
  SpatialMap m;
  m.in_rows = in_h * in_w;
  m.out_rows = out * out;
  m.offset.push_back(0);
  for (int i = 0; i < out; ++i) {
    const int h0 = (i * in_h) / out;
    const int h1 = ((i + 1) * in_h + out - 1) / out;
    for (int j = 0; j < out; ++j) {
      const int w0 = (j * in_w) / out;
      const int w1 = ((j + 1) * in_w + out - 1) / out;
      const double wgt = 1.0 / ((h1 - h0) * (w1 - w0));
      for (int y = h0; y < h1; ++y) {
        for (int x = w0; x < w1; ++x) {
          m.index.push_back(y * in_w + x);
          m.weight.push_back(wgt);
        }
      }
      m.offset.push_back(static_cast<int>(m.index.size()));
    }
  }
  return m;
}

template <typename T>
BasicTensor<T> gather_rows(const BasicTensor<T>& x, const RowIndex& rows, Shape out_shape) {
  const std::size_t channels = static_cast<std::size_t>(x.dim(-1));
  const std::size_t in_rows = x.size() / channels;
  if (shape_size(out_shape) != rows.size() * channels) {
    throw UsageError("gather_rows: output shape " + shape_string(out_shape) + " does not match index");
  }
  BasicTensor<T> out(std::move(out_shape));
  T* dst = out.ptr();
  const T* src = x.ptr();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= 0) {
      if (static_cast<std::size_t>(rows[r]) >= in_rows) throw UsageError("gather_rows: index out of range");
      std::memcpy(dst + r * channels, src + static_cast<std::size_t>(rows[r]) * channels, channels * sizeof(T));
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> apply_spatial(const BasicTensor<T>& x, const SpatialMap& map, Shape out_shape) {
  const std::size_t channels = static_cast<std::size_t>(x.dim(-1));
  if (x.size() != static_cast<std::size_t>(map.in_rows) * channels ||
      shape_size(out_shape) != static_cast<std::size_t>(map.out_rows) * channels) {
    throw UsageError("apply_spatial: shape mismatch");
  }
  BasicTensor<T> out(std::move(out_shape));
  for (int r = 0; r < map.out_rows; ++r) {
    T* dst = out.ptr() + static_cast<std::size_t>(r) * channels;
    for (int k = map.offset[r]; k < map.offset[r + 1]; ++k) {
      const T w = static_cast<T>(map.weight[k]);
      const T* src = x.ptr() + static_cast<std::size_t>(map.index[k]) * channels;
      for (std::size_t c = 0; c < channels; ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> window_partition(const BasicTensor<T>& x, int window) {
  if (x.rank() != 3) throw UsageError("window_partition expects [H, W, C]");
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const int nw = (h / window) * (w / window);
  return gather_rows(x, window_partition_index(h, w, window), {nw, window * window, c});
}

template <typename T>
BasicTensor<T> window_reverse(const BasicTensor<T>& windows, int window, int height, int width) {
  if (windows.rank() != 3 || windows.dim(1) != window * window ||
      windows.dim(0) * window * window != height * width) {
    throw UsageError("window_reverse: windows shape inconsistent with target map");
  }
  return gather_rows(windows, window_reverse_index(height, width, window), {height, width, windows.dim(2)});
}

template <typename T>
BasicTensor<T> cyclic_shift(const BasicTensor<T>& x, int shift) {
  if (x.rank() != 3) throw UsageError("cyclic_shift expects [H, W, C]");
  return gather_rows(x, cyclic_shift_index(x.dim(0), x.dim(1), shift), x.shape());
}

Tensor shift_attention_mask(int height, int width, int window, int shift) {
  require_divisible(height, width, window, "shift_attention_mask");
  if (shift != 0 && shift != window / 2) throw UsageError("shift must be 0 or window/2");
  const int n = window * window;
  const int nw = (height / window) * (width / window);
  Tensor mask({nw, n, n}, 0.0f);
  if (shift == 0) return mask;

  // Region ids in the shifted frame: bands [0, H-M), [H-M, H-s), [H-s, H) per axis.
  auto band = [window, shift](int v, int extent) {
    if (v < extent - window) return 0;
    if (v < extent - shift) return 1;
    return 2;
  };
  std::vector<int> region(static_cast<std::size_t>(height) * width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) region[i * width + j] = band(i, height) * 3 + band(j, width);
  }
  const RowIndex part = window_partition_index(height, width, window);
  for (int w = 0; w < nw; ++w) {
    for (int a = 0; a < n; ++a) {
      const int ra = region[part[w * n + a]];
      for (int b = 0; b < n; ++b) {
        if (region[part[w * n + b]] != ra) mask[(static_cast<std::size_t>(w) * n + a) * n + b] = kMaskValue;
      }
    }
  }
  return mask;
}

std::vector<int> relative_position_index(int window) {
  if (window < 1) throw UsageError("window size must be at least 1");
  const int n = window * window;
  const int side = 2 * window - 1;
  std::vector<int> idx(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int dr = a / window - b / window + window - 1;
      const int dc = a % window - b % window + window - 1;
      idx[a * n + b] = dr * side + dc;
    }
  }
  return idx;
}

template <typename T>
void attention_forward(const AttentionGeometry& geo, const T* qkv, const T* bias_table, T* out, T* probs) {
  const int n = geo.tokens, c = geo.channels, heads = geo.heads;
  const int d = c / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(d));
  const std::vector<int>& rel = *geo.rel_index;
  const float* mask = geo.mask ? geo.mask->ptr() : nullptr;
  std::vector<T> p(static_cast<std::size_t>(n) * n);

  for (int w = 0; w < geo.windows; ++w) {
    const T* base = qkv + static_cast<std::size_t>(w) * n * 3 * c;
    const float* wmask = mask ? mask + static_cast<std::size_t>(w) * n * n : nullptr;
    T* wout = out + static_cast<std::size_t>(w) * n * c;
    for (int h = 0; h < heads; ++h) {
      for (int i = 0; i < n; ++i) {
        const T* q = base + static_cast<std::size_t>(i) * 3 * c + h * d;
        T* row = p.data() + static_cast<std::size_t>(i) * n;
        bool any_open = wmask == nullptr;
        T mx = -std::numeric_limits<T>::infinity();
        for (int j = 0; j < n; ++j) {
          const T* k = base + static_cast<std::size_t>(j) * 3 * c + c + h * d;
          T s = 0;
          for (int e = 0; e < d; ++e) s += q[e] * k[e];
          s = s * scale + bias_table[rel[i * n + j] * heads + h];
          if (wmask) {
            const float m = wmask[i * n + j];
            if (m == 0.0f) any_open = true;
            s += static_cast<T>(m);
          }
          row[j] = s;
          mx = std::max(mx, s);
        }
        if (!any_open) {
          std::fill(row, row + n, T(0));
          continue;
        }
        T sum = 0;
        for (int j = 0; j < n; ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += row[j];
        }
        for (int j = 0; j < n; ++j) row[j] /= sum;
      }
      for (int i = 0; i < n; ++i) {
        T* o = wout + static_cast<std::size_t>(i) * c + h * d;
        std::fill(o, o + d, T(0));
        const T* row = p.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
          const T* v = base + static_cast<std::size_t>(j) * 3 * c + 2 * c + h * d;
          const T a = row[j];
          for (int e = 0; e < d; ++e) o[e] += a * v[e];
        }
      }
      if (probs) {
        std::copy(p.begin(), p.end(), probs + (static_cast<std::size_t>(w) * heads + h) * n * n);
      }
    }
  }
}

template <typename T>
void attention_backward(const AttentionGeometry& geo, const T* qkv, const T* probs, const T* d_out, T* d_qkv,
                        T* d_bias_table) {
  const int n = geo.tokens, c = geo.channels, heads = geo.heads;
  const int d = c / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(d));
  const std::vector<int>& rel = *geo.rel_index;
  std::vector<T> ds(static_cast<std::size_t>(n) * n);

  for (int w = 0; w < geo.windows; ++w) {
    const T* base = qkv + static_cast<std::size_t>(w) * n * 3 * c;
    T* dbase = d_qkv ? d_qkv + static_cast<std::size_t>(w) * n * 3 * c : nullptr;
    const T* wdo = d_out + static_cast<std::size_t>(w) * n * c;
    for (int h = 0; h < heads; ++h) {
      const T* p = probs + (static_cast<std::size_t>(w) * heads + h) * n * n;
      for (int i = 0; i < n; ++i) {
        const T* go = wdo + static_cast<std::size_t>(i) * c + h * d;
        const T* prow = p + static_cast<std::size_t>(i) * n;
        T dot = 0;
        for (int j = 0; j < n; ++j) {
          const T* v = base + static_cast<std::size_t>(j) * 3 * c + 2 * c + h * d;
          T dp = 0;
          for (int e = 0; e < d; ++e) dp += go[e] * v[e];
          ds[i * n + j] = dp;
          dot += prow[j] * dp;
          if (dbase) {
            T* dv = dbase + static_cast<std::size_t>(j) * 3 * c + 2 * c + h * d;
            for (int e = 0; e < d; ++e) dv[e] += prow[j] * go[e];
          }
        }
        for (int j = 0; j < n; ++j) ds[i * n + j] = prow[j] * (ds[i * n + j] - dot);
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const T g = ds[i * n + j];
          if (d_bias_table) d_bias_table[rel[i * n + j] * heads + h] += g;
          if (!dbase || g == T(0)) continue;
          const T gs = g * scale;
          const T* q = base + static_cast<std::size_t>(i) * 3 * c + h * d;
          const T* k = base + static_cast<std::size_t>(j) * 3 * c + c + h * d;
          T* dq = dbase + static_cast<std::size_t>(i) * 3 * c + h * d;
          T* dk = dbase + static_cast<std::size_t>(j) * 3 * c + c + h * d;
          for (int e = 0; e < d; ++e) {
            dq[e] += gs * k[e];
            dk[e] += gs * q[e];
          }
        }
      }
    }
  }
}

#define LANDSEG_INSTANTIATE(T)                                                                              \
  template BasicTensor<T> gather_rows<T>(const BasicTensor<T>&, const RowIndex&, Shape);                   \
  template BasicTensor<T> apply_spatial<T>(const BasicTensor<T>&, const SpatialMap&, Shape);               \
  template BasicTensor<T> window_partition<T>(const BasicTensor<T>&, int);                                 \
  template BasicTensor<T> window_reverse<T>(const BasicTensor<T>&, int, int, int);                         \
  template BasicTensor<T> cyclic_shift<T>(const BasicTensor<T>&, int);                                     \
  template void attention_forward<T>(const AttentionGeometry&, const T*, const T*, T*, T*);                \
  template void attention_backward<T>(const AttentionGeometry&, const T*, const T*, const T*, T*, T*);

LANDSEG_INSTANTIATE(float)
LANDSEG_INSTANTIATE(double)
#undef LANDSEG_INSTANTIATE

}  // namespace landseg::nn
