#include "landseg/swin/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace landseg::nn {

namespace {

template <typename T>
std::vector<T> transpose(const BasicTensor<T>& w) {
  const int rows = w.dim(0), cols = w.dim(1);
  std::vector<T> t(w.size());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) t[static_cast<std::size_t>(c) * rows + r] = w[static_cast<std::size_t>(r) * cols + c];
  }
  return t;
}


// y[r] = bias + sum_i x[r][i] * wt[i] with wt laid out [in, out]. Outputs are
// accumulated in registers over blocks of kRows rows by kCols columns; each
// output still sums its terms in input order. All-zero rows only get the bias.
template <typename T>
void dense_rows(const T* x, std::size_t rows, int in, const T* wt, int out, const T* bias, T* y) {
  constexpr int kRows = 4, kCols = 8;
  std::vector<std::size_t> live;
  live.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x + r * in;
    T* yr = y + r * out;
    if (bias) {
      std::copy(bias, bias + out, yr);
    } else {
      std::fill(yr, yr + out, T(0));
    }
    if (std::any_of(xr, xr + in, [](T v) { return v != T(0); })) live.push_back(r);
  }
  std::size_t k = 0;
  for (; k + kRows <= live.size(); k += kRows) {
    const T* xs[kRows];
    T* ys[kRows];
    for (int j = 0; j < kRows; ++j) {
      xs[j] = x + live[k + j] * in;
      ys[j] = y + live[k + j] * out;
    }
    int o0 = 0;
    for (; o0 + kCols <= out; o0 += kCols) {
      T acc[kRows][kCols];
      for (int j = 0; j < kRows; ++j) {
        for (int c = 0; c < kCols; ++c) acc[j][c] = ys[j][o0 + c];
      }
      for (int i = 0; i < in; ++i) {
        const T* w = wt + static_cast<std::size_t>(i) * out + o0;
        for (int j = 0; j < kRows; ++j) {
          const T a = xs[j][i];
          for (int c = 0; c < kCols; ++c) acc[j][c] += a * w[c];
        }
      }
      for (int j = 0; j < kRows; ++j) {
        for (int c = 0; c < kCols; ++c) ys[j][o0 + c] = acc[j][c];
      }
    }
    for (int j = 0; j < kRows; ++j) {
      for (int o = o0; o < out; ++o) {
        T acc = ys[j][o];
        for (int i = 0; i < in; ++i) acc += xs[j][i] * wt[static_cast<std::size_t>(i) * out + o];
        ys[j][o] = acc;
      }
    }
  }
  for (; k < live.size(); ++k) {
    const T* xr = x + live[k] * in;
    T* yr = y + live[k] * out;
    for (int i = 0; i < in; ++i) {
      const T a = xr[i];
      const T* w = wt + static_cast<std::size_t>(i) * out;
      for (int o = 0; o < out; ++o) yr[o] += a * w[o];
    }
  }
}

}  // namespace

template <typename T>
Var linear(Tape<T>& tape, Var x, Var weight, Var bias) {
  const BasicTensor<T>& xv = tape.value(x);
  const BasicTensor<T>& wv = tape.value(weight);
  if (wv.rank() != 2 || xv.dim(-1) != wv.dim(1)) {
    throw UsageError("linear: input " + shape_string(xv.shape()) + " incompatible with weight " +
                     shape_string(wv.shape()));
  }
  const int in = wv.dim(1), out_dim = wv.dim(0);
  const std::size_t rows = xv.size() / in;
  Shape out_shape = xv.shape();
  out_shape.back() = out_dim;
  BasicTensor<T> y(out_shape);
  const std::vector<T> wt = transpose(wv);
  const T* bptr = nullptr;
  if (bias.valid()) {
    if (tape.value(bias).size() != static_cast<std::size_t>(out_dim)) throw UsageError("linear: bias size mismatch");
    bptr = tape.value(bias).ptr();
  }
  dense_rows(xv.ptr(), rows, in, wt.data(), out_dim, bptr, y.ptr());
  std::vector<Var> inputs{x, weight};
  if (bias.valid()) inputs.push_back(bias);
  return tape.push_op(std::move(y), inputs, [x, weight, bias, in, out_dim, rows](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    const BasicTensor<T>& xv = t.value(x);
    const BasicTensor<T>& wv = t.value(weight);
    if (t.requires_grad(x)) {
      BasicTensor<T>& dx = t.grad_buffer(x);
      for (std::size_t r = 0; r < rows; ++r) {
        T* dxr = dx.ptr() + r * in;
        const T* dyr = dy.ptr() + r * out_dim;
        for (int o = 0; o < out_dim; ++o) {
          const T g = dyr[o];
          if (g == T(0)) continue;
          const T* wr = wv.ptr() + static_cast<std::size_t>(o) * in;
          for (int i = 0; i < in; ++i) dxr[i] += g * wr[i];
        }
      }
    }
    if (t.requires_grad(weight)) {
      BasicTensor<T>& dw = t.grad_buffer(weight);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* xr = xv.ptr() + r * in;
        const T* dyr = dy.ptr() + r * out_dim;
        for (int o = 0; o < out_dim; ++o) {
          const T g = dyr[o];
          if (g == T(0)) continue;
          T* dwr = dw.ptr() + static_cast<std::size_t>(o) * in;
          for (int i = 0; i < in; ++i) dwr[i] += g * xr[i];
        }
      }
    }
    if (bias.valid() && t.requires_grad(bias)) {
      BasicTensor<T>& db = t.grad_buffer(bias);
      for (std::size_t r = 0; r < rows; ++r) {
        const T* dyr = dy.ptr() + r * out_dim;
        for (int o = 0; o < out_dim; ++o) db[o] += dyr[o];
      }
    }
  });
}

template <typename T>
Var layer_norm(Tape<T>& tape, Var x, Var gamma, Var beta, double eps) {
  const BasicTensor<T>& xv = tape.value(x);
  const int c = xv.dim(-1);
  if (tape.value(gamma).size() != static_cast<std::size_t>(c) || tape.value(beta).size() != static_cast<std::size_t>(c)) {
    throw UsageError("layer_norm: parameter size mismatch");
  }
  const std::size_t rows = xv.size() / c;
  auto xhat = std::make_shared<std::vector<T>>(xv.size());
  auto rstd = std::make_shared<std::vector<T>>(rows);
  BasicTensor<T> y(xv.shape());
  const T* g = tape.value(gamma).ptr();
  const T* b = tape.value(beta).ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xv.ptr() + r * c;
    T mean = 0;
    for (int i = 0; i < c; ++i) mean += xr[i];
    mean /= c;
    T var = 0;
    for (int i = 0; i < c; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= c;
    const T rs = T(1) / std::sqrt(var + static_cast<T>(eps));
    (*rstd)[r] = rs;
    T* hr = xhat->data() + r * c;
    T* yr = y.ptr() + r * c;
    for (int i = 0; i < c; ++i) {
      hr[i] = (xr[i] - mean) * rs;
      yr[i] = hr[i] * g[i] + b[i];
    }
  }
  return tape.push_op(std::move(y), {x, gamma, beta}, [x, gamma, beta, c, rows, xhat, rstd](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    const T* g = t.value(gamma).ptr();
    if (t.requires_grad(gamma) || t.requires_grad(beta)) {
      T* dg = t.requires_grad(gamma) ? t.grad_buffer(gamma).ptr() : nullptr;
      T* db = t.requires_grad(beta) ? t.grad_buffer(beta).ptr() : nullptr;
      for (std::size_t r = 0; r < rows; ++r) {
        const T* dyr = dy.ptr() + r * c;
        const T* hr = xhat->data() + r * c;
        for (int i = 0; i < c; ++i) {
          if (dg) dg[i] += dyr[i] * hr[i];
          if (db) db[i] += dyr[i];
        }
      }
    }
    if (t.requires_grad(x)) {
      T* dx = t.grad_buffer(x).ptr();
      for (std::size_t r = 0; r < rows; ++r) {
        const T* dyr = dy.ptr() + r * c;
        const T* hr = xhat->data() + r * c;
        T mean_d = 0, mean_dh = 0;
        for (int i = 0; i < c; ++i) {
          const T dh = dyr[i] * g[i];
          mean_d += dh;
          mean_dh += dh * hr[i];
        }
        mean_d /= c;
        mean_dh /= c;
        const T rs = (*rstd)[r];
        T* dxr = dx + r * c;
        for (int i = 0; i < c; ++i) dxr[i] += rs * (dyr[i] * g[i] - mean_d - hr[i] * mean_dh);
      }
    }
  });
}

template <typename T>
Var gelu(Tape<T>& tape, Var x) {
  const BasicTensor<T>& xv = tape.value(x);
  BasicTensor<T> y(xv.shape());
  const T inv_sqrt2 = static_cast<T>(1.0 / std::numbers::sqrt2);
  for (std::size_t i = 0; i < xv.size(); ++i) {
    y[i] = T(0.5) * xv[i] * (T(1) + std::erf(xv[i] * inv_sqrt2));
  }
  return tape.push_op(std::move(y), {x}, [x, inv_sqrt2](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    const BasicTensor<T>& xv = t.value(x);
    BasicTensor<T>& dx = t.grad_buffer(x);
    const T inv_sqrt_2pi = static_cast<T>(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const T v = xv[i];
      const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
      dx[i] += dy[i] * (cdf + v * inv_sqrt_2pi * std::exp(T(-0.5) * v * v));
    }
  });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  const BasicTensor<T>& av = tape.value(a);
  const BasicTensor<T>& bv = tape.value(b);
  if (av.shape() != bv.shape()) {
    throw UsageError("add: shape mismatch " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  }
  BasicTensor<T> y(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] + bv[i];
  return tape.push_op(std::move(y), {a, b}, [a, b](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      BasicTensor<T>& d = t.grad_buffer(v);
      for (std::size_t i = 0; i < dy.size(); ++i) d[i] += dy[i];
    }
  });
}

template <typename T>
Var gather(Tape<T>& tape, Var x, std::shared_ptr<const RowIndex> rows, Shape out_shape) {
  BasicTensor<T> y = gather_rows(tape.value(x), *rows, std::move(out_shape));
  return tape.push_op(std::move(y), {x}, [x, rows](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    BasicTensor<T>& dx = t.grad_buffer(x);
    const std::size_t c = static_cast<std::size_t>(dx.dim(-1));
    for (std::size_t r = 0; r < rows->size(); ++r) {
      const int src = (*rows)[r];
      if (src < 0) continue;
      T* d = dx.ptr() + static_cast<std::size_t>(src) * c;
      const T* g = dy.ptr() + r * c;
      for (std::size_t k = 0; k < c; ++k) d[k] += g[k];
    }
  });
}

template <typename T>
Var reshape(Tape<T>& tape, Var x, Shape shape) {
  BasicTensor<T> y = tape.value(x).reshaped(std::move(shape));
  return tape.push_op(std::move(y), {x}, [x](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    BasicTensor<T>& dx = t.grad_buffer(x);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

template <typename T>
Var concat_channels(Tape<T>& tape, const std::vector<Var>& parts) {
  if (parts.empty()) throw UsageError("concat_channels: no inputs");
  const Shape& first = tape.shape(parts[0]);
  const std::size_t rows = tape.value(parts[0]).size() / first.back();
  std::vector<int> widths;
  int total = 0;
  for (Var p : parts) {
    Shape s = tape.shape(p);
    widths.push_back(s.back());
    total += s.back();
    s.back() = first.back();
    if (s != first) throw UsageError("concat_channels: leading dims differ");
  }
  Shape out_shape = first;
  out_shape.back() = total;
  BasicTensor<T> y(out_shape);
  int off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const T* src = tape.value(parts[k]).ptr();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(src + r * widths[k], widths[k], y.ptr() + r * total + off);
    }
    off += widths[k];
  }
  return tape.push_op(std::move(y), parts, [parts, widths, total, rows](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    int off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (t.requires_grad(parts[k])) {
        T* d = t.grad_buffer(parts[k]).ptr();
        for (std::size_t r = 0; r < rows; ++r) {
          const T* g = dy.ptr() + r * total + off;
          T* dr = d + r * widths[k];
          for (int c = 0; c < widths[k]; ++c) dr[c] += g[c];
        }
      }
      off += widths[k];
    }
  });
}

template <typename T>
Var stack(Tape<T>& tape, const std::vector<Var>& parts) {
  if (parts.empty()) throw UsageError("stack: no inputs");
  const Shape& first = tape.shape(parts[0]);
  for (Var p : parts) {
    if (tape.shape(p) != first) throw UsageError("stack: shapes differ");
  }
  Shape out_shape{static_cast<int>(parts.size())};
  out_shape.insert(out_shape.end(), first.begin(), first.end());
  BasicTensor<T> y(out_shape);
  const std::size_t n = tape.value(parts[0]).size();
  for (std::size_t k = 0; k < parts.size(); ++k) std::copy_n(tape.value(parts[k]).ptr(), n, y.ptr() + k * n);
  return tape.push_op(std::move(y), parts, [parts, n](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (!t.requires_grad(parts[k])) continue;
      T* d = t.grad_buffer(parts[k]).ptr();
      for (std::size_t i = 0; i < n; ++i) d[i] += dy[k * n + i];
    }
  });
}

template <typename T>
Var resample(Tape<T>& tape, Var x, std::shared_ptr<const SpatialMap> map, Shape out_shape) {
  BasicTensor<T> y = apply_spatial(tape.value(x), *map, std::move(out_shape));
  return tape.push_op(std::move(y), {x}, [x, map](Tape<T>& t, Var self) {
    const BasicTensor<T>& dy = t.grad(self);
    BasicTensor<T>& dx = t.grad_buffer(x);
    const std::size_t c = static_cast<std::size_t>(dx.dim(-1));
    for (int r = 0; r < map->out_rows; ++r) {
      const T* g = dy.ptr() + static_cast<std::size_t>(r) * c;
      for (int k = map->offset[r]; k < map->offset[r + 1]; ++k) {
        const T w = static_cast<T>(map->weight[k]);
        T* d = dx.ptr() + static_cast<std::size_t>(map->index[k]) * c;
        for (std::size_t i = 0; i < c; ++i) d[i] += w * g[i];
      }
    }
  });
}

template <typename T>
Var window_attention(Tape<T>& tape, Var qkv, Var bias_table, const AttentionGeometry& geo) {
  const BasicTensor<T>& qv = tape.value(qkv);
  const BasicTensor<T>& bv = tape.value(bias_table);
  if (qv.rank() != 3 || qv.dim(0) != geo.windows || qv.dim(1) != geo.tokens || qv.dim(2) != 3 * geo.channels) {
    throw UsageError("window_attention: qkv shape " + shape_string(qv.shape()) + " inconsistent with geometry");
  }
  if (geo.heads <= 0 || geo.channels % geo.heads != 0) throw UsageError("window_attention: heads must divide channels");
  if (bv.rank() != 2 || bv.dim(1) != geo.heads) throw UsageError("window_attention: bias table shape mismatch");
  BasicTensor<T> out({geo.windows, geo.tokens, geo.channels});
  auto probs = std::make_shared<std::vector<T>>(static_cast<std::size_t>(geo.windows) * geo.heads * geo.tokens *
                                                geo.tokens);
  attention_forward(geo, qv.ptr(), bv.ptr(), out.ptr(), probs->data());
  if (!out.all_finite()) throw NumericError("window_attention produced non-finite values");
  return tape.push_op(std::move(out), {qkv, bias_table}, [qkv, bias_table, geo, probs](Tape<T>& t, Var self) {
    T* dq = t.requires_grad(qkv) ? t.grad_buffer(qkv).ptr() : nullptr;
    T* db = t.requires_grad(bias_table) ? t.grad_buffer(bias_table).ptr() : nullptr;
    attention_backward(geo, t.value(qkv).ptr(), probs->data(), t.grad(self).ptr(), dq, db);
  });
}

template <typename T>
Var sum(Tape<T>& tape, Var x) {
  const BasicTensor<T>& xv = tape.value(x);
  T s = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i];
  return tape.push_op(BasicTensor<T>({1}, s), {x}, [x](Tape<T>& t, Var self) {
    const T g = t.grad(self)[0];
    BasicTensor<T>& dx = t.grad_buffer(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g;
  });
}

template <typename T>
Var dot_constant(Tape<T>& tape, Var x, BasicTensor<T> coeffs) {
  const BasicTensor<T>& xv = tape.value(x);
  if (xv.size() != coeffs.size()) throw UsageError("dot_constant: size mismatch");
  T s = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i] * coeffs[i];
  auto c = std::make_shared<BasicTensor<T>>(std::move(coeffs));
  return tape.push_op(BasicTensor<T>({1}, s), {x}, [x, c](Tape<T>& t, Var self) {
    const T g = t.grad(self)[0];
    BasicTensor<T>& dx = t.grad_buffer(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g * (*c)[i];
  });
}

#define LANDSEG_INSTANTIATE(T)                                                                      \
  template Var linear<T>(Tape<T>&, Var, Var, Var);                                                  \
  template Var layer_norm<T>(Tape<T>&, Var, Var, Var, double);                                      \
  template Var gelu<T>(Tape<T>&, Var);                                                              \
  template Var add<T>(Tape<T>&, Var, Var);                                                          \
  template Var gather<T>(Tape<T>&, Var, std::shared_ptr<const RowIndex>, Shape);                    \
  template Var reshape<T>(Tape<T>&, Var, Shape);                                                    \
  template Var concat_channels<T>(Tape<T>&, const std::vector<Var>&);                               \
  template Var stack<T>(Tape<T>&, const std::vector<Var>&);                                         \
  template Var resample<T>(Tape<T>&, Var, std::shared_ptr<const SpatialMap>, Shape);                \
  template Var window_attention<T>(Tape<T>&, Var, Var, const AttentionGeometry&);                   \
  template Var sum<T>(Tape<T>&, Var);                                                               \
  template Var dot_constant<T>(Tape<T>&, Var, BasicTensor<T>);

LANDSEG_INSTANTIATE(float)
LANDSEG_INSTANTIATE(double)
#undef LANDSEG_INSTANTIATE

}  // namespace landseg::nn
