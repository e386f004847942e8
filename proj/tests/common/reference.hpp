// Plain-loop double-precision reference implementations used as test oracles.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "landseg/swin/autograd.hpp"

namespace ref {

using Vec = std::vector<double>;

struct Map {
  int h = 0, w = 0, c = 0;
  Vec v;
  double& at(int i, int j, int k) { return v[(static_cast<std::size_t>(i) * w + j) * c + k]; }
  double at(int i, int j, int k) const { return v[(static_cast<std::size_t>(i) * w + j) * c + k]; }
};

inline Map zeros(int h, int w, int c) { return {h, w, c, Vec(static_cast<std::size_t>(h) * w * c, 0.0)}; }

template <typename T>
Vec values(const landseg::nn::ParamStore<T>& store, const std::string& name) {
  const auto& t = store.get(name).value;
  return Vec(t.storage().begin(), t.storage().end());
}

inline Map layer_norm(const Map& x, const Vec& g, const Vec& b) {
  Map y = x;
  for (int i = 0; i < x.h; ++i) {
    for (int j = 0; j < x.w; ++j) {
      double mean = 0, var = 0;
      for (int k = 0; k < x.c; ++k) mean += x.at(i, j, k);
      mean /= x.c;
      for (int k = 0; k < x.c; ++k) var += (x.at(i, j, k) - mean) * (x.at(i, j, k) - mean);
      var /= x.c;
      for (int k = 0; k < x.c; ++k) y.at(i, j, k) = (x.at(i, j, k) - mean) / std::sqrt(var + 1e-5) * g[k] + b[k];
    }
  }
  return y;
}

/// W is [out, in] row-major.
inline Map linear(const Map& x, const Vec& W, const Vec* b, int out) {
  Map y = zeros(x.h, x.w, out);
  for (int i = 0; i < x.h; ++i) {
    for (int j = 0; j < x.w; ++j) {
      for (int o = 0; o < out; ++o) {
        double s = b ? (*b)[o] : 0.0;
        for (int k = 0; k < x.c; ++k) s += W[static_cast<std::size_t>(o) * x.c + k] * x.at(i, j, k);
        y.at(i, j, o) = s;
      }
    }
  }
  return y;
}

inline Map gelu(Map x) {
  for (auto& v : x.v) v = 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
  return x;
}

inline Map add(Map a, const Map& b) {
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
  return a;
}

/// Region of a pre-shift row or column: 0 for the first s entries (which wrap
/// to the far side), 1 for the body, 2 for the last M - s entries.
inline int region(int pos, int size, int window, int shift) {
  if (shift == 0) return 0;
  if (pos < shift) return 0;
  if (pos < size - window + shift) return 1;
  return 2;
}

/// Windowed attention on an already shifted and padded map of fused qkv.
/// Token pairs attend iff they share a window and their pre-shift positions
/// share a region. Returns [H, W, C] and optionally the attention weight
/// between every ordered pair of pixels (0 when not allowed).
inline Map region_attention(const Map& qkv, int window, int heads, int shift, const Vec& bias_table,
                            std::vector<double>* weights = nullptr) {
  const int H = qkv.h, W = qkv.w, C = qkv.c / 3, d = C / heads, M = window;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Map out = zeros(H, W, C);
  const int P = H * W;
  if (weights) weights->assign(static_cast<std::size_t>(P) * P * heads, 0.0);
  auto allowed = [&](int i, int j, int k, int l) {
    if (i / M != k / M || j / M != l / M) return false;
    const int oi = (i + shift) % H, oj = (j + shift) % W, ok = (k + shift) % H, ol = (l + shift) % W;
    return region(oi, H, M, shift) == region(ok, H, M, shift) && region(oj, W, M, shift) == region(ol, W, M, shift);
  };
  for (int i = 0; i < H; ++i) {
    for (int j = 0; j < W; ++j) {
      for (int h = 0; h < heads; ++h) {
        std::vector<std::pair<int, double>> logits;
        for (int k = 0; k < H; ++k) {
          for (int l = 0; l < W; ++l) {
            if (!allowed(i, j, k, l)) continue;
            double s = 0;
            for (int e = 0; e < d; ++e) s += qkv.at(i, j, h * d + e) * scale * qkv.at(k, l, C + h * d + e);
            const int dr = i - k + M - 1, dc = j - l + M - 1;
            s += bias_table[static_cast<std::size_t>(dr * (2 * M - 1) + dc) * heads + h];
            logits.emplace_back(k * W + l, s);
          }
        }
        double mx = -1e300, z = 0;
        for (auto& [p, s] : logits) mx = std::max(mx, s);
        for (auto& [p, s] : logits) z += std::exp(s - mx);
        for (auto& [p, s] : logits) {
          const double a = std::exp(s - mx) / z;
          const int k = p / W, l = p % W;
          for (int e = 0; e < d; ++e) out.at(i, j, h * d + e) += a * qkv.at(k, l, 2 * C + h * d + e);
          if (weights) (*weights)[(static_cast<std::size_t>(i * W + j) * P + p) * heads + h] = a;
        }
      }
    }
  }
  return out;
}

/// Full pre-norm block: LN, pad to the window multiple, roll by -s, region
/// attention, projection, roll back, crop, residual, then the GELU MLP.
template <typename T>
Map swin_block(const landseg::nn::ParamStore<T>& p, const std::string& pre, const Map& x, int M, int heads,
               bool shifted) {
  const int C = x.c;
  const int s = shifted ? M / 2 : 0;
  const int hp = (x.h + M - 1) / M * M, wp = (x.w + M - 1) / M * M;
  Map n = layer_norm(x, values(p, pre + ".norm1.weight"), values(p, pre + ".norm1.bias"));
  Map padded = zeros(hp, wp, C);
  for (int i = 0; i < x.h; ++i) {
    for (int j = 0; j < x.w; ++j) {
      for (int k = 0; k < C; ++k) padded.at(i, j, k) = n.at(i, j, k);
    }
  }
  Map rolled = zeros(hp, wp, C);
  for (int i = 0; i < hp; ++i) {
    for (int j = 0; j < wp; ++j) {
      for (int k = 0; k < C; ++k) rolled.at(i, j, k) = padded.at((i + s) % hp, (j + s) % wp, k);
    }
  }
  const Vec qb = values(p, pre + ".attn.qkv.bias");
  Map qkv = linear(rolled, values(p, pre + ".attn.qkv.weight"), &qb, 3 * C);
  Map att = region_attention(qkv, M, heads, s, values(p, pre + ".attn.relative_position_bias_table"));
  const Vec pb = values(p, pre + ".attn.proj.bias");
  Map proj = linear(att, values(p, pre + ".attn.proj.weight"), &pb, C);
  Map back = zeros(x.h, x.w, C);
  for (int i = 0; i < hp; ++i) {
    for (int j = 0; j < wp; ++j) {
      const int oi = (i + s) % hp, oj = (j + s) % wp;
      if (oi >= x.h || oj >= x.w) continue;
      for (int k = 0; k < C; ++k) back.at(oi, oj, k) = proj.at(i, j, k);
    }
  }
  Map y = add(x, back);
  Map hdn = layer_norm(y, values(p, pre + ".norm2.weight"), values(p, pre + ".norm2.bias"));
  const Vec b1 = values(p, pre + ".mlp.fc1.bias");
  const Vec b2 = values(p, pre + ".mlp.fc2.bias");
  const int hidden = static_cast<int>(b1.size());
  hdn = gelu(linear(hdn, values(p, pre + ".mlp.fc1.weight"), &b1, hidden));
  hdn = linear(hdn, values(p, pre + ".mlp.fc2.weight"), &b2, C);
  return add(y, hdn);
}

}  // namespace ref
