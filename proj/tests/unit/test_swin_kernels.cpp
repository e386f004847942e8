#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "landseg/swin/kernels.hpp"
#include "reference.hpp"

using namespace landseg;
using namespace landseg::nn;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, float scale = 1.0f) {
  Tensor t(std::move(shape));
  std::normal_distribution<float> n(0.0f, scale);
  for (auto& v : t.storage()) v = n(rng);
  return t;
}

Tensor counting(int h, int w, int c = 1) {
  Tensor t({h, w, c});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(i);
  return t;
}

}  // namespace

TEST_CASE("window partition counts and contents") {
  Tensor x = counting(8, 8);
  Tensor w = window_partition(x, 4);
  CHECK(w.shape() == Shape{4, 16, 1});
  for (int t = 0; t < 16; ++t) CHECK(w[t] == static_cast<float>((t / 4) * 8 + t % 4));
  // Window 1 is the top-right block.
  CHECK(w[16] == 4.0f);
  CHECK_THROWS(window_partition(counting(8, 6), 4));
}

TEST_CASE("window partition round trips on random shapes") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 120; ++rep) {
    const int m = 1 + static_cast<int>(rng() % 5);
    const int h = m * (1 + static_cast<int>(rng() % 4)), w = m * (1 + static_cast<int>(rng() % 4));
    const int c = 1 + static_cast<int>(rng() % 5);
    Tensor x = random_tensor({h, w, c}, rng);
    CHECK(window_reverse(window_partition(x, m), m, h, w) == x);
  }
  Tensor x = random_tensor({12, 12, 8}, rng);
  CHECK(window_reverse(window_partition(x, 4), 4, 12, 12) == x);
}

TEST_CASE("cyclic shift identity, quadrant swap and inverse") {
  Tensor x = counting(4, 4);
  CHECK(cyclic_shift(x, 0) == x);
  Tensor s = cyclic_shift(x, 2);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(s.at({i, j, 0}) == x.at({(i + 2) % 4, (j + 2) % 4, 0}));
  }
  CHECK(s.at({0, 0, 0}) == 10.0f);  // bottom-right quadrant moved to top-left
  CHECK(s.at({2, 2, 0}) == 0.0f);

  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 120; ++rep) {
    const int h = 2 + static_cast<int>(rng() % 9), w = 2 + static_cast<int>(rng() % 9);
    const int sh = static_cast<int>(rng() % std::min(h, w));
    Tensor r = random_tensor({h, w, 3}, rng);
    CHECK(cyclic_shift(cyclic_shift(r, sh), -sh) == r);
  }
}

TEST_CASE("shift mask without shift is all zeros") {
  Tensor m = shift_attention_mask(8, 8, 4, 0);
  CHECK(m.shape() == Shape{4, 16, 16});
  for (auto v : m.storage()) CHECK(v == 0.0f);
  CHECK_THROWS(shift_attention_mask(8, 8, 4, 1));
}

TEST_CASE("shift mask equals explicit region labelling") {
  for (auto [H, W, M] : {std::tuple{4, 4, 4}, std::tuple{8, 8, 4}, std::tuple{12, 8, 4}, std::tuple{6, 6, 6},
                         std::tuple{12, 12, 6}}) {
    const int s = M / 2;
    Tensor mask = shift_attention_mask(H, W, M, s);
    const int nwc = W / M, n = M * M;
    for (int w = 0; w < mask.dim(0); ++w) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          // Shifted-frame positions of tokens a and b, then their pre-shift origin.
          const int ia = (w / nwc) * M + a / M, ja = (w % nwc) * M + a % M;
          const int ib = (w / nwc) * M + b / M, jb = (w % nwc) * M + b % M;
          const bool same = ref::region((ia + s) % H, H, M, s) == ref::region((ib + s) % H, H, M, s) &&
                            ref::region((ja + s) % W, W, M, s) == ref::region((jb + s) % W, W, M, s);
          CHECK(mask.at({w, a, b}) == (same ? 0.0f : kMaskValue));
        }
      }
    }
  }
}

TEST_CASE("only windows on the wrap-around boundary are masked") {
  Tensor mask = shift_attention_mask(8, 8, 4, 2);
  int all_zero = 0;
  for (int w = 0; w < 4; ++w) {
    bool zero = true;
    for (int k = 0; k < 256; ++k) zero = zero && mask[w * 256 + k] == 0.0f;
    all_zero += zero;
    if (zero) CHECK(w == 0);
  }
  CHECK(all_zero == 1);
}

TEST_CASE("relative position index") {
  CHECK(relative_position_index(1) == std::vector<int>{0});
  auto idx2 = relative_position_index(2);
  CHECK(idx2.size() == 16);
  CHECK(std::set<int>(idx2.begin(), idx2.end()).size() == 9);
  for (int m = 1; m <= 7; ++m) {
    auto idx = relative_position_index(m);
    const int n = m * m, span = 2 * m - 1;
    for (int i = 0; i < n; ++i) {
      CHECK(idx[i * n + i] == idx[0]);
      std::set<int> row;
      for (int j = 0; j < n; ++j) {
        const int dr = i / m - j / m, dc = i % m - j % m;
        CHECK(idx[i * n + j] == (dr + m - 1) * span + (dc + m - 1));
        CHECK(idx[j * n + i] == span * span - 1 - idx[i * n + j]);
        row.insert(idx[i * n + j]);
      }
      CHECK(row.size() == static_cast<std::size_t>(n));
    }
  }
}

TEST_CASE("bilinear upsample of 2x2 to 4x4") {
  Tensor x({2, 2, 1}, std::vector<float>{0, 4, 8, 12});
  Tensor y = apply_spatial(x, bilinear_map(2, 2, 4, 4), {4, 4, 1});
  // Half-pixel centers: sources -0.25 (clamped), 0.25, 0.75, 1.25 (clamped).
  const double f[] = {0.0, 0.25, 0.75, 1.0};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(y.at({i, j, 0}) == doctest::Approx(8 * f[i] + 4 * f[j]).epsilon(1e-7));
  }
  Tensor crop = apply_spatial(x, bilinear_map(2, 2, 4, 4, 3, 2), {3, 2, 1});
  CHECK(crop.at({2, 1, 0}) == y.at({2, 1, 0}));
}

TEST_CASE("adaptive average pooling bins") {
  std::mt19937_64 rng(13);
  Tensor x = random_tensor({5, 7, 2}, rng);
  Tensor y = apply_spatial(x, adaptive_avg_pool_map(5, 7, 3), {3, 3, 2});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int h0 = i * 5 / 3, h1 = ((i + 1) * 5 + 2) / 3, w0 = j * 7 / 3, w1 = ((j + 1) * 7 + 2) / 3;
      for (int c = 0; c < 2; ++c) {
        double s = 0;
        for (int r = h0; r < h1; ++r) {
          for (int q = w0; q < w1; ++q) s += x.at({r, q, c});
        }
        CHECK(y.at({i, j, c}) == doctest::Approx(s / ((h1 - h0) * (w1 - w0))).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("attention with zero values outputs zeros and rows sum to one") {
  std::mt19937_64 rng(14);
  const int M = 4, n = 16, C = 8, heads = 2;
  Tensor qkv = random_tensor({4, n, 3 * C}, rng);
  for (int w = 0; w < 4; ++w) {
    for (int t = 0; t < n; ++t) {
      for (int k = 0; k < C; ++k) qkv[(w * n + t) * 3 * C + 2 * C + k] = 0.0f;
    }
  }
  Tensor table = random_tensor({(2 * M - 1) * (2 * M - 1), heads}, rng);
  AttentionGeometry geo{4, n, C, heads, std::make_shared<const std::vector<int>>(relative_position_index(M)),
                        std::make_shared<const Tensor>(shift_attention_mask(8, 8, M, 2))};
  Tensor out({4, n, C}), probs({4, heads, n, n});
  attention_forward(geo, qkv.ptr(), table.ptr(), out.ptr(), probs.ptr());
  for (auto v : out.storage()) CHECK(v == 0.0f);
  for (int r = 0; r < 4 * heads * n; ++r) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += probs[r * n + j];
    CHECK(std::abs(s - 1.0) <= 1e-6);
  }
}

TEST_CASE("single-token windows pass the value through") {
  std::mt19937_64 rng(15);
  const int C = 6;
  Tensor qkv = random_tensor({3, 1, 3 * C}, rng);
  Tensor table = random_tensor({1, 2}, rng);
  AttentionGeometry geo{3, 1, C, 2, std::make_shared<const std::vector<int>>(relative_position_index(1)), nullptr};
  Tensor out({3, 1, C});
  attention_forward(geo, qkv.ptr(), table.ptr(), out.ptr(), static_cast<float*>(nullptr));
  for (int w = 0; w < 3; ++w) {
    for (int k = 0; k < C; ++k) CHECK(out[w * C + k] == qkv[w * 3 * C + 2 * C + k]);
  }
}

TEST_CASE("masked pair weight against a hand softmax") {
  std::mt19937_64 rng(16);
  const int M = 2, n = 4, C = 3;
  Tensor qkv = random_tensor({1, n, 3 * C}, rng);
  Tensor table = random_tensor({9, 1}, rng);
  Tensor mask({1, n, n}, 0.0f);
  mask.at({0, 0, 3}) = kMaskValue;  // token 0 may not attend to token 3
  AttentionGeometry geo{1, n, C, 1, std::make_shared<const std::vector<int>>(relative_position_index(M)),
                        std::make_shared<const Tensor>(mask)};
  Tensor out({1, n, C}), probs({1, 1, n, n});
  attention_forward(geo, qkv.ptr(), table.ptr(), out.ptr(), probs.ptr());
  CHECK(probs.at({0, 0, 0, 3}) < 1e-6f);
  const auto idx = relative_position_index(M);
  const double scale = 1.0 / std::sqrt(3.0);
  for (int i = 0; i < n; ++i) {
    double logit[4], mx = -1e300, z = 0;
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int k = 0; k < C; ++k) s += qkv[i * 3 * C + k] * scale * qkv[j * 3 * C + C + k];
      logit[j] = s + table[idx[i * n + j]] + mask.at({0, i, j});
      mx = std::max(mx, logit[j]);
    }
    for (int j = 0; j < n; ++j) z += std::exp(logit[j] - mx);
    for (int j = 0; j < n; ++j) CHECK(probs.at({0, 0, i, j}) == doctest::Approx(std::exp(logit[j] - mx) / z).epsilon(1e-5));
  }
}

TEST_CASE("shifted masked attention equals per-region brute force") {
  std::mt19937_64 rng(17);
  const int H = 8, W = 8, M = 4, s = 2, C = 8, heads = 2, n = M * M;
  ref::Map qkv_map = ref::zeros(H, W, 3 * C);
  std::normal_distribution<double> nd(0, 1);
  for (auto& v : qkv_map.v) v = static_cast<float>(nd(rng));
  ref::Vec table((2 * M - 1) * (2 * M - 1) * heads);
  for (auto& v : table) v = static_cast<float>(nd(rng));

  Tensor map({H, W, 3 * C});
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = static_cast<float>(qkv_map.v[i]);
  Tensor windows = window_partition(map, M);
  Tensor tab({(2 * M - 1) * (2 * M - 1), heads});
  for (std::size_t i = 0; i < tab.size(); ++i) tab[i] = static_cast<float>(table[i]);
  AttentionGeometry geo{4, n, C, heads, std::make_shared<const std::vector<int>>(relative_position_index(M)),
                        std::make_shared<const Tensor>(shift_attention_mask(H, W, M, s))};
  Tensor out({4, n, C}), probs({4, heads, n, n});
  attention_forward(geo, windows.ptr(), tab.ptr(), out.ptr(), probs.ptr());
  Tensor out_map = window_reverse(out, M, H, W);

  std::vector<double> weights;
  ref::Map expect = ref::region_attention(qkv_map, M, heads, s, table, &weights);
  double max_diff = 0;
  for (std::size_t i = 0; i < expect.v.size(); ++i) max_diff = std::max(max_diff, std::abs(expect.v[i] - out_map[i]));
  CHECK(max_diff <= 1e-5);

  double cross = 0;
  for (int w = 0; w < 4; ++w) {
    for (int h = 0; h < heads; ++h) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const int ia = (w / 2) * M + a / M, ja = (w % 2) * M + a % M;
          const int ib = (w / 2) * M + b / M, jb = (w % 2) * M + b % M;
          const double want = weights[(static_cast<std::size_t>(ia * W + ja) * H * W + ib * W + jb) * heads + h];
          const double got = probs.at({w, h, a, b});
          if (want == 0.0) {
            cross = std::max(cross, got);
          } else {
            CHECK(std::abs(got - want) <= 1e-5);
          }
        }
      }
    }
  }
  CHECK(cross < 1e-6);
}
