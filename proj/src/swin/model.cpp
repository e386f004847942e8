#include "landseg/swin/model.hpp"

#include <cmath>
#include <mutex>
#include <random>
#include <unordered_map>

namespace landseg::nn {

namespace {

std::string stage_prefix(int stage) { return "backbone.layers." + std::to_string(stage); }
std::string block_prefix(int stage, int block) {
  return stage_prefix(stage) + ".blocks." + std::to_string(block);
}

constexpr std::array<int, 4> kPoolScales = {1, 2, 3, 6};

int round_up(int v, int m) { return (v + m - 1) / m * m; }

// Index maps depend only on shapes; they are built once per key and shared.
template <typename V, typename F>
std::shared_ptr<const V> cached(const std::string& key, F&& build) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::shared_ptr<const void>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return std::static_pointer_cast<const V>(it->second);
  }
  auto value = std::make_shared<const V>(build());
  std::lock_guard lock(mu);
  cache.emplace(key, value);
  return value;
}

std::string key_of(const char* kind, std::initializer_list<int> dims) {
  std::string k = kind;
  for (int d : dims) k += ":" + std::to_string(d);
  return k;
}

}  // namespace

void SwinConfig::validate() const {
  if (patch_size <= 0) throw UsageError("patch_size must be positive");
  if (window_size < 2) throw UsageError("window_size must be at least 2");
  if (embed_dim <= 0) throw UsageError("embed_dim must be positive");
  if (mlp_ratio <= 0 || num_classes <= 0 || in_channels <= 0 || decoder_channels <= 0) {
    throw UsageError("mlp_ratio, num_classes, in_channels and decoder_channels must be positive");
  }
  for (int s = 0; s < 4; ++s) {
    if (depths[s] <= 0) throw UsageError("every stage needs at least one block");
    if (num_heads[s] <= 0 || stage_channels(s) % num_heads[s] != 0) {
      throw UsageError("stage " + std::to_string(s) + ": heads must divide the channel width " +
                       std::to_string(stage_channels(s)));
    }
  }
}

SwinConfig SwinConfig::tiny() {
  SwinConfig c;
  c.embed_dim = 8;
  c.depths = {1, 1, 1, 1};
  c.num_heads = {1, 2, 4, 8};
  c.window_size = 4;
  c.decoder_channels = 8;
  return c;
}

std::map<std::string, std::string> SwinConfig::to_map() const {
  auto join = [](const std::array<int, 4>& v) {
    return std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]) + "," +
           std::to_string(v[3]);
  };
  return {{"patch_size", std::to_string(patch_size)},
          {"window_size", std::to_string(window_size)},
          {"embed_dim", std::to_string(embed_dim)},
          {"depths", join(depths)},
          {"num_heads", join(num_heads)},
          {"mlp_ratio", std::to_string(mlp_ratio)},
          {"num_classes", std::to_string(num_classes)},
          {"in_channels", std::to_string(in_channels)},
          {"decoder_channels", std::to_string(decoder_channels)}};
}

SwinConfig SwinConfig::from_map(const std::map<std::string, std::string>& values) {
  SwinConfig c;
  auto get_int = [&](const char* key, int& dst) {
    auto it = values.find(key);
    if (it == values.end()) return;
    try {
      std::size_t pos = 0;
      dst = std::stoi(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw UsageError(std::string("invalid integer for model.") + key + ": '" + it->second + "'");
    }
  };
  auto get_list = [&](const char* key, std::array<int, 4>& dst) {
    auto it = values.find(key);
    if (it == values.end()) return;
    std::array<int, 4> out{};
    std::size_t start = 0;
    for (int k = 0; k < 4; ++k) {
      const auto comma = it->second.find(',', start);
      if ((k < 3) != (comma != std::string::npos)) throw UsageError(std::string("model.") + key + " needs 4 values");
      try {
        out[k] = std::stoi(it->second.substr(start, comma - start));
      } catch (const std::exception&) {
        throw UsageError(std::string("invalid list for model.") + key);
      }
      start = comma + 1;
    }
    dst = out;
  };
  get_int("patch_size", c.patch_size);
  get_int("window_size", c.window_size);
  get_int("embed_dim", c.embed_dim);
  get_list("depths", c.depths);
  get_list("num_heads", c.num_heads);
  get_int("mlp_ratio", c.mlp_ratio);
  get_int("num_classes", c.num_classes);
  get_int("in_channels", c.in_channels);
  get_int("decoder_channels", c.decoder_channels);
  c.validate();
  return c;
}

template <typename T>
void register_parameters(ParamStore<T>& s, const SwinConfig& cfg) {
  cfg.validate();
  auto linear_params = [&s](const std::string& name, int out, int in, bool bias) {
    s.add(name + ".weight", BasicTensor<T>({out, in}));
    if (bias) s.add(name + ".bias", BasicTensor<T>({out}));
  };
  auto norm_params = [&s](const std::string& name, int c) {
    s.add(name + ".weight", BasicTensor<T>({c}, T(1)), 0.0);
    s.add(name + ".bias", BasicTensor<T>({c}), 0.0);
  };

  const int p = cfg.patch_size;
  linear_params("backbone.patch_embed.proj", cfg.embed_dim, p * p * cfg.in_channels, true);
  norm_params("backbone.patch_embed.norm", cfg.embed_dim);
  const int m = cfg.window_size;
  for (int st = 0; st < 4; ++st) {
    const int c = cfg.stage_channels(st);
    for (int b = 0; b < cfg.depths[st]; ++b) {
      const std::string pre = block_prefix(st, b);
      norm_params(pre + ".norm1", c);
      linear_params(pre + ".attn.qkv", 3 * c, c, true);
      s.add(pre + ".attn.relative_position_bias_table", BasicTensor<T>({(2 * m - 1) * (2 * m - 1), cfg.num_heads[st]}),
            0.0);
      linear_params(pre + ".attn.proj", c, c, true);
      norm_params(pre + ".norm2", c);
      linear_params(pre + ".mlp.fc1", cfg.mlp_ratio * c, c, true);
      linear_params(pre + ".mlp.fc2", c, cfg.mlp_ratio * c, true);
    }
    if (st < 3) s.add(stage_prefix(st) + ".downsample.reduction.weight", BasicTensor<T>({2 * c, 4 * c}));
    norm_params("backbone.norm" + std::to_string(st), c);
  }

  const int d = cfg.decoder_channels;
  const int c4 = cfg.stage_channels(3);
  for (std::size_t k = 0; k < kPoolScales.size(); ++k) {
    linear_params("decode_head.psp_modules." + std::to_string(k) + ".conv", d, c4, true);
  }
  linear_params("decode_head.bottleneck.conv", d, 9 * (c4 + 4 * d), true);
  for (int st = 0; st < 3; ++st) {
    linear_params("decode_head.lateral_convs." + std::to_string(st) + ".conv", d, cfg.stage_channels(st), true);
  }
  for (int st = 0; st < 3; ++st) {
    linear_params("decode_head.fpn_convs." + std::to_string(st) + ".conv", d, 9 * d, true);
  }
  linear_params("decode_head.fpn_bottleneck.conv", d, 9 * 4 * d, true);
  linear_params("decode_head.conv_seg", cfg.num_classes, d, true);
}

template <typename T>
void initialize_parameters(ParamStore<T>& store, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kStd = 0.02;
  auto ends_with = [](const std::string& s, const char* suffix) {
    const std::string_view sv(suffix);
    return s.size() >= sv.size() && s.compare(s.size() - sv.size(), sv.size(), sv) == 0;
  };
  // Decoder convolutions feed GELUs and get He-normal scaling, as in common
  // UPerNet heads; the classifier keeps the transformer scale.
  auto decoder_conv = [](const std::string& name) {
    return name.rfind("decode_head.", 0) == 0 && name.rfind("decode_head.conv_seg.", 0) != 0;
  };
  for (auto& p : store.all()) {
    const bool is_norm = p.decay_mult == 0.0 && !ends_with(p.name, "relative_position_bias_table");
    if (ends_with(p.name, ".weight") && !is_norm) {
      for (auto& v : p.value.storage()) {
        double z;
        do {
          z = normal(rng);
        } while (std::abs(z) > 2.0);
        v = static_cast<T>((decoder_conv(p.name) ? std::sqrt(2.0 / p.value.dim(1)) : kStd) * z);
      }
    } else if (is_norm && ends_with(p.name, ".weight")) {
      p.value.fill(T(1));
    } else {
      p.value.fill(T(0));
    }
  }
}

template <typename T>
Var patch_embed(Tape<T>& tape, Var image, Var weight, Var bias, int patch) {
  const Shape& s = tape.shape(image);
  if (s.size() != 3) throw UsageError("patch_embed expects [H, W, C]");
  const int h = s[0], w = s[1], c = s[2];
  auto idx = cached<RowIndex>(key_of("patch", {h, w, patch}), [&] { return patch_index(h, w, patch); });
  Var patches = gather(tape, image, idx, {h / patch, w / patch, patch * patch * c});
  return linear(tape, patches, weight, bias);
}

template <typename T>
Var patch_merging(Tape<T>& tape, Var x, Var reduction) {
  const Shape& s = tape.shape(x);
  if (s.size() != 3) throw UsageError("patch_merging expects [H, W, C]");
  const int h = s[0], w = s[1], c = s[2];
  auto idx = cached<RowIndex>(key_of("merge", {h, w}), [&] { return merge_index(h, w); });
  Var cat = gather(tape, x, idx, {h / 2, w / 2, 4 * c});
  return linear(tape, cat, reduction);
}

template <typename T>
Var swin_block(ParamBinder<T>& bind, const std::string& pre, Var x, int window, int heads, bool shifted) {
  Tape<T>& tape = bind.tape();
  const Shape s = tape.shape(x);
  if (s.size() != 3) throw UsageError("swin_block expects [H, W, C]");
  const int h = s[0], w = s[1], c = s[2];
  const int hp = round_up(h, window), wp = round_up(w, window);
  const int shift = shifted ? window / 2 : 0;
  const int n = window * window;
  const int nw = (hp / window) * (wp / window);

  Var normed = layer_norm(tape, x, bind(pre + ".norm1.weight"), bind(pre + ".norm1.bias"));
  // windows[k] = normed[pad[shift[part[k]]]]
  auto into = cached<RowIndex>(key_of("into", {h, w, window, shift}), [&] {
    return compose(pad_index(h, w, hp, wp),
                   compose(cyclic_shift_index(hp, wp, shift), window_partition_index(hp, wp, window)));
  });
  Var windows = gather(tape, normed, into, {nw, n, c});

  Var qkv = linear(tape, windows, bind(pre + ".attn.qkv.weight"), bind(pre + ".attn.qkv.bias"));
  AttentionGeometry geo;
  geo.windows = nw;
  geo.tokens = n;
  geo.channels = c;
  geo.heads = heads;
  geo.rel_index = cached<std::vector<int>>(key_of("rel", {window}), [&] { return relative_position_index(window); });
  if (shift > 0) {
    geo.mask = cached<Tensor>(key_of("mask", {hp, wp, window, shift}),
                              [&] { return shift_attention_mask(hp, wp, window, shift); });
  }
  Var attn = window_attention(tape, qkv, bind(pre + ".attn.relative_position_bias_table"), geo);
  Var proj = linear(tape, attn, bind(pre + ".attn.proj.weight"), bind(pre + ".attn.proj.bias"));

  // out[p] = windows[reverse[unshift[crop[p]]]]
  auto back = cached<RowIndex>(key_of("back", {h, w, window, shift}), [&] {
    return compose(window_reverse_index(hp, wp, window),
                   compose(cyclic_shift_index(hp, wp, -shift), crop_index(hp, wp, h, w)));
  });
  Var restored = gather(tape, proj, back, {h, w, c});
  Var y = add(tape, x, restored);

  Var hidden = layer_norm(tape, y, bind(pre + ".norm2.weight"), bind(pre + ".norm2.bias"));
  hidden = gelu(tape, linear(tape, hidden, bind(pre + ".mlp.fc1.weight"), bind(pre + ".mlp.fc1.bias")));
  hidden = linear(tape, hidden, bind(pre + ".mlp.fc2.weight"), bind(pre + ".mlp.fc2.bias"));
  return add(tape, y, hidden);
}

template <typename T>
std::array<Var, 4> backbone_forward(ParamBinder<T>& bind, Var image, const SwinConfig& cfg) {
  Tape<T>& tape = bind.tape();
  const Shape s = tape.shape(image);
  const int mult = cfg.input_multiple();
  if (s.size() != 3 || s[2] != cfg.in_channels || s[0] % mult != 0 || s[1] % mult != 0) {
    throw UsageError("backbone input " + shape_string(s) + " must be [H, W, " + std::to_string(cfg.in_channels) +
                     "] with H, W divisible by " + std::to_string(mult));
  }
  Var x = patch_embed(tape, image, bind("backbone.patch_embed.proj.weight"), bind("backbone.patch_embed.proj.bias"),
                      cfg.patch_size);
  x = layer_norm(tape, x, bind("backbone.patch_embed.norm.weight"), bind("backbone.patch_embed.norm.bias"));
  std::array<Var, 4> outs;
  for (int st = 0; st < 4; ++st) {
    for (int b = 0; b < cfg.depths[st]; ++b) {
      x = swin_block(bind, block_prefix(st, b), x, cfg.window_size, cfg.num_heads[st], b % 2 == 1);
    }
    const std::string norm = "backbone.norm" + std::to_string(st);
    outs[st] = layer_norm(tape, x, bind(norm + ".weight"), bind(norm + ".bias"));
    if (st < 3) x = patch_merging(tape, x, bind(stage_prefix(st) + ".downsample.reduction.weight"));
  }
  return outs;
}

namespace {

template <typename T>
Var conv1x1(ParamBinder<T>& bind, const std::string& name, Var x) {
  return gelu(bind.tape(), linear(bind.tape(), x, bind(name + ".weight"), bind(name + ".bias")));
}

template <typename T>
Var conv3x3(ParamBinder<T>& bind, const std::string& name, Var x) {
  Tape<T>& tape = bind.tape();
  const Shape s = tape.shape(x);
  auto idx = cached<RowIndex>(key_of("conv3x3", {s[0], s[1]}), [&] { return conv3x3_index(s[0], s[1]); });
  Var cols = gather(tape, x, idx, {s[0], s[1], 9 * s[2]});
  return gelu(tape, linear(tape, cols, bind(name + ".weight"), bind(name + ".bias")));
}

template <typename T>
Var resize(Tape<T>& tape, Var x, int out_h, int out_w) {
  const Shape s = tape.shape(x);
  if (s[0] == out_h && s[1] == out_w) return x;
  auto map = cached<SpatialMap>(key_of("resize", {s[0], s[1], out_h, out_w}),
                                [&] { return bilinear_map(s[0], s[1], out_h, out_w); });
  return resample(tape, x, map, {out_h, out_w, s[2]});
}

}  // namespace

template <typename T>
Var upernet_head(ParamBinder<T>& bind, const std::array<Var, 4>& pyramid, const SwinConfig& cfg, int out_h,
                 int out_w, int crop_h, int crop_w) {
  Tape<T>& tape = bind.tape();
  for (int st = 0; st < 4; ++st) {
    const Shape& s = tape.shape(pyramid[st]);
    if (s.size() != 3 || s[2] != cfg.stage_channels(st)) {
      throw UsageError("upernet_head: pyramid level " + std::to_string(st) + " has shape " + shape_string(s));
    }
  }
  const Shape deep = tape.shape(pyramid[3]);
  std::vector<Var> ppm{pyramid[3]};
  for (std::size_t k = 0; k < kPoolScales.size(); ++k) {
    const int scale = kPoolScales[k];
    auto pool = cached<SpatialMap>(key_of("pool", {deep[0], deep[1], scale}),
                                   [&] { return adaptive_avg_pool_map(deep[0], deep[1], scale); });
    Var pooled = resample(tape, pyramid[3], pool, {scale, scale, deep[2]});
    pooled = conv1x1(bind, "decode_head.psp_modules." + std::to_string(k) + ".conv", pooled);
    ppm.push_back(resize(tape, pooled, deep[0], deep[1]));
  }
  std::array<Var, 4> laterals;
  laterals[3] = conv3x3(bind, "decode_head.bottleneck.conv", concat_channels(tape, ppm));
  for (int st = 0; st < 3; ++st) {
    laterals[st] = conv1x1(bind, "decode_head.lateral_convs." + std::to_string(st) + ".conv", pyramid[st]);
  }
  for (int st = 3; st > 0; --st) {
    const Shape target = tape.shape(laterals[st - 1]);
    laterals[st - 1] = add(tape, laterals[st - 1], resize(tape, laterals[st], target[0], target[1]));
  }
  const Shape fine = tape.shape(laterals[0]);
  std::vector<Var> outs(4);
  for (int st = 0; st < 3; ++st) {
    outs[st] = conv3x3(bind, "decode_head.fpn_convs." + std::to_string(st) + ".conv", laterals[st]);
  }
  outs[3] = laterals[3];
  for (int st = 1; st < 4; ++st) outs[st] = resize(tape, outs[st], fine[0], fine[1]);
  Var fused = conv3x3(bind, "decode_head.fpn_bottleneck.conv", concat_channels(tape, outs));
  Var logits = linear(tape, fused, bind("decode_head.conv_seg.weight"), bind("decode_head.conv_seg.bias"));
  auto up = cached<SpatialMap>(key_of("up", {fine[0], fine[1], out_h, out_w, crop_h, crop_w}),
                               [&] { return bilinear_map(fine[0], fine[1], out_h, out_w, crop_h, crop_w); });
  return resample(tape, logits, up, {crop_h, crop_w, cfg.num_classes});
}

template <typename T>
SwinSegmenter<T>::SwinSegmenter(SwinConfig config, std::uint64_t seed) : config_(std::move(config)) {
  register_parameters(params_, config_);
  initialize_parameters(params_, seed);
}

template <typename T>
SwinSegmenter<T>::SwinSegmenter(SwinConfig config, ParamStore<T> params) : config_(std::move(config)) {
  register_parameters(params_, config_);
  if (params.size() != params_.size()) throw DataError("parameter set does not match the model configuration");
  for (auto& p : params_.all()) {
    if (!params.contains(p.name)) throw DataError("missing parameter '" + p.name + "'");
    const auto& src = params.get(p.name);
    if (src.value.shape() != p.value.shape()) throw DataError("parameter '" + p.name + "' has the wrong shape");
    p.value = src.value;
  }
}

template <typename T>
Var SwinSegmenter<T>::forward(ParamBinder<T>& bind, Var image) const {
  Tape<T>& tape = bind.tape();
  const Shape s = tape.shape(image);
  if (s.size() != 3 || s[2] != config_.in_channels) {
    throw UsageError("image must be [H, W, " + std::to_string(config_.in_channels) + "], got " + shape_string(s));
  }
  const int mult = config_.input_multiple();
  const int hp = round_up(s[0], mult), wp = round_up(s[1], mult);
  Var padded = image;
  if (hp != s[0] || wp != s[1]) {
    auto idx = cached<RowIndex>(key_of("pad", {s[0], s[1], hp, wp}), [&] { return pad_index(s[0], s[1], hp, wp); });
    padded = gather(tape, image, idx, {hp, wp, s[2]});
  }
  auto pyramid = backbone_forward(bind, padded, config_);
  return upernet_head(bind, pyramid, config_, hp, wp, s[0], s[1]);
}

template <typename T>
BasicTensor<T> SwinSegmenter<T>::infer(const BasicTensor<T>& image) const {
  Tape<T> tape(false);
  ParamBinder<T> bind(tape, params_);
  Var logits = forward(bind, tape.constant(image));
  return tape.value(logits);
}

#define LANDSEG_INSTANTIATE(T)                                                                                \
  template void register_parameters<T>(ParamStore<T>&, const SwinConfig&);                                    \
  template void initialize_parameters<T>(ParamStore<T>&, std::uint64_t);                                      \
  template Var patch_embed<T>(Tape<T>&, Var, Var, Var, int);                                                  \
  template Var patch_merging<T>(Tape<T>&, Var, Var);                                                          \
  template Var swin_block<T>(ParamBinder<T>&, const std::string&, Var, int, int, bool);                       \
  template std::array<Var, 4> backbone_forward<T>(ParamBinder<T>&, Var, const SwinConfig&);                   \
  template Var upernet_head<T>(ParamBinder<T>&, const std::array<Var, 4>&, const SwinConfig&, int, int, int, int); \
  template class SwinSegmenter<T>;

LANDSEG_INSTANTIATE(float)
LANDSEG_INSTANTIATE(double)
#undef LANDSEG_INSTANTIATE

}  // namespace landseg::nn
