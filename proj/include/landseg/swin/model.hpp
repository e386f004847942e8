#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "landseg/swin/autograd.hpp"
#include "landseg/swin/ops.hpp"

namespace landseg::nn {

struct SwinConfig {
  int patch_size = 4;
  int window_size = 4;
  int embed_dim = 32;
  std::array<int, 4> depths{2, 2, 2, 2};
  std::array<int, 4> num_heads{1, 2, 4, 8};
  int mlp_ratio = 4;
  int num_classes = 6;
  int in_channels = 3;
  /// Channel width of every decoder convolution.
  int decoder_channels = 32;

  void validate() const;

  int stage_channels(int stage) const { return embed_dim << stage; }
  /// Input dims must be multiples of this (patch size times three 2x merges).
  int input_multiple() const { return patch_size * 8; }

  /// C=8, depths 1-1-1-1, heads 1-2-4-8, M=4, decoder width 8.
  static SwinConfig tiny();

  std::map<std::string, std::string> to_map() const;
  static SwinConfig from_map(const std::map<std::string, std::string>& values);

  friend bool operator==(const SwinConfig&, const SwinConfig&) = default;
};

/// Registers every parameter for `config` with zero-filled values in canonical order.
template <typename T>
void register_parameters(ParamStore<T>& store, const SwinConfig& config);

/// Truncated-normal (cut at 2 sigma) weights with sigma 0.02, except decoder
/// convolutions which use sigma sqrt(2 / fan_in); zero biases, unit norm
/// scales, zero relative-position bias tables.
template <typename T>
void initialize_parameters(ParamStore<T>& store, std::uint64_t seed);

/// image [H, W, Cin] -> [H/p, W/p, C]: each p x p patch, flattened as
/// (dy, dx, channel), is mapped through weight [C, p*p*Cin] plus bias.
template <typename T>
Var patch_embed(Tape<T>& tape, Var image, Var weight, Var bias, int patch);

/// [H, W, C] -> [H/2, W/2, 2C]: concatenates each 2x2 neighbourhood in the
/// order (0,0), (1,0), (0,1), (1,1) and applies a bias-free reduction [2C, 4C].
template <typename T>
Var patch_merging(Tape<T>& tape, Var x, Var reduction);

/// Pre-norm transformer block with (shifted) window attention and a GELU MLP.
/// Maps not divisible by the window are zero-padded after the first norm.
template <typename T>
Var swin_block(ParamBinder<T>& bind, const std::string& prefix, Var x, int window, int heads, bool shifted);

/// Four normalized feature maps at strides 4, 8, 16, 32. H, W must be
/// divisible by config.input_multiple().
template <typename T>
std::array<Var, 4> backbone_forward(ParamBinder<T>& bind, Var image, const SwinConfig& config);

/// Pyramid pooling on the deepest level, top-down lateral fusion, fused 3x3
/// convolution and classifier; logits resized bilinearly to (out_h, out_w)
/// and cropped to the top-left (crop_h, crop_w).
template <typename T>
Var upernet_head(ParamBinder<T>& bind, const std::array<Var, 4>& pyramid, const SwinConfig& config, int out_h,
                 int out_w, int crop_h, int crop_w);

/// Backbone plus decode head with its parameters.
template <typename T>
class SwinSegmenter {
 public:
  explicit SwinSegmenter(SwinConfig config, std::uint64_t seed = 0);
  /// Wraps existing parameters (e.g. from a checkpoint); names must match.
  SwinSegmenter(SwinConfig config, ParamStore<T> params);

  const SwinConfig& config() const { return config_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  /// Logits [H, W, classes] for image [H, W, Cin]; pads bottom/right to the
  /// input multiple and crops the logits back.
  Var forward(ParamBinder<T>& bind, Var image) const;

  /// Forward pass without recording. Safe to call concurrently.
  BasicTensor<T> infer(const BasicTensor<T>& image) const;

 private:
  SwinConfig config_;
  ParamStore<T> params_;
};

}  // namespace landseg::nn
