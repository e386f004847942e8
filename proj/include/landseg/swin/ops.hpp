#pragma once

#include <memory>
#include <span>
#include <vector>

#include "landseg/swin/autograd.hpp"
#include "landseg/swin/kernels.hpp"

namespace landseg::nn {

/// y = x W^T + b over the last axis; W is [out, in], b optional [out].
template <typename T>
Var linear(Tape<T>& tape, Var x, Var weight, Var bias = {});

/// Normalizes the last axis: (x - mean) / sqrt(var + eps) * gamma + beta.
template <typename T>
Var layer_norm(Tape<T>& tape, Var x, Var gamma, Var beta, double eps = 1e-5);

/// Exact GELU, 0.5 x (1 + erf(x / sqrt 2)).
template <typename T>
Var gelu(Tape<T>& tape, Var x);

template <typename T>
Var add(Tape<T>& tape, Var a, Var b);

/// Row gather over the last axis (see RowIndex).
template <typename T>
Var gather(Tape<T>& tape, Var x, std::shared_ptr<const RowIndex> rows, Shape out_shape);

template <typename T>
Var reshape(Tape<T>& tape, Var x, Shape shape);

/// Concatenation along the last axis; leading dims must agree.
template <typename T>
Var concat_channels(Tape<T>& tape, const std::vector<Var>& parts);

/// Stacks equally shaped tensors along a new leading axis.
template <typename T>
Var stack(Tape<T>& tape, const std::vector<Var>& parts);

/// Sparse spatial resampling (bilinear resize, adaptive pooling).
template <typename T>
Var resample(Tape<T>& tape, Var x, std::shared_ptr<const SpatialMap> map, Shape out_shape);

/// Windowed multi-head attention core on fused qkv [nW, N, 3C]; returns [nW, N, C].
template <typename T>
Var window_attention(Tape<T>& tape, Var qkv, Var bias_table, const AttentionGeometry& geo);

/// Scalar sum of all entries.
template <typename T>
Var sum(Tape<T>& tape, Var x);

/// Scalar sum(x * coeffs) for a constant coefficient tensor.
template <typename T>
Var dot_constant(Tape<T>& tape, Var x, BasicTensor<T> coeffs);

}  // namespace landseg::nn
