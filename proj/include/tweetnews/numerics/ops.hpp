#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tweetnews/numerics/tensor.hpp"

namespace tweetnews::numerics {

// Every op throws ShapeError naming the op and the offending shapes when
// operands do not conform.

/// x[..., k] @ w[k, n] -> [..., n]
Tensor matmul(const Tensor& x, const Tensor& w);

/// Batched a[..., m, k] @ b[..., k, n] (or b[..., n, k] transposed when
/// transpose_b) over identical leading dims.
Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b = false);

/// Elementwise a + b. b may equal a's shape or a's trailing dims (row broadcast).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise a * b with the same broadcast rule as add.
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double factor);
/// factor * x + shift
Tensor affine(const Tensor& x, double factor, double shift);

/// Concatenates along `axis`; all other extents must agree.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);

/// Rows of table[V, d] for each id -> [ids_shape..., d].
Tensor embedding(const Tensor& table, std::span<const std::int32_t> ids, const Shape& ids_shape);

/// Softmax over the last axis.
Tensor softmax(const Tensor& x);

/// Softmax over the last axis restricted to positions where keep != 0.
/// Masked positions get probability exactly 0; a fully masked row is all 0.
Tensor masked_softmax(const Tensor& x, std::span<const std::uint8_t> keep);

/// Layer normalization over the last axis with learned gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-12);

/// Exact (erf-based) GELU.
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);

/// Mean token-level cross-entropy of logits[..., V] against targets, over
/// rows where mask != 0. Throws if no row is selected.
Tensor cross_entropy(const Tensor& logits, std::span<const std::int32_t> targets,
                     std::span<const std::uint8_t> mask);

/// Mean binary cross-entropy of logits against {0,1} targets, computed
/// stably as softplus(-s) for target 1 and softplus(s) for target 0.
Tensor bce_with_logits(const Tensor& logits, std::span<const double> targets);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);

/// [a, b, c, d] -> [a, c, b, d]
Tensor swap_axes12(const Tensor& x);

/// Treats x as [rows, last] and gathers the listed rows -> [len(rows), last].
Tensor take_rows(const Tensor& x, std::span<const std::size_t> rows);

/// Inverted dropout; identity when p == 0.
Tensor dropout(const Tensor& x, double p, std::uint64_t seed);

}  // namespace tweetnews::numerics
