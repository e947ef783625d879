#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "asim/tensor.hpp"

namespace asim {

// Differentiable primitives. Matrices are row-major; rank-1 operands are
// treated as 1×n rows.

/// [n×k]·[k×m] → [n×m]. Throws DimensionError naming both shapes.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
/// Adds a 1×c bias row to every row of an n×c matrix.
Tensor add_row(const Tensor& a, const Tensor& bias);

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);

/// Sum of all entries, as a scalar.
Tensor sum(const Tensor& a);
/// Inner product of two same-shape tensors, as a scalar.
Tensor dot(const Tensor& a, const Tensor& b);

/// Horizontal concatenation of matrices with equal row counts.
Tensor concat_cols(std::span<const Tensor> parts);
/// Vertical stacking of rows/matrices with equal column counts.
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor slice_row(const Tensor& a, std::size_t row);

/// Row-wise softmax of e/√k restricted to columns where `mask` is true.
/// Masked columns receive exactly 0.
Tensor scaled_softmax_rows(const Tensor& e, std::size_t k, const Mask& mask);

/// Per-column maximum over rows where `mask` is true. Ties go to the lowest
/// row; the gradient flows to that row only.
Tensor max_over_time(const Tensor& v, const Mask& mask);

/// Inverted dropout: in training each entry is zeroed with probability
/// `rate` and survivors are scaled by 1/(1−rate). Identity otherwise.
Tensor dropout_apply(const Tensor& v, double rate, bool training, std::uint64_t rng_seed);

/// −log softmax(logits)[label] with max subtraction.
Tensor cross_entropy(const Tensor& logits, std::size_t label);

/// Rows `ids` of `table`. When the table requires grad, gradients scatter
/// back to the selected rows except those equal to `frozen_row`.
Tensor gather_rows(const Tensor& table, std::span<const int> ids, int frozen_row = -1);

/// Plain numerically stable softmax of a vector of values.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace asim
