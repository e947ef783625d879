#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "asim/tensor.hpp"

namespace asim {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

/// Adam moments for a fixed list of parameters.
struct AdamState {
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  double learning_rate = 0.0012;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(std::span<const NamedTensor> params, double learning_rate);
};

/// One bias-corrected Adam update from the gradients currently stored on
/// `params`. Parameters without a gradient are treated as having a zero one.
/// Throws DivergenceError naming the first parameter with a non-finite
/// gradient, before anything is modified.
void adam_step(std::span<NamedTensor> params, AdamState& state);

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<NamedTensor> params, double max_norm);

/// Max over every entry of `inputs` of
///   |analytic − central difference| / max(|analytic|, |numeric|, 1e-6).
/// `loss_fn` must rebuild the graph from the current input values on every
/// call and return a scalar. Throws NumericError on non-finite values.
double grad_check(const std::function<Tensor()>& loss_fn, std::span<const Tensor> inputs, double eps = 1e-5);

}  // namespace asim
