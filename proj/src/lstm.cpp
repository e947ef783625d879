#include "asim/lstm.hpp"

#include <cmath>

#include "asim/errors.hpp"
#include "asim/ops.hpp"

namespace asim {
namespace {

Tensor uniform(Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(shape_numel(shape));
  for (auto& v : data) v = dist(rng);
  return Tensor::from(std::move(shape), std::move(data), true);
}

// Gate nonlinearities applied to pre-activations (1×4h).
LstmState cell(const Tensor& pre, const Tensor& c_prev, std::size_t h, bool has_prev_cell) {
  Tensor in_gate = sigmoid(slice_cols(pre, 0, h));
  Tensor candidate = tanh(slice_cols(pre, 2 * h, h));
  Tensor out_gate = sigmoid(slice_cols(pre, 3 * h, h));
  Tensor c = mul(in_gate, candidate);
  if (has_prev_cell) {
    Tensor forget_gate = sigmoid(slice_cols(pre, h, h));
    c = add(mul(forget_gate, c_prev), c);
  }
  Tensor hid = mul(out_gate, tanh(c));
  return {hid, c};
}

}  // namespace

LstmParams LstmParams::init(std::size_t input_dim, std::size_t hidden_dim, std::mt19937_64& rng) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim + hidden_dim));
  p.input_weights = uniform({input_dim, 4 * hidden_dim}, bound, rng);
  p.recurrent_weights = uniform({hidden_dim, 4 * hidden_dim}, bound, rng);
  p.bias = Tensor::zeros({4 * hidden_dim}, true);
  auto b = p.bias.mutable_data();
  for (std::size_t j = hidden_dim; j < 2 * hidden_dim; ++j) b[j] = 1.0;
  return p;
}

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.input_weights = Tensor::zeros({input_dim, 4 * hidden_dim}, true);
  p.recurrent_weights = Tensor::zeros({hidden_dim, 4 * hidden_dim}, true);
  p.bias = Tensor::zeros({4 * hidden_dim}, true);
  return p;
}

void LstmParams::validate() const {
  const std::size_t g = 4 * hidden_dim;
  if (input_dim == 0 || hidden_dim == 0) throw DimensionError("lstm: dimensions must be positive");
  if (input_weights.rows() != input_dim || input_weights.cols() != g || recurrent_weights.rows() != hidden_dim ||
      recurrent_weights.cols() != g || bias.numel() != g) {
    throw DimensionError("lstm: weights " + shape_str(input_weights.shape()) + ", " +
                         shape_str(recurrent_weights.shape()) + ", " + shape_str(bias.shape()) +
                         " inconsistent with input " + std::to_string(input_dim) + " hidden " +
                         std::to_string(hidden_dim));
  }
}

LstmState lstm_step(const Tensor& x_t, const Tensor& h_prev, const Tensor& c_prev, const LstmParams& p) {
  p.validate();
  if (x_t.numel() != p.input_dim || x_t.rows() != 1) {
    throw DimensionError("lstm_step: input " + shape_str(x_t.shape()) + " vs input_dim " + std::to_string(p.input_dim));
  }
  if (h_prev.numel() != p.hidden_dim || c_prev.numel() != p.hidden_dim) {
    throw DimensionError("lstm_step: state " + shape_str(h_prev.shape()) + "/" + shape_str(c_prev.shape()) +
                         " vs hidden " + std::to_string(p.hidden_dim));
  }
  Tensor pre = add(add_row(matmul(x_t, p.input_weights), p.bias), matmul(h_prev, p.recurrent_weights));
  return cell(pre, c_prev, p.hidden_dim, true);
}

Tensor run_lstm(const Tensor& inputs, const Mask& mask, const LstmParams& p, bool reverse) {
  p.validate();
  const std::size_t n = inputs.rows();
  if (inputs.cols() != p.input_dim) {
    throw DimensionError("run_lstm: input " + shape_str(inputs.shape()) + " vs input_dim " +
                         std::to_string(p.input_dim));
  }
  if (mask.size() != n) throw DimensionError("run_lstm: mask length does not match sequence length");
  const std::size_t h = p.hidden_dim;

  // Input projections for all timesteps at once.
  Tensor projected = add_row(matmul(inputs, p.input_weights), p.bias);
  Tensor zero_row = Tensor::zeros({1, h});
  std::vector<Tensor> outputs(n, zero_row);
  LstmState state;
  bool started = false;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t t = reverse ? n - 1 - s : s;
    if (!mask[t]) continue;
    Tensor pre = slice_row(projected, t);
    if (started) pre = add(pre, matmul(state.h, p.recurrent_weights));
    // Zero initial state: h·W and f⊙c vanish on the first real step.
    state = cell(pre, state.c, h, started);
    started = true;
    outputs[t] = state.h;
  }
  return concat_rows(outputs);
}

Tensor run_bilstm(const Tensor& inputs, const Mask& mask, const BiLstmParams& p) {
  const Tensor parts[] = {run_lstm(inputs, mask, p.forward, false), run_lstm(inputs, mask, p.backward, true)};
  return concat_cols(parts);
}

}  // namespace asim
