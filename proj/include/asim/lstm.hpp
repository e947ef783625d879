#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "asim/tensor.hpp"

namespace asim {

/// Weights of one LSTM direction. Gate blocks are laid out along the columns
/// in the order input, forget, candidate, output; `input_weights` and
/// `recurrent_weights` together form the (input_dim + hidden_dim) → 4·hidden
/// map.
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Tensor input_weights;      // input_dim × 4·hidden
  Tensor recurrent_weights;  // hidden × 4·hidden
  Tensor bias;               // 4·hidden

  /// Uniform(±1/√fan_in) weights, zero bias except +1 on the forget gate.
  static LstmParams init(std::size_t input_dim, std::size_t hidden_dim, std::mt19937_64& rng);
  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);

  void validate() const;
};

struct LstmState {
  Tensor h;
  Tensor c;
};

/// One step of the cell; x_t is 1×input_dim, state rows are 1×hidden.
LstmState lstm_step(const Tensor& x_t, const Tensor& h_prev, const Tensor& c_prev, const LstmParams& p);

/// Runs a direction over the rows of `inputs` (n×input_dim). Masked steps
/// leave the state untouched and emit a zero row. `reverse` scans from the
/// last row to the first; the output keeps the input row order.
Tensor run_lstm(const Tensor& inputs, const Mask& mask, const LstmParams& p, bool reverse);

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;
};

/// [→h_i ; ←h_i] per row: n×2·hidden.
Tensor run_bilstm(const Tensor& inputs, const Mask& mask, const BiLstmParams& p);

}  // namespace asim
