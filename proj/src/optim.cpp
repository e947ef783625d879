#include "asim/optim.hpp"

#include <algorithm>
#include <cmath>

#include "asim/errors.hpp"

namespace asim {

AdamState AdamState::for_params(std::span<const NamedTensor> params, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  AdamState s;
  s.learning_rate = learning_rate;
  for (const auto& p : params) {
    s.first_moment.emplace_back(p.tensor.numel(), 0.0);
    s.second_moment.emplace_back(p.tensor.numel(), 0.0);
  }
  return s;
}

void adam_step(std::span<NamedTensor> params, AdamState& state) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw DimensionError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                         " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (state.first_moment[k].size() != params[k].tensor.numel()) {
      throw DimensionError("adam_step: moment shape mismatch for " + params[k].name);
    }
    if (!params[k].tensor.has_grad()) continue;
    for (double g : params[k].tensor.grad()) {
      if (!std::isfinite(g)) throw DivergenceError("non-finite gradient in parameter " + params[k].name);
    }
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k].tensor;
    if (!p.has_grad()) continue;
    auto w = p.mutable_data();
    auto g = p.grad();
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      w[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

double clip_grad_norm(std::span<NamedTensor> params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (auto& p : params) {
      if (!p.tensor.has_grad()) continue;
      for (auto& g : p.tensor.mutable_grad()) g *= f;
    }
  }
  return norm;
}

double grad_check(const std::function<Tensor()>& loss_fn, std::span<const Tensor> inputs, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw ConfigError("grad_check: eps must lie in [1e-7, 1e-3]");
  for (auto t : inputs) t.zero_grad();
  Tensor loss = loss_fn();
  if (!std::isfinite(loss.item())) throw NumericError("grad_check: non-finite loss");
  loss.backward();

  double worst = 0.0;
  for (auto t : inputs) {
    auto values = t.mutable_data();
    std::vector<double> analytic(values.size(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = loss_fn().item();
      values[i] = saved - eps;
      const double down = loss_fn().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      if (!std::isfinite(numeric) || !std::isfinite(analytic[i])) {
        throw NumericError("grad_check: non-finite derivative");
      }
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace asim
