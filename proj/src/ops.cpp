#include "asim/ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Core>

#include "asim/errors.hpp"

namespace asim {
namespace {

using detail::Node;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMajor>;
using ConstMatMap = Eigen::Map<const RowMajor>;

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& a, const char* op, Fwd fwd, Deriv deriv_from_output) {
  std::vector<double> out(a.numel());
  auto in = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  return Tensor::make_result(a.shape(), std::move(out), op, {a}, [deriv_from_output](Node& n) {
    Node& p = parent(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i] * deriv_from_output(n.value[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ for " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(n * m, 0.0);
  MatMap(out.data(), n, m).noalias() = ConstMatMap(a.data().data(), n, k) * ConstMatMap(b.data().data(), k, m);
  return Tensor::make_result({n, m}, std::move(out), "matmul", {a, b}, [n, k, m](Node& c) {
    Node& pa = parent(c, 0);
    Node& pb = parent(c, 1);
    const ConstMatMap dc(c.grad.data(), n, m);
    if (pa.requires_grad) MatMap(pa.grad.data(), n, k).noalias() += dc * ConstMatMap(pb.value.data(), k, m).transpose();
    if (pb.requires_grad) MatMap(pb.grad.data(), k, m).noalias() += ConstMatMap(pa.value.data(), n, k).transpose() * dc;
  });
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  auto in = a.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = in[i * c + j];
  return Tensor::make_result({c, r}, std::move(out), "transpose", {a}, [r, c](Node& n) {
    Node& p = parent(n, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += n.grad[j * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  return Tensor::make_result(a.shape(), std::move(out), "add", {a, b}, [](Node& n) {
    for (int s = 0; s < 2; ++s) {
      Node& p = parent(n, s);
      if (!p.requires_grad) continue;
      for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
  return Tensor::make_result(a.shape(), std::move(out), "sub", {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad)
      for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] -= n.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
  return Tensor::make_result(a.shape(), std::move(out), "mul", {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad)
      for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i] * pb.value[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < n.grad.size(); ++i) pb.grad[i] += n.grad[i] * pa.value[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= factor;
  return Tensor::make_result(a.shape(), std::move(out), "scale", {a}, [factor](Node& n) {
    Node& p = parent(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i] * factor;
  });
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  const std::size_t r = a.rows(), c = a.cols();
  if (bias.numel() != c) {
    throw DimensionError("add_row: bias " + shape_str(bias.shape()) + " does not match " + shape_str(a.shape()));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  auto bd = bias.data();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bd[j];
  return Tensor::make_result(a.shape(), std::move(out), "add_row", {a, bias}, [r, c](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad)
      for (std::size_t i = 0; i < n.grad.size(); ++i) pa.grad[i] += n.grad[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) pb.grad[j] += n.grad[i * c + j];
  });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, "sigmoid",
      [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); }, [](double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; }, [](double y) { return y > 0.0 ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return Tensor::make_result({}, {s}, "sum", {a}, [](Node& n) {
    Node& p = parent(n, 0);
    for (auto& g : p.grad) g += n.grad[0];
  });
}

Tensor dot(const Tensor& a, const Tensor& b) {
  if (a.numel() != b.numel()) {
    throw DimensionError("dot: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  double s = 0.0;
  auto ad = a.data(), bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) s += ad[i] * bd[i];
  return Tensor::make_result({}, {s}, "dot", {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    const double g = n.grad[0];
    if (pa.requires_grad)
      for (std::size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += g * pb.value[i];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < pb.grad.size(); ++i) pb.grad[i] += g * pa.value[i];
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const std::size_t r = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != r) {
      throw DimensionError("concat_cols: row mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(r * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto d = parts[k].data();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(d.begin() + i * widths[k], widths[k], out.begin() + i * total + offset);
    offset += widths[k];
  }
  std::vector<Tensor> ps(parts.begin(), parts.end());
  return Tensor::make_result({r, total}, std::move(out), "concat_cols", std::move(ps),
                             [r, total, widths](Node& n) {
                               std::size_t off = 0;
                               for (std::size_t k = 0; k < widths.size(); ++k) {
                                 Node& p = parent(n, k);
                                 if (p.requires_grad) {
                                   for (std::size_t i = 0; i < r; ++i)
                                     for (std::size_t j = 0; j < widths[k]; ++j)
                                       p.grad[i * widths[k] + j] += n.grad[i * total + off + j];
                                 }
                                 off += widths[k];
                               }
                             });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no operands");
  const std::size_t c = parts[0].cols();
  std::size_t total_rows = 0;
  std::vector<double> out;
  for (const auto& p : parts) {
    if (p.cols() != c) {
      throw DimensionError("concat_rows: column mismatch " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    total_rows += p.rows();
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  std::vector<Tensor> ps(parts.begin(), parts.end());
  return Tensor::make_result({total_rows, c}, std::move(out), "concat_rows", std::move(ps), [](Node& n) {
    std::size_t off = 0;
    for (auto& pp : n.parents) {
      const std::size_t len = pp->value.size();
      if (pp->requires_grad)
        for (std::size_t i = 0; i < len; ++i) pp->grad[i] += n.grad[off + i];
      off += len;
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  const std::size_t r = a.rows(), c = a.cols();
  if (begin + count > c) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for " + shape_str(a.shape()));
  }
  std::vector<double> out(r * count);
  auto d = a.data();
  for (std::size_t i = 0; i < r; ++i) std::copy_n(d.begin() + i * c + begin, count, out.begin() + i * count);
  Shape shape = a.shape().size() == 2 ? Shape{r, count} : Shape{count};
  return Tensor::make_result(std::move(shape), std::move(out), "slice_cols", {a}, [r, c, begin, count](Node& n) {
    Node& p = parent(n, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < count; ++j) p.grad[i * c + begin + j] += n.grad[i * count + j];
  });
}

Tensor slice_row(const Tensor& a, std::size_t row) {
  const std::size_t c = a.cols();
  if (row >= a.rows()) {
    throw DimensionError("slice_row: row " + std::to_string(row) + " out of range for " + shape_str(a.shape()));
  }
  std::vector<double> out(a.data().begin() + row * c, a.data().begin() + (row + 1) * c);
  return Tensor::make_result({1, c}, std::move(out), "slice_row", {a}, [row, c](Node& n) {
    Node& p = parent(n, 0);
    for (std::size_t j = 0; j < c; ++j) p.grad[row * c + j] += n.grad[j];
  });
}

Tensor scaled_softmax_rows(const Tensor& e, std::size_t k, const Mask& mask) {
  const std::size_t r = e.rows(), c = e.cols();
  if (k == 0) throw ConfigError("scaled_softmax_rows: k must be positive");
  if (mask.size() != c) {
    throw DimensionError("scaled_softmax_rows: mask length " + std::to_string(mask.size()) + " vs " +
                         shape_str(e.shape()));
  }
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw DegenerateMaskError("scaled_softmax_rows: every column is masked");
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(k));
  std::vector<double> out(r * c, 0.0);
  auto d = e.data();
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < c; ++j)
      if (mask[j]) mx = std::max(mx, d[i * c + j] * inv);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (!mask[j]) continue;
      const double v = std::exp(d[i * c + j] * inv - mx);
      out[i * c + j] = v;
      z += v;
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= z;
  }
  return Tensor::make_result(e.shape(), std::move(out), "scaled_softmax_rows", {e}, [r, c, inv](Node& n) {
    Node& p = parent(n, 0);
    // d e_ij = inv · y_ij (g_ij − Σ_l g_il y_il); masked y are 0.
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < c; ++j) s += n.grad[i * c + j] * n.value[i * c + j];
      for (std::size_t j = 0; j < c; ++j)
        p.grad[i * c + j] += inv * n.value[i * c + j] * (n.grad[i * c + j] - s);
    }
  });
}

Tensor max_over_time(const Tensor& v, const Mask& mask) {
  const std::size_t r = v.rows(), c = v.cols();
  if (mask.size() != r) {
    throw DimensionError("max_over_time: mask length " + std::to_string(mask.size()) + " vs " +
                         shape_str(v.shape()));
  }
  if (r == 0 || std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw DegenerateMaskError("max_over_time: no unmasked timestep");
  }
  std::vector<double> out(c, -INFINITY);
  std::vector<std::size_t> arg(c, 0);
  auto d = v.data();
  for (std::size_t i = 0; i < r; ++i) {
    if (!mask[i]) continue;
    for (std::size_t j = 0; j < c; ++j) {
      if (d[i * c + j] > out[j]) {
        out[j] = d[i * c + j];
        arg[j] = i;
      }
    }
  }
  return Tensor::make_result({c}, std::move(out), "max_over_time", {v}, [c, arg = std::move(arg)](Node& n) {
    Node& p = parent(n, 0);
    for (std::size_t j = 0; j < c; ++j) p.grad[arg[j] * c + j] += n.grad[j];
  });
}

Tensor dropout_apply(const Tensor& v, double rate, bool training, std::uint64_t rng_seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return v;
  std::mt19937_64 gen(rng_seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factor(v.numel());
  for (auto& f : factor) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    f = u < rate ? 0.0 : keep_scale;
  }
  std::vector<double> out(v.data().begin(), v.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor[i];
  return Tensor::make_result(v.shape(), std::move(out), "dropout", {v}, [factor = std::move(factor)](Node& n) {
    Node& p = parent(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) p.grad[i] += n.grad[i] * factor[i];
  });
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (out[i] = std::exp(logits[i] - mx));
  for (auto& v : out) v /= z;
  return out;
}

Tensor cross_entropy(const Tensor& logits, std::size_t label) {
  const std::size_t c = logits.numel();
  if (label >= c) {
    throw DataError("cross_entropy: label " + std::to_string(label) + " out of range for " + std::to_string(c) +
                    " classes");
  }
  auto d = logits.data();
  const double mx = *std::max_element(d.begin(), d.end());
  double z = 0.0;
  for (double v : d) z += std::exp(v - mx);
  const double loss = std::log(z) + mx - d[label];
  return Tensor::make_result({}, {loss}, "cross_entropy", {logits}, [label](Node& n) {
    Node& p = parent(n, 0);
    auto probs = softmax(p.value);
    probs[label] -= 1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) p.grad[i] += n.grad[0] * probs[i];
  });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids, int frozen_row) {
  const std::size_t rows = table.rows(), c = table.cols();
  std::vector<double> out(ids.size() * c);
  auto d = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
      throw DataError("token id " + std::to_string(ids[i]) + " outside table of " + std::to_string(rows) + " rows");
    }
    std::copy_n(d.begin() + ids[i] * c, c, out.begin() + i * c);
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return Tensor::make_result({ids.size(), c}, std::move(out), "gather_rows", {table},
                             [c, frozen_row, idv = std::move(idv)](Node& n) {
                               Node& p = parent(n, 0);
                               for (std::size_t i = 0; i < idv.size(); ++i) {
                                 if (idv[i] == frozen_row) continue;
                                 for (std::size_t j = 0; j < c; ++j) p.grad[idv[i] * c + j] += n.grad[i * c + j];
                               }
                             });
}

}  // namespace asim
