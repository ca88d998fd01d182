#include "tdlm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

TDLM_NAMESPACE_BEGIN

namespace {

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  for (const auto* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

Tensor make_output(Shape shape, bool record) { return Tensor::zeros(std::move(shape), record); }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

// c[m x n] += a[m x k] * b[k x n]
void gemm_acc(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    Real* crow = c + i * n;
    const Real* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = arow[p];
      if (av == Real(0)) continue;
      const Real* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[k x n] += a[m x k]^T * b[m x n]
void gemm_at_acc(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const Real* arow = a + i * k;
    const Real* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const Real av = arow[p];
      if (av == Real(0)) continue;
      Real* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

std::vector<Real> transpose(std::span<const Real> x, std::size_t rows, std::size_t cols) {
  std::vector<Real> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = x[r * cols + c];
  return out;
}

Shape matrix_shape(const Tensor& like, std::size_t rows, std::size_t cols) {
  if (like.rank() <= 1 && rows == 1) return {cols};
  return {rows, cols};
}

template <class Fwd, class Bwd>
Tensor unary(const Tensor& x, Fwd fwd, Bwd bwd) {
  const bool record = should_record({&x});
  Tensor out = make_output(x.shape(), record);
  auto xs = x.data();
  auto ys = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = fwd(xs[i]);
  if (record) {
    active_tape()->record([x = x, out = out, bwd = bwd]() mutable {
      if (!x.requires_grad()) return;
      auto gy = out.grad();
      auto gx = x.grad();
      auto xv = x.data();
      auto yv = out.data();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * bwd(xv[i], yv[i]);
    });
  }
  return out;
}

Real stable_sigmoid(Real v) {
  if (v >= Real(0)) return Real(1) / (Real(1) + std::exp(-v));
  const Real e = std::exp(v);
  return e / (Real(1) + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const bool record = should_record({&a, &b});
  Tensor out = make_output(matrix_shape(a, m, n), record);
  gemm_acc(a.data().data(), b.data().data(), out.data().data(), m, k, n);
  if (record) {
    active_tape()->record([a = a, b = b, out = out, m = m, k = k, n = n]() mutable {
      auto gc = out.grad();
      if (a.requires_grad()) {
        auto bt = transpose(b.data(), k, n);
        gemm_acc(gc.data(), bt.data(), a.grad().data(), m, n, k);
      }
      if (b.requires_grad()) gemm_at_acc(a.data().data(), gc.data(), b.grad().data(), m, k, n);
    });
  }
  return out;
}

Tensor matmul_bt(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_bt: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  }
  const bool record = should_record({&a, &b});
  Tensor out = make_output(matrix_shape(a, m, n), record);
  {
    auto bt = transpose(b.data(), n, k);
    gemm_acc(a.data().data(), bt.data(), out.data().data(), m, k, n);
  }
  if (record) {
    active_tape()->record([a = a, b = b, out = out, m = m, k = k, n = n]() mutable {
      auto gc = out.grad();
      if (a.requires_grad()) gemm_acc(gc.data(), b.data().data(), a.grad().data(), m, n, k);
      if (b.requires_grad()) gemm_at_acc(gc.data(), a.data().data(), b.grad().data(), m, n, k);
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  const bool record = should_record({&a, &b});
  Tensor out = make_output(a.shape(), record);
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  if (record) {
    active_tape()->record([a = a, b = b, out = out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  const bool record = should_record({&a, &b});
  Tensor out = make_output(a.shape(), record);
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  if (record) {
    active_tape()->record([a = a, b = b, out = out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  const bool record = should_record({&a, &b});
  Tensor out = make_output(a.shape(), record);
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  if (record) {
    active_tape()->record([a = a, b = b, out = out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        auto bv = b.data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        auto av = a.data();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t m = x.rows(), n = x.cols();
  if (bias.size() != n) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) + " does not match columns of " +
                         shape_string(x.shape()));
  }
  const bool record = should_record({&x, &bias});
  Tensor out = make_output(x.shape(), record);
  auto xv = x.data(), bv = bias.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) ov[i * n + j] = xv[i * n + j] + bv[j];
  if (record) {
    active_tape()->record([x = x, bias = bias, out = out, m = m, n = n]() mutable {
      auto g = out.grad();
      if (x.requires_grad()) {
        auto gx = x.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& x, Real factor) {
  return unary(x, [factor](Real v) { return v * factor; }, [factor](Real, Real) { return factor; });
}

Tensor one_minus(const Tensor& x) {
  return unary(x, [](Real v) { return Real(1) - v; }, [](Real, Real) { return Real(-1); });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, stable_sigmoid, [](Real, Real y) { return y * (Real(1) - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](Real v) { return std::tanh(v); }, [](Real, Real y) { return Real(1) - y * y; });
}

Tensor softmax(const Tensor& x) {
  const std::size_t m = x.rows(), n = x.cols();
  if (n == 0) throw DimensionError("softmax of an empty row");
  const bool record = should_record({&x});
  Tensor out = make_output(x.shape(), record);
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    const Real* row = xv.data() + i * n;
    Real* dst = ov.data() + i * n;
    Real mx = row[0];
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(row[j])) throw NumericError("softmax: non-finite input");
      mx = std::max(mx, row[j]);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += std::exp(static_cast<double>(row[j]) - mx);
    for (std::size_t j = 0; j < n; ++j) dst[j] = static_cast<Real>(std::exp(static_cast<double>(row[j]) - mx) / total);
  }
  if (record) {
    active_tape()->record([x = x, out = out, m = m, n = n]() mutable {
      if (!x.requires_grad()) return;
      auto gy = out.grad();
      auto gx = x.grad();
      auto y = out.data();
      for (std::size_t i = 0; i < m; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += static_cast<double>(gy[i * n + j]) * y[i * n + j];
        for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += y[i * n + j] * static_cast<Real>(gy[i * n + j] - dot);
      }
    });
  }
  return out;
}

Tensor sum(const Tensor& x) {
  const bool record = should_record({&x});
  Tensor out = make_output({1}, record);
  double total = 0.0;
  for (auto v : x.data()) total += v;
  out[0] = static_cast<Real>(total);
  if (record) {
    active_tape()->record([x = x, out = out]() mutable {
      if (!x.requires_grad()) return;
      const Real g = out.grad()[0];
      for (auto& v : x.grad()) v += g;
    });
  }
  return out;
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  const std::size_t m = parts[0].rows();
  std::size_t total = 0;
  bool record = false;
  for (const auto& p : parts) {
    if (p.rows() != m) throw DimensionError("concat_cols: row counts differ");
    total += p.cols();
    record = record || should_record({&p});
  }
  Tensor out = make_output(matrix_shape(parts[0], m, total), record);
  auto ov = out.data();
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t c = p.cols();
    auto pv = p.data();
    for (std::size_t i = 0; i < m; ++i) std::copy_n(pv.data() + i * c, c, ov.data() + i * total + offset);
    offset += c;
  }
  if (record) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    active_tape()->record([inputs = inputs, out = out, m = m, total = total]() mutable {
      auto g = out.grad();
      std::size_t offset = 0;
      for (auto& p : inputs) {
        const std::size_t c = p.cols();
        if (p.requires_grad()) {
          auto gp = p.grad();
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < c; ++j) gp[i * c + j] += g[i * total + offset + j];
        }
        offset += c;
      }
    });
  }
  return out;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows of nothing");
  const std::size_t n = parts[0].cols();
  std::size_t total = 0;
  bool record = false;
  for (const auto& p : parts) {
    if (p.cols() != n) throw DimensionError("concat_rows: column counts differ");
    total += p.rows();
    record = record || should_record({&p});
  }
  Tensor out = make_output({total, n}, record);
  auto ov = out.data();
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.data().begin(), p.data().end(), ov.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += p.size();
  }
  if (record) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    active_tape()->record([inputs = inputs, out = out]() mutable {
      auto g = out.grad();
      std::size_t offset = 0;
      for (auto& p : inputs) {
        if (p.requires_grad()) {
          auto gp = p.grad();
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offset + i];
        }
        offset += p.size();
      }
    });
  }
  return out;
}

Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  const std::size_t n = x.cols();
  if (begin + count > x.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") outside " + shape_string(x.shape()));
  }
  const bool record = should_record({&x});
  Tensor out = make_output({count, n}, record);
  auto xv = x.data();
  std::copy(xv.begin() + static_cast<std::ptrdiff_t>(begin * n),
            xv.begin() + static_cast<std::ptrdiff_t>((begin + count) * n), out.data().begin());
  if (record) {
    active_tape()->record([x = x, out = out, begin = begin, n = n]() mutable {
      auto g = out.grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[begin * n + i] += g[i];
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& table, std::span<const TokenId> ids, TokenId frozen_id) {
  const std::size_t vocab = table.rows(), width = table.cols();
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw IndexError("gather_rows: id " + std::to_string(id) + " outside table of " + std::to_string(vocab) +
                       " rows");
    }
  }
  const bool record = should_record({&table});
  Tensor out = make_output({ids.size(), width}, record);
  auto tv = table.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy_n(tv.data() + static_cast<std::size_t>(ids[i]) * width, width, ov.data() + i * width);
  if (record) {
    std::vector<TokenId> saved(ids.begin(), ids.end());
    active_tape()->record(
        [table = table, out = out, saved = std::move(saved), width = width, frozen_id = frozen_id]() mutable {
          auto g = out.grad();
          auto gt = table.grad();
          for (std::size_t i = 0; i < saved.size(); ++i) {
            if (saved[i] == frozen_id) continue;
            Real* dst = gt.data() + static_cast<std::size_t>(saved[i]) * width;
            const Real* src = g.data() + i * width;
            for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
          }
        });
  }
  return out;
}

Tensor unfold_windows(const Tensor& x, std::size_t sequences, std::size_t length, std::size_t width) {
  const std::size_t e = x.cols();
  if (x.rows() != sequences * length) {
    throw DimensionError("unfold_windows: " + shape_string(x.shape()) + " is not " + std::to_string(sequences) +
                         " blocks of " + std::to_string(length) + " rows");
  }
  if (width == 0 || length < width) {
    throw DimensionError("unfold_windows: block length " + std::to_string(length) + " shorter than window " +
                         std::to_string(width));
  }
  const std::size_t windows = length - width + 1;
  const std::size_t span_len = width * e;
  const bool record = should_record({&x});
  Tensor out = make_output({sequences * windows, span_len}, record);
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t s = 0; s < sequences; ++s)
    for (std::size_t w = 0; w < windows; ++w)
      std::copy_n(xv.data() + (s * length + w) * e, span_len, ov.data() + (s * windows + w) * span_len);
  if (record) {
    active_tape()->record([x = x, out = out, sequences = sequences, length = length, windows = windows,
                           span_len = span_len, e = e]() mutable {
      if (!x.requires_grad()) return;
      auto g = out.grad();
      auto gx = x.grad();
      for (std::size_t s = 0; s < sequences; ++s)
        for (std::size_t w = 0; w < windows; ++w) {
          Real* dst = gx.data() + (s * length + w) * e;
          const Real* src = g.data() + (s * windows + w) * span_len;
          for (std::size_t j = 0; j < span_len; ++j) dst[j] += src[j];
        }
    });
  }
  return out;
}

Tensor max_pool_time(const Tensor& x, std::size_t sequences, std::size_t length) {
  const std::size_t a = x.cols();
  if (length == 0) throw InvariantError("max_pool_time: empty feature map");
  if (x.rows() != sequences * length) {
    throw DimensionError("max_pool_time: " + shape_string(x.shape()) + " is not " + std::to_string(sequences) +
                         " blocks of " + std::to_string(length) + " rows");
  }
  const bool record = should_record({&x});
  Tensor out = make_output({sequences, a}, record);
  std::vector<std::size_t> argmax(sequences * a);
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t s = 0; s < sequences; ++s) {
    for (std::size_t j = 0; j < a; ++j) {
      std::size_t best = s * length;
      Real value = xv[best * a + j];
      for (std::size_t t = 1; t < length; ++t) {
        const std::size_t row = s * length + t;
        if (xv[row * a + j] > value) {
          value = xv[row * a + j];
          best = row;
        }
      }
      ov[s * a + j] = value;
      argmax[s * a + j] = best;
    }
  }
  if (record) {
    active_tape()->record([x = x, out = out, argmax = std::move(argmax), a = a]() mutable {
      if (!x.requires_grad()) return;
      auto g = out.grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i] * a + i % a] += g[i];
    });
  }
  return out;
}

MaxOverTime max_over_time(const Tensor& feature_map) {
  const std::size_t n = feature_map.size();
  if (n == 0) throw InvariantError("max_over_time: empty feature map");
  auto c = feature_map.data();
  std::size_t index = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (c[i] > c[index]) index = i;
  const bool record = should_record({&feature_map});
  Tensor out = make_output({1}, record);
  out[0] = c[index];
  if (record) {
    active_tape()->record([feature_map = feature_map, out = out, index = index]() mutable {
      if (feature_map.requires_grad()) feature_map.grad()[index] += out.grad()[0];
    });
  }
  return {out, index};
}

Tensor dropout(const Tensor& x, double keep_prob, bool training, Rng& rng) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw ConfigError("dropout keep probability must lie in (0, 1], got " + std::to_string(keep_prob));
  }
  if (!training || keep_prob == 1.0) return x;
  const bool record = should_record({&x});
  Tensor out = make_output(x.shape(), record);
  const Real factor = static_cast<Real>(1.0 / keep_prob);
  std::vector<Real> mask(x.size());
  for (auto& m : mask) m = rng.bernoulli(keep_prob) ? factor : Real(0);
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] * mask[i];
  if (record) {
    active_tape()->record([x = x, out = out, mask = std::move(mask)]() mutable {
      if (!x.requires_grad()) return;
      auto g = out.grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
    });
  }
  return out;
}

Tensor cross_entropy_sum(const Tensor& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                         std::size_t per_row) {
  const std::size_t n = logits.rows(), vocab = logits.cols();
  if (targets.size() != n * per_row) {
    throw DimensionError("cross_entropy_sum: " + std::to_string(targets.size()) + " targets for " + std::to_string(n) +
                         " rows x " + std::to_string(per_row));
  }
  if (!mask.empty() && mask.size() != targets.size()) throw DimensionError("cross_entropy_sum: mask size mismatch");
  auto counted = [&](std::size_t idx) { return mask.empty() || mask[idx] != 0; };
  for (std::size_t idx = 0; idx < targets.size(); ++idx) {
    if (!counted(idx)) continue;
    if (targets[idx] < 0 || static_cast<std::size_t>(targets[idx]) >= vocab) {
      throw IndexError("cross entropy target " + std::to_string(targets[idx]) + " outside [0, " +
                       std::to_string(vocab) + ")");
    }
  }
  const bool record = should_record({&logits});
  Tensor out = make_output({1}, record);
  auto lv = logits.data();
  std::vector<double> log_norm(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real* row = lv.data() + i * vocab;
    double mx = row[0];
    for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double acc = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) acc += std::exp(row[j] - mx);
    log_norm[i] = mx + std::log(acc);
    for (std::size_t j = 0; j < per_row; ++j) {
      const std::size_t idx = i * per_row + j;
      if (counted(idx)) total += log_norm[i] - row[targets[idx]];
    }
  }
  if (!std::isfinite(total)) throw NumericError("cross entropy is not finite");
  out[0] = static_cast<Real>(total);
  if (record) {
    std::vector<TokenId> saved(targets.begin(), targets.end());
    std::vector<std::uint8_t> saved_mask(mask.begin(), mask.end());
    active_tape()->record([logits = logits, out = out, saved = std::move(saved), saved_mask = std::move(saved_mask),
                           log_norm = std::move(log_norm), n = n, vocab = vocab, per_row = per_row]() mutable {
      if (!logits.requires_grad()) return;
      const double g = out.grad()[0];
      auto gl = logits.grad();
      auto lv = logits.data();
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < per_row; ++j) {
          const std::size_t idx = i * per_row + j;
          if (saved_mask.empty() || saved_mask[idx]) {
            ++count;
            gl[i * vocab + static_cast<std::size_t>(saved[idx])] -= static_cast<Real>(g);
          }
        }
        if (count == 0) continue;
        const double weight = g * static_cast<double>(count);
        for (std::size_t j = 0; j < vocab; ++j)
          gl[i * vocab + j] += static_cast<Real>(weight * std::exp(lv[i * vocab + j] - log_norm[i]));
      }
    });
  }
  return out;
}

Tensor cross_entropy_from_logits(const Tensor& logits, TokenId target) {
  const TokenId t[1] = {target};
  return cross_entropy_sum(logits, t, {}, 1);
}

TDLM_NAMESPACE_END
