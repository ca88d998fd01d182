#include "tdlm/tensor.hpp"

#include <algorithm>
#include <sstream>

TDLM_NAMESPACE_BEGIN

namespace {
thread_local Tape* g_active_tape = nullptr;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), Real(0), requires_grad); }

Tensor Tensor::filled(Shape shape, Real value, bool requires_grad) {
  Tensor t;
  t.impl_ = std::make_shared<detail::TensorStorage>();
  const auto n = shape_numel(shape);
  t.impl_->shape = std::move(shape);
  t.impl_->data.assign(n, value);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<Real> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("Tensor::from: shape " + shape_string(shape) + " needs " + std::to_string(shape_numel(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  Tensor t;
  t.impl_ = std::make_shared<detail::TensorStorage>();
  t.impl_->shape = std::move(shape);
  t.impl_->data = std::move(values);
  t.impl_->requires_grad = requires_grad;
  return t;
}

std::size_t Tensor::rows() const {
  const auto& s = impl_->shape;
  if (s.size() <= 1) return 1;
  return s[0];
}

std::size_t Tensor::cols() const {
  const auto& s = impl_->shape;
  if (s.empty()) return 1;
  return s.back();
}

Real Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_string(shape()));
  return impl_->data[0];
}

std::span<Real> Tensor::grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), Real(0));
  return impl_->grad;
}

std::span<const Real> Tensor::grad() const {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), Real(0));
  return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.assign(impl_->data.size(), Real(0)); }

Tensor Tensor::clone() const {
  Tensor t = from(impl_->shape, impl_->data, impl_->requires_grad);
  t.impl_->grad = impl_->grad;
  return t;
}

Tensor Tensor::detach() const { return from(impl_->shape, impl_->data, false); }

void Tape::backward(Tensor& loss) {
  if (loss.size() != 1) throw DimensionError("backward() needs a scalar loss, got " + shape_string(loss.shape()));
  loss.grad()[0] += Real(1);
  for (auto it = rules_.rbegin(); it != rules_.rend(); ++it) (*it)();
  rules_.clear();
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

TDLM_NAMESPACE_END
