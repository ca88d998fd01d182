#ifndef TDLM_TENSOR_HPP_
#define TDLM_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tdlm/base.hpp"

TDLM_NAMESPACE_BEGIN

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

namespace detail {
struct TensorStorage {
  Shape shape;
  std::vector<Real> data;
  std::vector<Real> grad;  // empty until first requested
  bool requires_grad = false;
};
}  // namespace detail

/// Dense row-major array of Real with an optional gradient slot.
///
/// Tensor is a shared handle: copies refer to the same storage, which is what
/// lets recorded backward rules accumulate into parameters in place. Use
/// clone() for an independent copy. Rank is 1 or 2 in practice; a rank-1
/// tensor of n elements is treated as a 1 x n row by the ops.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, Real value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<Real> values, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(impl_); }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->data.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<Real> data() { return impl_->data; }
  std::span<const Real> data() const { return impl_->data; }
  Real& operator[](std::size_t i) { return impl_->data[i]; }
  Real operator[](std::size_t i) const { return impl_->data[i]; }
  Real at(std::size_t r, std::size_t c) const { return impl_->data[r * cols() + c]; }
  Real item() const;

  bool requires_grad() const { return impl_ && impl_->requires_grad; }
  void set_requires_grad(bool flag) { impl_->requires_grad = flag; }
  bool has_grad() const { return impl_ && !impl_->grad.empty(); }
  // Gradient buffer, allocated (zero-filled) on first access.
  std::span<Real> grad();
  std::span<const Real> grad() const;
  void zero_grad();
  void drop_grad() { impl_->grad.clear(); }

  Tensor clone() const;
  // A constant view of the same values, detached from any recorded graph.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  std::shared_ptr<detail::TensorStorage> impl_;
};

/// Ordered record of backward rules for one forward computation.
class Tape {
 public:
  void record(std::function<void()> backward) { rules_.push_back(std::move(backward)); }
  std::size_t size() const { return rules_.size(); }
  void clear() { rules_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and replays every rule in reverse order.
  // The tape is cleared afterwards.
  void backward(Tensor& loss);

 private:
  std::vector<std::function<void()>> rules_;
};

// The tape that ops record onto for the current thread, or nullptr.
Tape* active_tape();

/// Makes `tape` the recording target for the current thread while in scope.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

TDLM_NAMESPACE_END

#endif  // TDLM_TENSOR_HPP_
