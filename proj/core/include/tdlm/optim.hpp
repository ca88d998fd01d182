#ifndef TDLM_OPTIM_HPP_
#define TDLM_OPTIM_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tdlm/tensor.hpp"

TDLM_NAMESPACE_BEGIN

struct NamedParam {
  std::string name;
  Tensor tensor;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamMoments {
  std::vector<Real> first;
  std::vector<Real> second;
  std::uint64_t steps = 0;  // updates applied to this parameter
};

/// Adam with bias correction. Moments are keyed by parameter name; each
/// parameter's bias correction uses its own update count, so sub-tasks that
/// touch disjoint parameter subsets do not disturb one another.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update to every parameter in `params`, then zeroes their
  // gradients. Throws InvariantError if any parameter has no gradient buffer.
  void step(std::span<const NamedParam> params);

  std::uint64_t step_count() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  const std::map<std::string, AdamMoments>& moments() const { return moments_; }
  // Checkpoint restore.
  void restore(std::uint64_t steps, std::map<std::string, AdamMoments> moments);

 private:
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::map<std::string, AdamMoments> moments_;
};

// Global L2 norm of all gradients, accumulated in double.
double grad_norm(std::span<const NamedParam> params);

// Rescales gradients so their global norm is at most max_norm. A
// non-positive max_norm disables clipping. Returns the pre-clip norm.
double clip_grad_norm(std::span<const NamedParam> params, double max_norm);

TDLM_NAMESPACE_END

#endif  // TDLM_OPTIM_HPP_
