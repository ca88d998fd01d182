#include "tdlm/optim.hpp"

#include <cmath>

TDLM_NAMESPACE_BEGIN

void Adam::step(std::span<const NamedParam> params) {
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) throw InvariantError("Adam step: parameter '" + p.name + "' has no gradient");
  }
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  for (const auto& p : params) {
    Tensor t = p.tensor;
    auto& state = moments_[p.name];
    if (state.first.empty()) {
      state.first.assign(t.size(), Real(0));
      state.second.assign(t.size(), Real(0));
    }
    if (state.first.size() != t.size()) {
      throw InvariantError("Adam moments for '" + p.name + "' do not match the parameter shape");
    }
    ++state.steps;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.steps));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.steps));
    auto w = t.data();
    auto g = t.grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      const double m = b1 * state.first[i] + (1.0 - b1) * gi;
      const double v = b2 * state.second[i] + (1.0 - b2) * gi * gi;
      state.first[i] = static_cast<Real>(m);
      state.second[i] = static_cast<Real>(v);
      const double m_hat = m / c1;
      const double v_hat = v / c2;
      w[i] = static_cast<Real>(w[i] - config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon));
    }
    t.zero_grad();
  }
}

void Adam::restore(std::uint64_t steps, std::map<std::string, AdamMoments> moments) {
  steps_ = steps;
  moments_ = std::move(moments);
}

double grad_norm(std::span<const NamedParam> params) {
  double total = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (auto g : p.tensor.grad()) total += static_cast<double>(g) * g;
  }
  return std::sqrt(total);
}

double clip_grad_norm(std::span<const NamedParam> params, double max_norm) {
  const double norm = grad_norm(params);
  if (max_norm <= 0.0 || norm <= max_norm) return norm;
  const auto factor = static_cast<Real>(max_norm / norm);
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    Tensor t = p.tensor;
    for (auto& g : t.grad()) g *= factor;
  }
  return norm;
}

TDLM_NAMESPACE_END
