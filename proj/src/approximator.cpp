#include "ihdp/approximator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ihdp {

void AdamConfig::validate() const {
  if (!(lr >= 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) ||
      !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
    throw std::invalid_argument("invalid Adam configuration");
  }
}

Approximator::Approximator(std::size_t inputs, std::size_t hidden,
                           OutputActivation act, double scale)
    : inputs_(inputs),
      hidden_(hidden),
      act_(act),
      scale_(scale),
      params_(hidden * inputs + 2 * hidden + 1, 0.0) {
  if (inputs == 0 || hidden == 0 || hidden > kMaxHidden) {
    throw std::invalid_argument("approximator needs 1..32 hidden units and at least one input");
  }
  if (act == OutputActivation::scaled_tanh && !(scale > 0.0)) {
    throw std::invalid_argument("scaled_tanh requires a positive scale");
  }
  adam_.m.assign(params_.size(), 0.0);
  adam_.v.assign(params_.size(), 0.0);
}

Approximator Approximator::random(std::size_t inputs, std::size_t hidden,
                                  OutputActivation act, double scale, Rng& rng,
                                  double range) {
  Approximator net(inputs, hidden, act, scale);
  for (double& p : net.params_) p = rng.uniform(-range, range);
  return net;
}

void Approximator::set_parameters(std::span<const double> values) {
  if (values.size() != params_.size()) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  std::copy(values.begin(), values.end(), params_.begin());
}

void Approximator::check_input(std::span<const double> x) const {
  if (x.size() != inputs_) {
    throw std::invalid_argument("approximator input dimension mismatch");
  }
}

double Approximator::activate(double z) const {
  switch (act_) {
    case OutputActivation::absolute:
      return std::abs(z);
    case OutputActivation::scaled_tanh:
      return scale_ * std::tanh(z);
    case OutputActivation::identity:
      break;
  }
  return z;
}

double Approximator::output_derivative(double z) const {
  switch (act_) {
    case OutputActivation::absolute:
      // subgradient 0 at the kink
      return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    case OutputActivation::scaled_tanh: {
      const double t = std::tanh(z);
      return scale_ * (1.0 - t * t);
    }
    case OutputActivation::identity:
      break;
  }
  return 1.0;
}

ForwardCache Approximator::forward(std::span<const double> x) const {
  check_input(x);
  ForwardCache c;
  c.width = hidden_;
  double z = params_[b2_offset()];
  for (std::size_t j = 0; j < hidden_; ++j) {
    double a = params_[b1_offset() + j];
    const double* row = &params_[j * inputs_];
    for (std::size_t i = 0; i < inputs_; ++i) a += row[i] * x[i];
    c.hidden_pre[j] = a;
    c.hidden[j] = std::tanh(a);
    z += params_[w2_offset() + j] * c.hidden[j];
  }
  c.z_out = z;
  c.y = activate(z);
  return c;
}

std::vector<double> Approximator::grad_params(std::span<const double> x,
                                              double upstream) const {
  return grad_params(x, forward(x), upstream);
}

std::vector<double> Approximator::grad_params(std::span<const double> x,
                                              const ForwardCache& c,
                                              double upstream) const {
  std::vector<double> g(params_.size(), 0.0);
  accumulate_grad_params(x, c, upstream, g);
  return g;
}

void Approximator::accumulate_grad_params(std::span<const double> x,
                                          const ForwardCache& c,
                                          double upstream,
                                          std::span<double> g) const {
  check_input(x);
  if (g.size() != params_.size()) {
    throw std::invalid_argument("gradient buffer size mismatch");
  }
  const double dz = upstream * output_derivative(c.z_out);
  if (dz == 0.0) return;
  g[b2_offset()] += dz;
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double h = c.hidden[j];
    g[w2_offset() + j] += dz * h;
    const double da = dz * params_[w2_offset() + j] * (1.0 - h * h);
    g[b1_offset() + j] += da;
    for (std::size_t i = 0; i < inputs_; ++i) g[j * inputs_ + i] += da * x[i];
  }
}

double Approximator::directional_input_derivative(
    const ForwardCache& c, std::span<const double> w) const {
  if (w.size() != inputs_) {
    throw std::invalid_argument("direction dimension mismatch");
  }
  const double dz = output_derivative(c.z_out);
  if (dz == 0.0) return 0.0;
  double d = 0.0;
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double h = c.hidden[j];
    double row = 0.0;
    for (std::size_t i = 0; i < inputs_; ++i) row += params_[j * inputs_ + i] * w[i];
    d += params_[w2_offset() + j] * (1.0 - h * h) * row;
  }
  return dz * d;
}

std::vector<double> Approximator::grad_input(std::span<const double> x) const {
  return grad_input(forward(x));
}

std::vector<double> Approximator::grad_input(const ForwardCache& c) const {
  std::vector<double> g(inputs_, 0.0);
  const double dz = output_derivative(c.z_out);
  if (dz == 0.0) return g;
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double h = c.hidden[j];
    const double da = dz * params_[w2_offset() + j] * (1.0 - h * h);
    for (std::size_t i = 0; i < inputs_; ++i) g[i] += da * params_[j * inputs_ + i];
  }
  return g;
}

void Approximator::adam_update(std::span<const double> grad,
                               const AdamConfig& cfg) {
  if (grad.size() != params_.size()) {
    throw std::invalid_argument("gradient size mismatch");
  }
  ++adam_.step;
  const double t = static_cast<double>(adam_.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    adam_.m[k] = cfg.beta1 * adam_.m[k] + (1.0 - cfg.beta1) * grad[k];
    adam_.v[k] = cfg.beta2 * adam_.v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
    const double m_hat = adam_.m[k] / bc1;
    const double v_hat = adam_.v[k] / bc2;
    params_[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

bool Approximator::same_topology(const Approximator& other) const {
  return inputs_ == other.inputs_ && hidden_ == other.hidden_ &&
         act_ == other.act_ && scale_ == other.scale_;
}

void Approximator::soft_update(const Approximator& source, double tau) {
  if (!same_topology(source)) {
    throw std::invalid_argument("soft update between different topologies");
  }
  if (tau == 1.0) {
    params_ = source.params_;
    return;
  }
  for (std::size_t k = 0; k < params_.size(); ++k) {
    params_[k] = tau * source.params_[k] + (1.0 - tau) * params_[k];
  }
}

}  // namespace ihdp
