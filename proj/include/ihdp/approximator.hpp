#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ihdp {

enum class OutputActivation { absolute, scaled_tanh, identity };

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

inline constexpr std::size_t kMaxHidden = 32;

// Everything the backward pass needs from one evaluation. Only the first
// `width` hidden entries are meaningful.
struct ForwardCache {
  std::array<double, kMaxHidden> hidden_pre{};  // W1 x + b1
  std::array<double, kMaxHidden> hidden{};      // tanh(hidden_pre)
  std::size_t width = 0;
  double z_out = 0.0;  // W2 h + b2, before the output activation
  double y = 0.0;
};

// Seeded uniform source. Doubles are built from the top 53 bits so the stream
// does not depend on the standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 engine_;
};

// Single-hidden-layer perceptron: y = act(W2 tanh(W1 x + b1) + b2).
//
// Parameters live in one flat vector laid out as
//   [ W1 (hidden x inputs, row major) | b1 (hidden) | W2 (hidden) | b2 ]
// which is also the layout of every gradient and of the serialized snapshot.
class Approximator {
 public:
  Approximator(std::size_t inputs, std::size_t hidden, OutputActivation act,
               double scale = 1.0);

  // Uniform initialization in [-range, range].
  static Approximator random(std::size_t inputs, std::size_t hidden,
                             OutputActivation act, double scale, Rng& rng,
                             double range = 0.1);

  std::size_t inputs() const { return inputs_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t parameter_count() const { return params_.size(); }
  OutputActivation activation() const { return act_; }
  double scale() const { return scale_; }

  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  void set_parameters(std::span<const double> values);

  const AdamState& adam_state() const { return adam_; }

  double operator()(std::span<const double> x) const { return forward(x).y; }
  ForwardCache forward(std::span<const double> x) const;

  // d y / d theta scaled by `upstream`.
  std::vector<double> grad_params(std::span<const double> x,
                                  double upstream) const;
  std::vector<double> grad_params(std::span<const double> x,
                                  const ForwardCache& cache,
                                  double upstream) const;
  // Adds upstream * d y / d theta into `out` (size parameter_count()).
  void accumulate_grad_params(std::span<const double> x,
                              const ForwardCache& cache, double upstream,
                              std::span<double> out) const;

  // d y / d x.
  std::vector<double> grad_input(std::span<const double> x) const;
  std::vector<double> grad_input(const ForwardCache& cache) const;
  // d y / d x contracted with `direction`, i.e. sum_i w_i dy/dx_i.
  double directional_input_derivative(const ForwardCache& cache,
                                      std::span<const double> direction) const;

  // Bias-corrected Adam step; advances the step counter.
  void adam_update(std::span<const double> grad, const AdamConfig& cfg);

  // theta_target <- tau theta_source + (1 - tau) theta_target.
  void soft_update(const Approximator& source, double tau);

  bool same_topology(const Approximator& other) const;

  // Derivative of the output activation at z.
  double output_derivative(double z) const;

 private:
  double activate(double z) const;
  std::size_t b1_offset() const { return hidden_ * inputs_; }
  std::size_t w2_offset() const { return b1_offset() + hidden_; }
  std::size_t b2_offset() const { return w2_offset() + hidden_; }
  void check_input(std::span<const double> x) const;

  std::size_t inputs_;
  std::size_t hidden_;
  OutputActivation act_;
  double scale_;
  std::vector<double> params_;
  AdamState adam_;
};

}  // namespace ihdp
