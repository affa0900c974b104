#pragma once

#include <array>
#include <cstdint>

#include "ihdp/dynamics.hpp"

namespace ihdp {

// Consecutive-step differences: d_x = x_t - x_{t-1}, d_x_next = x_{t+1} - x_t.
struct IncrementRecord {
  double d_alpha = 0.0;
  double d_q = 0.0;
  double d_delta = 0.0;
  double d_alpha_next = 0.0;
  double d_q_next = 0.0;
};

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<Vec2, 2>;

// Two-parameter recursive least squares with exponential forgetting.
struct RlsChannel {
  Vec2 theta{0.0, 0.0};
  Mat2 P{Vec2{1e6, 0.0}, Vec2{0.0, 1e6}};
  double forgetting = 0.995;
  double p0 = 1e6;
  double reset_threshold = 1e9;
  std::uint64_t resets = 0;

  double predict(const Vec2& phi) const {
    return theta[0] * phi[0] + theta[1] * phi[1];
  }
  // Returns false when the regressor is zero and nothing changed.
  bool update(const Vec2& phi, double target);
  void reset_covariance();
  Vec2 covariance_eigenvalues() const;
};

struct IncrementPrediction {
  double d_alpha_next = 0.0;
  double d_q_next = 0.0;
};

struct Sensitivities {
  double F1 = 0.0;
  double G1 = 0.0;
  double F2 = 0.0;
  double G2 = 0.0;
};

// Online-identified local model
//   d_alpha_{t+1} = F1 d_alpha_t + G1 d_q_t
//   d_q_{t+1}     = F2 d_q_t     + G2 d_delta_t
// with each channel estimated independently.
class IncrementalModel {
 public:
  static constexpr std::uint64_t kWarmupSteps = 5;

  IncrementalModel() = default;
  // theta0 = (0, dt) for the alpha channel, (0, 0) for q, P0 = p0 I.
  static IncrementalModel with_defaults(double dt, double forgetting = 0.995,
                                        double p0 = 1e6);

  void rls_update(const IncrementRecord& rec);
  IncrementPrediction predict(double d_alpha, double d_q,
                              double d_delta) const;

  Sensitivities sensitivities() const {
    return {alpha_.theta[0], alpha_.theta[1], q_.theta[0], q_.theta[1]};
  }
  const RlsChannel& alpha_channel() const { return alpha_; }
  const RlsChannel& q_channel() const { return q_; }
  std::uint64_t updates() const { return updates_; }
  bool warmed_up() const { return updates_ >= kWarmupSteps; }

 private:
  RlsChannel alpha_;
  RlsChannel q_;
  std::uint64_t updates_ = 0;
};

// Closed-form partials of the Euler maps
//   h1 = alpha + T (f1(alpha) + d(alpha, delta) + q),  h2 = q + T (f2(alpha) + g delta)
// at the given operating point. G2 is the partial of h2 with respect to delta.
Sensitivities analytic_jacobians(const VehicleState& s, double delta_deg,
                                 double h, const PhysicalParams& p);

}  // namespace ihdp
