#include "ihdp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ihdp {

void PhysicalParams::validate() const {
  if (!(g > 0 && weight > 0 && speed > 0 && iyy > 0 && dynamic_pressure > 0 &&
        ref_area > 0 && ref_diameter > 0 && deg_per_rad > 0)) {
    throw std::invalid_argument("physical parameters must be strictly positive");
  }
}

double phi_z(double a) {
  return 0.000103 * a * a * a - 0.00945 * a * std::abs(a) - 0.170 * a;
}

double phi_m(double a) {
  return 0.000215 * a * a * a - 0.0195 * a * std::abs(a) - 0.051 * a;
}

StateDerivative state_derivative(const VehicleState& s, double delta,
                                 const PhysicalParams& p) {
  const double alpha_rad = s.alpha / p.deg_per_rad;
  StateDerivative d;
  d.alpha_dot = p.alpha_gain() * std::cos(alpha_rad) *
                    (phi_z(s.alpha) + p.b_z * delta) +
                s.q;
  d.q_dot = p.pitch_gain() * (phi_m(s.alpha) + p.b_m * delta);
  return d;
}

VehicleState rk4_step(const VehicleState& s, double delta, double h,
                      const PhysicalParams& p) {
  auto advance = [&](const StateDerivative& k, double w) {
    return VehicleState{s.alpha + w * k.alpha_dot, s.q + w * k.q_dot};
  };
  const StateDerivative k1 = state_derivative(s, delta, p);
  const StateDerivative k2 = state_derivative(advance(k1, h / 2), delta, p);
  const StateDerivative k3 = state_derivative(advance(k2, h / 2), delta, p);
  const StateDerivative k4 = state_derivative(advance(k3, h), delta, p);
  return VehicleState{
      s.alpha + h / 6 * (k1.alpha_dot + 2 * k2.alpha_dot + 2 * k3.alpha_dot +
                         k4.alpha_dot),
      s.q + h / 6 * (k1.q_dot + 2 * k2.q_dot + 2 * k3.q_dot + k4.q_dot)};
}

ActuatorState actuator_step(const ActuatorState& a, double delta_cmd,
                            double h) {
  ActuatorState next = a;
  const double response =
      delta_cmd + (a.delta - delta_cmd) * std::exp(-h / a.tau);
  const double max_move = a.rate_limit * h;
  const double moved = std::clamp(response - a.delta, -max_move, max_move);
  next.delta = std::clamp(a.delta + moved, -a.pos_limit, a.pos_limit);
  return next;
}

}  // namespace ihdp
