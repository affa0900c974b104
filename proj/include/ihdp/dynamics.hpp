#pragma once

#include <numbers>

namespace ihdp {

// Longitudinal missile airframe. Units follow the aero tables: states in
// degrees and deg/s, the `deg_per_rad` factor carries the conversion.
struct PhysicalParams {
  double g = 9.815;             // m/s^2
  double weight = 204.3;        // kg
  double speed = 947.715;       // m/s
  double iyy = 247.438;         // kg m^2
  double deg_per_rad = 180.0 / std::numbers::pi;
  double dynamic_pressure = 29969.861;  // kg/m^2, used verbatim
  double ref_area = 0.041;      // m^2
  double ref_diameter = 0.229;  // m
  double b_z = -0.034;
  double b_m = -0.206;

  // f g Q S / (W V), the alpha-equation gain (~3.569).
  double alpha_gain() const {
    return deg_per_rad * g * dynamic_pressure * ref_area / (weight * speed);
  }
  // f Q S d / Iyy, the pitch-rate-equation gain (~65.16).
  double pitch_gain() const {
    return deg_per_rad * dynamic_pressure * ref_area * ref_diameter / iyy;
  }

  // Throws std::invalid_argument if any physical quantity is non-positive.
  void validate() const;
};

struct VehicleState {
  double alpha = 0.0;  // deg
  double q = 0.0;      // deg/s
};

struct StateDerivative {
  double alpha_dot = 0.0;  // deg/s
  double q_dot = 0.0;      // deg/s^2
};

struct ActuatorState {
  double delta = 0.0;          // deg
  double tau = 0.005;          // s
  double rate_limit = 600.0;   // deg/s
  double pos_limit = 20.0;     // deg
};

// Range over which the aero polynomials are valid.
inline constexpr double kAeroValidityDeg = 20.0;

inline bool within_aero_validity(double alpha_deg) {
  return alpha_deg >= -kAeroValidityDeg && alpha_deg <= kAeroValidityDeg;
}

// Normal-force polynomial, alpha in degrees.
double phi_z(double alpha_deg);
// Pitching-moment polynomial, alpha in degrees.
double phi_m(double alpha_deg);

StateDerivative state_derivative(const VehicleState& s, double delta_deg,
                                 const PhysicalParams& p);

// Classical RK4 with the deflection held over the step.
VehicleState rk4_step(const VehicleState& s, double delta_deg, double h,
                      const PhysicalParams& p);

// First-order actuator tau*d' + d = d_cmd, discretized exactly over h, then
// the realized motion is rate limited and finally position clamped.
ActuatorState actuator_step(const ActuatorState& a, double delta_cmd,
                            double h);

}  // namespace ihdp
