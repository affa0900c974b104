#pragma once

namespace ihdp {

// Second-order low-pass command filter
//   d1' = d2
//   d2' = -2 zeta w d2 - w^2 (d1 - u)
// Unit DC gain. `squared_damping` swaps the damping term for -2 zeta w^2 d2,
// kept for fidelity experiments only.
struct FilterState {
  double d1 = 0.0;  // filtered signal
  double d2 = 0.0;  // its derivative
  double zeta = 0.7;
  double omega_n = 20.0;  // rad/s
  bool squared_damping = false;

  void validate() const;
  // Starts at rest on `value`.
  void reset(double value) {
    d1 = value;
    d2 = 0.0;
  }
};

// RK4 over h with the raw input held constant.
FilterState filter_step(const FilterState& fs, double raw, double h);

}  // namespace ihdp
