#include "ihdp/command_filter.hpp"

#include <stdexcept>
#include <utility>

namespace ihdp {

void FilterState::validate() const {
  if (!(zeta > 0.0) || !(omega_n > 0.0)) {
    throw std::invalid_argument("filter damping and natural frequency must be positive");
  }
}

FilterState filter_step(const FilterState& fs, double raw, double h) {
  const double w2 = fs.omega_n * fs.omega_n;
  const double damping = 2.0 * fs.zeta * (fs.squared_damping ? w2 : fs.omega_n);
  auto deriv = [&](double d1, double d2) {
    return std::pair{d2, -damping * d2 - w2 * (d1 - raw)};
  };
  const auto [a1, b1] = deriv(fs.d1, fs.d2);
  const auto [a2, b2] = deriv(fs.d1 + h / 2 * a1, fs.d2 + h / 2 * b1);
  const auto [a3, b3] = deriv(fs.d1 + h / 2 * a2, fs.d2 + h / 2 * b2);
  const auto [a4, b4] = deriv(fs.d1 + h * a3, fs.d2 + h * b3);
  FilterState next = fs;
  next.d1 = fs.d1 + h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
  next.d2 = fs.d2 + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
  return next;
}

}  // namespace ihdp
