#include "ihdp/incremental_model.hpp"

#include <algorithm>
#include <cmath>

namespace ihdp {

void RlsChannel::reset_covariance() {
  P = Mat2{Vec2{p0, 0.0}, Vec2{0.0, p0}};
  ++resets;
}

Vec2 RlsChannel::covariance_eigenvalues() const {
  const double tr = P[0][0] + P[1][1];
  const double det = P[0][0] * P[1][1] - P[0][1] * P[1][0];
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return {tr / 2.0 - disc, tr / 2.0 + disc};
}

bool RlsChannel::update(const Vec2& phi, double target) {
  if (phi[0] == 0.0 && phi[1] == 0.0) return false;

  const Vec2 p_phi{P[0][0] * phi[0] + P[0][1] * phi[1],
                   P[1][0] * phi[0] + P[1][1] * phi[1]};
  const double denom = forgetting + phi[0] * p_phi[0] + phi[1] * p_phi[1];
  const Vec2 gain{p_phi[0] / denom, p_phi[1] / denom};
  const double err = target - predict(phi);
  theta[0] += gain[0] * err;
  theta[1] += gain[1] * err;

  // P <- (P - K phi^T P) / lambda, kept symmetric
  Mat2 next;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      next[r][c] = (P[r][c] - gain[r] * p_phi[c]) / forgetting;
    }
  }
  const double off = 0.5 * (next[0][1] + next[1][0]);
  next[0][1] = next[1][0] = off;
  P = next;

  const double det = P[0][0] * P[1][1] - off * off;
  const Vec2 eig = covariance_eigenvalues();
  if (!(P[0][0] > 0.0) || !(det > 0.0) || !(eig[1] <= reset_threshold) ||
      !std::isfinite(theta[0]) || !std::isfinite(theta[1])) {
    reset_covariance();
  }
  return true;
}

IncrementalModel IncrementalModel::with_defaults(double dt, double forgetting,
                                                 double p0) {
  IncrementalModel m;
  for (RlsChannel* ch : {&m.alpha_, &m.q_}) {
    ch->forgetting = forgetting;
    ch->p0 = p0;
    ch->P = Mat2{Vec2{p0, 0.0}, Vec2{0.0, p0}};
  }
  m.alpha_.theta = {0.0, dt};
  m.q_.theta = {0.0, 0.0};
  return m;
}

void IncrementalModel::rls_update(const IncrementRecord& rec) {
  alpha_.update({rec.d_alpha, rec.d_q}, rec.d_alpha_next);
  q_.update({rec.d_q, rec.d_delta}, rec.d_q_next);
  ++updates_;
}

IncrementPrediction IncrementalModel::predict(double d_alpha, double d_q,
                                              double d_delta) const {
  return {alpha_.predict({d_alpha, d_q}), q_.predict({d_q, d_delta})};
}

Sensitivities analytic_jacobians(const VehicleState& s, double delta,
                                 double h, const PhysicalParams& p) {
  const double a = s.alpha;
  const double a_rad = a / p.deg_per_rad;
  const double dphi_z = 3.0 * 0.000103 * a * a - 2.0 * 0.00945 * std::abs(a) - 0.170;
  const double bracket = phi_z(a) + p.b_z * delta;
  const double d_alpha_dot =
      p.alpha_gain() * (-std::sin(a_rad) / p.deg_per_rad * bracket +
                        std::cos(a_rad) * dphi_z);
  Sensitivities j;
  j.F1 = 1.0 + h * d_alpha_dot;
  j.G1 = h;
  j.F2 = 1.0;
  j.G2 = h * p.pitch_gain() * p.b_m;
  return j;
}

}  // namespace ihdp
