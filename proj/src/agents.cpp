#include "ihdp/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ihdp {

AgentConfig AgentConfig::higher_defaults() {
  AgentConfig c;
  c.actor_lr = 5e-7;
  c.control_weight = 5e-6;
  c.ts_weight = 9.3e-4;
  c.critic_loss_threshold = 2.5e-4;
  return c;
}

AgentConfig AgentConfig::lower_defaults() {
  AgentConfig c;
  c.actor_lr = 1e-7;
  c.control_weight = 1e-5;
  c.ts_weight = 1e-5;
  c.critic_loss_threshold = 5e-5;
  return c;
}

void AgentConfig::validate() const {
  if (!(critic_lr >= 0) || !(actor_lr >= 0) || !(control_weight >= 0) ||
      !(ts_weight >= 0) || !(critic_loss_threshold > 0)) {
    throw std::invalid_argument("agent rates, weights and thresholds must be non-negative");
  }
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(tau >= 0 && tau <= 1)) throw std::invalid_argument("tau must lie in [0, 1]");
  if (policy_iters < 1 || max_updates < 1) {
    throw std::invalid_argument("policy_iters and max_updates must be >= 1");
  }
  if (!(action_scale > 0) || hidden == 0 || !(init_range >= 0)) {
    throw std::invalid_argument("invalid network shape or action scale");
  }
  adam.validate();
}

double one_step_cost_high(double e, double action, double a) {
  return e * e + a * action * action;
}

double one_step_cost_low(double e, double delta, double b) {
  return e * e + b * delta * delta;
}

double td_error(double cost, double v_target_next, double v_now, double gamma) {
  return cost + gamma * v_target_next - v_now;
}

double online_ts_loss(const Approximator& actor, std::span<const double> now,
                      std::span<const double> predicted) {
  return std::abs(actor(predicted) - actor(now));
}

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

Agent::Agent(const AgentConfig& cfg, Rng& rng)
    : cfg_(cfg),
      critic_(Approximator::random(2, cfg.hidden, OutputActivation::absolute,
                                   1.0, rng, cfg.init_range)),
      target_(critic_),
      actor_(Approximator::random(3, cfg.hidden, OutputActivation::scaled_tanh,
                                  cfg.action_scale, rng, cfg.init_range)) {
  cfg_.validate();
}

Prediction Agent::predict(const LevelInputs& in, double action) const {
  Prediction p;
  p.state_next = in.state + in.F * in.d_state + in.G * (action - in.action_prev);
  p.error_next = p.state_next - in.reference_next;
  return p;
}

double Agent::action(const LevelInputs& in) const {
  const auto x = in.actor_input();
  return actor_(x);
}

double Agent::td(const LevelInputs& in, double action) const {
  const Prediction p = predict(in, action);
  const double cost =
      one_step_cost_high(p.error_next, action, cfg_.control_weight);
  const std::array<double, 2> next{p.state_next, p.error_next};
  const auto now = in.critic_input();
  return td_error(cost, target_(next), critic_(now), cfg_.gamma);
}

std::vector<double> Agent::critic_loss_gradient(const LevelInputs& in,
                                                double action) const {
  const double delta = td(in, action);
  const auto now = in.critic_input();
  return critic_.grad_params(now, -delta);
}

ActorLoss Agent::actor_loss(const LevelInputs& in) const {
  ActorLoss l;
  const auto x = in.actor_input();
  const ForwardCache fc = actor_.forward(x);
  l.action = fc.y;
  l.z_out = fc.z_out;
  const Prediction p = predict(in, l.action);
  l.cost = one_step_cost_high(p.error_next, l.action, cfg_.control_weight);
  const std::array<double, 2> next{p.state_next, p.error_next};
  l.v_target = target_(next);
  const std::array<double, 3> x_pred{p.error_next, p.state_next, in.aux_next};
  l.ts = std::abs(actor_(x_pred) - l.action);
  l.total = l.cost + cfg_.gamma * l.v_target + cfg_.ts_weight * l.ts;
  return l;
}

std::vector<double> Agent::actor_loss_gradient(const LevelInputs& in) const {
  std::vector<double> g(actor_.parameter_count(), 0.0);
  actor_loss_gradient(in, g);
  return g;
}

void Agent::actor_loss_gradient(const LevelInputs& in,
                                std::span<double> g) const {
  std::fill(g.begin(), g.end(), 0.0);
  const auto x = in.actor_input();
  const ForwardCache fc = actor_.forward(x);
  const double u = fc.y;
  const Prediction p = predict(in, u);

  // both critic inputs move with the predicted state
  constexpr std::array<double, 2> along_state{1.0, 1.0};
  const std::array<double, 2> next{p.state_next, p.error_next};
  const double dv_dstate =
      target_.directional_input_derivative(target_.forward(next), along_state);

  double du = 2.0 * p.error_next * in.G + 2.0 * cfg_.control_weight * u +
              cfg_.gamma * dv_dstate * in.G;

  const double lambda = cfg_.ts_weight;
  if (lambda != 0.0) {
    const std::array<double, 3> x_pred{p.error_next, p.state_next, in.aux_next};
    const ForwardCache fp = actor_.forward(x_pred);
    const double s = sign(fp.y - u);
    if (s != 0.0) {
      constexpr std::array<double, 3> along_pred{1.0, 1.0, 0.0};
      const double dv_pred = actor_.directional_input_derivative(fp, along_pred);
      du += lambda * s * (dv_pred * in.G - 1.0);
      actor_.accumulate_grad_params(x_pred, fp, lambda * s, g);
    }
  }
  actor_.accumulate_grad_params(x, fc, du, g);
}

PhaseResult Agent::critic_update_phase(const LevelInputs& in, double action) {
  PhaseResult r;
  critic_adam_ = cfg_.adam;
  critic_adam_.lr = cfg_.critic_lr;
  const auto now = in.critic_input();
  for (int k = 0; k <= cfg_.max_updates; ++k) {
    const double delta = td(in, action);
    const double loss = 0.5 * delta * delta;
    if (!std::isfinite(loss)) {
      r.finite = false;
      return r;
    }
    if (loss < cfg_.critic_loss_threshold || k == cfg_.max_updates ||
        cfg_.critic_lr == 0.0) {
      break;
    }
    std::vector<double>& g = scratch_grad_;
    g.assign(critic_.parameter_count(), 0.0);
    critic_.accumulate_grad_params(now, critic_.forward(now), -delta, g);
    critic_.adam_update(g, critic_adam_);
    ++r.iterations;
  }
  target_.soft_update(critic_, cfg_.tau);
  return r;
}

PhaseResult Agent::actor_update_phase(const LevelInputs& in) {
  PhaseResult r;
  if (cfg_.actor_lr == 0.0) return r;
  actor_adam_ = cfg_.adam;
  actor_adam_.lr = cfg_.actor_lr;

  double previous = actor_loss(in).total;
  if (!std::isfinite(previous)) {
    r.finite = false;
    return r;
  }
  std::vector<double>& g = scratch_grad_;
  std::vector<double>& saved = scratch_saved_;
  g.resize(actor_.parameter_count());
  for (int k = 0; k < cfg_.max_updates; ++k) {
    actor_loss_gradient(in, g);
    if (!all_finite(g)) {
      r.finite = false;
      return r;
    }
    const auto params = actor_.parameters();
    saved.assign(params.begin(), params.end());
    actor_.adam_update(g, actor_adam_);
    const double current = actor_loss(in).total;
    if (!std::isfinite(current)) {
      actor_.set_parameters(saved);
      r.finite = false;
      return r;
    }
    if (current > previous) {
      // the loss turned around: undo the step and stop
      actor_.set_parameters(saved);
      break;
    }
    previous = current;
    ++r.iterations;
  }
  return r;
}

StepResult Agent::step(const LevelInputs& in) {
  StepResult s;
  for (int it = 0; it < cfg_.policy_iters; ++it) {
    const double u = action(in);
    const PhaseResult c = critic_update_phase(in, u);
    s.critic_iters += c.iterations;
    if (!c.finite) {
      s.finite = false;
      break;
    }
    const PhaseResult a = actor_update_phase(in);
    s.actor_iters += a.iterations;
    if (!a.finite) {
      s.finite = false;
      break;
    }
  }
  const ActorLoss l = actor_loss(in);
  s.action = l.action;
  s.z_out = l.z_out;
  s.cost = l.cost;
  s.td_error = td(in, l.action);
  s.ts_raw = l.ts;
  s.ts_penalty = cfg_.ts_weight * l.ts;
  s.actor_loss = l.total;
  s.sensitivity = sensitivity(in);
  if (!std::isfinite(s.action) || !std::isfinite(s.actor_loss) ||
      !std::isfinite(s.td_error)) {
    s.finite = false;
  }
  return s;
}

double Agent::sensitivity(const LevelInputs& in) const {
  const auto x = in.actor_input();
  return actor_.grad_input(x)[0];
}

}  // namespace ihdp
