#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ihdp/approximator.hpp"

namespace ihdp {

struct AgentConfig {
  double critic_lr = 0.1;
  double actor_lr = 5e-7;
  double gamma = 0.6;
  double tau = 1.0;                 // target-critic delay factor
  double control_weight = 5e-6;     // a (higher) or b (lower)
  double ts_weight = 9.3e-4;        // lambda_1 or lambda_2
  int policy_iters = 3;
  double critic_loss_threshold = 2.5e-4;
  int max_updates = 50;
  double action_scale = 20.0;       // deg/s (higher) or deg (lower)
  std::size_t hidden = 7;
  double init_range = 0.1;
  AdamConfig adam{};                // lr fields are overwritten per network

  static AgentConfig higher_defaults();
  static AgentConfig lower_defaults();
  void validate() const;
};

// One cascade level's view of the current step. `state` is the tracked
// variable (alpha for the higher level, q for the lower), `aux` the extra
// actor input (delta, resp. alpha). The incremental model predicts
//   state_next = state + F d_state + G (action - action_prev)
// where action_prev is the value the action replaces in the increment.
struct LevelInputs {
  double state = 0.0;
  double error = 0.0;
  double aux = 0.0;
  double reference_next = 0.0;
  double d_state = 0.0;
  double F = 0.0;
  double G = 0.0;
  double action_prev = 0.0;
  double aux_next = 0.0;  // aux paired with the predicted state in the TS loss

  std::array<double, 2> critic_input() const { return {state, error}; }
  std::array<double, 3> actor_input() const { return {error, state, aux}; }
};

struct Prediction {
  double state_next = 0.0;
  double error_next = 0.0;
};

// Terms of the actor objective at one parameter value.
struct ActorLoss {
  double action = 0.0;
  double z_out = 0.0;
  double cost = 0.0;
  double v_target = 0.0;
  double ts = 0.0;        // |actor(x_pred) - actor(x)|, unweighted
  double total = 0.0;     // cost + gamma v_target + lambda ts
};

struct PhaseResult {
  int iterations = 0;
  bool finite = true;
};

struct StepResult {
  double action = 0.0;
  double z_out = 0.0;
  double cost = 0.0;
  double td_error = 0.0;
  double ts_raw = 0.0;
  double ts_penalty = 0.0;
  double actor_loss = 0.0;
  double sensitivity = 0.0;
  int critic_iters = 0;
  int actor_iters = 0;
  bool finite = true;
};

double one_step_cost_high(double e_alpha_next_hat, double action, double a);
double one_step_cost_low(double e_q_next_hat, double delta, double b);
double td_error(double cost, double v_target_next, double v_now, double gamma);
double online_ts_loss(const Approximator& actor, std::span<const double> now,
                      std::span<const double> predicted);

// IHDP agent for one level of the cascade: critic, delayed target critic and
// actor. Each call to `step` runs `policy_iters` rounds of critic then actor
// optimization on the current sample and returns the resulting action.
class Agent {
 public:
  Agent(const AgentConfig& cfg, Rng& rng);

  const AgentConfig& config() const { return cfg_; }
  AgentConfig& config() { return cfg_; }
  const Approximator& critic() const { return critic_; }
  const Approximator& target_critic() const { return target_; }
  const Approximator& actor() const { return actor_; }
  Approximator& critic() { return critic_; }
  Approximator& target_critic() { return target_; }
  Approximator& actor() { return actor_; }

  Prediction predict(const LevelInputs& in, double action) const;
  double action(const LevelInputs& in) const;

  // Temporal-difference residual for the given action.
  double td(const LevelInputs& in, double action) const;
  // d(1/2 td^2)/d psi for the critic parameters.
  std::vector<double> critic_loss_gradient(const LevelInputs& in,
                                           double action) const;

  ActorLoss actor_loss(const LevelInputs& in) const;
  // d(actor loss)/d theta, including the control-penalty and TS paths.
  std::vector<double> actor_loss_gradient(const LevelInputs& in) const;
  void actor_loss_gradient(const LevelInputs& in, std::span<double> out) const;

  PhaseResult critic_update_phase(const LevelInputs& in, double action);
  PhaseResult actor_update_phase(const LevelInputs& in);
  StepResult step(const LevelInputs& in);

  // d action / d error at the current inputs.
  double sensitivity(const LevelInputs& in) const;

 private:
  AgentConfig cfg_;
  AdamConfig critic_adam_;
  AdamConfig actor_adam_;
  Approximator critic_;
  Approximator target_;
  Approximator actor_;
  std::vector<double> scratch_grad_;
  std::vector<double> scratch_saved_;
};

}  // namespace ihdp
