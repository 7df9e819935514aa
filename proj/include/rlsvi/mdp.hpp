#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlsvi/random.hpp"

namespace rlsvi {

// Periods are 0-based throughout: h = 0 is the first period of an episode and
// h = horizon - 1 the last. The value at period `horizon` is identically zero.

struct Shape {
  std::size_t horizon = 0;
  std::size_t num_states = 0;
  std::size_t num_actions = 0;

  std::size_t cells() const { return horizon * num_states * num_actions; }
  std::size_t cell(std::size_t h, std::size_t s, std::size_t a) const {
    return (h * num_states + s) * num_actions + a;
  }
  bool operator==(const Shape&) const = default;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidMdp : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RewardKind { kDeterministic, kBernoulli };

const char* to_string(RewardKind kind);
RewardKind reward_kind_from_string(const std::string& name);

// Dense mean-reward and transition arrays with no invariants enforced. Holds
// true MDPs as well as empirical models (zero rows at unvisited cells) and
// perturbed models (rewards outside [0, 1]).
struct MdpTables {
  Shape shape;
  std::vector<double> rewards;      // [h][s][a]
  std::vector<double> transitions;  // [h][s][a][s']
  std::size_t initial_state = 0;

  MdpTables() = default;
  MdpTables(Shape shape, std::size_t initial_state);

  double& reward(std::size_t h, std::size_t s, std::size_t a) { return rewards[shape.cell(h, s, a)]; }
  double reward(std::size_t h, std::size_t s, std::size_t a) const { return rewards[shape.cell(h, s, a)]; }

  std::span<double> row(std::size_t h, std::size_t s, std::size_t a) {
    return {transitions.data() + shape.cell(h, s, a) * shape.num_states, shape.num_states};
  }
  std::span<const double> row(std::size_t h, std::size_t s, std::size_t a) const {
    return {transitions.data() + shape.cell(h, s, a) * shape.num_states, shape.num_states};
  }
};

struct Violation {
  enum class Kind { kRowSum, kNegativeProbability, kRewardRange, kInitialState, kShape };
  Kind kind;
  std::size_t h = 0, s = 0, a = 0;
  std::string message;
};

// Checks every TabularMDP invariant; an empty result means the tables are a
// valid MDP.
std::vector<Violation> validate_mdp(const MdpTables& tables);

// A validated finite-horizon, time-inhomogeneous MDP. Immutable.
class TabularMDP {
 public:
  // Throws InvalidMdp naming the first violating (h, s, a).
  TabularMDP(MdpTables tables, RewardKind reward_kind);

  const MdpTables& tables() const { return tables_; }
  const Shape& shape() const { return tables_.shape; }
  RewardKind reward_kind() const { return reward_kind_; }
  std::size_t initial_state() const { return tables_.initial_state; }

  operator const MdpTables&() const { return tables_; }

 private:
  MdpTables tables_;
  RewardKind reward_kind_;
};

// Deterministic Markov policy, one action per (h, s).
class Policy {
 public:
  Policy() = default;
  Policy(std::size_t horizon, std::size_t num_states, std::size_t fill = 0)
      : horizon_(horizon), num_states_(num_states), actions_(horizon * num_states, fill) {}

  std::size_t& operator()(std::size_t h, std::size_t s) { return actions_[h * num_states_ + s]; }
  std::size_t operator()(std::size_t h, std::size_t s) const { return actions_[h * num_states_ + s]; }
  std::size_t horizon() const { return horizon_; }
  std::size_t num_states() const { return num_states_; }
  bool operator==(const Policy&) const = default;

 private:
  std::size_t horizon_ = 0;
  std::size_t num_states_ = 0;
  std::vector<std::size_t> actions_;
};

// Action distribution per (h, s). Used for the exploration baselines, whose
// behaviour is randomized within an episode.
class StochasticPolicy {
 public:
  StochasticPolicy() = default;
  explicit StochasticPolicy(Shape shape) : shape_(shape), probs_(shape.cells(), 0.0) {}
  static StochasticPolicy from(const Policy& policy, std::size_t num_actions);

  std::span<double> at(std::size_t h, std::size_t s) {
    return {probs_.data() + shape_.cell(h, s, 0), shape_.num_actions};
  }
  std::span<const double> at(std::size_t h, std::size_t s) const {
    return {probs_.data() + shape_.cell(h, s, 0), shape_.num_actions};
  }
  const Shape& shape() const { return shape_; }

 private:
  Shape shape_;
  std::vector<double> probs_;
};

// State-action values per period; the period-`horizon` table is implicitly 0.
class QTables {
 public:
  QTables() = default;
  explicit QTables(Shape shape) : shape_(shape), q_(shape.cells(), 0.0) {}

  double& operator()(std::size_t h, std::size_t s, std::size_t a) { return q_[shape_.cell(h, s, a)]; }
  double operator()(std::size_t h, std::size_t s, std::size_t a) const { return q_[shape_.cell(h, s, a)]; }

  // max_a q(h, s, a); zero at h == horizon.
  double max_value(std::size_t h, std::size_t s) const;
  // Lowest-index argmax.
  std::size_t greedy_action(std::size_t h, std::size_t s) const;
  Policy greedy_policy() const;

  const Shape& shape() const { return shape_; }
  std::span<const double> values() const { return q_; }

 private:
  Shape shape_;
  std::vector<double> q_;
};

struct Solution {
  QTables q;
  Policy policy;

  // Value of the greedy policy at the initial state.
  double value(std::size_t initial_state) const { return q.max_value(0, initial_state); }
};

// Backward induction on arbitrary tables: rewards may be negative and rows
// sub-stochastic.
Solution backward_induction(const MdpTables& tables);
Solution optimal_values(const TabularMDP& mdp);

// Q^pi by backward recursion: q(h,s,a) = R + <P, V^pi_{h+1}>.
QTables evaluate_policy(const MdpTables& tables, const Policy& policy);
QTables evaluate_policy(const MdpTables& tables, const StochasticPolicy& policy);

// V^pi at the initial state.
double policy_value(const MdpTables& tables, const Policy& policy);
double policy_value(const MdpTables& tables, const StochasticPolicy& policy);

// d(h, s) = P(s_h = s) / H under (policy, tables).
class Occupancy {
 public:
  Occupancy(std::size_t horizon, std::size_t num_states)
      : horizon_(horizon), num_states_(num_states), d_(horizon * num_states, 0.0) {}

  double& operator()(std::size_t h, std::size_t s) { return d_[h * num_states_ + s]; }
  double operator()(std::size_t h, std::size_t s) const { return d_[h * num_states_ + s]; }
  double total() const;
  std::size_t horizon() const { return horizon_; }
  std::size_t num_states() const { return num_states_; }

 private:
  std::size_t horizon_;
  std::size_t num_states_;
  std::vector<double> d_;
};

Occupancy occupancy(const MdpTables& tables, const Policy& policy);

struct Step {
  std::size_t h;
  std::size_t state;
  std::size_t action;
  double reward;
  std::optional<std::size_t> next_state;  // empty at the last period
};

struct Trajectory {
  std::vector<Step> steps;
};

Trajectory simulate_episode(const TabularMDP& mdp, const Policy& policy, Rng& rng);

// Generic rollout: `choose(h, s, rng)` picks the action at each period.
template <typename ActionChooser>
Trajectory simulate_episode_with(const TabularMDP& mdp, ActionChooser&& choose, Rng& rng);

// Samples a realized reward for (h, s, a) according to the reward kind.
double sample_reward(const TabularMDP& mdp, std::size_t h, std::size_t s, std::size_t a, Rng& rng);
std::size_t sample_next_state(const TabularMDP& mdp, std::size_t h, std::size_t s, std::size_t a, Rng& rng);

// Right-hand side of the value-gap identity:
//   H * sum_{h,s} d_bar(h,s) [ (R_bar - R_tilde) + <P_bar - P_tilde, V_tilde^pi_{h+1}> ]
// evaluated at a = pi(h, s), where d_bar is the occupancy of pi under m_bar.
// Equals V_bar^pi(s1) - V_tilde^pi(s1).
double value_gap_rhs(const MdpTables& m_bar, const MdpTables& m_tilde, const Policy& policy);

template <typename ActionChooser>
Trajectory simulate_episode_with(const TabularMDP& mdp, ActionChooser&& choose, Rng& rng) {
  const Shape& shape = mdp.shape();
  Trajectory trajectory;
  trajectory.steps.reserve(shape.horizon);
  std::size_t s = mdp.initial_state();
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    const std::size_t a = choose(h, s, rng);
    const double r = sample_reward(mdp, h, s, a, rng);
    std::optional<std::size_t> next;
    if (h + 1 < shape.horizon) next = sample_next_state(mdp, h, s, a, rng);
    trajectory.steps.push_back({h, s, a, r, next});
    if (next) s = *next;
  }
  return trajectory;
}

}  // namespace rlsvi
