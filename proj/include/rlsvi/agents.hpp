#pragma once

#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "rlsvi/baselines.hpp"
#include "rlsvi/mdp.hpp"
#include "rlsvi/random.hpp"
#include "rlsvi/rlsvi.hpp"

namespace rlsvi {

// One entry of an experiment's agent list, e.g.
//   {"algo": "rlsvi-direct", "beta_scale": 0.01}
//   {"algo": "eps-greedy", "epsilon": 0.1}
// Recognised algos: rlsvi-direct, rlsvi-regression, greedy, eps-greedy,
// boltzmann, psrl, optimal (plays the true optimal policy), uniform.
struct AgentConfig {
  std::string algo;
  std::string label;  // CSV id; defaults to algo
  double beta_scale = 1.0;
  PriorCentering prior = PriorCentering::kEmpiricalTarget;
  BaselineConfig baseline;

  static AgentConfig from_json(const nlohmann::json& block);
  nlohmann::json to_json() const;
  const std::string& id() const { return label.empty() ? algo : label; }
};

// An episodic learner. Per episode the harness calls plan(), reads behavior()
// for exact regret, drives the rollout through act(), then observe().
class Agent {
 public:
  virtual ~Agent() = default;

  virtual void plan(Rng& rng) = 0;
  virtual StochasticPolicy behavior() const = 0;
  virtual std::size_t act(std::size_t h, std::size_t s, Rng& rng) = 0;
  virtual void observe(const Trajectory& trajectory) = 0;
};

// The true MDP is handed over for shape and reward kind; only the "optimal"
// agent reads its dynamics.
std::unique_ptr<Agent> make_agent(const AgentConfig& config, const TabularMDP& mdp);

}  // namespace rlsvi
