#pragma once

#include <optional>
#include <vector>

#include "rlsvi/estimation.hpp"
#include "rlsvi/mdp.hpp"
#include "rlsvi/random.hpp"

namespace rlsvi {

struct BaselineConfig {
  enum class Kind { kGreedy, kEpsilonGreedy, kBoltzmann, kPsrl };

  Kind kind = Kind::kGreedy;
  std::optional<double> epsilon;          // epsilon-greedy only, in [0, 1]
  std::optional<double> temperature;      // Boltzmann only, > 0
  std::optional<double> dirichlet_alpha;  // PSRL only, > 0; defaults to 1/S

  // Throws std::invalid_argument when a parameter is missing, out of range,
  // or set for a kind that does not use it.
  void validate() const;
};

// Backward induction on the plug-in model.
Solution certainty_equivalent_policy(const EmpiricalModel& empirical);

// Greedy action with probability 1 - epsilon, otherwise uniform over actions.
std::size_t epsilon_greedy_action(const QTables& q, std::size_t h, std::size_t s, double epsilon, Rng& rng);
std::vector<double> epsilon_greedy_distribution(const QTables& q, std::size_t h, std::size_t s, double epsilon);

// P(a) proportional to exp(q(h,s,a) / temperature).
std::size_t boltzmann_action(const QTables& q, std::size_t h, std::size_t s, double temperature, Rng& rng);
std::vector<double> boltzmann_distribution(const QTables& q, std::size_t h, std::size_t s, double temperature);

// Samples transition rows from Dirichlet(alpha + counts) and mean rewards from
// Beta(1 + successes, 1 + failures), then returns the sampled model.
MdpTables sample_posterior_mdp(const Counts& counts, double dirichlet_alpha, std::size_t initial_state, Rng& rng);

// Optimal policy of one posterior sample. Only defined for Bernoulli rewards.
Policy psrl_policy(const Counts& counts, const BaselineConfig& config, RewardKind reward_kind,
                   std::size_t initial_state, Rng& rng);

}  // namespace rlsvi
