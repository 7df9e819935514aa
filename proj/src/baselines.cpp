#include "rlsvi/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace rlsvi {

void BaselineConfig::validate() const {
  const bool wants_epsilon = kind == Kind::kEpsilonGreedy;
  const bool wants_temperature = kind == Kind::kBoltzmann;
  if (epsilon.has_value() != wants_epsilon)
    throw std::invalid_argument(wants_epsilon ? "epsilon-greedy requires epsilon" : "epsilon set for a non-epsilon agent");
  if (temperature.has_value() != wants_temperature)
    throw std::invalid_argument(wants_temperature ? "boltzmann requires a temperature"
                                                  : "temperature set for a non-boltzmann agent");
  if (dirichlet_alpha && kind != Kind::kPsrl) throw std::invalid_argument("alpha set for a non-psrl agent");
  if (epsilon && !(*epsilon >= 0.0 && *epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  if (temperature && !(*temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (dirichlet_alpha && !(*dirichlet_alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

Solution certainty_equivalent_policy(const EmpiricalModel& empirical) { return backward_induction(empirical); }

std::size_t epsilon_greedy_action(const QTables& q, std::size_t h, std::size_t s, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0,1]");
  if (rng.uniform() < epsilon) return rng.index(q.shape().num_actions);
  return q.greedy_action(h, s);
}

std::vector<double> epsilon_greedy_distribution(const QTables& q, std::size_t h, std::size_t s, double epsilon) {
  const std::size_t num_actions = q.shape().num_actions;
  std::vector<double> probs(num_actions, epsilon / static_cast<double>(num_actions));
  probs[q.greedy_action(h, s)] += 1.0 - epsilon;
  return probs;
}

std::vector<double> boltzmann_distribution(const QTables& q, std::size_t h, std::size_t s, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  const std::size_t num_actions = q.shape().num_actions;
  const double top = q.max_value(h, s);
  std::vector<double> probs(num_actions);
  double total = 0.0;
  for (std::size_t a = 0; a < num_actions; ++a) {
    probs[a] = std::exp((q(h, s, a) - top) / temperature);
    total += probs[a];
  }
  for (double& p : probs) p /= total;
  return probs;
}

std::size_t boltzmann_action(const QTables& q, std::size_t h, std::size_t s, double temperature, Rng& rng) {
  const auto probs = boltzmann_distribution(q, h, s, temperature);
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    cumulative += probs[a];
    if (u < cumulative) return a;
  }
  return q.greedy_action(h, s);
}

MdpTables sample_posterior_mdp(const Counts& counts, double dirichlet_alpha, std::size_t initial_state, Rng& rng) {
  if (!(dirichlet_alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const Shape& shape = counts.shape();
  MdpTables sample(shape, initial_state);
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      for (std::size_t a = 0; a < shape.num_actions; ++a) {
        const double n = static_cast<double>(counts.visits(h, s, a));
        const double successes = counts.reward_sum(h, s, a);
        sample.reward(h, s, a) = rng.beta(1.0 + successes, 1.0 + n - successes);
        if (h + 1 == shape.horizon) continue;
        auto row = sample.row(h, s, a);
        double total = 0.0;
        for (std::size_t t = 0; t < shape.num_states; ++t) {
          row[t] = rng.gamma(dirichlet_alpha + static_cast<double>(counts.transition_count(h, s, a, t)));
          total += row[t];
        }
        for (double& p : row) p /= total;
      }
    }
  }
  return sample;
}

Policy psrl_policy(const Counts& counts, const BaselineConfig& config, RewardKind reward_kind,
                   std::size_t initial_state, Rng& rng) {
  if (config.kind != BaselineConfig::Kind::kPsrl) throw std::invalid_argument("psrl_policy requires a psrl config");
  if (reward_kind != RewardKind::kBernoulli)
    throw std::invalid_argument("psrl is only defined for bernoulli rewards");
  const double alpha = config.dirichlet_alpha.value_or(1.0 / static_cast<double>(counts.shape().num_states));
  return backward_induction(sample_posterior_mdp(counts, alpha, initial_state, rng)).policy;
}

}  // namespace rlsvi
