#include "rlsvi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rlsvi {

namespace {

constexpr double kRowSumTolerance = 1e-9;

std::string cell_name(std::size_t h, std::size_t s, std::size_t a) {
  std::ostringstream out;
  out << "(h=" << h << ", s=" << s << ", a=" << a << ")";
  return out.str();
}

void check_policy(const Shape& shape, const Policy& policy) {
  if (policy.horizon() != shape.horizon || policy.num_states() != shape.num_states)
    throw ShapeError("policy shape does not match the MDP");
  for (std::size_t h = 0; h < shape.horizon; ++h)
    for (std::size_t s = 0; s < shape.num_states; ++s)
      if (policy(h, s) >= shape.num_actions)
        throw ShapeError("policy action out of range at (h=" + std::to_string(h) + ", s=" + std::to_string(s) + ")");
}

void check_tables(const MdpTables& tables) {
  const Shape& shape = tables.shape;
  if (tables.rewards.size() != shape.cells() || tables.transitions.size() != shape.cells() * shape.num_states)
    throw ShapeError("MDP arrays do not match the declared shape");
}

double dot_next(std::span<const double> row, const std::vector<double>& next_values) {
  double total = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) total += row[i] * next_values[i];
  return total;
}

}  // namespace

const char* to_string(RewardKind kind) {
  return kind == RewardKind::kBernoulli ? "bernoulli" : "deterministic";
}

RewardKind reward_kind_from_string(const std::string& name) {
  if (name == "bernoulli") return RewardKind::kBernoulli;
  if (name == "deterministic") return RewardKind::kDeterministic;
  throw InvalidMdp("unknown reward_kind '" + name + "'");
}

MdpTables::MdpTables(Shape shape, std::size_t initial_state)
    : shape(shape),
      rewards(shape.cells(), 0.0),
      transitions(shape.cells() * shape.num_states, 0.0),
      initial_state(initial_state) {}

std::vector<Violation> validate_mdp(const MdpTables& tables) {
  std::vector<Violation> report;
  const Shape& shape = tables.shape;
  if (shape.horizon == 0 || shape.num_states == 0 || shape.num_actions == 0) {
    report.push_back({Violation::Kind::kShape, 0, 0, 0, "horizon, num_states and num_actions must be positive"});
    return report;
  }
  if (tables.rewards.size() != shape.cells() || tables.transitions.size() != shape.cells() * shape.num_states) {
    report.push_back({Violation::Kind::kShape, 0, 0, 0, "array sizes do not match the declared shape"});
    return report;
  }
  if (tables.initial_state >= shape.num_states)
    report.push_back({Violation::Kind::kInitialState, 0, tables.initial_state, 0, "initial state out of range"});

  for (std::size_t h = 0; h < shape.horizon; ++h) {
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      for (std::size_t a = 0; a < shape.num_actions; ++a) {
        const double r = tables.reward(h, s, a);
        if (!(r >= 0.0 && r <= 1.0))
          report.push_back({Violation::Kind::kRewardRange, h, s, a,
                            "mean reward " + std::to_string(r) + " outside [0,1] at " + cell_name(h, s, a)});
        double sum = 0.0;
        bool negative = false;
        for (double p : tables.row(h, s, a)) {
          if (!(p >= 0.0)) negative = true;
          sum += p;
        }
        if (negative)
          report.push_back({Violation::Kind::kNegativeProbability, h, s, a,
                            "negative or non-finite transition probability at " + cell_name(h, s, a)});
        if (!(std::abs(sum - 1.0) <= kRowSumTolerance))
          report.push_back({Violation::Kind::kRowSum, h, s, a,
                            "transition row sums to " + std::to_string(sum) + " at " + cell_name(h, s, a)});
      }
    }
  }
  return report;
}

TabularMDP::TabularMDP(MdpTables tables, RewardKind reward_kind)
    : tables_(std::move(tables)), reward_kind_(reward_kind) {
  const auto report = validate_mdp(tables_);
  if (!report.empty()) throw InvalidMdp(report.front().message);
}

StochasticPolicy StochasticPolicy::from(const Policy& policy, std::size_t num_actions) {
  StochasticPolicy out(Shape{policy.horizon(), policy.num_states(), num_actions});
  for (std::size_t h = 0; h < policy.horizon(); ++h)
    for (std::size_t s = 0; s < policy.num_states(); ++s) out.at(h, s)[policy(h, s)] = 1.0;
  return out;
}

double QTables::max_value(std::size_t h, std::size_t s) const {
  if (h >= shape_.horizon) return 0.0;
  return (*this)(h, s, greedy_action(h, s));
}

std::size_t QTables::greedy_action(std::size_t h, std::size_t s) const {
  std::size_t best = 0;
  for (std::size_t a = 1; a < shape_.num_actions; ++a)
    if ((*this)(h, s, a) > (*this)(h, s, best)) best = a;
  return best;
}

Policy QTables::greedy_policy() const {
  Policy policy(shape_.horizon, shape_.num_states);
  for (std::size_t h = 0; h < shape_.horizon; ++h)
    for (std::size_t s = 0; s < shape_.num_states; ++s) policy(h, s) = greedy_action(h, s);
  return policy;
}

Solution backward_induction(const MdpTables& tables) {
  check_tables(tables);
  const Shape& shape = tables.shape;
  QTables q(shape);
  std::vector<double> next_values(shape.num_states, 0.0);
  for (std::size_t h = shape.horizon; h-- > 0;) {
    for (std::size_t s = 0; s < shape.num_states; ++s)
      for (std::size_t a = 0; a < shape.num_actions; ++a)
        q(h, s, a) = tables.reward(h, s, a) + dot_next(tables.row(h, s, a), next_values);
    for (std::size_t s = 0; s < shape.num_states; ++s) next_values[s] = q.max_value(h, s);
  }
  Policy policy = q.greedy_policy();
  return {std::move(q), std::move(policy)};
}

Solution optimal_values(const TabularMDP& mdp) { return backward_induction(mdp.tables()); }

QTables evaluate_policy(const MdpTables& tables, const Policy& policy) {
  check_tables(tables);
  check_policy(tables.shape, policy);
  const Shape& shape = tables.shape;
  QTables q(shape);
  std::vector<double> next_values(shape.num_states, 0.0);
  for (std::size_t h = shape.horizon; h-- > 0;) {
    for (std::size_t s = 0; s < shape.num_states; ++s)
      for (std::size_t a = 0; a < shape.num_actions; ++a)
        q(h, s, a) = tables.reward(h, s, a) + dot_next(tables.row(h, s, a), next_values);
    for (std::size_t s = 0; s < shape.num_states; ++s) next_values[s] = q(h, s, policy(h, s));
  }
  return q;
}

QTables evaluate_policy(const MdpTables& tables, const StochasticPolicy& policy) {
  check_tables(tables);
  if (!(policy.shape() == tables.shape)) throw ShapeError("stochastic policy shape does not match the MDP");
  const Shape& shape = tables.shape;
  QTables q(shape);
  std::vector<double> next_values(shape.num_states, 0.0);
  for (std::size_t h = shape.horizon; h-- > 0;) {
    for (std::size_t s = 0; s < shape.num_states; ++s)
      for (std::size_t a = 0; a < shape.num_actions; ++a)
        q(h, s, a) = tables.reward(h, s, a) + dot_next(tables.row(h, s, a), next_values);
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      const auto probs = policy.at(h, s);
      double v = 0.0;
      for (std::size_t a = 0; a < shape.num_actions; ++a) v += probs[a] * q(h, s, a);
      next_values[s] = v;
    }
  }
  return q;
}

double policy_value(const MdpTables& tables, const Policy& policy) {
  const QTables q = evaluate_policy(tables, policy);
  return q(0, tables.initial_state, policy(0, tables.initial_state));
}

double policy_value(const MdpTables& tables, const StochasticPolicy& policy) {
  const QTables q = evaluate_policy(tables, policy);
  const auto probs = policy.at(0, tables.initial_state);
  double v = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) v += probs[a] * q(0, tables.initial_state, a);
  return v;
}

double Occupancy::total() const {
  double sum = 0.0;
  for (double x : d_) sum += x;
  return sum;
}

Occupancy occupancy(const MdpTables& tables, const Policy& policy) {
  check_tables(tables);
  check_policy(tables.shape, policy);
  const Shape& shape = tables.shape;
  Occupancy d(shape.horizon, shape.num_states);
  std::vector<double> marginal(shape.num_states, 0.0);
  marginal[tables.initial_state] = 1.0;
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    std::vector<double> next(shape.num_states, 0.0);
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      d(h, s) = marginal[s] / static_cast<double>(shape.horizon);
      if (marginal[s] == 0.0) continue;
      const auto row = tables.row(h, s, policy(h, s));
      for (std::size_t t = 0; t < shape.num_states; ++t) next[t] += marginal[s] * row[t];
    }
    marginal.swap(next);
  }
  return d;
}

double sample_reward(const TabularMDP& mdp, std::size_t h, std::size_t s, std::size_t a, Rng& rng) {
  const double mean = mdp.tables().reward(h, s, a);
  if (mdp.reward_kind() == RewardKind::kDeterministic) return mean;
  return rng.bernoulli(mean) ? 1.0 : 0.0;
}

std::size_t sample_next_state(const TabularMDP& mdp, std::size_t h, std::size_t s, std::size_t a, Rng& rng) {
  const auto row = mdp.tables().row(h, s, a);
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t t = 0; t < row.size(); ++t) {
    if (row[t] <= 0.0) continue;
    cumulative += row[t];
    last_positive = t;
    if (u < cumulative) return t;
  }
  // Rounding left u above the accumulated mass.
  return last_positive;
}

Trajectory simulate_episode(const TabularMDP& mdp, const Policy& policy, Rng& rng) {
  check_policy(mdp.shape(), policy);
  return simulate_episode_with(
      mdp, [&policy](std::size_t h, std::size_t s, Rng&) { return policy(h, s); }, rng);
}

double value_gap_rhs(const MdpTables& m_bar, const MdpTables& m_tilde, const Policy& policy) {
  if (!(m_bar.shape == m_tilde.shape)) throw ShapeError("value gap requires MDPs of identical shape");
  if (m_bar.initial_state != m_tilde.initial_state) throw ShapeError("value gap requires a common initial state");
  const Shape& shape = m_bar.shape;
  const Occupancy d = occupancy(m_bar, policy);
  const QTables q_tilde = evaluate_policy(m_tilde, policy);

  double total = 0.0;
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      if (d(h, s) == 0.0) continue;
      const std::size_t a = policy(h, s);
      double bellman_gap = m_bar.reward(h, s, a) - m_tilde.reward(h, s, a);
      if (h + 1 < shape.horizon) {
        const auto row_bar = m_bar.row(h, s, a);
        const auto row_tilde = m_tilde.row(h, s, a);
        for (std::size_t t = 0; t < shape.num_states; ++t)
          bellman_gap += (row_bar[t] - row_tilde[t]) * q_tilde(h + 1, t, policy(h + 1, t));
      }
      total += d(h, s) * bellman_gap;
    }
  }
  return static_cast<double>(shape.horizon) * total;
}

}  // namespace rlsvi
