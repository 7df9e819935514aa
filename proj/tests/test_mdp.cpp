#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rlsvi/envs.hpp"
#include "rlsvi/mdp.hpp"

using namespace rlsvi;

namespace {

MdpTables two_state_tables() {
  MdpTables m({2, 2, 2}, 0);
  for (std::size_t h = 0; h < 2; ++h)
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t a = 0; a < 2; ++a) {
        m.reward(h, s, a) = 0.1 * static_cast<double>(1 + h + s + a);
        m.row(h, s, a)[0] = 0.4;
        m.row(h, s, a)[1] = 0.6;
      }
  return m;
}

Policy random_policy(const Shape& shape, Rng& rng) {
  Policy p(shape.horizon, shape.num_states);
  for (std::size_t h = 0; h < shape.horizon; ++h)
    for (std::size_t s = 0; s < shape.num_states; ++s) p(h, s) = rng.index(shape.num_actions);
  return p;
}

}  // namespace

TEST_CASE("validate_mdp accepts a well-formed MDP") {
  CHECK(validate_mdp(two_state_tables()).empty());
  CHECK_NOTHROW(TabularMDP(two_state_tables(), RewardKind::kBernoulli));
}

TEST_CASE("validate_mdp names the cell of a short row") {
  MdpTables m = two_state_tables();
  m.row(1, 0, 1)[1] = 0.5;  // row sums to 0.9
  const auto report = validate_mdp(m);
  REQUIRE(report.size() == 1);
  CHECK(report[0].kind == Violation::Kind::kRowSum);
  CHECK(report[0].h == 1);
  CHECK(report[0].s == 0);
  CHECK(report[0].a == 1);
  CHECK_THROWS_AS(TabularMDP(m, RewardKind::kBernoulli), InvalidMdp);
}

TEST_CASE("validate_mdp flags rewards outside [0,1]") {
  MdpTables m = two_state_tables();
  m.reward(0, 1, 0) = 1.5;
  const auto report = validate_mdp(m);
  REQUIRE(!report.empty());
  CHECK(report[0].kind == Violation::Kind::kRewardRange);
  CHECK(report[0].s == 1);
}

TEST_CASE("validate_mdp flags negative probabilities, bad s1 and wrong array sizes") {
  MdpTables m = two_state_tables();
  m.row(0, 0, 0)[0] = -0.1;
  m.row(0, 0, 0)[1] = 1.1;
  bool negative = false;
  for (const auto& v : validate_mdp(m)) negative = negative || v.kind == Violation::Kind::kNegativeProbability;
  CHECK(negative);

  MdpTables bad_start = two_state_tables();
  bad_start.initial_state = 2;
  CHECK(validate_mdp(bad_start).front().kind == Violation::Kind::kInitialState);

  MdpTables short_arrays = two_state_tables();
  short_arrays.rewards.pop_back();
  CHECK(validate_mdp(short_arrays).front().kind == Violation::Kind::kShape);
}

TEST_CASE("optimal_values: single step picks the larger reward") {
  MdpTables m({1, 1, 2}, 0);
  m.reward(0, 0, 0) = 0.3;
  m.reward(0, 0, 1) = 0.7;
  m.row(0, 0, 0)[0] = 1.0;
  m.row(0, 0, 1)[0] = 1.0;
  const Solution sol = optimal_values(TabularMDP(m, RewardKind::kDeterministic));
  CHECK(sol.value(0) == 0.7);
  CHECK(sol.policy(0, 0) == 1);
}

TEST_CASE("optimal_values: all-zero rewards give zero values and action 0") {
  Rng rng(4);
  MdpTables m = make_random_mdp(3, 3, 4, rng).tables();
  std::fill(m.rewards.begin(), m.rewards.end(), 0.0);
  const Solution sol = optimal_values(TabularMDP(m, RewardKind::kBernoulli));
  for (double q : sol.q.values()) CHECK(q == 0.0);
  for (std::size_t h = 0; h < 4; ++h)
    for (std::size_t s = 0; s < 3; ++s) CHECK(sol.policy(h, s) == 0);
}

TEST_CASE("optimal_values matches brute-force policy enumeration") {
  // S*H*log2(A) <= 12 covers every shape below.
  const Shape shapes[] = {{2, 2, 2}, {3, 2, 2}, {2, 3, 2}, {4, 3, 2}, {2, 2, 4}, {3, 2, 4}, {1, 3, 16}, {6, 2, 2}};
  Rng rng(11);
  for (const auto& shape : shapes) {
    for (int rep = 0; rep < 4; ++rep) {
      const TabularMDP mdp = make_random_mdp(shape.num_states, shape.num_actions, shape.horizon, rng);
      const double brute = oracle::brute_force_optimum(mdp.tables());
      CHECK(std::abs(optimal_values(mdp).value(0) - brute) <= 1e-12);
    }
  }
}

TEST_CASE("optimal_values satisfies the Bellman optimality equation with lowest-index argmax") {
  Rng rng(5);
  const TabularMDP mdp = make_random_mdp(4, 3, 5, rng);
  const Solution sol = optimal_values(mdp);
  const Shape& sh = mdp.shape();
  for (std::size_t h = 0; h < sh.horizon; ++h)
    for (std::size_t s = 0; s < sh.num_states; ++s) {
      for (std::size_t a = 0; a < sh.num_actions; ++a) {
        double target = mdp.tables().reward(h, s, a);
        const auto row = mdp.tables().row(h, s, a);
        for (std::size_t t = 0; t < sh.num_states; ++t) target += row[t] * sol.q.max_value(h + 1, t);
        CHECK(sol.q(h, s, a) == doctest::Approx(target).epsilon(1e-14));
        CHECK(sol.q(h, s, a) >= 0.0);
        CHECK(sol.q(h, s, a) <= static_cast<double>(sh.horizon));
      }
      const std::size_t a = sol.policy(h, s);
      for (std::size_t b = 0; b < a; ++b) CHECK(sol.q(h, s, b) < sol.q(h, s, a));
      for (std::size_t b = a; b < sh.num_actions; ++b) CHECK(sol.q(h, s, b) <= sol.q(h, s, a));
    }
}

TEST_CASE("increasing a single reward never decreases V*") {
  Rng rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const TabularMDP mdp = make_random_mdp(3, 2, 3, rng);
    MdpTables bumped = mdp.tables();
    const std::size_t cell = rng.index(bumped.rewards.size());
    bumped.rewards[cell] = bumped.rewards[cell] + (1.0 - bumped.rewards[cell]) * rng.uniform();
    CHECK(optimal_values(TabularMDP(bumped, RewardKind::kBernoulli)).value(0) >= optimal_values(mdp).value(0));
  }
}

TEST_CASE("evaluate_policy on a deterministic path sums the rewards along it") {
  const Shape shape{4, 3, 2};
  std::vector<double> rewards(shape.cells());
  for (std::size_t i = 0; i < rewards.size(); ++i) rewards[i] = static_cast<double>(i % 7) / 7.0;
  const TabularMDP mdp(oracle::shift_mdp(shape, rewards), RewardKind::kDeterministic);
  Policy pi(4, 3);
  pi(0, 0) = 1;
  pi(1, 1) = 1;
  pi(2, 2) = 0;
  pi(3, 2) = 1;
  // path: (0,0,a1) -> s1 -> (1,1,a1) -> s2 -> (2,2,a0) -> s2 -> (3,2,a1)
  const double expected = mdp.tables().reward(0, 0, 1) + mdp.tables().reward(1, 1, 1) +
                          mdp.tables().reward(2, 2, 0) + mdp.tables().reward(3, 2, 1);
  CHECK(policy_value(mdp, pi) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("evaluate_policy of the optimal policy reproduces V*") {
  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const TabularMDP mdp = make_random_mdp(4, 3, 4, rng);
    const Solution sol = optimal_values(mdp);
    CHECK(std::abs(policy_value(mdp, sol.policy) - sol.value(0)) <= 1e-12);
  }
}

TEST_CASE("evaluate_policy agrees with forward propagation and with its stochastic form") {
  Rng rng(9);
  const TabularMDP mdp = make_random_mdp(3, 3, 4, rng);
  const Policy pi = random_policy(mdp.shape(), rng);
  CHECK(policy_value(mdp, pi) == doctest::Approx(oracle::forward_value(mdp.tables(), pi)).epsilon(1e-13));
  CHECK(policy_value(mdp, StochasticPolicy::from(pi, 3)) == doctest::Approx(policy_value(mdp, pi)).epsilon(1e-15));

  const TabularMDP one_step = make_random_mdp(2, 2, 1, rng);
  StochasticPolicy mix(one_step.shape());
  mix.at(0, 0)[0] = 0.25;
  mix.at(0, 0)[1] = 0.75;
  const double expected =
      0.25 * one_step.tables().reward(0, 0, 0) + 0.75 * one_step.tables().reward(0, 0, 1);
  CHECK(policy_value(one_step, mix) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("evaluate_policy matches the Monte-Carlo mean of 10^6 returns") {
  Rng rng(12);
  const TabularMDP mdp = make_random_mdp(3, 2, 4, rng);
  const Policy pi = random_policy(mdp.shape(), rng);
  const std::size_t rollouts = 1'000'000;
  Rng sim(13);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < rollouts; ++i) {
    double ret = 0.0;
    for (const auto& step : simulate_episode(mdp, pi, sim).steps) ret += step.reward;
    sum += ret;
    sum_sq += ret * ret;
  }
  const double n = static_cast<double>(rollouts);
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - policy_value(mdp, pi)) <= 3.0 * se);
}

TEST_CASE("evaluate_policy rejects mismatched shapes") {
  Rng rng(1);
  const TabularMDP mdp = make_random_mdp(3, 2, 3, rng);
  CHECK_THROWS_AS(evaluate_policy(mdp, Policy(2, 3)), ShapeError);
  CHECK_THROWS_AS(evaluate_policy(mdp, Policy(3, 3, 2)), ShapeError);
  CHECK_THROWS_AS(evaluate_policy(mdp, StochasticPolicy(Shape{3, 3, 3})), ShapeError);
}

TEST_CASE("occupancy on a deterministic MDP puts 1/H on the path") {
  const Shape shape{3, 3, 2};
  const TabularMDP mdp(oracle::shift_mdp(shape, std::vector<double>(shape.cells(), 0.5)), RewardKind::kDeterministic);
  const Policy pi(3, 3, 1);  // 0 -> 1 -> 2
  const Occupancy d = occupancy(mdp, pi);
  for (std::size_t h = 0; h < 3; ++h)
    for (std::size_t s = 0; s < 3; ++s) CHECK(d(h, s) == doctest::Approx(h == s ? 1.0 / 3.0 : 0.0).epsilon(1e-15));
}

TEST_CASE("occupancy is normalized and non-negative") {
  Rng rng(14);
  for (int rep = 0; rep < 20; ++rep) {
    const TabularMDP mdp = make_random_mdp(1 + rng.index(5), 1 + rng.index(3), 1 + rng.index(6), rng);
    const Occupancy d = occupancy(mdp, random_policy(mdp.shape(), rng));
    CHECK(std::abs(d.total() - 1.0) <= 1e-9);
    for (std::size_t h = 0; h < d.horizon(); ++h)
      for (std::size_t s = 0; s < d.num_states(); ++s) CHECK(d(h, s) >= 0.0);
  }
}

TEST_CASE("occupancy matches visit frequencies from 10^6 rollouts") {
  Rng rng(15);
  const TabularMDP mdp = make_random_mdp(3, 2, 3, rng);
  const Policy pi = random_policy(mdp.shape(), rng);
  const Occupancy d = occupancy(mdp, pi);
  const std::size_t rollouts = 1'000'000;
  std::vector<std::size_t> visits(9, 0);
  Rng sim(16);
  for (std::size_t i = 0; i < rollouts; ++i)
    for (const auto& step : simulate_episode(mdp, pi, sim).steps) ++visits[step.h * 3 + step.state];
  for (std::size_t h = 0; h < 3; ++h)
    for (std::size_t s = 0; s < 3; ++s) {
      const double p = 3.0 * d(h, s);  // P(s_h = s)
      const double freq = static_cast<double>(visits[h * 3 + s]) / static_cast<double>(rollouts);
      CHECK(std::abs(freq - p) <= 3.0 * oracle::frequency_se(p, rollouts) + 1e-12);
    }
}

TEST_CASE("simulate_episode: deterministic MDP yields one trajectory for any seed") {
  const Shape shape{4, 3, 2};
  std::vector<double> rewards(shape.cells());
  for (std::size_t i = 0; i < rewards.size(); ++i) rewards[i] = 0.125 * static_cast<double>(i % 8);
  const TabularMDP mdp(oracle::shift_mdp(shape, rewards), RewardKind::kDeterministic);
  const Policy pi(4, 3, 1);
  Rng a(1), b(999);
  const Trajectory ta = simulate_episode(mdp, pi, a);
  const Trajectory tb = simulate_episode(mdp, pi, b);
  REQUIRE(ta.steps.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(ta.steps[i].state == tb.steps[i].state);
    CHECK(ta.steps[i].reward == tb.steps[i].reward);
    CHECK(ta.steps[i].reward == mdp.tables().reward(i, ta.steps[i].state, 1));
  }
  CHECK(ta.steps[0].state == mdp.initial_state());
  CHECK(!ta.steps.back().next_state.has_value());
}

TEST_CASE("simulate_episode: Bernoulli rewards with mean 0 are all 0, with mean 1 all 1") {
  const Shape shape{5, 2, 1};
  const TabularMDP zero(oracle::shift_mdp(shape, std::vector<double>(shape.cells(), 0.0)), RewardKind::kBernoulli);
  const TabularMDP one(oracle::shift_mdp(shape, std::vector<double>(shape.cells(), 1.0)), RewardKind::kBernoulli);
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    for (const auto& step : simulate_episode(zero, Policy(5, 2), rng).steps) CHECK(step.reward == 0.0);
    for (const auto& step : simulate_episode(one, Policy(5, 2), rng).steps) CHECK(step.reward == 1.0);
  }
}

TEST_CASE("simulate_episode is reproducible for a fixed seed") {
  Rng rng(17);
  const TabularMDP mdp = make_random_mdp(4, 3, 6, rng);
  const Policy pi = random_policy(mdp.shape(), rng);
  Rng a(42), b(42);
  const Trajectory ta = simulate_episode(mdp, pi, a);
  const Trajectory tb = simulate_episode(mdp, pi, b);
  for (std::size_t i = 0; i < ta.steps.size(); ++i) {
    CHECK(ta.steps[i].state == tb.steps[i].state);
    CHECK(ta.steps[i].action == tb.steps[i].action);
    CHECK(ta.steps[i].reward == tb.steps[i].reward);
    CHECK(ta.steps[i].next_state == tb.steps[i].next_state);
  }
}

TEST_CASE("value_gap_rhs vanishes for identical MDPs") {
  Rng rng(18);
  const TabularMDP m = make_random_mdp(4, 2, 4, rng);
  CHECK(std::abs(value_gap_rhs(m, m, random_policy(m.shape(), rng))) <= 1e-15);
}

TEST_CASE("value_gap_rhs equals the exact value difference") {
  Rng rng(19);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t S = 1 + rng.index(5), H = 1 + rng.index(5), A = 1 + rng.index(3);
    const TabularMDP m_bar = make_random_mdp(S, A, H, rng);
    const TabularMDP m_tilde = make_random_mdp(S, A, H, rng);
    const Policy pi = random_policy(m_bar.shape(), rng);
    const double exact = oracle::forward_value(m_bar.tables(), pi) - oracle::forward_value(m_tilde.tables(), pi);
    CHECK(std::abs(value_gap_rhs(m_bar, m_tilde, pi) - exact) <= 1e-8);
  }
}

TEST_CASE("value_gap_rhs: one reward off by delta gives occupancy probability times delta") {
  // Two states, H = 2. From s=0, action 0 reaches state 1 with probability 0.3.
  MdpTables base({2, 2, 1}, 0);
  for (std::size_t h = 0; h < 2; ++h) {
    base.row(h, 0, 0)[0] = 0.7;
    base.row(h, 0, 0)[1] = 0.3;
    base.row(h, 1, 0)[1] = 1.0;
    base.reward(h, 0, 0) = 0.2;
    base.reward(h, 1, 0) = 0.4;
  }
  MdpTables shifted = base;
  const double delta = 0.35;
  shifted.reward(1, 1, 0) += delta;
  const Policy pi(2, 2);
  CHECK(value_gap_rhs(shifted, base, pi) == doctest::Approx(0.3 * delta).epsilon(1e-14));
}

TEST_CASE("value_gap_rhs rejects mismatched shapes") {
  Rng rng(20);
  const TabularMDP a = make_random_mdp(2, 2, 2, rng);
  const TabularMDP b = make_random_mdp(3, 2, 2, rng);
  CHECK_THROWS_AS(value_gap_rhs(a, b, Policy(2, 2)), ShapeError);
}

TEST_CASE("reward kinds round-trip through their names") {
  CHECK(reward_kind_from_string(to_string(RewardKind::kBernoulli)) == RewardKind::kBernoulli);
  CHECK(reward_kind_from_string(to_string(RewardKind::kDeterministic)) == RewardKind::kDeterministic);
  CHECK_THROWS_AS(reward_kind_from_string("gaussian"), InvalidMdp);
}
