#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "doctest.h"
#include "oracles.hpp"
#include "rlsvi/envs.hpp"
#include "rlsvi/estimation.hpp"

using namespace rlsvi;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "rlsvi_envs_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("chain n=2: V* = r_big") {
  const TabularMDP chain = make_chain(ChainSpec{.n = 2});
  CHECK(optimal_values(chain).value(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(chain.shape() == Shape{2, 2, 2});
  CHECK(chain.initial_state() == 0);
}

TEST_CASE("chain: always moving left collects r_small every period") {
  for (std::size_t n : {2u, 5u, 8u}) {
    const TabularMDP chain = make_chain(ChainSpec{.n = n});
    CHECK(policy_value(chain, Policy(n, n, 0)) == doctest::Approx(0.05 * static_cast<double>(n)).epsilon(1e-14));
  }
}

TEST_CASE("chain: always moving right is optimal with V* = r_big") {
  for (std::size_t n = 2; n <= 12; ++n) {
    const TabularMDP chain = make_chain(ChainSpec{.n = n, .r_big = 0.9});
    const Solution sol = optimal_values(chain);
    CHECK(sol.value(0) == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(policy_value(chain, Policy(n, n, 1)) == doctest::Approx(0.9).epsilon(1e-14));
  }
}

TEST_CASE("chain n <= 4 matches brute-force enumeration; n = 4 has one optimal action sequence") {
  for (std::size_t n = 2; n <= 4; ++n) {
    const TabularMDP chain = make_chain(ChainSpec{.n = n});
    CHECK(std::abs(optimal_values(chain).value(0) - oracle::brute_force_optimum(chain.tables())) <= 1e-12);
  }
  // Along the forward path (h, s = h), every policy that keeps moving right
  // reaches r_big; any deviation is capped by r_small * H.
  const TabularMDP chain = make_chain(ChainSpec{.n = 4});
  for (const auto& pi : oracle::all_policies(chain.shape())) {
    bool forward = true;
    for (std::size_t h = 0; h + 1 < 4; ++h) forward = forward && pi(h, h) == 1;
    const double v = oracle::forward_value(chain.tables(), pi);
    if (forward) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    else CHECK(v <= 0.05 * 4 + 1e-15);
  }
}

TEST_CASE("chain with slip stays valid and loses value") {
  const TabularMDP chain = make_chain(ChainSpec{.n = 5, .slip = 0.2});
  CHECK(validate_mdp(chain.tables()).empty());
  CHECK(optimal_values(chain).value(0) < 1.0);
}

TEST_CASE("chain spec validation") {
  CHECK_THROWS_AS(make_chain(ChainSpec{.n = 1}), std::invalid_argument);
  CHECK_THROWS_AS(make_chain(ChainSpec{.n = 4, .r_small = 0.5, .r_big = 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(make_chain(ChainSpec{.n = 4, .slip = 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_chain(ChainSpec{.n = 4, .r_big = 1.5}), std::invalid_argument);
}

TEST_CASE("random MDPs are valid and reproducible") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    const TabularMDP m1 = make_random_mdp(4, 3, 5, a, 0.3);
    const TabularMDP m2 = make_random_mdp(4, 3, 5, b, 0.3);
    CHECK(validate_mdp(m1.tables()).empty());
    CHECK(m1.tables().rewards == m2.tables().rewards);
    CHECK(m1.tables().transitions == m2.tables().transitions);
  }
  Rng rng(1);
  CHECK_THROWS_AS(make_random_mdp(0, 2, 2, rng), std::invalid_argument);
  CHECK_THROWS_AS(make_random_mdp(2, 2, 2, rng, 0.0), std::invalid_argument);
}

TEST_CASE("random MDP with alpha 10^6 has near-uniform rows") {
  Rng rng(2);
  const TabularMDP m = make_random_mdp(4, 2, 3, rng, 1e6);
  for (double p : m.tables().transitions) CHECK(std::abs(p - 0.25) < 0.01);
}

TEST_CASE("save then load reproduces the arrays") {
  const auto path = scratch("chain.json");
  const TabularMDP chain = make_chain(ChainSpec{.n = 6, .slip = 0.1});
  save_mdp(chain, path);
  const TabularMDP loaded = load_mdp(path);
  CHECK(loaded.shape() == chain.shape());
  CHECK(loaded.reward_kind() == chain.reward_kind());
  CHECK(loaded.initial_state() == chain.initial_state());
  for (std::size_t i = 0; i < chain.tables().rewards.size(); ++i)
    CHECK(std::abs(loaded.tables().rewards[i] - chain.tables().rewards[i]) <= 1e-12);
  for (std::size_t i = 0; i < chain.tables().transitions.size(); ++i)
    CHECK(std::abs(loaded.tables().transitions[i] - chain.tables().transitions[i]) <= 1e-12);

  Rng rng(3);
  const TabularMDP random = make_random_mdp(3, 2, 4, rng, 1.0, RewardKind::kDeterministic);
  save_mdp(random, path);
  const TabularMDP back = load_mdp(path);
  CHECK(back.tables().rewards == random.tables().rewards);
  CHECK(back.tables().transitions == random.tables().transitions);
  CHECK(back.reward_kind() == RewardKind::kDeterministic);
}

TEST_CASE("loader rejects a negative probability and names the cell") {
  auto doc = to_json(make_chain(ChainSpec{.n = 3}).tables(), RewardKind::kBernoulli);
  doc["transitions"][1][2][0] = std::vector<double>{-0.5, 1.0, 0.5};
  const auto path = scratch("negative.json");
  std::ofstream(path) << doc.dump();
  const std::string what = message_of([&] { load_mdp(path); });
  CHECK(what.find("h=1, s=2, a=0") != std::string::npos);
  CHECK_THROWS_AS(load_mdp(path), InvalidMdp);
}

TEST_CASE("loader reports schema errors") {
  auto doc = to_json(make_chain(ChainSpec{.n = 3}).tables(), RewardKind::kBernoulli);
  doc.erase("horizon");
  const std::string what = message_of([&] { mdp_from_json(doc); });
  CHECK(what.find("schema error") != std::string::npos);
  CHECK(what.find("horizon") != std::string::npos);
  CHECK_THROWS_AS(mdp_from_json(doc), MdpFormatError);

  auto ragged = to_json(make_chain(ChainSpec{.n = 3}).tables(), RewardKind::kBernoulli);
  ragged["rewards"][0].erase(1);
  CHECK_THROWS_AS(mdp_from_json(ragged), MdpFormatError);

  auto bad_kind = to_json(make_chain(ChainSpec{.n = 3}).tables(), RewardKind::kBernoulli);
  bad_kind["reward_kind"] = "poisson";
  CHECK_THROWS_AS(mdp_from_json(bad_kind), InvalidMdp);

  const auto path = scratch("garbage.json");
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_mdp(path), MdpFormatError);
  CHECK_THROWS_AS(load_mdp(scratch("does_not_exist.json")), std::runtime_error);
}

TEST_CASE("relaxed table reader accepts empirical models with zero rows") {
  Counts c({3, 2, 2});
  Trajectory t;
  t.steps = {{0, 0, 1, 1.0, 1}, {1, 1, 0, 0.0, 0}, {2, 0, 0, 1.0, std::nullopt}};
  c.record(t);
  const MdpTables emp = empirical_mdp(c, 0);
  const auto path = scratch("empirical.json");
  save_tables(emp, RewardKind::kBernoulli, path);
  std::ifstream in(path);
  const MdpTables back = tables_from_json(nlohmann::json::parse(in));
  CHECK(back.rewards == emp.rewards);
  CHECK(back.transitions == emp.transitions);
  CHECK_THROWS_AS(load_mdp(path), InvalidMdp);
}
