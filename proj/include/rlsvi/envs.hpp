#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "rlsvi/mdp.hpp"
#include "rlsvi/random.hpp"

namespace rlsvi {

// States 0..n-1, horizon n, two actions: 0 moves left, 1 moves right (staying
// put with probability `slip`). The last state pays r_big for either action;
// moving left in state 0 pays r_small.
struct ChainSpec {
  std::size_t n = 8;
  double r_small = 0.05;
  double r_big = 1.0;
  double slip = 0.0;
  RewardKind reward_kind = RewardKind::kBernoulli;

  void validate() const;
};

TabularMDP make_chain(const ChainSpec& spec);

// Rows ~ Dirichlet(alpha * 1), mean rewards ~ U[0, 1], initial state 0.
TabularMDP make_random_mdp(std::size_t num_states, std::size_t num_actions, std::size_t horizon, Rng& rng,
                           double dirichlet_alpha = 1.0, RewardKind reward_kind = RewardKind::kBernoulli);

class MdpFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const MdpTables& tables, RewardKind reward_kind);
TabularMDP mdp_from_json(const nlohmann::json& document);

// Reads the nested arrays without enforcing MDP invariants, e.g. for dumps of
// empirical models whose rows sum to 0 at unvisited cells.
MdpTables tables_from_json(const nlohmann::json& document);

void save_mdp(const TabularMDP& mdp, const std::filesystem::path& path);
void save_tables(const MdpTables& tables, RewardKind reward_kind, const std::filesystem::path& path);
TabularMDP load_mdp(const std::filesystem::path& path);

}  // namespace rlsvi
