#include "rlsvi/envs.hpp"

#include <algorithm>
#include <fstream>

namespace rlsvi {

using nlohmann::json;

void ChainSpec::validate() const {
  if (n < 2) throw std::invalid_argument("chain length must be at least 2");
  if (!(r_small >= 0.0 && r_small <= 1.0) || !(r_big >= 0.0 && r_big <= 1.0))
    throw std::invalid_argument("chain rewards must lie in [0,1]");
  if (!(r_small < r_big)) throw std::invalid_argument("chain requires r_small < r_big");
  if (!(slip >= 0.0 && slip < 1.0)) throw std::invalid_argument("chain slip must lie in [0,1)");
}

TabularMDP make_chain(const ChainSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  MdpTables tables(Shape{n, n, 2}, 0);
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t s = 0; s < n; ++s) {
      tables.row(h, s, 0)[s == 0 ? 0 : s - 1] = 1.0;
      const std::size_t right = std::min(s + 1, n - 1);
      tables.row(h, s, 1)[right] += 1.0 - spec.slip;
      tables.row(h, s, 1)[s] += spec.slip;
      if (s == n - 1) {
        tables.reward(h, s, 0) = spec.r_big;
        tables.reward(h, s, 1) = spec.r_big;
      }
    }
    tables.reward(h, 0, 0) = spec.r_small;
  }
  return TabularMDP(std::move(tables), spec.reward_kind);
}

TabularMDP make_random_mdp(std::size_t num_states, std::size_t num_actions, std::size_t horizon, Rng& rng,
                           double dirichlet_alpha, RewardKind reward_kind) {
  if (num_states == 0 || num_actions == 0 || horizon == 0)
    throw std::invalid_argument("random MDP dimensions must be positive");
  if (!(dirichlet_alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  MdpTables tables(Shape{horizon, num_states, num_actions}, 0);
  for (std::size_t h = 0; h < horizon; ++h) {
    for (std::size_t s = 0; s < num_states; ++s) {
      for (std::size_t a = 0; a < num_actions; ++a) {
        auto row = tables.row(h, s, a);
        double total = 0.0;
        for (double& p : row) {
          p = rng.gamma(dirichlet_alpha);
          total += p;
        }
        for (double& p : row) p /= total;
        tables.reward(h, s, a) = rng.uniform();
      }
    }
  }
  return TabularMDP(std::move(tables), reward_kind);
}

json to_json(const MdpTables& tables, RewardKind reward_kind) {
  const Shape& shape = tables.shape;
  json rewards = json::array();
  json transitions = json::array();
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    json r_h = json::array();
    json p_h = json::array();
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      json r_hs = json::array();
      json p_hs = json::array();
      for (std::size_t a = 0; a < shape.num_actions; ++a) {
        r_hs.push_back(tables.reward(h, s, a));
        const auto row = tables.row(h, s, a);
        p_hs.push_back(std::vector<double>(row.begin(), row.end()));
      }
      r_h.push_back(std::move(r_hs));
      p_h.push_back(std::move(p_hs));
    }
    rewards.push_back(std::move(r_h));
    transitions.push_back(std::move(p_h));
  }
  return json{{"horizon", shape.horizon},
              {"num_states", shape.num_states},
              {"num_actions", shape.num_actions},
              {"initial_state", tables.initial_state},
              {"reward_kind", to_string(reward_kind)},
              {"rewards", std::move(rewards)},
              {"transitions", std::move(transitions)}};
}

namespace {

const json& require(const json& document, const char* key) {
  if (!document.is_object()) throw MdpFormatError("schema error: MDP document must be a JSON object");
  const auto it = document.find(key);
  if (it == document.end()) throw MdpFormatError(std::string("schema error: missing key '") + key + "'");
  return *it;
}

std::size_t require_count(const json& document, const char* key) {
  const json& value = require(document, key);
  if (!value.is_number_integer() || value.get<long long>() < 0)
    throw MdpFormatError(std::string("schema error: '") + key + "' must be a non-negative integer");
  return value.get<std::size_t>();
}

const json& require_array(const json& value, std::size_t size, const std::string& where) {
  if (!value.is_array() || value.size() != size)
    throw MdpFormatError("schema error: " + where + " must be an array of length " + std::to_string(size));
  return value;
}

double require_number(const json& value, const std::string& where) {
  if (!value.is_number()) throw MdpFormatError("schema error: " + where + " must be a number");
  return value.get<double>();
}

std::string at(std::size_t h, std::size_t s, std::size_t a) {
  return "[" + std::to_string(h) + "][" + std::to_string(s) + "][" + std::to_string(a) + "]";
}

}  // namespace

MdpTables tables_from_json(const json& document) {
  const Shape shape{require_count(document, "horizon"), require_count(document, "num_states"),
                    require_count(document, "num_actions")};
  const std::size_t initial_state = require_count(document, "initial_state");
  MdpTables tables(shape, initial_state);
  const json& rewards = require_array(require(document, "rewards"), shape.horizon, "rewards");
  const json& transitions = require_array(require(document, "transitions"), shape.horizon, "transitions");
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    const json& r_h = require_array(rewards[h], shape.num_states, "rewards[" + std::to_string(h) + "]");
    const json& p_h = require_array(transitions[h], shape.num_states, "transitions[" + std::to_string(h) + "]");
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      const std::string hs = "[" + std::to_string(h) + "][" + std::to_string(s) + "]";
      const json& r_hs = require_array(r_h[s], shape.num_actions, "rewards" + hs);
      const json& p_hs = require_array(p_h[s], shape.num_actions, "transitions" + hs);
      for (std::size_t a = 0; a < shape.num_actions; ++a) {
        tables.reward(h, s, a) = require_number(r_hs[a], "rewards" + at(h, s, a));
        const json& row = require_array(p_hs[a], shape.num_states, "transitions" + at(h, s, a));
        auto out = tables.row(h, s, a);
        for (std::size_t t = 0; t < shape.num_states; ++t)
          out[t] = require_number(row[t], "transitions" + at(h, s, a));
      }
    }
  }
  return tables;
}

TabularMDP mdp_from_json(const json& document) {
  const json& kind = require(document, "reward_kind");
  if (!kind.is_string()) throw MdpFormatError("schema error: 'reward_kind' must be a string");
  const RewardKind reward_kind = reward_kind_from_string(kind.get<std::string>());
  return TabularMDP(tables_from_json(document), reward_kind);
}

void save_tables(const MdpTables& tables, RewardKind reward_kind, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_json(tables, reward_kind).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void save_mdp(const TabularMDP& mdp, const std::filesystem::path& path) {
  save_tables(mdp.tables(), mdp.reward_kind(), path);
}

TabularMDP load_mdp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw MdpFormatError(path.string() + ": " + e.what());
  }
  return mdp_from_json(document);
}

}  // namespace rlsvi
