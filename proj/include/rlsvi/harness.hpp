#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rlsvi/agents.hpp"
#include "rlsvi/envs.hpp"
#include "rlsvi/mdp.hpp"

namespace rlsvi {

struct RandomEnvSpec {
  std::size_t num_states = 3;
  std::size_t num_actions = 2;
  std::size_t horizon = 3;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  RewardKind reward_kind = RewardKind::kBernoulli;
};

struct FileEnvSpec {
  std::filesystem::path path;
};

using EnvironmentSpec = std::variant<ChainSpec, RandomEnvSpec, FileEnvSpec>;

TabularMDP build_environment(const EnvironmentSpec& spec);

struct ExperimentConfig {
  EnvironmentSpec environment = ChainSpec{};
  std::vector<AgentConfig> agents;
  std::size_t episodes = 1000;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = ".";
  bool emit_plot = false;
  std::size_t workers = 1;

  void validate() const;

  // Relative file paths inside the document resolve against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json& document, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct RegretRecord {
  std::string algo;
  std::uint64_t seed = 0;
  std::size_t episode = 0;  // 1-based
  double per_episode_regret = 0.0;
  double cumulative_regret = 0.0;

  bool operator==(const RegretRecord&) const = default;
};

// Ordered by agent (config order), then seed (config order), then episode.
using ResultTable = std::vector<RegretRecord>;

// Streams for run (seed, agent index) at episode k are
//   Rng::derive({seed, agent_index, k, 0})  planning and action draws
//   Rng::derive({seed, agent_index, k, 1})  environment draws
// so results do not depend on worker count or scheduling.
ResultTable run_experiment(const ExperimentConfig& config);
ResultTable run_experiment(const ExperimentConfig& config, const TabularMDP& mdp);

struct AlgoSummary {
  std::string algo;
  std::size_t num_seeds = 0;
  std::vector<double> mean_cumulative;    // index k - 1
  std::vector<double> stderr_cumulative;  // 0 with a single seed
  std::vector<double> mean_per_episode;
  // Least-squares slope of log(mean cumulative regret) against log(k) over
  // k in [K/2, K]; empty when the curve is not strictly positive there.
  std::optional<double> growth_slope;

  // Mean per-episode regret over the last `window` episodes.
  double tail_mean(std::size_t window) const;
};

std::optional<double> growth_slope(std::span<const double> cumulative);

std::vector<AlgoSummary> summarize(const ResultTable& results);

inline constexpr const char* kCsvHeader = "algo,seed,episode,per_episode_regret,cumulative_regret";

void write_results(const ResultTable& results, const std::filesystem::path& path);
ResultTable read_results(const std::filesystem::path& path);

// Self-contained SVG: one band polygon (mean +- stderr) and one path (mean)
// per algorithm.
void emit_plot(const std::vector<AlgoSummary>& summaries, const std::filesystem::path& path);

}  // namespace rlsvi
