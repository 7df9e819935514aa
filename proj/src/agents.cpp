#include "rlsvi/agents.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "rlsvi/estimation.hpp"

namespace rlsvi {

using nlohmann::json;

namespace {

const std::set<std::string> kAlgos = {"rlsvi-direct", "rlsvi-regression", "greedy", "eps-greedy",
                                      "boltzmann",    "psrl",             "optimal", "uniform"};

double number_at(const json& block, const char* key) {
  const json& value = block.at(key);
  if (!value.is_number()) throw std::invalid_argument(std::string("agent config: '") + key + "' must be a number");
  return value.get<double>();
}

// Deterministic policy per episode.
class PolicyAgent : public Agent {
 public:
  explicit PolicyAgent(const TabularMDP& mdp) : shape_(mdp.shape()), initial_state_(mdp.initial_state()) {}

  StochasticPolicy behavior() const override { return StochasticPolicy::from(policy_, shape_.num_actions); }
  std::size_t act(std::size_t h, std::size_t s, Rng&) override { return policy_(h, s); }
  void observe(const Trajectory&) override {}

 protected:
  Shape shape_;
  std::size_t initial_state_;
  Policy policy_;
};

class RlsviDirectAgent final : public PolicyAgent {
 public:
  RlsviDirectAgent(const TabularMDP& mdp, double scale) : PolicyAgent(mdp), counts_(shape_), schedule_{scale} {}

  void plan(Rng& rng) override {
    const EmpiricalModel empirical = empirical_mdp(counts_, initial_state_);
    const double beta_k = schedule_.beta(counts_.episode(), shape_);
    policy_ = rlsvi_policy_direct(sample_perturbed_mdp(empirical, counts_, beta_k, rng)).policy;
  }
  void observe(const Trajectory& trajectory) override { counts_.record(trajectory); }

 private:
  Counts counts_;
  NoiseSchedule schedule_;
};

class RlsviRegressionAgent final : public PolicyAgent {
 public:
  RlsviRegressionAgent(const TabularMDP& mdp, double scale, PriorCentering centering)
      : PolicyAgent(mdp), history_(shape_), schedule_{scale}, centering_(centering) {}

  void plan(Rng& rng) override {
    const double beta_k = schedule_.beta(history_.episodes() + 1, shape_);
    policy_ = rlsvi_policy_regression(history_, beta_k, rng, centering_).policy;
  }
  void observe(const Trajectory& trajectory) override { history_.record(trajectory); }

 private:
  History history_;
  NoiseSchedule schedule_;
  PriorCentering centering_;
};

class GreedyAgent final : public PolicyAgent {
 public:
  explicit GreedyAgent(const TabularMDP& mdp) : PolicyAgent(mdp), counts_(shape_) {}

  void plan(Rng&) override {
    policy_ = certainty_equivalent_policy(empirical_mdp(counts_, initial_state_)).policy;
  }
  void observe(const Trajectory& trajectory) override { counts_.record(trajectory); }

 private:
  Counts counts_;
};

class PsrlAgent final : public PolicyAgent {
 public:
  PsrlAgent(const TabularMDP& mdp, BaselineConfig config)
      : PolicyAgent(mdp), counts_(shape_), config_(std::move(config)), reward_kind_(mdp.reward_kind()) {
    if (reward_kind_ != RewardKind::kBernoulli) throw std::invalid_argument("psrl requires bernoulli rewards");
  }

  void plan(Rng& rng) override { policy_ = psrl_policy(counts_, config_, reward_kind_, initial_state_, rng); }
  void observe(const Trajectory& trajectory) override { counts_.record(trajectory); }

 private:
  Counts counts_;
  BaselineConfig config_;
  RewardKind reward_kind_;
};

class OptimalAgent final : public PolicyAgent {
 public:
  explicit OptimalAgent(const TabularMDP& mdp) : PolicyAgent(mdp) { policy_ = optimal_values(mdp).policy; }
  void plan(Rng&) override {}
};

// Epsilon-greedy and Boltzmann: dithering around the certainty-equivalent Q.
class DitheringAgent final : public Agent {
 public:
  DitheringAgent(const TabularMDP& mdp, BaselineConfig config)
      : shape_(mdp.shape()), initial_state_(mdp.initial_state()), counts_(shape_), config_(std::move(config)) {}

  void plan(Rng&) override { q_ = certainty_equivalent_policy(empirical_mdp(counts_, initial_state_)).q; }

  StochasticPolicy behavior() const override {
    StochasticPolicy out(shape_);
    for (std::size_t h = 0; h < shape_.horizon; ++h) {
      for (std::size_t s = 0; s < shape_.num_states; ++s) {
        const auto probs = distribution(h, s);
        std::copy(probs.begin(), probs.end(), out.at(h, s).begin());
      }
    }
    return out;
  }

  std::size_t act(std::size_t h, std::size_t s, Rng& rng) override {
    if (config_.kind == BaselineConfig::Kind::kEpsilonGreedy) return epsilon_greedy_action(q_, h, s, *config_.epsilon, rng);
    return boltzmann_action(q_, h, s, *config_.temperature, rng);
  }

  void observe(const Trajectory& trajectory) override { counts_.record(trajectory); }

 private:
  std::vector<double> distribution(std::size_t h, std::size_t s) const {
    if (config_.kind == BaselineConfig::Kind::kEpsilonGreedy)
      return epsilon_greedy_distribution(q_, h, s, *config_.epsilon);
    return boltzmann_distribution(q_, h, s, *config_.temperature);
  }

  Shape shape_;
  std::size_t initial_state_;
  Counts counts_;
  BaselineConfig config_;
  QTables q_;
};

class UniformAgent final : public Agent {
 public:
  explicit UniformAgent(const TabularMDP& mdp) : shape_(mdp.shape()) {}

  void plan(Rng&) override {}
  StochasticPolicy behavior() const override {
    StochasticPolicy out(shape_);
    const double p = 1.0 / static_cast<double>(shape_.num_actions);
    for (std::size_t h = 0; h < shape_.horizon; ++h)
      for (std::size_t s = 0; s < shape_.num_states; ++s)
        for (double& x : out.at(h, s)) x = p;
    return out;
  }
  std::size_t act(std::size_t, std::size_t, Rng& rng) override { return rng.index(shape_.num_actions); }
  void observe(const Trajectory&) override {}

 private:
  Shape shape_;
};

}  // namespace

AgentConfig AgentConfig::from_json(const json& block) {
  if (!block.is_object()) throw std::invalid_argument("agent config must be a JSON object");
  AgentConfig config;
  if (!block.contains("algo") || !block.at("algo").is_string())
    throw std::invalid_argument("agent config requires a string 'algo'");
  config.algo = block.at("algo").get<std::string>();
  if (!kAlgos.count(config.algo)) throw std::invalid_argument("unknown algo '" + config.algo + "'");

  std::set<std::string> allowed = {"algo", "label"};
  const bool is_rlsvi = config.algo == "rlsvi-direct" || config.algo == "rlsvi-regression";
  if (is_rlsvi) allowed.insert("beta_scale");
  if (config.algo == "rlsvi-regression") allowed.insert("prior");
  if (config.algo == "eps-greedy") allowed.insert("epsilon");
  if (config.algo == "boltzmann") allowed.insert("temperature");
  if (config.algo == "psrl") allowed.insert("alpha");
  for (const auto& item : block.items())
    if (!allowed.count(item.key()))
      throw std::invalid_argument("agent config: key '" + item.key() + "' is not used by algo '" + config.algo + "'");

  if (block.contains("label")) config.label = block.at("label").get<std::string>();
  if (block.contains("beta_scale")) {
    config.beta_scale = number_at(block, "beta_scale");
    if (!(config.beta_scale >= 0.0)) throw std::invalid_argument("beta_scale must be non-negative");
  }
  if (block.contains("prior")) {
    const std::string prior = block.at("prior").get<std::string>();
    if (prior == "empirical-target") config.prior = PriorCentering::kEmpiricalTarget;
    else if (prior == "zero") config.prior = PriorCentering::kZero;
    else throw std::invalid_argument("prior must be 'empirical-target' or 'zero'");
  }

  using Kind = BaselineConfig::Kind;
  if (config.algo == "eps-greedy") {
    config.baseline.kind = Kind::kEpsilonGreedy;
    if (!block.contains("epsilon")) throw std::invalid_argument("eps-greedy requires 'epsilon'");
    config.baseline.epsilon = number_at(block, "epsilon");
  } else if (config.algo == "boltzmann") {
    config.baseline.kind = Kind::kBoltzmann;
    if (!block.contains("temperature")) throw std::invalid_argument("boltzmann requires 'temperature'");
    config.baseline.temperature = number_at(block, "temperature");
  } else if (config.algo == "psrl") {
    config.baseline.kind = Kind::kPsrl;
    if (block.contains("alpha")) config.baseline.dirichlet_alpha = number_at(block, "alpha");
  }
  config.baseline.validate();
  return config;
}

json AgentConfig::to_json() const {
  json block{{"algo", algo}};
  if (!label.empty()) block["label"] = label;
  if (algo == "rlsvi-direct" || algo == "rlsvi-regression") block["beta_scale"] = beta_scale;
  if (algo == "rlsvi-regression") block["prior"] = prior == PriorCentering::kZero ? "zero" : "empirical-target";
  if (baseline.epsilon) block["epsilon"] = *baseline.epsilon;
  if (baseline.temperature) block["temperature"] = *baseline.temperature;
  if (baseline.dirichlet_alpha) block["alpha"] = *baseline.dirichlet_alpha;
  return block;
}

std::unique_ptr<Agent> make_agent(const AgentConfig& config, const TabularMDP& mdp) {
  if (config.algo == "rlsvi-direct") return std::make_unique<RlsviDirectAgent>(mdp, config.beta_scale);
  if (config.algo == "rlsvi-regression")
    return std::make_unique<RlsviRegressionAgent>(mdp, config.beta_scale, config.prior);
  if (config.algo == "greedy") return std::make_unique<GreedyAgent>(mdp);
  if (config.algo == "eps-greedy" || config.algo == "boltzmann")
    return std::make_unique<DitheringAgent>(mdp, config.baseline);
  if (config.algo == "psrl") return std::make_unique<PsrlAgent>(mdp, config.baseline);
  if (config.algo == "optimal") return std::make_unique<OptimalAgent>(mdp);
  if (config.algo == "uniform") return std::make_unique<UniformAgent>(mdp);
  throw std::invalid_argument("unknown algo '" + config.algo + "'");
}

}  // namespace rlsvi
