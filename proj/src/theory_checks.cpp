#include "rlsvi/theory_checks.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rlsvi/envs.hpp"

namespace rlsvi {

double phi_minus_one() { return 0.5 * std::erfc(1.0 / std::numbers::sqrt2); }

nlohmann::json DiagnosticReport::to_json() const {
  return {{"name", name},   {"estimate", estimate}, {"se", standard_error},
          {"threshold", threshold}, {"pass", pass}, {"n_trials", n_trials}};
}

namespace {

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

MeanAndError mean_and_error(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double variance = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(variance / n)};
}

}  // namespace

DiagnosticReport optimism_rate(const TabularMDP& mdp, std::size_t episodes, std::size_t trials,
                               const NoiseSchedule& schedule, std::uint64_t seed) {
  const Shape& shape = mdp.shape();
  const Solution truth = optimal_values(mdp);
  const double v_star = truth.value(mdp.initial_state());

  std::size_t qualifying = 0;
  std::size_t optimistic = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Counts counts(shape);
    for (std::size_t k = 1; k <= episodes; ++k) {
      Rng agent_rng = Rng::derive({seed, trial, k, 0});
      Rng env_rng = Rng::derive({seed, trial, k, 1});
      const EmpiricalModel empirical = empirical_mdp(counts, mdp.initial_state());
      const bool inside =
          in_confidence_set(empirical, mdp.tables(), truth.q, confidence_radius(counts, k)).inside;
      const Solution sampled =
          rlsvi_policy_direct(sample_perturbed_mdp(empirical, counts, schedule.beta(k, shape), agent_rng));
      if (inside) {
        ++qualifying;
        if (sampled.value(mdp.initial_state()) >= v_star) ++optimistic;
      }
      counts.record(simulate_episode(mdp, sampled.policy, env_rng));
    }
  }

  DiagnosticReport report;
  report.name = "optimism";
  report.threshold = phi_minus_one();
  report.n_trials = qualifying;
  if (qualifying == 0) {
    report.estimate = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  const double p = static_cast<double>(optimistic) / static_cast<double>(qualifying);
  report.estimate = p;
  report.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(qualifying));
  report.pass = p >= report.threshold - 3.0 * report.standard_error;
  return report;
}

DiagnosticReport confidence_violation_mass(const TabularMDP& mdp, const AgentConfig& agent_config,
                                           std::size_t episodes, std::size_t trials, std::uint64_t seed,
                                           double e_divisor) {
  if (!(e_divisor > 0.0)) throw std::invalid_argument("e_divisor must be positive");
  const Shape& shape = mdp.shape();
  const Solution truth = optimal_values(mdp);
  const double radius_scale = 1.0 / std::sqrt(e_divisor);

  std::vector<double> violations_per_trial;
  violations_per_trial.reserve(trials);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    auto agent = make_agent(agent_config, mdp);
    Counts counts(shape);
    std::size_t violations = 0;
    for (std::size_t k = 1; k <= episodes; ++k) {
      Rng agent_rng = Rng::derive({seed, trial, k, 0});
      Rng env_rng = Rng::derive({seed, trial, k, 1});
      ConfidenceRadius radius = confidence_radius(counts, k);
      for (double& r : radius.sqrt_e) r *= radius_scale;
      if (!in_confidence_set(empirical_mdp(counts, mdp.initial_state()), mdp.tables(), truth.q, radius).inside)
        ++violations;

      agent->plan(agent_rng);
      const Trajectory trajectory = simulate_episode_with(
          mdp, [&](std::size_t h, std::size_t s, Rng&) { return agent->act(h, s, agent_rng); }, env_rng);
      agent->observe(trajectory);
      counts.record(trajectory);
    }
    violations_per_trial.push_back(static_cast<double>(violations));
  }

  const auto [mean, se] = mean_and_error(violations_per_trial);
  DiagnosticReport report;
  report.name = e_divisor == 1.0 ? "confidence" : "confidence-tampered";
  report.estimate = mean;
  report.standard_error = se;
  report.threshold = std::numbers::pi * std::numbers::pi / 6.0;
  report.pass = mean <= report.threshold + 3.0 * se;
  report.n_trials = trials;
  return report;
}

HistoryFixture make_history_fixture(const TabularMDP& mdp, std::size_t episodes, std::uint64_t seed) {
  HistoryFixture fixture{History(mdp.shape()), Counts(mdp.shape()), mdp.initial_state()};
  const std::size_t num_actions = mdp.shape().num_actions;
  for (std::size_t k = 1; k <= episodes; ++k) {
    Rng rng = Rng::derive({seed, k});
    const Trajectory trajectory = simulate_episode_with(
        mdp, [num_actions](std::size_t, std::size_t, Rng& r) { return r.index(num_actions); }, rng);
    fixture.history.record(trajectory);
    fixture.counts.record(trajectory);
  }
  return fixture;
}

DiagnosticReport equivalence_report(const HistoryFixture& fixture, double beta_k, std::uint64_t seed,
                                    PriorCentering centering, bool mismatched_streams) {
  Rng rng = Rng::derive({seed, 0});
  const RegressionNoise noise = draw_regression_noise(fixture.history, beta_k, rng);
  const QTables regression = fit_perturbed_regression(fixture.history, noise, centering);

  std::vector<double> w;
  if (mismatched_streams) {
    Rng other = Rng::derive({seed, 1});
    w = aggregate_noise(fixture.history, draw_regression_noise(fixture.history, beta_k, other));
  } else {
    w = aggregate_noise(fixture.history, noise);
  }
  EmpiricalModel empirical = empirical_mdp(fixture.counts, fixture.initial_state);
  if (centering == PriorCentering::kZero) empirical = ridge_shrunk_model(empirical, fixture.counts);
  const QTables direct = rlsvi_policy_direct(perturb(empirical, std::move(w))).q;

  double max_diff = 0.0;
  for (std::size_t i = 0; i < direct.values().size(); ++i)
    max_diff = std::max(max_diff, std::abs(direct.values()[i] - regression.values()[i]));

  DiagnosticReport report;
  report.name = mismatched_streams ? "equivalence-mismatched" : "equivalence";
  report.estimate = max_diff;
  report.threshold = 1e-9;
  report.pass = max_diff <= report.threshold;
  report.n_trials = 1;
  return report;
}

std::vector<DiagnosticReport> equivalence_moments(const HistoryFixture& fixture, double beta_k, std::size_t samples,
                                                  std::uint64_t seed, PriorCentering centering) {
  const Shape& shape = fixture.history.shape();
  if (shape.horizon < 2) throw std::invalid_argument("moment check needs a horizon of at least 2");
  if (samples < 2) throw std::invalid_argument("moment check needs at least 2 samples");
  const std::size_t s1 = fixture.initial_state;
  std::size_t action = shape.num_actions;
  for (std::size_t a = 0; a < shape.num_actions && action == shape.num_actions; ++a)
    if (fixture.counts.visits(0, s1, a) > 0) action = a;
  if (action == shape.num_actions) throw std::invalid_argument("moment check needs a visited action at (0, s1)");

  const EmpiricalModel empirical = empirical_mdp(fixture.counts, s1);
  const double n = static_cast<double>(fixture.counts.visits(0, s1, action));
  const double variance = beta_k / (n + 1.0);

  const auto residual = [&](const QTables& q, double shrink) {
    double target = empirical.reward(0, s1, action);
    const auto row = empirical.row(0, s1, action);
    for (std::size_t t = 0; t < shape.num_states; ++t) target += row[t] * q.max_value(1, t);
    return q(0, s1, action) - shrink * target;
  };

  std::vector<double> regression_residuals, direct_residuals;
  const double regression_shrink = centering == PriorCentering::kZero ? n / (n + 1.0) : 1.0;
  for (std::size_t i = 0; i < samples; ++i) {
    Rng regression_rng = Rng::derive({seed, i, 0});
    Rng direct_rng = Rng::derive({seed, i, 1});
    regression_residuals.push_back(
        residual(rlsvi_policy_regression(fixture.history, beta_k, regression_rng, centering).q, regression_shrink));
    direct_residuals.push_back(residual(
        rlsvi_policy_direct(sample_perturbed_mdp(empirical, fixture.counts, beta_k, direct_rng)).q, 1.0));
  }

  const double count = static_cast<double>(samples);
  const double mean_se = std::sqrt(variance / count);
  const double variance_se = variance * std::sqrt(2.0 / (count - 1.0));
  std::vector<DiagnosticReport> reports;
  for (const auto& [label, residuals] : {std::pair{"regression", &regression_residuals},
                                         std::pair{"direct", &direct_residuals}}) {
    double mean = 0.0;
    for (double r : *residuals) mean += r;
    mean /= count;
    double ss = 0.0;
    for (double r : *residuals) ss += (r - mean) * (r - mean);
    const double sample_variance = ss / (count - 1.0);

    reports.push_back({std::string("moments-") + label + "-mean", mean, mean_se, 0.0,
                       std::abs(mean) <= 3.0 * mean_se, samples});
    reports.push_back({std::string("moments-") + label + "-variance", sample_variance, variance_se, variance,
                       std::abs(sample_variance - variance) <= 3.0 * variance_se, samples});
  }
  return reports;
}

DiagnosticReport value_gap_report(std::size_t count, std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::derive({seed, i});
    const std::size_t S = 1 + rng.index(5);
    const std::size_t H = 1 + rng.index(5);
    const std::size_t A = 1 + rng.index(3);
    const TabularMDP m_bar = make_random_mdp(S, A, H, rng);
    const TabularMDP m_tilde = make_random_mdp(S, A, H, rng);
    Policy policy(H, S);
    for (std::size_t h = 0; h < H; ++h)
      for (std::size_t s = 0; s < S; ++s) policy(h, s) = rng.index(A);
    const double exact = policy_value(m_bar, policy) - policy_value(m_tilde, policy);
    worst = std::max(worst, std::abs(value_gap_rhs(m_bar, m_tilde, policy) - exact));
  }
  DiagnosticReport report;
  report.name = "valuegap";
  report.estimate = worst;
  report.threshold = 1e-8;
  report.pass = worst <= report.threshold;
  report.n_trials = count;
  return report;
}

}  // namespace rlsvi
