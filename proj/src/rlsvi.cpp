#include "rlsvi/rlsvi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rlsvi {

double beta(std::size_t k, std::size_t num_states, std::size_t horizon, std::size_t num_actions,
            double scale_multiplier) {
  if (k == 0) throw std::invalid_argument("beta: episode index k starts at 1");
  if (!(scale_multiplier >= 0.0)) throw std::invalid_argument("beta: scale multiplier must be non-negative");
  const double S = static_cast<double>(num_states);
  const double H = static_cast<double>(horizon);
  const double A = static_cast<double>(num_actions);
  return scale_multiplier * 0.5 * S * H * H * H * std::log(2.0 * H * S * A * static_cast<double>(k));
}

double sigma(const Counts& counts, double beta_k, std::size_t h, std::size_t s, std::size_t a) {
  if (!(beta_k >= 0.0)) throw std::invalid_argument("sigma: beta must be non-negative");
  return std::sqrt(beta_k / (static_cast<double>(counts.visits(h, s, a)) + 1.0));
}

PerturbedModel perturb(const EmpiricalModel& empirical, std::vector<double> noise) {
  if (noise.size() != empirical.shape.cells()) throw ShapeError("noise table does not match the model shape");
  PerturbedModel model{empirical, std::move(noise)};
  for (std::size_t i = 0; i < model.noise.size(); ++i) model.tables.rewards[i] += model.noise[i];
  return model;
}

PerturbedModel sample_perturbed_mdp(const EmpiricalModel& empirical, const Counts& counts, double beta_k, Rng& rng) {
  const Shape& shape = empirical.shape;
  if (!(counts.shape() == shape)) throw ShapeError("counts do not match the empirical model");
  std::vector<double> noise(shape.cells(), 0.0);
  if (beta_k > 0.0) {
    for (std::size_t h = 0; h < shape.horizon; ++h)
      for (std::size_t s = 0; s < shape.num_states; ++s)
        for (std::size_t a = 0; a < shape.num_actions; ++a)
          noise[shape.cell(h, s, a)] = sigma(counts, beta_k, h, s, a) * rng.normal();
  }
  return perturb(empirical, std::move(noise));
}

Solution rlsvi_policy_direct(const PerturbedModel& model) { return backward_induction(model.tables); }

double ridge_scalar(std::span<const double> observations, double prior_sample) {
  double total = prior_sample;
  for (double y : observations) total += y;
  return total / (static_cast<double>(observations.size()) + 1.0);
}

void History::record(const Trajectory& trajectory) {
  if (trajectory.steps.size() != shape_.horizon) throw ShapeError("trajectory length does not match the horizon");
  for (const Step& step : trajectory.steps) {
    if (step.state >= shape_.num_states || step.action >= shape_.num_actions)
      throw ShapeError("trajectory step out of range");
    data_[step.h].push_back({step.state, step.action, step.reward, step.next_state});
  }
  ++episodes_;
}

RegressionNoise draw_regression_noise(const History& history, double beta_k, Rng& rng) {
  if (!(beta_k >= 0.0)) throw std::invalid_argument("regression noise: beta must be non-negative");
  const Shape& shape = history.shape();
  const double stddev = std::sqrt(beta_k);
  RegressionNoise noise{shape, std::vector<double>(shape.cells(), 0.0), std::vector<std::vector<double>>(shape.horizon)};
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    for (std::size_t s = 0; s < shape.num_states; ++s)
      for (std::size_t a = 0; a < shape.num_actions; ++a) noise.prior[shape.cell(h, s, a)] = stddev * rng.normal();
    auto& w = noise.datapoints[h];
    w.resize(history.period(h).size());
    for (double& x : w) x = stddev * rng.normal();
  }
  return noise;
}

QTables fit_perturbed_regression(const History& history, const RegressionNoise& noise, PriorCentering centering) {
  const Shape& shape = history.shape();
  if (!(noise.shape == shape) || noise.datapoints.size() != shape.horizon)
    throw ShapeError("regression noise does not match the history");

  QTables q(shape);
  const std::size_t cells_per_period = shape.num_states * shape.num_actions;
  std::vector<std::vector<double>> targets(cells_per_period);
  std::vector<double> clean_sums(cells_per_period);
  for (std::size_t h = shape.horizon; h-- > 0;) {
    const auto& data = history.period(h);
    if (noise.datapoints[h].size() != data.size()) throw ShapeError("regression noise does not match D_h");
    for (auto& t : targets) t.clear();
    std::fill(clean_sums.begin(), clean_sums.end(), 0.0);

    for (std::size_t i = 0; i < data.size(); ++i) {
      const Datapoint& point = data[i];
      double continuation = 0.0;
      if (h + 1 < shape.horizon) {
        if (!point.next_state || *point.next_state >= shape.num_states)
          throw std::invalid_argument("malformed dataset: missing next state before the last period");
        continuation = q.max_value(h + 1, *point.next_state);
      } else if (point.next_state) {
        throw std::invalid_argument("malformed dataset: next state recorded in the last period");
      }
      const std::size_t slot = point.state * shape.num_actions + point.action;
      targets[slot].push_back(point.reward + noise.datapoints[h][i] + continuation);
      clean_sums[slot] += point.reward + continuation;
    }

    for (std::size_t s = 0; s < shape.num_states; ++s) {
      for (std::size_t a = 0; a < shape.num_actions; ++a) {
        const std::size_t slot = s * shape.num_actions + a;
        double prior = noise.prior[shape.cell(h, s, a)];
        const auto n = targets[slot].size();
        if (centering == PriorCentering::kEmpiricalTarget && n > 0)
          prior += clean_sums[slot] / static_cast<double>(n);
        q(h, s, a) = ridge_scalar(targets[slot], prior);
      }
    }
  }
  return q;
}

Solution rlsvi_policy_regression(const History& history, double beta_k, Rng& rng, PriorCentering centering) {
  const RegressionNoise noise = draw_regression_noise(history, beta_k, rng);
  QTables q = fit_perturbed_regression(history, noise, centering);
  Policy policy = q.greedy_policy();
  return {std::move(q), std::move(policy)};
}

std::vector<double> aggregate_noise(const History& history, const RegressionNoise& noise) {
  const Shape& shape = history.shape();
  std::vector<double> sums = noise.prior;
  std::vector<double> n(shape.cells(), 0.0);
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    const auto& data = history.period(h);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::size_t cell = shape.cell(h, data[i].state, data[i].action);
      sums[cell] += noise.datapoints[h][i];
      n[cell] += 1.0;
    }
  }
  for (std::size_t i = 0; i < sums.size(); ++i) sums[i] /= n[i] + 1.0;
  return sums;
}

EmpiricalModel ridge_shrunk_model(const EmpiricalModel& empirical, const Counts& counts) {
  const Shape& shape = empirical.shape;
  EmpiricalModel shrunk = empirical;
  for (std::size_t h = 0; h < shape.horizon; ++h)
    for (std::size_t s = 0; s < shape.num_states; ++s)
      for (std::size_t a = 0; a < shape.num_actions; ++a) {
        const double n = static_cast<double>(counts.visits(h, s, a));
        const double factor = n / (n + 1.0);
        shrunk.reward(h, s, a) *= factor;
        for (double& p : shrunk.row(h, s, a)) p *= factor;
      }
  return shrunk;
}

}  // namespace rlsvi
