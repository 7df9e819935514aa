#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rlsvi/estimation.hpp"
#include "rlsvi/mdp.hpp"
#include "rlsvi/random.hpp"

namespace rlsvi {

// beta_k = scale * S * H^3 * log(2HSAk) / 2. Throws on k == 0.
double beta(std::size_t k, std::size_t num_states, std::size_t horizon, std::size_t num_actions,
            double scale_multiplier = 1.0);

struct NoiseSchedule {
  double scale_multiplier = 1.0;

  double beta(std::size_t k, const Shape& shape) const {
    return rlsvi::beta(k, shape.num_states, shape.horizon, shape.num_actions, scale_multiplier);
  }
};

// sqrt(beta_k / (n_k(h,s,a) + 1)).
double sigma(const Counts& counts, double beta_k, std::size_t h, std::size_t s, std::size_t a);

// Empirical model with Gaussian noise added to its rewards. Rewards are left
// unclipped; transition rows are those of the empirical model.
struct PerturbedModel {
  MdpTables tables;
  std::vector<double> noise;  // w[h][s][a]
};

PerturbedModel perturb(const EmpiricalModel& empirical, std::vector<double> noise);

// Draws w(h,s,a) ~ N(0, beta_k / (n + 1)) independently, in (h, s, a) order.
PerturbedModel sample_perturbed_mdp(const EmpiricalModel& empirical, const Counts& counts, double beta_k, Rng& rng);

// Optimal policy of the perturbed model (lowest-index ties).
Solution rlsvi_policy_direct(const PerturbedModel& model);

// argmin_theta sum_i (theta - y_i)^2 + (theta - prior)^2.
double ridge_scalar(std::span<const double> observations, double prior_sample);

// Per-period training data for the regression form.
struct Datapoint {
  std::size_t state;
  std::size_t action;
  double reward;
  std::optional<std::size_t> next_state;  // empty in the last period
};

class History {
 public:
  explicit History(Shape shape) : shape_(shape), data_(shape.horizon) {}

  void record(const Trajectory& trajectory);

  const std::vector<Datapoint>& period(std::size_t h) const { return data_[h]; }
  const Shape& shape() const { return shape_; }
  std::size_t episodes() const { return episodes_; }

 private:
  Shape shape_;
  std::vector<std::vector<Datapoint>> data_;
  std::size_t episodes_ = 0;
};

// Where the ridge penalty of the regression form is centred.
//
// kZero is the textbook regression: the prior table is N(0, beta) and the
// fit shrinks the empirical Bellman target by n / (n + 1).
// kEmpiricalTarget adds the N(0, beta) prior draw to the unperturbed mean
// target of each cell, so that Q_h(s,a) | Q_{h+1} is exactly
// N(R_hat + <P_hat, max Q_{h+1}>, beta / (n + 1)) and the fit matches the
// direct form draw for draw.
enum class PriorCentering { kEmpiricalTarget, kZero };

// Noise realizations consumed by one regression fit.
struct RegressionNoise {
  Shape shape;
  std::vector<double> prior;                     // xi[h][s][a] ~ N(0, beta)
  std::vector<std::vector<double>> datapoints;   // w per datapoint of D_h
};

// Draw order: for h = 0..H-1, the prior table in (s, a) order, then one noise
// per datapoint of D_h in recording order.
RegressionNoise draw_regression_noise(const History& history, double beta_k, Rng& rng);

// Fits Q_H-1 .. Q_0 by ridge regression on the perturbed targets
// r + w + max_a' Q_{h+1}(s', a').
QTables fit_perturbed_regression(const History& history, const RegressionNoise& noise, PriorCentering centering);

Solution rlsvi_policy_regression(const History& history, double beta_k, Rng& rng,
                                 PriorCentering centering = PriorCentering::kEmpiricalTarget);

// Direct-form noise that reproduces a regression fit:
//   w(h,s,a) = (sum_i w_i + xi(h,s,a)) / (n + 1),  and xi(h,s,a) when n = 0.
std::vector<double> aggregate_noise(const History& history, const RegressionNoise& noise);

// Empirical model scaled by n / (n + 1); the model the kZero regression is
// equivalent to under aggregate_noise.
EmpiricalModel ridge_shrunk_model(const EmpiricalModel& empirical, const Counts& counts);

}  // namespace rlsvi
