#include "rlsvi/estimation.hpp"

#include <cmath>

namespace rlsvi {

Counts::Counts(Shape shape)
    : shape_(shape),
      n_(shape.cells(), 0),
      reward_sums_(shape.cells(), 0.0),
      transition_counts_(shape.cells() * shape.num_states, 0) {}

void Counts::record(const Trajectory& trajectory) {
  if (trajectory.steps.size() != shape_.horizon) throw ShapeError("trajectory length does not match the horizon");
  for (const Step& step : trajectory.steps) {
    if (step.h >= shape_.horizon || step.state >= shape_.num_states || step.action >= shape_.num_actions)
      throw ShapeError("trajectory step out of range");
    const std::size_t cell = shape_.cell(step.h, step.state, step.action);
    ++n_[cell];
    reward_sums_[cell] += step.reward;
    if (step.h + 1 < shape_.horizon) {
      if (!step.next_state || *step.next_state >= shape_.num_states)
        throw ShapeError("trajectory step is missing a valid next state");
      ++transition_counts_[cell * shape_.num_states + *step.next_state];
    }
  }
  ++episode_;
}

Counts update_counts(Counts counts, const Trajectory& trajectory) {
  counts.record(trajectory);
  return counts;
}

EmpiricalModel empirical_mdp(const Counts& counts, std::size_t initial_state) {
  const Shape& shape = counts.shape();
  EmpiricalModel model(shape, initial_state);
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      for (std::size_t a = 0; a < shape.num_actions; ++a) {
        const std::uint64_t n = counts.visits(h, s, a);
        if (n == 0) continue;
        const double visits = static_cast<double>(n);
        model.reward(h, s, a) = counts.reward_sum(h, s, a) / visits;
        if (h + 1 == shape.horizon) continue;
        auto row = model.row(h, s, a);
        for (std::size_t t = 0; t < shape.num_states; ++t)
          row[t] = static_cast<double>(counts.transition_count(h, s, a, t)) / visits;
      }
    }
  }
  return model;
}

ConfidenceRadius confidence_radius(const Counts& counts, std::size_t k) {
  if (k == 0) throw std::invalid_argument("episode index k starts at 1");
  const Shape& shape = counts.shape();
  const double H = static_cast<double>(shape.horizon);
  const double log_term = std::log(2.0 * H * static_cast<double>(shape.num_states) *
                                   static_cast<double>(shape.num_actions) * static_cast<double>(k));
  ConfidenceRadius radius{shape, std::vector<double>(shape.cells())};
  for (std::size_t h = 0; h < shape.horizon; ++h)
    for (std::size_t s = 0; s < shape.num_states; ++s)
      for (std::size_t a = 0; a < shape.num_actions; ++a)
        radius.sqrt_e[shape.cell(h, s, a)] =
            H * std::sqrt(log_term / (static_cast<double>(counts.visits(h, s, a)) + 1.0));
  return radius;
}

ConfidenceCheck in_confidence_set(const MdpTables& model, const MdpTables& truth, const QTables& truth_optimal_q,
                                  const ConfidenceRadius& radius) {
  const Shape& shape = truth.shape;
  if (!(model.shape == shape) || !(truth_optimal_q.shape() == shape) || !(radius.shape == shape))
    throw ShapeError("confidence-set check requires identical shapes");

  ConfidenceCheck check;
  double worst_excess = 0.0;
  std::vector<double> v_next(shape.num_states, 0.0);
  for (std::size_t h = 0; h < shape.horizon; ++h) {
    for (std::size_t t = 0; t < shape.num_states; ++t) v_next[t] = truth_optimal_q.max_value(h + 1, t);
    for (std::size_t s = 0; s < shape.num_states; ++s) {
      for (std::size_t a = 0; a < shape.num_actions; ++a) {
        double gap = model.reward(h, s, a) - truth.reward(h, s, a);
        if (h + 1 < shape.horizon) {
          const auto row_model = model.row(h, s, a);
          const auto row_truth = truth.row(h, s, a);
          for (std::size_t t = 0; t < shape.num_states; ++t) gap += (row_model[t] - row_truth[t]) * v_next[t];
        }
        const double deviation = std::abs(gap);
        const double excess = deviation - radius(h, s, a);
        if (excess > 0.0 && (check.inside || excess > worst_excess)) {
          check.inside = false;
          worst_excess = excess;
          check.worst = CellDeviation{h, s, a, deviation, radius(h, s, a)};
        }
      }
    }
  }
  return check;
}

}  // namespace rlsvi
