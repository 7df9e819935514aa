#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rlsvi/mdp.hpp"

namespace rlsvi {

// Visit counts and raw sums gathered from completed episodes. episode() is the
// index k of the next episode to be played, starting at 1.
class Counts {
 public:
  explicit Counts(Shape shape);

  // Adds one episode. No transition is recorded at the last period.
  void record(const Trajectory& trajectory);

  std::uint64_t visits(std::size_t h, std::size_t s, std::size_t a) const { return n_[shape_.cell(h, s, a)]; }
  double reward_sum(std::size_t h, std::size_t s, std::size_t a) const { return reward_sums_[shape_.cell(h, s, a)]; }
  std::uint64_t transition_count(std::size_t h, std::size_t s, std::size_t a, std::size_t next) const {
    return transition_counts_[shape_.cell(h, s, a) * shape_.num_states + next];
  }
  std::size_t episode() const { return episode_; }
  const Shape& shape() const { return shape_; }

 private:
  Shape shape_;
  std::vector<std::uint64_t> n_;
  std::vector<double> reward_sums_;
  std::vector<std::uint64_t> transition_counts_;
  std::size_t episode_ = 1;
};

Counts update_counts(Counts counts, const Trajectory& trajectory);

// Plug-in estimates R_hat = reward_sum / n and P_hat = transition_counts / n;
// both are zero at unvisited cells.
using EmpiricalModel = MdpTables;

EmpiricalModel empirical_mdp(const Counts& counts, std::size_t initial_state);

// sqrt(e_k(h,s,a)) = H * sqrt(log(2HSAk) / (n_k(h,s,a) + 1)).
struct ConfidenceRadius {
  Shape shape;
  std::vector<double> sqrt_e;

  double operator()(std::size_t h, std::size_t s, std::size_t a) const { return sqrt_e[shape.cell(h, s, a)]; }
};

ConfidenceRadius confidence_radius(const Counts& counts, std::size_t k);

struct CellDeviation {
  std::size_t h = 0, s = 0, a = 0;
  double deviation = 0.0;  // |(R' - R) + <P' - P, V*_{h+1}>|
  double radius = 0.0;
};

struct ConfidenceCheck {
  bool inside = true;
  // Cell with the largest deviation - radius; set only when outside.
  std::optional<CellDeviation> worst;
};

// Membership of `model` in the confidence set built around `truth`. The
// optimal Q of the truth supplies V*_{h+1}.
ConfidenceCheck in_confidence_set(const MdpTables& model, const MdpTables& truth, const QTables& truth_optimal_q,
                                  const ConfidenceRadius& radius);

}  // namespace rlsvi
