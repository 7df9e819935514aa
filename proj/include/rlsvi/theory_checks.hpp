#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlsvi/agents.hpp"
#include "rlsvi/estimation.hpp"
#include "rlsvi/mdp.hpp"
#include "rlsvi/rlsvi.hpp"

namespace rlsvi {

// Standard normal CDF at -1, ~0.158655.
double phi_minus_one();

struct DiagnosticReport {
  std::string name;
  double estimate = 0.0;
  double standard_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t n_trials = 0;

  nlohmann::json to_json() const;
  std::string to_json_line() const { return to_json().dump(); }
};

// Noise variance equal to HS * e_k: twice the default beta_k.
inline NoiseSchedule conforming_schedule() { return NoiseSchedule{2.0}; }

// Runs the direct-form agent for `episodes` x `trials`. Among episodes whose
// empirical model lies in the confidence set, reports the fraction with
// V(perturbed model, its greedy policy) >= V*(s1). Passes iff the fraction is
// at least Phi(-1) - 3 SE.
DiagnosticReport optimism_rate(const TabularMDP& mdp, std::size_t episodes, std::size_t trials,
                               const NoiseSchedule& schedule, std::uint64_t seed);

// Mean over trials of the number of episodes k <= `episodes` whose empirical
// model falls outside the confidence set while `agent` plays. Passes iff the
// mean is at most pi^2/6 + 3 SE. `e_divisor` > 1 shrinks e_k (negative
// control).
DiagnosticReport confidence_violation_mass(const TabularMDP& mdp, const AgentConfig& agent, std::size_t episodes,
                                           std::size_t trials, std::uint64_t seed, double e_divisor = 1.0);

struct HistoryFixture {
  History history;
  Counts counts;
  std::size_t initial_state;
};

// Uniformly random play on `mdp` for `episodes` episodes.
HistoryFixture make_history_fixture(const TabularMDP& mdp, std::size_t episodes, std::uint64_t seed);

// Max |Q_regression - Q_direct| with the direct form fed the aggregated
// regression noise. With `mismatched_streams` the direct form gets noise
// aggregated from an independent draw instead (negative control). Passes iff
// the difference is at most 1e-9.
DiagnosticReport equivalence_report(const HistoryFixture& fixture, double beta_k, std::uint64_t seed,
                                    PriorCentering centering = PriorCentering::kEmpiricalTarget,
                                    bool mismatched_streams = false);

// Moment checks of Q_0(s1, a) given Q_1 for both formulations at the first
// visited action of (0, s1): the residual Q_0 - c * (R_hat + <P_hat, max Q_1>)
// must have mean 0 and variance beta_k / (n + 1), each within 3 SE. c is 1
// except for the kZero regression, where it is n / (n + 1). Returns the
// regression mean, regression variance, direct mean and direct variance
// reports in that order.
std::vector<DiagnosticReport> equivalence_moments(const HistoryFixture& fixture, double beta_k, std::size_t samples,
                                                  std::uint64_t seed,
                                                  PriorCentering centering = PriorCentering::kEmpiricalTarget);

// Max residual of the value-gap identity over `count` random (M_bar, M_tilde,
// policy) triples with S, H <= 5. Passes iff at most 1e-8.
DiagnosticReport value_gap_report(std::size_t count, std::uint64_t seed);

}  // namespace rlsvi
