#pragma once

// Core types and environment dynamics for resource allocation with
// censored Bernoulli losses.
//
// An instance has K arms with loss means mu[i] and per-arm thresholds
// theta[i] (possibly one shared value). Each round the learner splits a
// budget q across arms. An arm suffers (and reveals) its Bernoulli loss
// only when its share is strictly below its threshold; at or above the
// threshold the loss is prevented and nothing is observed.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "csb/rng.hpp"

namespace csb {

// Slack for budget feasibility checks, absorbing float dust in sums.
inline constexpr double kFeasibilitySlack = 1e-9;

// Common (scalar) or per-arm threshold.
class ThetaSpec {
 public:
  static ThetaSpec common(double value) {
    ThetaSpec t;
    t.common_ = true;
    t.value_ = value;
    return t;
  }

  static ThetaSpec per_arm(std::vector<double> values) {
    ThetaSpec t;
    t.common_ = false;
    t.values_ = std::move(values);
    return t;
  }

  bool is_common() const { return common_; }

  double common_value() const {
    if (!common_) throw std::logic_error("ThetaSpec: not a common threshold");
    return value_;
  }

  const std::vector<double>& per_arm_values() const {
    if (common_) throw std::logic_error("ThetaSpec: not a per-arm threshold");
    return values_;
  }

  double value(int arm) const { return common_ ? value_ : values_.at(arm); }

 private:
  bool common_ = true;
  double value_ = 0.0;
  std::vector<double> values_;
};

struct CsbInstance {
  std::vector<double> mu;  // loss means, in [0,1]
  ThetaSpec theta;         // thresholds, each in (0,1]
  double budget_q = 0.0;   // total allocatable resource, >= 0

  int num_arms() const { return static_cast<int>(mu.size()); }
  double theta_of(int arm) const { return theta.value(arm); }
};

inline CsbInstance make_instance(std::vector<double> mu, ThetaSpec theta, double q) {
  if (mu.empty()) throw std::invalid_argument("make_instance: mu must be non-empty");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0.0 && mu[i] <= 1.0))
      throw std::invalid_argument("make_instance: mu[" + std::to_string(i) +
                                  "] outside [0,1]");
  }
  if (theta.is_common()) {
    const double t = theta.common_value();
    if (!(t > 0.0 && t <= 1.0))
      throw std::invalid_argument("make_instance: common theta outside (0,1]");
  } else {
    const auto& tv = theta.per_arm_values();
    if (tv.size() != mu.size())
      throw std::invalid_argument("make_instance: theta length " +
                                  std::to_string(tv.size()) + " != mu length " +
                                  std::to_string(mu.size()));
    for (std::size_t i = 0; i < tv.size(); ++i) {
      if (!(tv[i] > 0.0 && tv[i] <= 1.0))
        throw std::invalid_argument("make_instance: theta[" + std::to_string(i) +
                                    "] outside (0,1]");
    }
  }
  if (!(q >= 0.0)) throw std::invalid_argument("make_instance: q must be >= 0");
  CsbInstance inst;
  inst.mu = std::move(mu);
  inst.theta = std::move(theta);
  inst.budget_q = q;
  return inst;
}

// One round's allocation; amounts[i] is the share given to arm i.
struct Allocation {
  std::vector<double> amounts;
};

// Per-arm outcome of one round. losses[i] is the observed loss indicator
// (always 0 for censored arms); observed[i] says whether arm i's loss was
// observable this round, i.e. amounts[i] < theta[i] strictly.
struct FeedbackVector {
  std::vector<std::uint8_t> losses;
  std::vector<std::uint8_t> observed;
};

inline void check_feasible(const CsbInstance& inst, const Allocation& alloc) {
  if (alloc.amounts.size() != inst.mu.size())
    throw std::invalid_argument("allocation length " +
                                std::to_string(alloc.amounts.size()) +
                                " != number of arms " + std::to_string(inst.mu.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < alloc.amounts.size(); ++i) {
    const double a = alloc.amounts[i];
    if (!(a >= 0.0 && a <= 1.0))
      throw std::invalid_argument("allocation[" + std::to_string(i) +
                                  "] outside [0,1]");
    total += a;
  }
  if (total > inst.budget_q + kFeasibilitySlack)
    throw std::invalid_argument("allocation sums to " + std::to_string(total) +
                                " which exceeds budget " +
                                std::to_string(inst.budget_q));
}

// Draws one latent Bernoulli loss per arm and censors it by the strict
// threshold rule: arm i's loss is incurred and observed iff a_i < theta_i.
// Exactly K draws are consumed from env_rng per call, in arm order.
inline FeedbackVector environment_step(const CsbInstance& inst, const Allocation& alloc,
                                       RngStream& env_rng) {
  check_feasible(inst, alloc);
  const int k = inst.num_arms();
  FeedbackVector fb;
  fb.losses.assign(k, 0);
  fb.observed.assign(k, 0);
  for (int i = 0; i < k; ++i) {
    const bool x = env_rng.bernoulli(inst.mu[i]);
    const bool uncovered = alloc.amounts[i] < inst.theta_of(i);
    fb.observed[i] = uncovered ? 1 : 0;
    fb.losses[i] = (uncovered && x) ? 1 : 0;
  }
  return fb;
}

// Pseudo-regret of one round: expected loss of the played allocation minus
// the instance's optimal expected loss (which the caller supplies, usually
// computed once per instance).
inline double round_regret(const CsbInstance& inst, const Allocation& alloc,
                           double optimal_mean_loss) {
  check_feasible(inst, alloc);
  double played = 0.0;
  for (int i = 0; i < inst.num_arms(); ++i) {
    if (alloc.amounts[i] < inst.theta_of(i)) played += inst.mu[i];
  }
  return played - optimal_mean_loss;
}

// Full record of one replication. Rounds are split into a threshold
// estimation phase (rounds 1..phase1_end_round) and a regret minimization
// phase; regret accrues in both. phase2_uncovered_sets holds the learner's
// chosen uncovered (observed) set for each phase-2 round, 0-based and
// sorted; realized_loss is the per-round sum of observed loss indicators,
// kept for diagnostics only.
struct RegretTrace {
  std::vector<double> per_round_regret;
  std::vector<double> cumulative_regret;
  std::vector<double> realized_loss;
  std::vector<std::vector<int>> phase2_uncovered_sets;
  int phase1_end_round = 0;
  bool estimation_complete = true;
  std::vector<double> theta_estimate;  // one entry for common-threshold runs

  double final_regret() const {
    return cumulative_regret.empty() ? 0.0 : cumulative_regret.back();
  }
};

}  // namespace csb
