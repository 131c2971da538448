#pragma once

// Allocation policies.
//
// Both algorithms run the matching estimation phase first, then a Thompson
// sampling phase over the arms left uncovered. With a common threshold the
// phase-2 action space is "pick which k-m arms stay uncovered", i.e. a
// multiple-play bandit solved by sampling Beta posteriors and exposing the
// smallest samples. With per-arm thresholds the covered set comes from the
// scaled knapsack over sampled values (or lower-confidence indices for the
// UCB-style comparator).
//
// Stream discipline, fixed so runs are replayable bit for bit: each round
// the policy stream is consumed first (k Beta draws in arm order, when the
// policy samples at all), then the environment stream (k Bernoulli draws in
// arm order, inside environment_step).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "csb/core.hpp"
#include "csb/estimation.hpp"
#include "csb/knapsack.hpp"
#include "csb/rng.hpp"

namespace csb {

// Beta(s,f) posterior per arm, initialized to the uniform prior s = f = 1.
// pulls counts posterior updates, not environment rounds.
struct BetaCounts {
  std::vector<long long> s, f, pulls;

  explicit BetaCounts(int k) : s(k, 1), f(k, 1), pulls(k, 0) {
    if (k < 1) throw std::invalid_argument("BetaCounts: k must be >= 1");
  }
  int num_arms() const { return static_cast<int>(s.size()); }
};

struct PolicyConfig {
  long long scale_s = 10000;     // knapsack DP scale
  int resolve_period = 1;        // re-solve the knapsack every N rounds
  double lcb_exploration = 1.5;  // radius multiplier for the UCB-style index
};

// One Beta(s_i, f_i) draw per arm, in arm order.
inline std::vector<double> posterior_sample(const BetaCounts& counts, RngStream& rng) {
  std::vector<double> out(counts.num_arms());
  for (int i = 0; i < counts.num_arms(); ++i)
    out[i] = rng.beta(static_cast<double>(counts.s[i]), static_cast<double>(counts.f[i]));
  return out;
}

// Leave uncovered the k - m_arms arms with the smallest sampled means
// (ties toward the lower index). Returns ascending indices.
inline std::vector<int> mpts_select(const std::vector<double>& samples, int m_arms) {
  const int k = static_cast<int>(samples.size());
  if (m_arms < 0 || m_arms > k)
    throw std::invalid_argument("mpts_select: m_arms outside [0,k]");
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return samples[a] < samples[b] || (samples[a] == samples[b] && a < b);
  });
  std::vector<int> uncovered(idx.begin(), idx.begin() + (k - m_arms));
  std::sort(uncovered.begin(), uncovered.end());
  return uncovered;
}

// Uncovered set left by the scaled-knapsack cover of the sampled values.
inline std::vector<int> cts_select(const std::vector<double>& samples,
                                   const std::vector<double>& theta_hat, double q,
                                   const PolicyConfig& cfg) {
  if (samples.size() != theta_hat.size())
    throw std::invalid_argument("cts_select: samples/theta length mismatch");
  const KnapsackSolution sol = solve_scaled_dp(samples, theta_hat, q, cfg.scale_s);
  std::vector<std::uint8_t> covered(samples.size(), 0);
  for (int i : sol.chosen) covered[i] = 1;
  std::vector<int> uncovered;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!covered[i]) uncovered.push_back(static_cast<int>(i));
  return uncovered;
}

// Lower confidence bound on each arm's mean loss, clamped at zero. Arms
// never pulled keep index 0 and hence get kicked into the observed set
// until they have data. Means strip the uniform prior.
inline std::vector<double> lcb_index(const BetaCounts& counts, long long t,
                                     const PolicyConfig& cfg) {
  if (t < 1) throw std::invalid_argument("lcb_index: t must be >= 1");
  std::vector<double> out(counts.num_arms());
  for (int i = 0; i < counts.num_arms(); ++i) {
    const double pulls = static_cast<double>(std::max<long long>(1, counts.pulls[i]));
    const double mean = static_cast<double>(counts.s[i] - 1) / pulls;
    const double radius =
        std::sqrt(cfg.lcb_exploration * std::log(static_cast<double>(t)) / pulls);
    out[i] = std::max(0.0, mean - radius);
  }
  return out;
}

// Fold one round of feedback into the posteriors of the uncovered arms
// only; covered arms saw nothing usable.
inline void posterior_update(BetaCounts& counts, const std::vector<int>& uncovered,
                             const FeedbackVector& fb) {
  if (static_cast<int>(fb.losses.size()) != counts.num_arms())
    throw std::invalid_argument("posterior_update: feedback length mismatch");
  for (int i : uncovered) {
    if (i < 0 || i >= counts.num_arms())
      throw std::invalid_argument("posterior_update: index out of range");
    counts.s[i] += fb.losses[i];
    counts.f[i] += 1 - fb.losses[i];
    counts.pulls[i] += 1;
  }
}

// Knapsack front-end for the phase-2 loop: re-solves every resolve_period
// rounds and memoizes solutions on the scaled integer value vector, since
// the weights and capacity are fixed after estimation.
class KnapsackOracle {
 public:
  KnapsackOracle(std::vector<double> weights, double capacity, PolicyConfig cfg)
      : weights_(std::move(weights)), capacity_(capacity), cfg_(cfg) {}

  const std::vector<int>& select_covered(const std::vector<double>& values) {
    if (has_last_ && rounds_since_solve_ < cfg_.resolve_period) {
      ++rounds_since_solve_;
      return last_;
    }
    std::vector<long long> key(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      key[i] = std::llround(values[i] * static_cast<double>(cfg_.scale_s));
    auto it = memo_.find(key);
    if (it == memo_.end()) {
      KnapsackSolution sol = solve_scaled_dp(values, weights_, capacity_, cfg_.scale_s);
      it = memo_.emplace(std::move(key), std::move(sol.chosen)).first;
    }
    last_ = it->second;
    rounds_since_solve_ = 1;
    has_last_ = true;
    return last_;
  }

 private:
  std::vector<double> weights_;
  double capacity_;
  PolicyConfig cfg_;
  std::map<std::vector<long long>, std::vector<int>> memo_;
  std::vector<int> last_;
  int rounds_since_solve_ = 0;
  bool has_last_ = false;
};

namespace detail {

inline void record_round(RegretTrace& trace, const CsbInstance& inst,
                         const Allocation& alloc, const FeedbackVector& fb,
                         double optimal_loss) {
  const double r = round_regret(inst, alloc, optimal_loss);
  trace.per_round_regret.push_back(r);
  const double prev = trace.cumulative_regret.empty() ? 0.0 : trace.cumulative_regret.back();
  trace.cumulative_regret.push_back(prev + r);
  double realized = 0.0;
  for (auto y : fb.losses) realized += y;
  trace.realized_loss.push_back(realized);
}

}  // namespace detail

struct StEstimationResult {
  double theta_hat = 0.0;
  int rounds = 0;
  bool done = false;
};

// Run the common-threshold search against the environment until it settles
// or max_rounds is hit. When trace is given, regret (against optimal_loss)
// is recorded for every round spent here.
inline StEstimationResult run_st_estimation(const CsbInstance& inst, double delta,
                                            double epsilon, ReplicationRng& rng,
                                            int max_rounds, RegretTrace* trace = nullptr,
                                            double optimal_loss = 0.0) {
  if (!inst.theta.is_common())
    throw std::invalid_argument("run_st_estimation: requires a common-threshold instance");
  CommonSearchState st =
      make_common_search(inst.num_arms(), inst.budget_q, delta, epsilon);
  while (!st.done && st.rounds_used < max_rounds) {
    const Allocation alloc = st_allocation(st);
    const FeedbackVector fb = environment_step(inst, alloc, rng.environment);
    if (trace) detail::record_round(*trace, inst, alloc, fb, optimal_loss);
    st_step(st, fb);
  }
  return StEstimationResult{st.theta_hat(), st.rounds_used, st.done};
}

struct DtEstimationResult {
  std::vector<double> estimates;
  int rounds = 0;
  bool done = false;
};

// Per-arm counterpart of run_st_estimation.
inline DtEstimationResult run_dt_estimation(const CsbInstance& inst, double delta,
                                            double epsilon, double gamma,
                                            ReplicationRng& rng, int max_rounds,
                                            RegretTrace* trace = nullptr,
                                            double optimal_loss = 0.0) {
  PerArmSearchState st =
      make_per_arm_search(inst.num_arms(), inst.budget_q, gamma, delta, epsilon);
  while (!st.all_good() && st.rounds_used < max_rounds) {
    const DtRoundPlan plan = dt_allocation(st, rng.policy);
    const FeedbackVector fb = environment_step(inst, plan.allocation, rng.environment);
    if (trace) detail::record_round(*trace, inst, plan.allocation, fb, optimal_loss);
    dt_step(st, fb, plan.tested);
  }
  return DtEstimationResult{st.estimate, st.rounds_used, st.all_good()};
}

// Common-threshold algorithm: candidate-grid threshold search, then
// Thompson sampling over which k-m arms stay uncovered. Supplying
// known_theta_c skips the search (spending zero rounds) and starts phase 2
// from the allocation-equivalent threshold. Pass optimal_loss when the
// caller has already solved the instance; otherwise it is computed here.
inline RegretTrace run_csb_st(const CsbInstance& inst, int horizon, double delta,
                              double epsilon, ReplicationRng& rng,
                              std::optional<double> known_theta_c = std::nullopt,
                              std::optional<double> optimal_loss = std::nullopt) {
  if (!inst.theta.is_common())
    throw std::invalid_argument("run_csb_st: requires a common-threshold instance");
  if (horizon < 1) throw std::invalid_argument("run_csb_st: horizon must be >= 1");
  const int k = inst.num_arms();
  const double q = inst.budget_q;
  const double opt =
      optimal_loss ? *optimal_loss : optimal_allocation(inst).optimal_mean_loss;

  RegretTrace trace;
  double theta_hat;
  if (known_theta_c) {
    theta_hat = allocation_equivalent_theta(*known_theta_c, q, k).theta_hat;
    trace.phase1_end_round = 0;
    trace.estimation_complete = true;
  } else {
    const StEstimationResult est =
        run_st_estimation(inst, delta, epsilon, rng, horizon, &trace, opt);
    theta_hat = est.theta_hat;
    trace.phase1_end_round = est.rounds;
    trace.estimation_complete = est.done;
  }
  trace.theta_estimate = {theta_hat};
  if (!trace.estimation_complete) return trace;

  // Covered count is q/theta_hat, integral by construction of the grid.
  const double ratio = q / theta_hat;
  const long long m_ll = std::llround(ratio);
  if (std::abs(ratio - static_cast<double>(m_ll)) > 1e-6 || m_ll < 0 || m_ll > k)
    throw std::logic_error("run_csb_st: covered count q/theta_hat is not integral");
  const int m = static_cast<int>(m_ll);

  BetaCounts counts(k);
  Allocation alloc;
  alloc.amounts.assign(k, 0.0);
  while (static_cast<int>(trace.per_round_regret.size()) < horizon) {
    const std::vector<double> samples = posterior_sample(counts, rng.policy);
    const std::vector<int> uncovered = mpts_select(samples, m);
    std::fill(alloc.amounts.begin(), alloc.amounts.end(), theta_hat);
    for (int i : uncovered) alloc.amounts[i] = 0.0;
    const FeedbackVector fb = environment_step(inst, alloc, rng.environment);
    detail::record_round(trace, inst, alloc, fb, opt);
    trace.phase2_uncovered_sets.push_back(uncovered);
    posterior_update(counts, uncovered, fb);
  }
  return trace;
}

// Per-arm algorithm: interval-halving threshold search, then Thompson
// sampling (or the LCB comparator when use_lcb) through the scaled-knapsack
// oracle over the estimated thresholds.
inline RegretTrace run_csb_dt(const CsbInstance& inst, int horizon, double delta,
                              double epsilon, double gamma, const PolicyConfig& cfg,
                              bool use_lcb, ReplicationRng& rng,
                              std::optional<double> optimal_loss = std::nullopt) {
  if (inst.theta.is_common())
    throw std::invalid_argument("run_csb_dt: requires a per-arm instance");
  if (horizon < 1) throw std::invalid_argument("run_csb_dt: horizon must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("run_csb_dt: gamma must be > 0");
  const int k = inst.num_arms();
  const double opt =
      optimal_loss ? *optimal_loss : optimal_allocation(inst).optimal_mean_loss;

  RegretTrace trace;
  const DtEstimationResult est =
      run_dt_estimation(inst, delta, epsilon, gamma, rng, horizon, &trace, opt);
  trace.phase1_end_round = est.rounds;
  trace.estimation_complete = est.done;
  trace.theta_estimate = est.estimates;
  if (!trace.estimation_complete) return trace;

  BetaCounts counts(k);
  KnapsackOracle oracle(est.estimates, inst.budget_q, cfg);
  Allocation alloc;
  alloc.amounts.assign(k, 0.0);
  long long phase2_round = 0;
  while (static_cast<int>(trace.per_round_regret.size()) < horizon) {
    ++phase2_round;
    const std::vector<double> values = use_lcb
                                           ? lcb_index(counts, phase2_round, cfg)
                                           : posterior_sample(counts, rng.policy);
    const std::vector<int>& covered = oracle.select_covered(values);
    std::fill(alloc.amounts.begin(), alloc.amounts.end(), 0.0);
    for (int i : covered) alloc.amounts[i] = est.estimates[i];
    std::vector<int> uncovered;
    uncovered.reserve(k - covered.size());
    for (int i = 0, j = 0; i < k; ++i) {
      if (j < static_cast<int>(covered.size()) && covered[j] == i)
        ++j;
      else
        uncovered.push_back(i);
    }
    const FeedbackVector fb = environment_step(inst, alloc, rng.environment);
    detail::record_round(trace, inst, alloc, fb, opt);
    trace.phase2_uncovered_sets.push_back(uncovered);
    posterior_update(counts, uncovered, fb);
  }
  return trace;
}

}  // namespace csb
