#pragma once

// Threshold estimation phases.
//
// Losses are only visible below the (unknown) threshold, so both searches
// probe an allocation level and wait: an observed loss proves the probe is
// below the threshold, while a long enough quiet streak (window W rounds)
// makes "at or above" likely. W is sized so that all quiet-streak
// conclusions are simultaneously right with probability 1 - delta, given
// every mean is at least epsilon.
//
// The common-threshold search walks the finite candidate grid q/m; the
// per-arm search halves a real interval per arm until it is narrower than
// gamma.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "csb/core.hpp"
#include "csb/knapsack.hpp"
#include "csb/rng.hpp"

namespace csb {

namespace detail {

inline void check_window_params(double delta, double epsilon, const char* who) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument(std::string(who) + ": delta outside (0,1)");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument(std::string(who) + ": epsilon outside (0,1)");
}

}  // namespace detail

// Quiet-streak length for the common-threshold search. Every round spent
// at an underestimate exposes max{1, floor(q)} covered arms, each leaking
// a loss with probability >= epsilon, hence the denominator.
inline int st_window(int k, double q, double delta, double epsilon) {
  detail::check_window_params(delta, epsilon, "st_window");
  const std::size_t n = theta_candidate_set(k, q).size();
  if (n <= 1) return 1;  // search is already decided; one round suffices
  const double num = std::log(std::log2(static_cast<double>(n)) / delta);
  const double den =
      std::max(1.0, std::floor(q)) * std::log(1.0 / (1.0 - epsilon));
  return std::max(1, static_cast<int>(std::ceil(num / den)));
}

// Binary search over the candidate grid. Indices lower < current <= upper
// are 1-based positions in candidate_set; candidates at or below lower are
// proven underestimates, the one at upper is the best surviving guess.
struct CommonSearchState {
  std::vector<double> candidate_set;
  int k = 0;
  double q = 0.0;
  int lower = 0;
  int upper = 0;
  int current = 0;
  int quiet_count = 0;
  int window = 1;
  int rounds_used = 0;
  bool done = false;

  double theta_hat() const { return candidate_set[(done ? upper : current) - 1]; }

  // Arms covered by the current probe: floor(q / theta) of them. The small
  // slack absorbs division dust when theta is exactly q/m.
  int covered_prefix() const {
    const double theta = candidate_set[current - 1];
    return static_cast<int>(
        std::min<double>(std::floor(q / theta + kFeasibilitySlack), k));
  }
};

inline CommonSearchState make_common_search(int k, double q, double delta,
                                            double epsilon) {
  CommonSearchState st;
  st.candidate_set = theta_candidate_set(k, q);
  st.k = k;
  st.q = q;
  st.window = st_window(k, q, delta, epsilon);
  st.lower = 0;
  st.upper = static_cast<int>(st.candidate_set.size());
  st.current = (st.upper + 1) / 2;
  st.done = (st.current == st.upper);
  return st;
}

// Probe allocation: the first covered_prefix() arms get the current
// candidate each, the rest get nothing.
inline Allocation st_allocation(const CommonSearchState& st) {
  if (st.done) throw std::logic_error("st_allocation: search already finished");
  Allocation alloc;
  alloc.amounts.assign(st.k, 0.0);
  const double theta = st.candidate_set[st.current - 1];
  const int m = st.covered_prefix();
  for (int i = 0; i < m; ++i) alloc.amounts[i] = theta;
  return alloc;
}

// Advance the search by one observed round. Only losses inside the covered
// prefix count: they prove the probe is below the true threshold. Losses
// at unallocated arms carry no information about the probe level.
inline void st_step(CommonSearchState& st, const FeedbackVector& fb) {
  if (st.done) throw std::logic_error("st_step: search already finished");
  if (static_cast<int>(fb.losses.size()) != st.k)
    throw std::invalid_argument("st_step: feedback length mismatch");
  const int m = st.covered_prefix();
  bool loss = false;
  for (int i = 0; i < m && !loss; ++i) loss = fb.losses[i] != 0;
  if (loss) {
    st.lower = st.current;
    st.current = st.lower + (st.upper - st.lower + 1) / 2;  // ceil
    st.quiet_count = 0;
  } else if (++st.quiet_count == st.window) {
    st.upper = st.current;
    st.current = st.upper - (st.upper - st.lower) / 2;  // floor
    st.quiet_count = 0;
  }
  ++st.rounds_used;
  st.done = (st.current == st.upper);
}

// Quiet-streak length for the per-arm search: a union bound over the k
// searches and the ceil(log2(1+1/gamma)) halvings each can make.
inline int dt_window(int k, double gamma, double delta, double epsilon) {
  detail::check_window_params(delta, epsilon, "dt_window");
  if (k < 1) throw std::invalid_argument("dt_window: k must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("dt_window: gamma must be > 0");
  const double halvings = std::log2(std::ceil(1.0 + 1.0 / gamma));
  const double num = std::log(static_cast<double>(k) * halvings / delta);
  const double den = std::log(1.0 / (1.0 - epsilon));
  return std::max(1, static_cast<int>(std::ceil(num / den)));
}

// Independent interval-halving search per arm. The true threshold stays in
// (lower[i], upper[i]] as long as no quiet streak was a fluke; an arm is
// finished (good) once its interval is no wider than gamma, after which its
// estimate is pinned to the interval's upper end.
struct PerArmSearchState {
  std::vector<double> lower, upper, estimate;
  std::vector<std::uint8_t> good;
  std::vector<int> quiet_count;
  double q = 0.0;
  double gamma = 0.0;
  int window = 1;
  int rounds_used = 0;

  int num_arms() const { return static_cast<int>(estimate.size()); }
  bool all_good() const {
    for (auto g : good)
      if (!g) return false;
    return true;
  }
};

inline PerArmSearchState make_per_arm_search(int k, double q, double gamma,
                                             double delta, double epsilon) {
  if (k < 1) throw std::invalid_argument("make_per_arm_search: k must be >= 1");
  if (!(q >= 0.0)) throw std::invalid_argument("make_per_arm_search: q must be >= 0");
  if (!(gamma > 0.0))
    throw std::invalid_argument("make_per_arm_search: gamma must be > 0");
  PerArmSearchState st;
  st.lower.assign(k, 0.0);
  st.upper.assign(k, 1.0);
  st.good.assign(k, 0);
  st.quiet_count.assign(k, 0);
  st.q = q;
  st.gamma = gamma;
  st.window = dt_window(k, gamma, delta, epsilon);
  // Round-one probes double as the seed allocation: the first floor(q)
  // arms start at the midpoint 1/2, the rest split the leftover budget.
  st.estimate.assign(k, 0.5);
  const int n_half = static_cast<int>(
      std::min<double>(std::floor(q), k));
  if (n_half < k) {
    const double share =
        std::min(1.0, (q - 0.5 * n_half) / static_cast<double>(k - n_half));
    for (int i = n_half; i < k; ++i) st.estimate[i] = share;
  }
  return st;
}

struct DtRoundPlan {
  Allocation allocation;
  std::vector<int> tested;  // arms granted exactly their requested estimate
};

// Build one round's allocation. Round one plays the seed estimates (they
// sum to exactly q). Afterwards, unfinished arms are served in index order
// when the remaining budget covers their probe; leftover budget then goes,
// one probe at a time, to uniformly random finished arms without
// replacement while any still fits.
inline DtRoundPlan dt_allocation(const PerArmSearchState& st, RngStream& policy_rng) {
  const int k = st.num_arms();
  DtRoundPlan plan;
  plan.allocation.amounts.assign(k, 0.0);
  if (st.rounds_used == 0) {
    for (int i = 0; i < k; ++i) plan.allocation.amounts[i] = st.estimate[i];
    plan.tested.resize(k);
    for (int i = 0; i < k; ++i) plan.tested[i] = i;
    return plan;
  }
  double remaining = st.q;
  std::vector<int> finished;
  for (int i = 0; i < k; ++i) {
    if (st.good[i]) {
      finished.push_back(i);
      continue;
    }
    if (st.estimate[i] <= remaining + kFeasibilitySlack) {
      plan.allocation.amounts[i] = st.estimate[i];
      remaining -= st.estimate[i];
      plan.tested.push_back(i);
    }
  }
  while (!finished.empty()) {
    std::vector<int> fits;
    for (int i : finished)
      if (st.estimate[i] <= remaining + kFeasibilitySlack) fits.push_back(i);
    if (fits.empty()) break;
    const int pick = fits[policy_rng.uniform_index(fits.size())];
    plan.allocation.amounts[pick] = st.estimate[pick];
    remaining -= st.estimate[pick];
    plan.tested.push_back(pick);
    finished.erase(std::find(finished.begin(), finished.end(), pick));
  }
  std::sort(plan.tested.begin(), plan.tested.end());
  return plan;
}

// Advance every unfinished arm that was actually probed this round. A loss
// raises the arm's lower bound to the probe; a full quiet window lowers the
// upper bound to it, and once the interval closes to gamma the arm is done
// with its estimate pinned to the upper bound. Arms that were denied budget
// (or are finished) keep their state, quiet counters included.
inline void dt_step(PerArmSearchState& st, const FeedbackVector& fb,
                    const std::vector<int>& tested) {
  const int k = st.num_arms();
  if (static_cast<int>(fb.losses.size()) != k)
    throw std::invalid_argument("dt_step: feedback length mismatch");
  for (int i : tested) {
    if (i < 0 || i >= k) throw std::invalid_argument("dt_step: tested index out of range");
    if (st.good[i]) continue;
    if (fb.losses[i]) {
      st.lower[i] = st.estimate[i];
      st.estimate[i] = 0.5 * (st.upper[i] + st.lower[i]);
      st.quiet_count[i] = 0;
    } else if (++st.quiet_count[i] == st.window) {
      st.upper[i] = st.estimate[i];
      st.estimate[i] = 0.5 * (st.upper[i] + st.lower[i]);
      st.quiet_count[i] = 0;
      if (st.upper[i] - st.lower[i] <= st.gamma) {
        st.good[i] = 1;
        st.estimate[i] = st.upper[i];
      }
    }
  }
  ++st.rounds_used;
}

}  // namespace csb
