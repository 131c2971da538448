#pragma once

// Knapsack machinery shared by the optimal-allocation oracle and the
// per-round combinatorial policies.
//
// Covering an arm costs its threshold and saves its mean loss, so the best
// action covers a max-value set of arms under the budget: a 0-1 knapsack
// with weights theta and values mu. Two solvers are provided: exhaustive
// enumeration (exact, up to 20 items) and a scaled integer DP indexed by
// value on a 1/S grid. The DP keeps weights exact, so its chosen set is
// always feasible under the real weights and its value is within 2K/S of
// the exact optimum (the only error is value rounding).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "csb/core.hpp"

namespace csb {

struct KnapsackSolution {
  std::vector<int> chosen;  // ascending indices
  double total_value = 0.0;
  double total_weight = 0.0;
};

// All values a common threshold can be rounded up to without wasting
// budget: q/m for integer m from k down, keeping values <= 1, with
// min{1,q} always the top element. Strictly increasing.
inline std::vector<double> theta_candidate_set(int k, double q) {
  if (k < 1) throw std::invalid_argument("theta_candidate_set: k must be >= 1");
  if (!(q > 0.0)) throw std::invalid_argument("theta_candidate_set: q must be > 0");
  std::vector<double> out;
  for (int m = k; m >= 1; --m) {
    const double v = q / m;
    if (v > 1.0) break;
    out.push_back(v);
  }
  const double top = std::min(1.0, q);
  if (out.empty() || out.back() < top) out.push_back(top);
  return out;
}

struct EquivalenceResult {
  int m_arms = 0;      // how many arms the budget covers at theta_hat
  double theta_hat = 0.0;
  std::vector<double> candidate_set;
};

// Rounds a common threshold up to the coarsest value that covers the same
// number of arms: m = min{floor(q/theta_c), k}, theta_hat = q/m. Covering
// m arms at theta_hat spends the whole budget no worse than theta_c would.
inline EquivalenceResult allocation_equivalent_theta(double theta_c, double q, int k) {
  if (k < 1) throw std::invalid_argument("allocation_equivalent_theta: k must be >= 1");
  if (!(theta_c > 0.0 && theta_c <= 1.0))
    throw std::invalid_argument("allocation_equivalent_theta: theta_c outside (0,1]");
  if (q < theta_c)
    throw std::invalid_argument("allocation_equivalent_theta: budget " +
                                std::to_string(q) + " below threshold " +
                                std::to_string(theta_c));
  EquivalenceResult res;
  res.m_arms = static_cast<int>(
      std::min<long long>(static_cast<long long>(std::floor(q / theta_c)), k));
  res.theta_hat = q / res.m_arms;
  if (res.theta_hat > 1.0) {
    // Fractional budgets can push q/m past 1; covering floor(q) arms at the
    // full share 1 censors them just the same and stays within budget.
    res.theta_hat = std::min(1.0, q);
    res.m_arms = static_cast<int>(std::min<long long>(
        static_cast<long long>(std::floor(q / res.theta_hat + kFeasibilitySlack)), k));
  }
  res.candidate_set = theta_candidate_set(k, q);
  return res;
}

namespace detail {

// Lexicographic order on ascending index sets of equal cardinality.
inline bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline std::vector<int> mask_to_indices(std::uint32_t mask, int n) {
  std::vector<int> idx;
  for (int i = 0; i < n; ++i)
    if (mask >> i & 1u) idx.push_back(i);
  return idx;
}

}  // namespace detail

// Exact solver by exhaustive enumeration. Ties on value are broken toward
// fewer items, then the lexicographically smallest index set, so results
// are deterministic.
inline KnapsackSolution solve_bruteforce(const std::vector<double>& values,
                                         const std::vector<double>& weights,
                                         double capacity) {
  const int n = static_cast<int>(values.size());
  if (weights.size() != values.size())
    throw std::invalid_argument("solve_bruteforce: values/weights length mismatch");
  if (n > 20) throw std::invalid_argument("solve_bruteforce: more than 20 items");
  if (!(capacity >= 0.0))
    throw std::invalid_argument("solve_bruteforce: capacity must be >= 0");

  std::uint32_t best_mask = 0;
  double best_value = 0.0;
  double best_weight = 0.0;
  int best_count = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double w = 0.0, v = 0.0;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1u) {
        w += weights[i];
        v += values[i];
      }
    }
    if (w > capacity + kFeasibilitySlack) continue;
    const int c = __builtin_popcount(mask);
    bool better = v > best_value;
    if (!better && v == best_value) {
      if (c < best_count) {
        better = true;
      } else if (c == best_count && mask != best_mask) {
        better = detail::lex_less(detail::mask_to_indices(mask, n),
                                  detail::mask_to_indices(best_mask, n));
      }
    }
    if (better) {
      best_mask = mask;
      best_value = v;
      best_weight = w;
      best_count = c;
    }
  }
  KnapsackSolution sol;
  sol.chosen = detail::mask_to_indices(best_mask, n);
  sol.total_value = best_value;
  sol.total_weight = best_weight;
  return sol;
}

// Scaled 0-1 knapsack DP indexed by value. Values are rounded to the
// nearest point of the 1/S grid; the table tracks the minimum real weight
// achieving each scaled value, and the answer is the largest scaled value
// whose minimal weight fits the capacity. Weights are never rounded, so
// the chosen set is always feasible in real units and the value is within
// 2K/S of the exact optimum. The reported totals are in original units.
// O(K^2 * S) time since the value range is at most K*S.
inline KnapsackSolution solve_scaled_dp(const std::vector<double>& values,
                                        const std::vector<double>& weights,
                                        double capacity, long long scale_s) {
  const int n = static_cast<int>(values.size());
  if (weights.size() != values.size())
    throw std::invalid_argument("solve_scaled_dp: values/weights length mismatch");
  if (scale_s < 1) throw std::invalid_argument("solve_scaled_dp: scale must be >= 1");
  if (!(capacity >= 0.0))
    throw std::invalid_argument("solve_scaled_dp: capacity must be >= 0");

  std::vector<long long> v_int(n);
  long long v_total = 0;
  for (int i = 0; i < n; ++i) {
    const double vs = values[i] * static_cast<double>(scale_s);
    if (!(vs < 4.0e15))
      throw std::invalid_argument("solve_scaled_dp: scaled value overflows index type");
    v_int[i] = std::max<long long>(0, std::llround(vs));
    v_total += v_int[i];
  }
  if (v_total > 4'000'000 ||
      static_cast<long long>(n) * (v_total + 1) > 80'000'000)
    throw std::invalid_argument("solve_scaled_dp: scaled value range overflows index type");

  // dpw[v]: least real weight reaching scaled value v over the items seen
  // so far, infinity if unreachable. Ties prefer not taking, which keeps
  // chosen sets deterministic.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dpw(static_cast<std::size_t>(v_total) + 1, inf);
  dpw[0] = 0.0;
  std::vector<std::uint8_t> take(static_cast<std::size_t>(n) * (v_total + 1), 0);
  long long reach = 0;  // prefix sum of v_int: highest value reachable so far
  for (int i = 0; i < n; ++i) {
    const long long v = v_int[i];
    const double w = weights[i];
    reach += v;
    std::uint8_t* take_i = take.data() + static_cast<std::size_t>(i) * (v_total + 1);
    for (long long c = reach; c >= v; --c) {
      const double cand = dpw[c - v] + w;
      if (cand < dpw[c]) {
        dpw[c] = cand;
        take_i[c] = 1;
      }
    }
  }

  long long best = 0;
  for (long long c = v_total; c > 0; --c) {
    if (dpw[c] <= capacity + kFeasibilitySlack) {
      best = c;
      break;
    }
  }

  KnapsackSolution sol;
  long long c = best;
  for (int i = n - 1; i >= 0; --i) {
    if (take[static_cast<std::size_t>(i) * (v_total + 1) + c]) {
      sol.chosen.push_back(i);
      c -= v_int[i];
    }
  }
  std::reverse(sol.chosen.begin(), sol.chosen.end());
  for (int i : sol.chosen) {
    sol.total_value += values[i];
    sol.total_weight += weights[i];
  }
  return sol;
}

struct OptimalAllocation {
  Allocation allocation;          // theta_i on covered arms, 0 elsewhere
  double optimal_mean_loss = 0.0; // sum of mu over uncovered arms
  std::vector<int> covered;       // ascending indices
};

// Ground-truth best action for an instance: cover the max-mu set of arms
// whose thresholds fit the budget. Exact enumeration up to 20 arms, scaled
// DP beyond.
inline OptimalAllocation optimal_allocation(const CsbInstance& inst) {
  const int k = inst.num_arms();
  std::vector<double> weights(k);
  for (int i = 0; i < k; ++i) weights[i] = inst.theta_of(i);
  const KnapsackSolution sol =
      k <= 20 ? solve_bruteforce(inst.mu, weights, inst.budget_q)
              : solve_scaled_dp(inst.mu, weights, inst.budget_q, 10000);
  OptimalAllocation out;
  out.covered = sol.chosen;
  out.allocation.amounts.assign(k, 0.0);
  double covered_mu = 0.0;
  for (int i : sol.chosen) {
    out.allocation.amounts[i] = weights[i];
    covered_mu += inst.mu[i];
  }
  double total_mu = 0.0;
  for (double m : inst.mu) total_mu += m;
  out.optimal_mean_loss = total_mu - covered_mu;
  return out;
}

// Slack per arm left by the optimal cover of a per-arm instance: the
// unused budget spread over all arms. Thresholds overestimated by at most
// this amount still admit the same optimal cover.
inline double residual_gamma(const CsbInstance& inst) {
  if (inst.theta.is_common())
    throw std::invalid_argument("residual_gamma: requires a per-arm instance");
  const OptimalAllocation opt = optimal_allocation(inst);
  double used = 0.0;
  for (int i : opt.covered) used += inst.theta_of(i);
  const double residual = inst.budget_q - used;
  return residual / inst.num_arms();
}

}  // namespace csb
