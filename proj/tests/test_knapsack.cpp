#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <csb/core.hpp>
#include <csb/knapsack.hpp>

using namespace csb;

TEST_CASE("candidate set spans q/k up to min(1,q), ascending and distinct") {
  const auto grid = theta_candidate_set(20, 6.0);
  REQUIRE(grid.size() == 15);  // ceil(k - q + 1)
  REQUIRE_THAT(grid.front(), Catch::Matchers::WithinAbs(0.3, 1e-15));
  REQUIRE(grid.back() == 1.0);
  REQUIRE(std::is_sorted(grid.begin(), grid.end()));
  for (std::size_t i = 1; i < grid.size(); ++i) REQUIRE(grid[i] > grid[i - 1]);
  REQUIRE(std::count_if(grid.begin(), grid.end(), [](double v) {
            return std::abs(v - 0.6) < 1e-15;
          }) == 1);

  REQUIRE(theta_candidate_set(5, 2.0).size() == 4);
  REQUIRE(theta_candidate_set(5, 2.5).size() == 4);  // ceil(5 - 2.5 + 1)

  // fractional budget below 1: the top candidate is q itself
  const auto small = theta_candidate_set(4, 0.5);
  REQUIRE(small.back() == 0.5);
  for (double v : small) REQUIRE(v <= 0.5);
}

TEST_CASE("allocation-equivalent threshold covers floor(q/theta) arms") {
  const auto a = allocation_equivalent_theta(0.6, 6.0, 20);
  REQUIRE(a.m_arms == 10);
  REQUIRE_THAT(a.theta_hat, Catch::Matchers::WithinAbs(0.6, 1e-15));
  // the equivalent threshold always sits on the candidate grid
  bool on_grid = false;
  for (double v : a.candidate_set)
    if (std::abs(v - a.theta_hat) < 1e-12) on_grid = true;
  REQUIRE(on_grid);

  REQUIRE(allocation_equivalent_theta(0.9, 6.0, 20).m_arms == 6);
  REQUIRE(allocation_equivalent_theta(0.9, 6.0, 20).theta_hat == 1.0);
  REQUIRE(allocation_equivalent_theta(0.3, 6.0, 20).m_arms == 20);

  // fractional budget can push q/m past 1; it clamps to full shares
  const auto c = allocation_equivalent_theta(0.9, 2.5, 5);
  REQUIRE(c.theta_hat == 1.0);
  REQUIRE(c.m_arms == 2);

  REQUIRE_THROWS_AS(allocation_equivalent_theta(0.5, 0.3, 5), std::invalid_argument);
}

TEST_CASE("brute force solves small knapsacks exactly with stable ties") {
  const auto best = solve_bruteforce({0.3, 0.4, 0.5, 0.6}, {0.2, 0.3, 0.4, 0.5}, 0.5);
  REQUIRE(best.chosen == std::vector<int>{0, 1});
  REQUIRE_THAT(best.total_value, Catch::Matchers::WithinAbs(0.7, 1e-12));

  // value tie: prefer fewer items, then the lexicographically smallest set
  const auto fewer = solve_bruteforce({0.5, 0.25, 0.25}, {0.2, 0.1, 0.1}, 0.2);
  REQUIRE(fewer.chosen == std::vector<int>{0});
  const auto lex = solve_bruteforce({0.5, 0.5}, {0.3, 0.3}, 0.3);
  REQUIRE(lex.chosen == std::vector<int>{0});

  // capacity below every weight: empty solution
  const auto none = solve_bruteforce({0.9, 0.9}, {0.5, 0.6}, 0.4);
  REQUIRE(none.chosen.empty());
  REQUIRE(none.total_value == 0.0);

  REQUIRE_THROWS_AS(solve_bruteforce(std::vector<double>(21, 0.5),
                                     std::vector<double>(21, 0.5), 1.0),
                    std::invalid_argument);
}

TEST_CASE("scaled dp tracks brute force within the rounding bound") {
  std::mt19937_64 gen(555);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < 300; ++c) {
    std::uniform_int_distribution<int> num(1, 10);
    const int n = num(gen);
    std::vector<double> v(n), w(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = 1.0 - unit(gen);
      w[i] = 1.0 - unit(gen);
      wsum += w[i];
    }
    const double cap = unit(gen) * wsum;
    const long long scale = 10000;
    const auto exact = solve_bruteforce(v, w, cap);
    const auto approx = solve_scaled_dp(v, w, cap, scale);

    double weight = 0.0;
    for (int i : approx.chosen) weight += w[i];
    REQUIRE(weight <= cap + kFeasibilitySlack);
    REQUIRE(approx.total_value >= exact.total_value - 2.0 * n / scale);
    REQUIRE(approx.total_value <= exact.total_value + 1e-12);
  }
}

TEST_CASE("scaled dp is exact when weights and values sit on the grid") {
  // weights in multiples of 1/100 with scale 100: no rounding at all
  const auto sol = solve_scaled_dp({0.30, 0.20, 0.50}, {0.25, 0.25, 0.50}, 0.5, 100);
  REQUIRE(sol.chosen == std::vector<int>{0, 1});
  REQUIRE_THAT(sol.total_value, Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("optimal allocation covers the max-loss feasible set") {
  std::vector<double> mu(20);
  for (int i = 0; i < 20; ++i) mu[i] = 0.25 + 0.02 * i;
  const auto inst1 = make_instance(mu, ThetaSpec::common(0.6), 6.0);
  const auto opt1 = optimal_allocation(inst1);
  REQUIRE(opt1.covered.size() == 10);
  REQUIRE(opt1.covered.front() == 10);  // arms 11..20, 1-based
  REQUIRE(opt1.covered.back() == 19);
  REQUIRE_THAT(opt1.optimal_mean_loss, Catch::Matchers::WithinAbs(3.40, 1e-9));
  for (int i : opt1.covered) REQUIRE(opt1.allocation.amounts[i] == 0.6);
  REQUIRE_NOTHROW(check_feasible(inst1, opt1.allocation));

  const auto inst2 = make_instance({0.9, 0.89, 0.87, 0.6, 0.3},
                                   ThetaSpec::per_arm({0.7, 0.7, 0.7, 0.6, 0.35}), 2.0);
  const auto opt2 = optimal_allocation(inst2);
  REQUIRE(opt2.covered == std::vector<int>{0, 1, 3});
  REQUIRE_THAT(opt2.optimal_mean_loss, Catch::Matchers::WithinAbs(1.17, 1e-12));
}

TEST_CASE("residual slack per arm reflects unused budget") {
  const auto inst2 = make_instance({0.9, 0.89, 0.87, 0.6, 0.3},
                                   ThetaSpec::per_arm({0.7, 0.7, 0.7, 0.6, 0.35}), 2.0);
  REQUIRE_THAT(residual_gamma(inst2), Catch::Matchers::WithinAbs(0.0, 1e-12));

  const auto loose = make_instance({0.9, 0.8}, ThetaSpec::per_arm({0.3, 0.4}), 1.0);
  REQUIRE_THAT(residual_gamma(loose), Catch::Matchers::WithinAbs(0.15, 1e-12));

  const auto common = make_instance({0.5}, ThetaSpec::common(0.5), 1.0);
  REQUIRE_THROWS_AS(residual_gamma(common), std::invalid_argument);
}

TEST_CASE("thresholds inflated by less than the residual keep the optimal cover") {
  const auto loose = make_instance({0.9, 0.8}, ThetaSpec::per_arm({0.3, 0.4}), 1.0);
  const double slack = residual_gamma(loose);
  const auto base = optimal_allocation(loose);
  std::mt19937_64 gen(808);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < 50; ++c) {
    std::vector<double> bumped(2);
    for (int i = 0; i < 2; ++i)
      bumped[i] = loose.theta_of(i) + slack * unit(gen) * 0.999;
    const auto perturbed = make_instance(loose.mu, ThetaSpec::per_arm(bumped), 1.0);
    REQUIRE(optimal_allocation(perturbed).covered == base.covered);
  }
}
