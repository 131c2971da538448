// Minimal walkthrough: build an instance, run both policies once, print
// where the regret ended up. See README.md for the CLI equivalent.

#include <cstdio>

#include <csb/csb.hpp>

int main() {
  // 20 arms, loss rates 0.25, 0.27, ..., 0.63, one shared threshold 0.6,
  // budget 6: the optimum censors the ten largest-loss arms.
  std::vector<double> mu(20);
  for (int i = 0; i < 20; ++i) mu[i] = 0.25 + 0.02 * i;
  const auto inst = csb::make_instance(mu, csb::ThetaSpec::common(0.6), 6.0);
  const auto opt = csb::optimal_allocation(inst);
  std::printf("optimal mean loss: %.2f, covered arms:", opt.optimal_mean_loss);
  for (int i : opt.covered) std::printf(" %d", i + 1);
  std::printf("\n");

  auto rng = csb::ReplicationRng::make(/*master_seed=*/1, /*replication=*/0);
  const auto trace =
      csb::run_csb_st(inst, /*horizon=*/2000, /*delta=*/0.1, /*epsilon=*/0.1, rng,
                      std::nullopt, opt.optimal_mean_loss);
  std::printf("threshold search finished after %d rounds with theta_hat=%.3f\n",
              trace.phase1_end_round, trace.theta_estimate.at(0));
  std::printf("cumulative regret after %zu rounds: %.2f\n",
              trace.cumulative_regret.size(), trace.final_regret());
  return 0;
}
