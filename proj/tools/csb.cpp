// Command-line harness for the censored semi-bandits library.
//
//   csb run    --config FILE [--seed U64] [--reps R] [--out DIR] [--jobs J]
//   csb sweep  --config FILE --param {q|theta_c} --values a,b,c [...]
//   csb verify [--cases N]
//
// run/sweep write regret.csv, summary.json and regret.svg to the output
// directory. verify exercises the knapsack solver against brute force and
// both estimation phases on noiseless instances, exiting nonzero on any
// mismatch.

#include <cinttypes>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <csb/csb.hpp>

namespace {

void print_series(const csb::AggregateTrace& agg, const std::string& out_dir) {
  std::printf("%s (%s): reps=%d horizon=%d final_regret=%.6g ci=[%.6g, %.6g] "
              "recovery=%.2f phase1_mean=%.1f",
              agg.label.c_str(), agg.policy.c_str(), agg.replications, agg.horizon,
              agg.final_regret(), agg.ci_low.empty() ? 0.0 : agg.ci_low.back(),
              agg.ci_high.empty() ? 0.0 : agg.ci_high.back(), agg.recovery_rate,
              agg.phase1_rounds_mean);
  if (agg.envelope_final) std::printf(" envelope=%.6g", *agg.envelope_final);
  std::printf("\n");
  (void)out_dir;
}

int verify_knapsack(int cases) {
  std::mt19937_64 gen(20240915u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int failures = 0;
  for (int c = 0; c < cases; ++c) {
    std::uniform_int_distribution<int> num(1, 12);
    const int n = num(gen);
    std::vector<double> w(n), v(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = 1.0 - unit(gen);  // (0, 1]
      v[i] = 1.0 - unit(gen);
      wsum += w[i];
    }
    const double cap = unit(gen) * wsum;
    const auto exact = csb::solve_bruteforce(v, w, cap);
    const auto scaled = csb::solve_scaled_dp(v, w, cap, 10000);
    double scaled_weight = 0.0;
    for (int i : scaled.chosen) scaled_weight += w[i];
    const double tol = 2.0 * n / 10000.0;
    if (scaled_weight > cap + csb::kFeasibilitySlack ||
        scaled.total_value < exact.total_value - tol) {
      ++failures;
      std::fprintf(stderr, "knapsack case %d: brute=%.8f scaled=%.8f weight=%.8f cap=%.8f\n",
                   c, exact.total_value, scaled.total_value, scaled_weight, cap);
    }
  }
  std::printf("knapsack equivalence: %d/%d cases ok\n", cases - failures, cases);
  return failures;
}

int verify_noiseless(int cases) {
  std::mt19937_64 gen(77001122u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int failures = 0;
  for (int c = 0; c < cases; ++c) {
    // common threshold: any budget >= theta_c leaves a recoverable candidate
    std::uniform_int_distribution<int> karms(3, 20);
    const int k = karms(gen);
    const double theta_c = 0.05 + 0.95 * unit(gen);
    const double q = theta_c + (k - theta_c) * unit(gen);
    const auto inst = csb::make_instance(std::vector<double>(k, 1.0),
                                         csb::ThetaSpec::common(theta_c), q);
    csb::ReplicationRng rng = csb::ReplicationRng::make(900 + c, 0);
    const auto st = csb::run_st_estimation(inst, 0.1, 0.1, rng, 10000);
    const double target = csb::allocation_equivalent_theta(theta_c, q, k).theta_hat;
    if (!st.done || std::abs(st.theta_hat - target) > 1e-12) {
      ++failures;
      std::fprintf(stderr, "noiseless st case %d: theta_hat=%.12f target=%.12f\n", c,
                   st.theta_hat, target);
      continue;
    }

    // per-arm: budget >= 1 keeps at least one probe feasible every round
    std::uniform_int_distribution<int> karms2(2, 10);
    const int k2 = karms2(gen);
    std::vector<double> theta(k2);
    for (double& t : theta) t = 0.05 + 0.95 * unit(gen);
    const double q2 = 1.0 + (k2 - 1.0) * unit(gen);
    const double gamma = 1e-3;
    const auto inst2 = csb::make_instance(std::vector<double>(k2, 1.0),
                                          csb::ThetaSpec::per_arm(theta), q2);
    csb::ReplicationRng rng2 = csb::ReplicationRng::make(7700 + c, 0);
    const auto dt = csb::run_dt_estimation(inst2, 0.1, 0.1, gamma, rng2, 50000);
    bool ok = dt.done;
    for (int i = 0; ok && i < k2; ++i)
      if (dt.estimates[i] < theta[i] - 1e-12 || dt.estimates[i] > theta[i] + gamma + 1e-12)
        ok = false;
    if (!ok) {
      ++failures;
      std::fprintf(stderr, "noiseless dt case %d failed\n", c);
    }
  }
  std::printf("noiseless estimation: %d/%d cases ok\n", cases - failures, cases);
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"censored semi-bandit experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int reps = 0;
  int jobs = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override the config's master seed");
    cmd->add_option("--reps", reps, "override the config's replication count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", out_dir, "override the config's output directory");
    cmd->add_option("--jobs", jobs, "max parallel replications (default: all cores)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment and write outputs");
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "re-run the config across parameter values");
  add_common(sweep);
  std::string param;
  std::vector<double> values;
  sweep->add_option("--param", param, "parameter to sweep: q or theta_c")->required();
  sweep->add_option("--values", values, "comma-separated values")
      ->required()
      ->delimiter(',');

  CLI::App* verify = app.add_subcommand("verify", "run the self-check suites");
  int cases = 200;
  verify->add_option("--cases", cases, "number of random knapsack cases")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const int bad = verify_knapsack(cases) + verify_noiseless(50);
      if (bad > 0) {
        std::fprintf(stderr, "verify: %d failure(s)\n", bad);
        return 1;
      }
      std::printf("verify: all checks passed\n");
      return 0;
    }

    csb::ExperimentConfig cfg = csb::load_config(config_path);
    const CLI::App* active = run->parsed() ? run : sweep;
    if (active->count("--seed")) cfg.master_seed = seed;
    if (reps > 0) cfg.replications = reps;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    std::vector<csb::AggregateTrace> traces;
    if (run->parsed()) {
      traces.push_back(csb::run_experiment(cfg, jobs));
    } else {
      traces = csb::sweep(cfg, param, values, jobs);
    }
    csb::emit_outputs(traces, cfg.output_dir);
    for (const auto& t : traces) print_series(t, cfg.output_dir);
    std::printf("wrote %s/regret.csv, summary.json, regret.svg\n", cfg.output_dir.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
