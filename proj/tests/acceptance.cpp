// Acceptance gate for the library + harness. Each criterion prints one
// PASS/FAIL line with its measured numbers; the process exits with the
// number of failed criteria. Criteria needing the CLI or the bundled
// configs take them from argv:
//
//   acceptance <path-to-csb-cli> <path-to-configs-dir>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <csb/csb.hpp>

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", criterion, ok ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. The scaled DP must track brute force within 2K/S on random instances.
void criterion_knapsack_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(111222333u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int cases = 200;
  const long long scale = 10000;
  int bad = 0;
  for (int c = 0; c < cases; ++c) {
    std::uniform_int_distribution<int> num(1, 12);
    const int n = num(gen);
    std::vector<double> v(n), w(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = 1.0 - unit(gen);
      w[i] = 1.0 - unit(gen);
      wsum += w[i];
    }
    const double cap = unit(gen) * wsum;
    const auto exact = csb::solve_bruteforce(v, w, cap);
    const auto approx = csb::solve_scaled_dp(v, w, cap, scale);
    double weight = 0.0;
    for (int i : approx.chosen) weight += w[i];
    if (weight > cap + csb::kFeasibilitySlack ||
        approx.total_value < exact.total_value - 2.0 * n / scale)
      ++bad;
  }
  const double secs = seconds_since(t0);
  report(1, bad == 0 && secs < 10.0,
         fmt("scaled dp matched brute force on %d/%d cases in %.2f s (limit 10 s)",
             cases - bad, cases, secs));
}

// 2. Common-threshold search on the 20-arm instance: >= 85/100 exact
// recoveries, every run within the structural round bound.
void criterion_common_recovery(const csb::CsbInstance& inst,
                               const csb::ExperimentConfig& cfg) {
  int recovered = 0, worst_rounds = 0;
  const int round_bound = 2 * csb::st_window(inst.num_arms(), inst.budget_q,
                                             cfg.delta, cfg.epsilon) *
                          4;  // 2 * W * ceil(log2 15)
  for (int rep = 0; rep < 100; ++rep) {
    auto rng = csb::ReplicationRng::make(4242, rep);
    const auto res = csb::run_st_estimation(inst, cfg.delta, cfg.epsilon, rng, 100000);
    if (res.done && std::abs(res.theta_hat - 0.6) <= 1e-12) ++recovered;
    worst_rounds = std::max(worst_rounds, res.rounds);
  }
  report(2, recovered >= 85 && worst_rounds <= round_bound,
         fmt("exact threshold in %d/100 runs (need 85), longest search %d rounds "
             "(bound %d)",
             recovered, worst_rounds, round_bound));
}

// 3. Per-arm search on the 5-arm instance: >= 85/100 runs bracket every
// threshold within [theta_i, theta_i + gamma].
void criterion_per_arm_recovery(const csb::CsbInstance& inst,
                                const csb::ExperimentConfig& cfg) {
  int recovered = 0;
  for (int rep = 0; rep < 100; ++rep) {
    auto rng = csb::ReplicationRng::make(4343, rep);
    const auto res =
        csb::run_dt_estimation(inst, cfg.delta, cfg.epsilon, cfg.gamma, rng, 100000);
    bool ok = res.done;
    for (int i = 0; ok && i < inst.num_arms(); ++i)
      if (res.estimates[i] < inst.theta_of(i) - 1e-12 ||
          res.estimates[i] > inst.theta_of(i) + cfg.gamma + 1e-12)
        ok = false;
    if (ok) ++recovered;
  }
  report(3, recovered >= 85,
         fmt("all five thresholds bracketed in %d/100 runs (need 85)", recovered));
}

// 4. With every loss rate at 1 the searches are deterministic oracles.
void criterion_noiseless() {
  std::mt19937_64 gen(77001122u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int st_ok = 0, dt_ok = 0;
  const int cases = 50;
  for (int c = 0; c < cases; ++c) {
    std::uniform_int_distribution<int> karms(3, 20);
    const int k = karms(gen);
    const double theta_c = 0.05 + 0.95 * unit(gen);
    const double q = theta_c + (k - theta_c) * unit(gen);
    const auto inst = csb::make_instance(std::vector<double>(k, 1.0),
                                         csb::ThetaSpec::common(theta_c), q);
    auto rng = csb::ReplicationRng::make(900 + c, 0);
    const auto st = csb::run_st_estimation(inst, 0.1, 0.1, rng, 10000);
    const double target = csb::allocation_equivalent_theta(theta_c, q, k).theta_hat;
    if (st.done && std::abs(st.theta_hat - target) <= 1e-12) ++st_ok;

    std::uniform_int_distribution<int> karms2(2, 10);
    const int k2 = karms2(gen);
    std::vector<double> theta(k2);
    for (double& t : theta) t = 0.05 + 0.95 * unit(gen);
    const double q2 = 1.0 + (k2 - 1.0) * unit(gen);
    const double gamma = 1e-3;
    const auto inst2 = csb::make_instance(std::vector<double>(k2, 1.0),
                                          csb::ThetaSpec::per_arm(theta), q2);
    auto rng2 = csb::ReplicationRng::make(7700 + c, 0);
    const auto dt = csb::run_dt_estimation(inst2, 0.1, 0.1, gamma, rng2, 50000);
    bool ok = dt.done;
    for (int i = 0; ok && i < k2; ++i)
      if (dt.estimates[i] < theta[i] - 1e-12 ||
          dt.estimates[i] > theta[i] + gamma + 1e-12)
        ok = false;
    if (ok) ++dt_ok;
  }
  report(4, st_ok == cases && dt_ok == cases,
         fmt("noiseless recovery %d/%d common, %d/%d per-arm (need all)", st_ok,
             cases, dt_ok, cases));
}

// 5. Mean regret on the 20-arm instance grows sublinearly and clears a
// tenth of the asymptotic floor, within the time budget.
void criterion_sublinear(const csb::ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto agg = csb::run_experiment(cfg, 0);
  const double secs = seconds_since(t0);
  const double mid = agg.mean_cumulative[cfg.horizon / 2 - 1];
  const double fin = agg.mean_cumulative[cfg.horizon - 1];
  const double envelope = agg.envelope_final.value_or(0.0);
  const bool sublinear = fin - mid <= mid + 1e-9;
  const bool above_floor = fin >= 0.1 * envelope;
  report(5, sublinear && above_floor && secs < 60.0,
         fmt("R(%d)=%.1f R(%d)=%.1f (sublinear %s), floor 0.1*%.1f=%.1f (%s), "
             "%.1f s (limit 60 s)",
             cfg.horizon / 2, mid, cfg.horizon, fin, sublinear ? "yes" : "no",
             envelope, 0.1 * envelope, above_floor ? "cleared" : "missed", secs));
}

// 6. Final regret rises with the budget across q in {2, 6, 10}.
void criterion_budget_sweep(const csb::ExperimentConfig& cfg) {
  const auto traces = csb::sweep(cfg, "q", {2.0, 6.0, 10.0}, 0);
  const double f2 = traces[0].final_regret();
  const double f6 = traces[1].final_regret();
  const double f10 = traces[2].final_regret();
  report(6, f2 < f6 && f6 < f10,
         fmt("final regret q=2: %.1f, q=6: %.1f, q=10: %.1f (need strictly "
             "increasing)",
             f2, f6, f10));
}

// 7. Final regret falls as the common threshold rises across {0.3, 0.6, 0.9}.
void criterion_threshold_sweep(const csb::ExperimentConfig& cfg) {
  const auto traces = csb::sweep(cfg, "theta_c", {0.3, 0.6, 0.9}, 0);
  const double f3 = traces[0].final_regret();
  const double f6 = traces[1].final_regret();
  const double f9 = traces[2].final_regret();
  report(7, f3 > f6 && f6 > f9,
         fmt("final regret theta_c=0.3: %.1f, 0.6: %.1f, 0.9: %.1f (need strictly "
             "decreasing)",
             f3, f6, f9));
}

// 8. Sampling beats the confidence-bound comparator on the 5-arm instance
// under shared seeds.
void criterion_sampling_vs_ucb(const csb::ExperimentConfig& cfg_ts,
                               const csb::ExperimentConfig& cfg_ucb) {
  const auto ts = csb::run_experiment(cfg_ts, 0);
  const auto ucb = csb::run_experiment(cfg_ucb, 0);
  report(8, ts.final_regret() <= ucb.final_regret() + 1e-9,
         fmt("final regret sampling %.1f vs confidence-bound %.1f (need <=)",
             ts.final_regret(), ucb.final_regret()));
}

// 9. With the threshold supplied, phase 2 must be indistinguishable from a
// plain multiple-play Thompson sampler written against the same streams.
void criterion_reduces_to_mpts(const csb::CsbInstance& inst) {
  const int horizon = 5000;
  const int k = inst.num_arms();
  const int m = 10;  // covered arms at theta_hat = 0.6
  int matching_seeds = 0;
  for (int seed = 0; seed < 10; ++seed) {
    auto rng = csb::ReplicationRng::make(6767, seed);
    const auto trace = csb::run_csb_st(inst, horizon, 0.1, 0.1, rng, 0.6);

    // independent reference: straight multiple-play Thompson sampling over
    // the k - m smallest posterior draws, shared latent loss table
    auto ref = csb::ReplicationRng::make(6767, seed);
    std::vector<long long> s(k, 1), f(k, 1);
    bool same = static_cast<int>(trace.phase2_uncovered_sets.size()) == horizon;
    for (int t = 0; same && t < horizon; ++t) {
      std::vector<double> sample(k);
      for (int i = 0; i < k; ++i)
        sample[i] = ref.policy.beta(static_cast<double>(s[i]),
                                    static_cast<double>(f[i]));
      std::vector<int> order(k);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return sample[a] < sample[b]; });
      std::vector<int> played(order.begin(), order.begin() + (k - m));
      std::sort(played.begin(), played.end());

      std::vector<int> losses(k);
      for (int i = 0; i < k; ++i) losses[i] = ref.environment.bernoulli(inst.mu[i]);
      if (played != trace.phase2_uncovered_sets[t]) same = false;
      for (int i : played) {
        s[i] += losses[i];
        f[i] += 1 - losses[i];
      }
    }
    if (same) ++matching_seeds;
  }
  report(9, matching_seeds == 10,
         fmt("uncovered-set sequences identical on %d/10 seeds over %d rounds",
             matching_seeds, horizon));
}

// 10. Re-running the CLI with identical flags reproduces the output files
// byte for byte.
void criterion_cli_determinism(const std::string& cli, const std::string& configs) {
  namespace fs = std::filesystem;
  const fs::path out = fs::temp_directory_path() / "csb_acceptance_rerun";
  fs::remove_all(out);
  const std::string cmd = "\"" + cli + "\" run --config \"" + configs +
                          "/instance1.json\" --reps 5 --out \"" + out.string() +
                          "\" > /dev/null 2>&1";
  const int rc1 = std::system(cmd.c_str());
  const std::string csv1 = slurp(out / "regret.csv");
  const std::string json1 = slurp(out / "summary.json");
  const int rc2 = std::system(cmd.c_str());
  const std::string csv2 = slurp(out / "regret.csv");
  const std::string json2 = slurp(out / "summary.json");
  fs::remove_all(out);
  const bool ok = rc1 == 0 && rc2 == 0 && !csv1.empty() && csv1 == csv2 &&
                  !json1.empty() && json1 == json2;
  report(10, ok,
         fmt("two identical runs: exit %d/%d, regret.csv %s, summary.json %s", rc1,
             rc2, csv1 == csv2 && !csv1.empty() ? "identical" : "DIFFER",
             json1 == json2 && !json1.empty() ? "identical" : "DIFFER"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <csb-cli> <configs-dir>\n");
    return 64;
  }
  const std::string cli = argv[1];
  const std::string configs = argv[2];

  const auto cfg1 = csb::load_config(configs + "/instance1.json");
  const auto cfg2 = csb::load_config(configs + "/instance2.json");
  const auto cfg2_ucb = csb::load_config(configs + "/instance2_ucb.json");
  const auto inst1 = csb::instance_from_config(cfg1);
  const auto inst2 = csb::instance_from_config(cfg2);

  criterion_knapsack_equivalence();
  criterion_common_recovery(inst1, cfg1);
  criterion_per_arm_recovery(inst2, cfg2);
  criterion_noiseless();
  criterion_sublinear(cfg1);
  criterion_budget_sweep(cfg1);
  criterion_threshold_sweep(cfg1);
  criterion_sampling_vs_ucb(cfg2, cfg2_ucb);
  criterion_reduces_to_mpts(inst1);
  criterion_cli_determinism(cli, configs);

  if (g_failures > 0)
    std::printf("%d of 10 criteria failed\n", g_failures);
  else
    std::printf("all 10 criteria passed\n");
  return g_failures;
}
