#pragma once

// Experiment harness: JSON config in, aggregated regret curves out.
//
// A config names one instance and one policy. The harness runs R seeded
// replications (each with its own environment/policy streams derived from
// the master seed), averages the cumulative regret curves with normal
// confidence bands, and writes regret.csv, summary.json and regret.svg.
// The harness owns the ground truth: the optimal allocation is solved once
// per instance and injected into every replication's regret accounting.
// All output numbers are printed with fixed formats so identical runs
// produce byte-identical files.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "csb/core.hpp"
#include "csb/knapsack.hpp"
#include "csb/policies.hpp"

namespace csb {

// KL divergence between Bernoulli(p) and Bernoulli(q), with 0*log(0) = 0.
inline double kl_bernoulli(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("kl_bernoulli: p outside [0,1]");
  if (q <= 0.0 || q >= 1.0) {
    if (p == q) return 0.0;
    throw std::invalid_argument("kl_bernoulli: q outside (0,1) with p != q");
  }
  double d = 0.0;
  if (p > 0.0) d += p * std::log(p / q);
  if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return d;
}

// Asymptotic regret floor for a common-threshold instance at time t: each
// of the m covered (largest-mean) arms must be told apart from the best
// uncovered mean, paying (mu_i - mu_boundary) * ln t / d(boundary, mu_i).
// Returns 0 when the budget covers every arm.
inline double lower_bound_envelope(const CsbInstance& inst, double t) {
  if (!inst.theta.is_common())
    throw std::invalid_argument("lower_bound_envelope: requires a common threshold");
  if (!(t >= 1.0)) throw std::invalid_argument("lower_bound_envelope: t must be >= 1");
  const int k = inst.num_arms();
  const int m =
      allocation_equivalent_theta(inst.theta.common_value(), inst.budget_q, k).m_arms;
  if (m >= k) return 0.0;
  std::vector<double> s = inst.mu;
  std::sort(s.begin(), s.end());
  const double boundary = s[k - m - 1];
  if (s[k - m] <= boundary)
    throw std::invalid_argument(
        "lower_bound_envelope: tie at the covered/uncovered boundary");
  double sum = 0.0;
  for (int i = k - m; i < k; ++i)
    sum += (s[i] - boundary) * std::log(t) / kl_bernoulli(boundary, s[i]);
  return sum;
}

struct ExperimentConfig {
  std::string label;
  std::vector<double> mu;
  bool theta_is_common = true;
  double theta_common = 0.0;
  std::vector<double> theta_per_arm;
  double q = 0.0;
  std::string policy;  // csb-st | csb-dt | csb-dt-ucb
  int horizon = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;  // per-arm policies only
  int replications = 50;
  std::uint64_t master_seed = 1;
  PolicyConfig policy_cfg;
  std::string output_dir = "out";
};

inline CsbInstance instance_from_config(const ExperimentConfig& cfg) {
  ThetaSpec theta = cfg.theta_is_common ? ThetaSpec::common(cfg.theta_common)
                                        : ThetaSpec::per_arm(cfg.theta_per_arm);
  return make_instance(cfg.mu, std::move(theta), cfg.q);
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& path) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) known = true;
    if (!known)
      throw std::invalid_argument(path + "." + item.key() + ": unknown key");
  }
}

inline const nlohmann::json& need_key(const nlohmann::json& obj, const char* key,
                                      const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw std::invalid_argument(path + "." + key + ": missing required key");
  return *it;
}

inline double as_number(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) throw std::invalid_argument(path + ": expected a number");
  return j.get<double>();
}

inline long long as_integer(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer()) throw std::invalid_argument(path + ": expected an integer");
  return j.get<long long>();
}

inline std::string as_string(const nlohmann::json& j, const std::string& path) {
  if (!j.is_string()) throw std::invalid_argument(path + ": expected a string");
  return j.get<std::string>();
}

inline std::vector<double> as_number_array(const nlohmann::json& j,
                                           const std::string& path) {
  if (!j.is_array()) throw std::invalid_argument(path + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& root) {
  using detail::as_integer;
  using detail::as_number;
  using detail::as_number_array;
  using detail::as_string;
  using detail::need_key;
  using detail::reject_unknown_keys;

  if (!root.is_object())
    throw std::invalid_argument("config: expected a JSON object");
  reject_unknown_keys(root,
                      {"label", "instance", "policy", "horizon", "delta", "epsilon",
                       "gamma", "replications", "master_seed", "scale_s",
                       "resolve_period", "lcb_exploration", "output_dir"},
                      "config");

  ExperimentConfig cfg;
  const nlohmann::json& inst = need_key(root, "instance", "config");
  if (!inst.is_object())
    throw std::invalid_argument("config.instance: expected an object");
  reject_unknown_keys(inst, {"mu", "mu_linear", "theta_common", "theta_per_arm", "q"},
                      "config.instance");

  const bool has_mu = inst.contains("mu");
  const bool has_linear = inst.contains("mu_linear");
  if (has_mu == has_linear)
    throw std::invalid_argument(
        "config.instance: exactly one of mu / mu_linear is required");
  if (has_mu) {
    cfg.mu = as_number_array(inst["mu"], "config.instance.mu");
  } else {
    const nlohmann::json& lin = inst["mu_linear"];
    if (!lin.is_object())
      throw std::invalid_argument("config.instance.mu_linear: expected an object");
    reject_unknown_keys(lin, {"start", "step", "count"}, "config.instance.mu_linear");
    const double start = as_number(need_key(lin, "start", "config.instance.mu_linear"),
                                   "config.instance.mu_linear.start");
    const double step = as_number(need_key(lin, "step", "config.instance.mu_linear"),
                                  "config.instance.mu_linear.step");
    const long long count =
        as_integer(need_key(lin, "count", "config.instance.mu_linear"),
                   "config.instance.mu_linear.count");
    if (count < 1)
      throw std::invalid_argument("config.instance.mu_linear.count: must be >= 1");
    for (long long i = 0; i < count; ++i)
      cfg.mu.push_back(start + step * static_cast<double>(i));
  }

  const bool has_common = inst.contains("theta_common");
  const bool has_per_arm = inst.contains("theta_per_arm");
  if (has_common == has_per_arm)
    throw std::invalid_argument(
        "config.instance: exactly one of theta_common / theta_per_arm is required");
  cfg.theta_is_common = has_common;
  if (has_common)
    cfg.theta_common = as_number(inst["theta_common"], "config.instance.theta_common");
  else
    cfg.theta_per_arm =
        as_number_array(inst["theta_per_arm"], "config.instance.theta_per_arm");
  cfg.q = as_number(need_key(inst, "q", "config.instance"), "config.instance.q");

  cfg.policy = as_string(need_key(root, "policy", "config"), "config.policy");
  if (cfg.policy != "csb-st" && cfg.policy != "csb-dt" && cfg.policy != "csb-dt-ucb")
    throw std::invalid_argument("config.policy: must be csb-st, csb-dt or csb-dt-ucb");
  const bool per_arm_policy = cfg.policy != "csb-st";
  if (per_arm_policy && cfg.theta_is_common)
    throw std::invalid_argument("config.policy: " + cfg.policy +
                                " requires instance.theta_per_arm");
  if (!per_arm_policy && !cfg.theta_is_common)
    throw std::invalid_argument("config.policy: csb-st requires instance.theta_common");

  cfg.horizon = static_cast<int>(
      as_integer(need_key(root, "horizon", "config"), "config.horizon"));
  if (cfg.horizon < 1) throw std::invalid_argument("config.horizon: must be >= 1");
  cfg.delta = as_number(need_key(root, "delta", "config"), "config.delta");
  cfg.epsilon = as_number(need_key(root, "epsilon", "config"), "config.epsilon");
  if (root.contains("gamma")) {
    if (!per_arm_policy)
      throw std::invalid_argument("config.gamma: only valid for per-arm policies");
    cfg.gamma = as_number(root["gamma"], "config.gamma");
    if (!(cfg.gamma > 0.0)) throw std::invalid_argument("config.gamma: must be > 0");
  } else if (per_arm_policy) {
    throw std::invalid_argument("config.gamma: required for per-arm policies");
  }

  if (root.contains("label")) cfg.label = as_string(root["label"], "config.label");
  if (cfg.label.empty()) cfg.label = cfg.policy;
  if (root.contains("replications")) {
    cfg.replications = static_cast<int>(
        as_integer(root["replications"], "config.replications"));
    if (cfg.replications < 1)
      throw std::invalid_argument("config.replications: must be >= 1");
  }
  if (root.contains("master_seed")) {
    const nlohmann::json& s = root["master_seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<long long>() < 0))
      throw std::invalid_argument("config.master_seed: expected a non-negative integer");
    cfg.master_seed = s.get<std::uint64_t>();
  }
  if (root.contains("scale_s")) {
    cfg.policy_cfg.scale_s = as_integer(root["scale_s"], "config.scale_s");
    if (cfg.policy_cfg.scale_s < 1)
      throw std::invalid_argument("config.scale_s: must be >= 1");
  }
  if (root.contains("resolve_period")) {
    cfg.policy_cfg.resolve_period = static_cast<int>(
        as_integer(root["resolve_period"], "config.resolve_period"));
    if (cfg.policy_cfg.resolve_period < 1)
      throw std::invalid_argument("config.resolve_period: must be >= 1");
  }
  if (root.contains("lcb_exploration")) {
    cfg.policy_cfg.lcb_exploration =
        as_number(root["lcb_exploration"], "config.lcb_exploration");
    if (!(cfg.policy_cfg.lcb_exploration > 0.0))
      throw std::invalid_argument("config.lcb_exploration: must be > 0");
  }
  if (root.contains("output_dir"))
    cfg.output_dir = as_string(root["output_dir"], "config.output_dir");

  instance_from_config(cfg);  // validate instance semantics eagerly
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return parse_config(root);
}

// Cross-replication summary of one experiment.
struct AggregateTrace {
  std::string label;
  std::string policy;
  int replications = 0;
  int horizon = 0;
  std::vector<double> mean_cumulative;  // one entry per round
  std::vector<double> ci_low;           // mean -/+ 1.96 * sd / sqrt(R)
  std::vector<double> ci_high;
  double phase1_rounds_mean = 0.0;
  double phase1_rounds_max = 0.0;
  double recovery_rate = 0.0;  // fraction of replications whose estimate matched
  std::optional<double> envelope_final;  // asymptotic floor at the horizon

  double final_regret() const {
    return mean_cumulative.empty() ? 0.0 : mean_cumulative.back();
  }
};

// Mean and normal confidence band of the cumulative regret curves. Pure;
// replication order does not matter beyond fixing the reduction order.
inline AggregateTrace aggregate_cumulative(const std::vector<RegretTrace>& traces) {
  if (traces.empty())
    throw std::invalid_argument("aggregate_cumulative: no traces");
  const int rounds = static_cast<int>(traces.front().cumulative_regret.size());
  for (const auto& tr : traces)
    if (static_cast<int>(tr.cumulative_regret.size()) != rounds)
      throw std::invalid_argument("aggregate_cumulative: trace length mismatch");
  const int r = static_cast<int>(traces.size());
  AggregateTrace agg;
  agg.replications = r;
  agg.horizon = rounds;
  agg.mean_cumulative.resize(rounds);
  agg.ci_low.resize(rounds);
  agg.ci_high.resize(rounds);
  for (int t = 0; t < rounds; ++t) {
    double sum = 0.0;
    for (const auto& tr : traces) sum += tr.cumulative_regret[t];
    const double mean = sum / r;
    double sq = 0.0;
    for (const auto& tr : traces) {
      const double d = tr.cumulative_regret[t] - mean;
      sq += d * d;
    }
    const double sd = r > 1 ? std::sqrt(sq / (r - 1)) : 0.0;
    const double half = 1.96 * sd / std::sqrt(static_cast<double>(r));
    agg.mean_cumulative[t] = mean;
    agg.ci_low[t] = mean - half;
    agg.ci_high[t] = mean + half;
  }
  return agg;
}

// Run all replications of one config (optionally across jobs threads) and
// aggregate. Replication r always uses streams derived from
// (master_seed, r), so results are independent of the thread schedule.
inline AggregateTrace run_experiment(const ExperimentConfig& cfg, int jobs = 0) {
  const CsbInstance inst = instance_from_config(cfg);
  const OptimalAllocation opt = optimal_allocation(inst);
  const int r = cfg.replications;

  std::vector<RegretTrace> traces(r);
  auto run_one = [&](int rep) {
    ReplicationRng rng = ReplicationRng::make(cfg.master_seed, static_cast<std::uint64_t>(rep));
    if (cfg.policy == "csb-st")
      return run_csb_st(inst, cfg.horizon, cfg.delta, cfg.epsilon, rng, std::nullopt,
                        opt.optimal_mean_loss);
    return run_csb_dt(inst, cfg.horizon, cfg.delta, cfg.epsilon, cfg.gamma,
                      cfg.policy_cfg, cfg.policy == "csb-dt-ucb", rng,
                      opt.optimal_mean_loss);
  };

  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, r);
  if (workers == 1) {
    for (int rep = 0; rep < r; ++rep) traces[rep] = run_one(rep);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int rep = next.fetch_add(1);
          if (rep >= r) return;
          try {
            traces[rep] = run_one(rep);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!error) error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  AggregateTrace agg = aggregate_cumulative(traces);
  agg.label = cfg.label;
  agg.policy = cfg.policy;

  double phase_sum = 0.0, phase_max = 0.0;
  int recovered = 0;
  const double tol = 1e-12;
  std::optional<double> st_target;
  if (cfg.theta_is_common)
    st_target = allocation_equivalent_theta(cfg.theta_common, cfg.q,
                                            inst.num_arms())
                    .theta_hat;
  for (const auto& tr : traces) {
    phase_sum += tr.phase1_end_round;
    phase_max = std::max(phase_max, static_cast<double>(tr.phase1_end_round));
    if (!tr.estimation_complete) continue;
    if (cfg.theta_is_common) {
      if (std::abs(tr.theta_estimate.at(0) - *st_target) <= tol) ++recovered;
    } else {
      bool ok = true;
      for (int i = 0; i < inst.num_arms(); ++i) {
        const double est = tr.theta_estimate.at(i);
        const double truth = inst.theta_of(i);
        if (est < truth - tol || est > truth + cfg.gamma + tol) ok = false;
      }
      if (ok) ++recovered;
    }
  }
  agg.phase1_rounds_mean = phase_sum / r;
  agg.phase1_rounds_max = phase_max;
  agg.recovery_rate = static_cast<double>(recovered) / r;

  if (cfg.theta_is_common) {
    const int k = inst.num_arms();
    const int m = allocation_equivalent_theta(cfg.theta_common, cfg.q, k).m_arms;
    if (m < k) {
      std::vector<double> s = inst.mu;
      std::sort(s.begin(), s.end());
      if (s[k - m] > s[k - m - 1])
        agg.envelope_final = lower_bound_envelope(inst, cfg.horizon);
    }
  }
  return agg;
}

// Re-run the experiment once per value of the swept parameter ("q" or
// "theta_c"), all under the same master seed. Labels become "q=2" etc.
inline std::vector<AggregateTrace> sweep(const ExperimentConfig& cfg,
                                         const std::string& parameter,
                                         const std::vector<double>& values,
                                         int jobs = 0) {
  if (values.empty()) throw std::invalid_argument("sweep: no values given");
  if (parameter != "q" && parameter != "theta_c")
    throw std::invalid_argument("sweep: parameter must be q or theta_c");
  if (parameter == "theta_c" && !cfg.theta_is_common)
    throw std::invalid_argument("sweep: theta_c sweep requires a common threshold");
  std::vector<AggregateTrace> out;
  for (double v : values) {
    ExperimentConfig c = cfg;
    if (parameter == "q")
      c.q = v;
    else
      c.theta_common = v;
    char label[64];
    std::snprintf(label, sizeof(label), "%s=%g", parameter.c_str(), v);
    c.label = label;
    instance_from_config(c);  // validate the perturbed instance
    out.push_back(run_experiment(c, jobs));
  }
  return out;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Fixed-precision coordinate for SVG paths.
inline std::string fmt_coord(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string fmt_tick(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail

inline std::string render_regret_csv(const std::vector<AggregateTrace>& traces) {
  std::string out = "round,mean_regret,ci_low,ci_high,policy,label\n";
  for (const auto& tr : traces) {
    for (int t = 0; t < tr.horizon; ++t) {
      out += std::to_string(t + 1);
      out += ',';
      out += detail::fmt_double(tr.mean_cumulative[t]);
      out += ',';
      out += detail::fmt_double(tr.ci_low[t]);
      out += ',';
      out += detail::fmt_double(tr.ci_high[t]);
      out += ',';
      out += tr.policy;
      out += ',';
      out += tr.label;
      out += '\n';
    }
  }
  return out;
}

inline std::string render_summary_json(const std::vector<AggregateTrace>& traces) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& tr : traces) {
    nlohmann::json s{{"label", tr.label},
                     {"policy", tr.policy},
                     {"replications", tr.replications},
                     {"horizon", tr.horizon},
                     {"final_regret", tr.final_regret()},
                     {"final_ci_low", tr.ci_low.empty() ? 0.0 : tr.ci_low.back()},
                     {"final_ci_high", tr.ci_high.empty() ? 0.0 : tr.ci_high.back()},
                     {"phase1_rounds_mean", tr.phase1_rounds_mean},
                     {"phase1_rounds_max", tr.phase1_rounds_max},
                     {"threshold_recovery_rate", tr.recovery_rate}};
    if (tr.envelope_final) s["lower_bound_envelope"] = *tr.envelope_final;
    series.push_back(std::move(s));
  }
  return nlohmann::json{{"series", series}}.dump(2) + "\n";
}

// Small self-contained line chart: mean cumulative regret per series, with
// confidence whiskers every horizon/20 rounds.
inline std::string render_regret_svg(const std::vector<AggregateTrace>& traces) {
  using detail::fmt_coord;
  using detail::fmt_tick;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#ff7f0e", "#9467bd", "#8c564b"};
  const int width = 880, height = 520;
  const double ml = 70, mr = 24, mt = 24, mb = 48;
  const double pw = width - ml - mr, ph = height - mt - mb;

  int max_rounds = 1;
  double y_max = 0.0;
  for (const auto& tr : traces) {
    max_rounds = std::max(max_rounds, tr.horizon);
    for (int t = 0; t < tr.horizon; ++t) y_max = std::max(y_max, tr.ci_high[t]);
  }
  if (y_max <= 0.0) y_max = 1.0;
  y_max *= 1.05;

  auto x_of = [&](double round) { return ml + (round - 1) / std::max(1.0, max_rounds - 1.0) * pw; };
  auto y_of = [&](double v) { return mt + ph - v / y_max * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" height=\"520\" "
       "viewBox=\"0 0 880 520\">\n";
  s += "<rect width=\"880\" height=\"520\" fill=\"#ffffff\"/>\n";

  // axes and ticks
  s += "<g stroke=\"#333333\" stroke-width=\"1\" fill=\"none\">\n";
  s += "<line x1=\"" + fmt_coord(ml) + "\" y1=\"" + fmt_coord(mt) + "\" x2=\"" +
       fmt_coord(ml) + "\" y2=\"" + fmt_coord(mt + ph) + "\"/>\n";
  s += "<line x1=\"" + fmt_coord(ml) + "\" y1=\"" + fmt_coord(mt + ph) + "\" x2=\"" +
       fmt_coord(ml + pw) + "\" y2=\"" + fmt_coord(mt + ph) + "\"/>\n";
  s += "</g>\n";
  s += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double round = 1 + (max_rounds - 1) * i / 5.0;
    const double x = x_of(round);
    s += "<line x1=\"" + fmt_coord(x) + "\" y1=\"" + fmt_coord(mt + ph) + "\" x2=\"" +
         fmt_coord(x) + "\" y2=\"" + fmt_coord(mt + ph + 5) +
         "\" stroke=\"#333333\"/>\n";
    s += "<text x=\"" + fmt_coord(x) + "\" y=\"" + fmt_coord(mt + ph + 18) +
         "\" text-anchor=\"middle\">" + fmt_tick(std::round(round)) + "</text>\n";
    const double yv = y_max * i / 5.0;
    const double y = y_of(yv);
    s += "<line x1=\"" + fmt_coord(ml - 5) + "\" y1=\"" + fmt_coord(y) + "\" x2=\"" +
         fmt_coord(ml) + "\" y2=\"" + fmt_coord(y) + "\" stroke=\"#333333\"/>\n";
    s += "<text x=\"" + fmt_coord(ml - 8) + "\" y=\"" + fmt_coord(y + 4) +
         "\" text-anchor=\"end\">" + fmt_tick(yv) + "</text>\n";
  }
  s += "<text x=\"" + fmt_coord(ml + pw / 2) + "\" y=\"" + fmt_coord(height - 10.0) +
       "\" text-anchor=\"middle\">round</text>\n";
  s += "<text x=\"16\" y=\"" + fmt_coord(mt + ph / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt_coord(mt + ph / 2) + ")\">cumulative regret</text>\n";
  s += "</g>\n";

  for (std::size_t si = 0; si < traces.size(); ++si) {
    const auto& tr = traces[si];
    const char* color = kPalette[si % 6];
    // decimate long curves; every point matters only at plot resolution
    const int stride = std::max(1, tr.horizon / 400);
    std::string pts;
    for (int t = 0; t < tr.horizon; t += stride) {
      pts += fmt_coord(x_of(t + 1)) + "," + fmt_coord(y_of(tr.mean_cumulative[t])) + " ";
    }
    pts += fmt_coord(x_of(tr.horizon)) + "," +
           fmt_coord(y_of(tr.mean_cumulative[tr.horizon - 1]));
    s += "<polyline fill=\"none\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";

    const int wstride = std::max(1, tr.horizon / 20);
    s += "<g stroke=\"";
    s += color;
    s += "\" stroke-width=\"1\">\n";
    for (int t = wstride - 1; t < tr.horizon; t += wstride) {
      const double x = x_of(t + 1);
      const double ylo = y_of(tr.ci_low[t]);
      const double yhi = y_of(tr.ci_high[t]);
      s += "<line x1=\"" + fmt_coord(x) + "\" y1=\"" + fmt_coord(ylo) + "\" x2=\"" +
           fmt_coord(x) + "\" y2=\"" + fmt_coord(yhi) + "\"/>\n";
      s += "<line x1=\"" + fmt_coord(x - 3) + "\" y1=\"" + fmt_coord(ylo) + "\" x2=\"" +
           fmt_coord(x + 3) + "\" y2=\"" + fmt_coord(ylo) + "\"/>\n";
      s += "<line x1=\"" + fmt_coord(x - 3) + "\" y1=\"" + fmt_coord(yhi) + "\" x2=\"" +
           fmt_coord(x + 3) + "\" y2=\"" + fmt_coord(yhi) + "\"/>\n";
    }
    s += "</g>\n";

    const double ly = mt + 16 + 18.0 * static_cast<double>(si);
    s += "<line x1=\"" + fmt_coord(ml + 10) + "\" y1=\"" + fmt_coord(ly - 4) +
         "\" x2=\"" + fmt_coord(ml + 34) + "\" y2=\"" + fmt_coord(ly - 4) +
         "\" stroke=\"";
    s += color;
    s += "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt_coord(ml + 40) + "\" y=\"" + fmt_coord(ly) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">" +
         tr.label + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

// Write regret.csv, summary.json and regret.svg under out_dir, creating it
// if needed. Identical trace data produces byte-identical files.
inline void emit_outputs(const std::vector<AggregateTrace>& traces,
                         const std::string& out_dir) {
  if (traces.empty()) throw std::invalid_argument("emit_outputs: no traces");
  std::filesystem::create_directories(out_dir);
  auto write = [&](const char* name, const std::string& body) {
    const std::filesystem::path p = std::filesystem::path(out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << body;
    if (!out) throw std::runtime_error("write failed for " + p.string());
  };
  write("regret.csv", render_regret_csv(traces));
  write("summary.json", render_summary_json(traces));
  write("regret.svg", render_regret_svg(traces));
}

}  // namespace csb
