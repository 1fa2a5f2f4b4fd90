#ifndef MCFORGE_EXPERIMENTS_HPP
#define MCFORGE_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcforge/abc.hpp"
#include "mcforge/classic_mc.hpp"
#include "mcforge/csv.hpp"
#include "mcforge/diagnostics.hpp"
#include "mcforge/hmc.hpp"
#include "mcforge/mcmc.hpp"
#include "mcforge/rng.hpp"
#include "mcforge/target.hpp"

namespace mcforge {

/// A fully-determined experiment run: (name, parameters, seed) fix every byte
/// of the output.
struct ExperimentSpec {
  std::string name;
  std::uint64_t seed = 1;
  std::optional<std::size_t> n;         // --n
  std::optional<double> eps;            // --eps
  std::optional<std::size_t> steps;     // --steps (leapfrog L)
  std::optional<double> scale;          // --scale (proposal scale)
  std::optional<double> quantile;       // --quantile (ABC tolerance)
  std::string out_dir = ".";
  bool full = false;                    // restore full-scale sample sizes
};

namespace experiments {

using Summary = std::vector<std::pair<std::string, std::string>>;

inline std::string fmt(double x) { return format_double(x); }

inline void write_summary(const std::string& path, const Summary& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
}

inline CsvTable trace_table(const Trace& trace) {
  CsvTable t;
  const std::size_t dim = trace.states.empty() ? 0 : trace.states[0].size();
  t.header = {"step", "accepted"};
  for (std::size_t i = 0; i < dim; ++i) t.header.push_back("x" + std::to_string(i + 1));
  if (!trace.divergent.empty()) t.header.push_back("divergent");
  for (std::size_t s = 0; s < trace.states.size(); ++s) {
    std::vector<double> row;
    row.push_back(static_cast<double>(s));
    row.push_back(s == 0 ? 1.0 : static_cast<double>(trace.accept_flags[s - 1]));
    for (double x : trace.states[s]) row.push_back(x);
    if (!trace.divergent.empty())
      row.push_back(s == 0 ? 0.0 : static_cast<double>(trace.divergent[s - 1]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Summary base_summary(const ExperimentSpec& spec) {
  return {{"experiment", spec.name}, {"seed", std::to_string(spec.seed)}};
}

struct Paths {
  std::string csv;
  std::string summary;
};

inline Paths output_paths(const ExperimentSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);
  return {(fs::path(spec.out_dir) / (spec.name + ".csv")).string(),
          (fs::path(spec.out_dir) / (spec.name + ".summary.txt")).string()};
}

// --- 1. importance sampling with infinite weight variance -------------------

inline void run_is_infinite_variance(const ExperimentSpec& spec) {
  const std::size_t n = spec.n.value_or(10'000);
  const std::size_t replicates = 100;
  const std::size_t stride = std::max<std::size_t>(1, n / 1000);

  // proposal E(1), target E(1/10), h(x)=x: the weight second moment diverges
  auto run_replicate = [](RandomStream& s, std::size_t n_draws, double prop_rate,
                          double target_rate, std::vector<double>* path,
                          std::size_t stride_rows) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_draws; ++i) {
      const double x = s.exponential(prop_rate);
      const double lw = (std::log(target_rate) - target_rate * x) -
                        (std::log(prop_rate) - prop_rate * x);
      acc += x * std::exp(lw);
      if (path && (i + 1) % stride_rows == 0)
        path->push_back(acc / static_cast<double>(i + 1));
    }
    return acc / static_cast<double>(n_draws);
  };

  std::vector<std::vector<double>> paths(replicates);
  std::vector<double> finals_inf(replicates), finals_fin(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    SeededStream s = new_stream(spec.seed, r + 1);
    finals_inf[r] = run_replicate(s, n, 1.0, 0.1, &paths[r], stride);
    SeededStream s2 = new_stream(spec.seed, 1000 + r);
    finals_fin[r] = run_replicate(s2, n, 0.1, 1.0, nullptr, stride);
  }

  CsvTable t;
  t.header = {"iteration"};
  for (std::size_t r = 0; r < replicates; ++r)
    t.header.push_back("rep" + std::to_string(r + 1));
  const std::size_t n_rows = paths[0].size();
  for (std::size_t row = 0; row < n_rows; ++row) {
    std::vector<double> line;
    line.push_back(static_cast<double>((row + 1) * stride));
    for (std::size_t r = 0; r < replicates; ++r) line.push_back(paths[r][row]);
    t.rows.push_back(std::move(line));
  }

  auto paths_out = output_paths(spec);
  write_csv(paths_out.csv, t);
  Summary sum = base_summary(spec);
  sum.emplace_back("n", std::to_string(n));
  sum.emplace_back("replicates", std::to_string(replicates));
  sum.emplace_back("true_value", "10");
  sum.emplace_back("replicate_sd_infinite_variance", fmt(sample_sd(finals_inf)));
  sum.emplace_back("replicate_sd_finite_variance_reversed", fmt(sample_sd(finals_fin)));
  sum.emplace_back("spread_ratio", fmt(sample_sd(finals_inf) / sample_sd(finals_fin)));
  sum.emplace_back("note", "replicate paths depend on the seed; only the qualitative "
                           "spread of the curves is reproducible");
  write_summary(paths_out.summary, sum);
}

// --- 2/3. sampling importance resampling ------------------------------------

inline void run_sir(const ExperimentSpec& spec, const TargetDensity& target,
                    double target_mean_note, const std::function<double(double)>* target_cdf) {
  const std::size_t n = spec.n.value_or(spec.full ? 10'000'000 : 100'000);
  // keep the resample size well below the weight ESS so the resampled set
  // behaves like a near-independent sample of the target
  const std::size_t m = std::min<std::size_t>(2000, n);
  SeededStream stream = new_stream(spec.seed, 0);
  WeightedSample ws;
  ws.points.reserve(n);
  ws.log_weights.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = stream.normal(0.0, 1.0);
    ws.points.push_back({x});
    ws.log_weights.push_back(target.log_unnorm(x) - normal_logpdf(x));
  }
  auto resampled = sir_resample(ws, m, stream);
  std::vector<double> xs(m);
  for (std::size_t i = 0; i < m; ++i) xs[i] = resampled[i][0];

  CsvTable t;
  t.header = {"x"};
  for (double x : xs) t.rows.push_back({x});
  auto paths = output_paths(spec);
  write_csv(paths.csv, t);

  Summary sum = base_summary(spec);
  sum.emplace_back("n_proposals", std::to_string(n));
  sum.emplace_back("n_resampled", std::to_string(m));
  sum.emplace_back("resampled_mean", fmt(mean(xs)));
  sum.emplace_back("target_mean", fmt(target_mean_note));
  if (target_cdf) {
    sum.emplace_back("ks_statistic", fmt(ks_statistic(xs, *target_cdf)));
    sum.emplace_back("ks_critical_0.01", fmt(ks_critical(0.01, m)));
  }
  write_summary(paths.summary, sum);
}

inline void run_sir_student(const ExperimentSpec& spec) {
  run_sir(spec, targets::student_t(5.0, 3.0), 3.0, nullptr);
}

inline void run_sir_normal(const ExperimentSpec& spec) {
  static const std::function<double(double)> cdf = [](double x) {
    return normal_cdf(x, 2.0, 1.0 / std::sqrt(2.0));
  };
  run_sir(spec, targets::normal(2.0, 1.0 / std::sqrt(2.0)), 2.0, &cdf);
}

// --- 4. accept-reject for the Beta(3.3,4.4) construction --------------------

inline void run_ar_beta(const ExperimentSpec& spec) {
  const std::size_t n = spec.n.value_or(1'000'000);
  SeededStream stream = new_stream(spec.seed, 0);
  TargetDensity target = targets::beta_unnorm(3.3, 4.4);
  auto report = accept_reject(
      target, [](RandomStream& s) { return Vec{s.uniform01()}; },
      [](const Vec&) { return 0.0; }, 1.0, n, stream);

  CsvTable t;
  t.header = {"x"};
  for (const auto& x : report.accepted) t.rows.push_back({x[0]});
  auto paths = output_paths(spec);
  write_csv(paths.csv, t);

  Summary sum = base_summary(spec);
  sum.emplace_back("n_proposals", std::to_string(report.proposals_used));
  sum.emplace_back("n_accepted", std::to_string(report.accepted.size()));
  sum.emplace_back("acceptance_rate", fmt(report.acceptance_rate));
  sum.emplace_back("note", "the accepted sample size is a random realisation of the "
                           "resampling mechanism");
  write_summary(paths.summary, sum);
}

// --- 5. slice sampler on the standard normal --------------------------------

inline void run_slice_normal(const ExperimentSpec& spec) {
  const std::size_t n = spec.n.value_or(10'000);
  SeededStream stream = new_stream(spec.seed, 0);
  TargetDensity target = targets::std_normal();
  std::vector<double> xs;
  xs.reserve(n + 1);
  xs.push_back(0.0);
  for (std::size_t i = 0; i < n; ++i) xs.push_back(slice_step(xs.back(), target, stream));

  CsvTable t;
  t.header = {"step", "x", "log_unnorm"};
  for (std::size_t i = 0; i < xs.size(); ++i)
    t.rows.push_back({static_cast<double>(i), xs[i], target.log_unnorm(xs[i])});
  auto paths = output_paths(spec);
  write_csv(paths.csv, t);

  Summary sum = base_summary(spec);
  sum.emplace_back("n", std::to_string(n));
  sum.emplace_back("mean", fmt(mean(std::span<const double>(xs).subspan(1))));
  sum.emplace_back("ks_statistic",
                   fmt(ks_statistic({xs.begin() + 1, xs.end()},
                                    [](double x) { return normal_cdf(x); })));
  sum.emplace_back("ks_critical_0.01", fmt(ks_critical(0.01, n)));
  write_summary(paths.summary, sum);
}

// --- 6. independent MH, N(0,1) proposal onto N(1,1) target ------------------

inline void run_indep_mh(const ExperimentSpec& spec) {
  const std::size_t n = spec.n.value_or(10'000);
  SeededStream stream = new_stream(spec.seed, 0);
  TargetDensity target = targets::normal(1.0, 1.0);
  IndependentProposal prop{[](RandomStream& s) { return Vec{s.normal(0.0, 1.0)}; },
                           [](const Vec& x) { return normal_logpdf(x[0]); }};
  Trace trace = run_chain(make_mh_kernel(target, ProposalSpec{prop}), {0.0}, n, target,
                          stream, "indep_mh");
  auto paths = output_paths(spec);
  write_csv(paths.csv, trace_table(trace));
  Summary sum = base_summary(spec);
  sum.emplace_back("n", std::to_string(n));
  sum.emplace_back("acceptance_rate", fmt(trace.acceptance_rate()));
  sum.emplace_back("mean", fmt(mean(trace.component())));
  write_summary(paths.summary, sum);
}

// --- 7. truncated-normal proposal on the log-bump target --------------------

inline void run_trunc_proposal_mh(const ExperimentSpec& spec) {
  const std::size_t n = spec.n.value_or(10'000);
  const double sigma = spec.scale.value_or(0.1);
  SeededStream stream = new_stream(spec.seed, 0);
  TargetDensity target = targets::log_bump();
  Trace trace =
      run_chain(make_mh_kernel(target, ProposalSpec{TruncatedNormalPositiveProposal{sigma}}),
                {std::exp(1.0)}, n, target, stream, "trunc_proposal_mh");
  auto paths = output_paths(spec);
  write_csv(paths.csv, trace_table(trace));
  Summary sum = base_summary(spec);
  sum.emplace_back("n", std::to_string(n));
  sum.emplace_back("sigma", fmt(sigma));
  sum.emplace_back("acceptance_rate", fmt(trace.acceptance_rate()));
  sum.emplace_back("mean", fmt(mean(trace.component())));
  write_summary(paths.summary, sum);
}

// --- 8. random walk on the truncated-normal target --------------------------

inline void run_rw_truncated_target(const ExperimentSpec& spec) {
  const std::size_t n = spec.n.value_or(100'000);
  const double scale = spec.scale.value_or(0.1);
  SeededStream stream = new_stream(spec.seed, 0);
  TargetDensity target = targets::trunc_normal_target();
  Trace trace = run_chain(make_mh_kernel(target, ProposalSpec{RandomWalkProposal{scale}}),
                          {0.5}, n, target, stream, "rw_truncated_target");
  auto paths = output_paths(spec);
  write_csv(paths.csv, trace_table(trace));

  auto cdf = [](double x) {
    const double lo = normal_cdf(-4.0), hi = normal_cdf(-3.0);
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return (normal_cdf(x - 4.0) - lo) / (hi - lo);
  };
  Summary sum = base_summary(spec);
  sum.emplace_back("n", std::to_string(n));
  sum.emplace_back("proposal_scale", fmt(scale));
  sum.emplace_back("acceptance_rate", fmt(trace.acceptance_rate()));
  sum.emplace_back("ks_statistic", fmt(ks_statistic(trace.component(), cdf)));
  sum.emplace_back("ks_critical_0.01", fmt(ks_critical(0.01, n)));
  write_summary(paths.summary, sum);
}

// --- 9. HMC on the standard normal and the 18-dimensional target ------------

inline void run_hmc_normal(const ExperimentSpec& spec) {
  const std::size_t n = spec.n.value_or(10'000);
  const double eps = spec.eps.value_or(0.1);
  const std::size_t steps = spec.steps.value_or(10);
  SeededStream stream = new_stream(spec.seed, 0);
  TargetDensity target = targets::std_normal();
  Trace trace = run_hmc_chain({1.0}, eps, steps, n, target, {}, stream, "hmc_std_normal");
  auto paths = output_paths(spec);
  write_csv(paths.csv, trace_table(trace));

  // companion run on the 18-dimensional artificial target, summary only
  SeededStream stream18 = new_stream(spec.seed, 18);
  TargetDensity target18 = targets::artificial18();
  Trace trace18 = run_hmc_chain(Vec(18, 0.5), 0.01, 20, std::min<std::size_t>(n, 1000),
                                target18, {}, stream18, "hmc_artificial18");
  std::size_t div18 = 0;
  for (bool d : trace18.divergent) div18 += d;

  auto xs = trace.component();
  Summary sum = base_summary(spec);
  sum.emplace_back("n", std::to_string(n));
  sum.emplace_back("eps", fmt(eps));
  sum.emplace_back("leapfrog_steps", std::to_string(steps));
  sum.emplace_back("acceptance_rate", fmt(trace.acceptance_rate()));
  sum.emplace_back("mean", fmt(mean(xs)));
  sum.emplace_back("variance", fmt(variance(xs)));
  sum.emplace_back("artificial18_n", std::to_string(trace18.accept_flags.size()));
  sum.emplace_back("artificial18_acceptance_rate", fmt(trace18.acceptance_rate()));
  sum.emplace_back("artificial18_divergences", std::to_string(div18));
  write_summary(paths.summary, sum);
}

// --- 10. ABC with median/MAD summaries on the normal location model ----------

inline void run_abc_normal(const ExperimentSpec& spec) {
  const std::size_t n = spec.n.value_or(spec.full ? 1'000'000 : 100'000);
  const double q = spec.quantile.value_or(0.01);
  SeededStream obs_stream = new_stream(spec.seed, 9000);
  GenerativeModel model = models::normal_location(50);
  Vec x_obs(50);
  for (auto& v : x_obs) v = obs_stream.normal(2.3, 1.0);
  auto [obs_median, obs_mad] = median_mad(x_obs);

  AbcConfig cfg;
  cfg.summary = models::median_mad_summary;
  cfg.tolerance = QuantileTolerance{q};
  SeededStream stream = new_stream(spec.seed, 0);
  AbcResult result = abc_reject(model, x_obs, cfg, n, stream);

  CsvTable t;
  t.header = {"theta1", "distance"};
  for (std::size_t i = 0; i < result.accepted_thetas.size(); ++i)
    t.rows.push_back({result.accepted_thetas[i][0], result.distances[i]});
  auto paths = output_paths(spec);
  write_csv(paths.csv, t);

  std::vector<double> thetas(result.accepted_thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) thetas[i] = result.accepted_thetas[i][0];
  Summary sum = base_summary(spec);
  sum.emplace_back("n_simulated", std::to_string(result.n_simulated));
  sum.emplace_back("tolerance_quantile", fmt(q));
  sum.emplace_back("epsilon_used", fmt(result.epsilon_used));
  sum.emplace_back("n_accepted", std::to_string(thetas.size()));
  sum.emplace_back("posterior_mean", fmt(mean(thetas)));
  sum.emplace_back("observed_median", fmt(obs_median));
  sum.emplace_back("observed_mad", fmt(obs_mad));
  write_summary(paths.summary, sum);
}

struct Entry {
  std::string name;
  std::string description;
  std::function<void(const ExperimentSpec&)> run;
};

inline const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"is_infinite_variance",
       "100 replicate importance-sampling paths with infinite weight variance, E(1) "
       "proposal onto E(1/10), h(x)=x", run_is_infinite_variance},
      {"sir_student",
       "failed SIR recovery of Student-t5 shifted to 3 from a standard normal proposal",
       run_sir_student},
      {"sir_normal",
       "SIR recovery of N(2, 1/sqrt(2)) from a standard normal proposal", run_sir_normal},
      {"ar_beta", "accept-reject sample of Beta(3.3, 4.4) under a uniform envelope",
       run_ar_beta},
      {"slice_normal", "slice sampler on the standard normal, 10^4 iterations",
       run_slice_normal},
      {"indep_mh", "independent Metropolis, N(0,1) proposal onto an N(1,1) target",
       run_indep_mh},
      {"trunc_proposal_mh",
       "positive truncated-normal proposal (sigma 0.1) on the log-bump target",
       run_trunc_proposal_mh},
      {"rw_truncated_target",
       "Gaussian random walk targeting N(4,1) truncated to (0,1)", run_rw_truncated_target},
      {"hmc_normal",
       "HMC with leapfrog integration on the standard normal and an 18-dim target",
       run_hmc_normal},
      {"abc_normal",
       "ABC rejection with (median, mad) summaries on the normal location model",
       run_abc_normal},
  };
  return entries;
}

}  // namespace experiments

/// Runs one registry experiment, writing <name>.csv and <name>.summary.txt.
/// Re-running with an identical spec yields byte-identical files.
inline void run_experiment(const ExperimentSpec& spec) {
  for (const auto& entry : experiments::registry()) {
    if (entry.name == spec.name) {
      entry.run(spec);
      return;
    }
  }
  std::string names;
  for (const auto& entry : experiments::registry()) names += "\n  " + entry.name;
  throw std::invalid_argument("unknown experiment '" + spec.name + "'; known names:" + names);
}

inline std::vector<std::pair<std::string, std::string>> list_experiments() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : experiments::registry())
    out.emplace_back(entry.name, entry.description);
  return out;
}

}  // namespace mcforge

#endif
