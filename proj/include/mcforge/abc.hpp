#ifndef MCFORGE_ABC_HPP
#define MCFORGE_ABC_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mcforge/math.hpp"
#include "mcforge/mcmc.hpp"
#include "mcforge/rng.hpp"

namespace mcforge {

/// (median, mad) with mad the unscaled median of absolute deviations.
inline std::pair<double, double> median_mad(const std::vector<double>& data) {
  if (data.empty()) throw std::invalid_argument("median_mad: empty data");
  const double med = median(data);
  std::vector<double> dev(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) dev[i] = std::abs(data[i] - med);
  return {med, median(std::move(dev))};
}

/// Lower empirical quantile (no interpolation): sorted[ceil(q*n)-1].
inline double select_tolerance(std::vector<double> distances, double q) {
  if (distances.empty()) throw std::invalid_argument("select_tolerance: empty distances");
  if (!(q > 0.0 && q <= 1.0))
    throw std::invalid_argument("select_tolerance: q must be in (0,1]");
  std::sort(distances.begin(), distances.end());
  const std::size_t n = distances.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  return distances[k - 1];
}

/// Prior sampler plus forward simulator; no density evaluation of the data.
struct GenerativeModel {
  std::function<Vec(RandomStream&)> prior_sampler;
  std::function<Vec(const Vec&, RandomStream&)> simulator;
  std::function<double(const Vec&)> prior_logdensity;  // optional, needed by ABC-MCMC
  std::string label;
};

struct FixedTolerance {
  double epsilon;
};
struct QuantileTolerance {
  double q;
};

struct AbcConfig {
  std::function<Vec(const Vec&)> summary;
  std::variant<FixedTolerance, QuantileTolerance> tolerance = QuantileTolerance{0.01};
  /// Per-component summary scaling by the prior-predictive MAD before the
  /// Euclidean distance; mixed summaries (median vs mad) have incomparable
  /// units otherwise. Zero MADs fall back to scale 1.
  bool mad_scaling = true;
  std::size_t simulation_budget = 10'000'000;  // fixed-eps termination guard
  std::size_t pilot_size = 512;                // prior-predictive sims used to fit scales
};

struct AbcResult {
  std::vector<Vec> accepted_thetas;
  std::vector<double> distances;  // of the accepted draws
  double epsilon_used = 0.0;
  std::size_t n_simulated = 0;
};

struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<double> mad_scales(const std::vector<Vec>& summaries) {
  if (summaries.empty()) return {};
  const std::size_t d = summaries[0].size();
  std::vector<double> scales(d, 1.0);
  std::vector<double> comp(summaries.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < summaries.size(); ++i) comp[i] = summaries[i][j];
    const double mad = median_mad(comp).second;
    if (mad > 0.0) scales[j] = mad;
  }
  return scales;
}

inline double scaled_distance(const Vec& a, const Vec& b, const std::vector<double>& scales) {
  if (a.size() != b.size()) throw std::invalid_argument("abc distance: summary size mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double sc = scales.empty() ? 1.0 : scales[j];
    s += sqr((a[j] - b[j]) / sc);
  }
  return std::sqrt(s);
}

inline void check_tolerance(const AbcConfig& cfg) {
  if (const auto* f = std::get_if<FixedTolerance>(&cfg.tolerance)) {
    if (!(f->epsilon >= 0.0)) throw std::invalid_argument("abc: epsilon must be >= 0");
  } else {
    const double q = std::get<QuantileTolerance>(cfg.tolerance).q;
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("abc: q must be in (0,1]");
  }
}

}  // namespace detail

/// ABC rejection (Algorithm: simulate from prior x simulator, accept within
/// tolerance of the observed summaries). Fixed epsilon loops until N
/// acceptances or the simulation budget runs out; quantile mode simulates N
/// pairs and keeps the fraction with smallest distances.
inline AbcResult abc_reject(const GenerativeModel& model, const Vec& x_obs,
                            const AbcConfig& cfg, std::size_t n, RandomStream& stream) {
  if (n < 1) throw std::invalid_argument("abc_reject: N must be >= 1");
  detail::check_tolerance(cfg);
  const Vec obs_summary = cfg.summary(x_obs);
  AbcResult out;

  if (const auto* qt = std::get_if<QuantileTolerance>(&cfg.tolerance)) {
    std::vector<Vec> thetas(n);
    std::vector<Vec> summaries(n);
    for (std::size_t i = 0; i < n; ++i) {
      thetas[i] = model.prior_sampler(stream);
      summaries[i] = cfg.summary(model.simulator(thetas[i], stream));
    }
    const std::vector<double> scales =
        cfg.mad_scaling ? detail::mad_scales(summaries) : std::vector<double>{};
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i)
      dist[i] = detail::scaled_distance(summaries[i], obs_summary, scales);
    out.epsilon_used = select_tolerance(dist, qt->q);
    out.n_simulated = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] <= out.epsilon_used) {
        out.accepted_thetas.push_back(thetas[i]);
        out.distances.push_back(dist[i]);
      }
    }
    return out;
  }

  const double eps = std::get<FixedTolerance>(cfg.tolerance).epsilon;
  std::vector<double> scales;
  if (cfg.mad_scaling) {
    std::vector<Vec> pilot(cfg.pilot_size);
    for (auto& s : pilot) s = cfg.summary(model.simulator(model.prior_sampler(stream), stream));
    scales = detail::mad_scales(pilot);
    out.n_simulated += cfg.pilot_size;
  }
  out.epsilon_used = eps;
  while (out.accepted_thetas.size() < n) {
    if (out.n_simulated >= cfg.simulation_budget)
      throw BudgetExhausted("abc_reject: simulation budget exhausted before N acceptances");
    Vec theta = model.prior_sampler(stream);
    Vec summary = cfg.summary(model.simulator(theta, stream));
    ++out.n_simulated;
    const double d = detail::scaled_distance(summary, obs_summary, scales);
    if (d <= eps) {
      out.accepted_thetas.push_back(std::move(theta));
      out.distances.push_back(d);
    }
  }
  return out;
}

/// Likelihood-free MCMC: propose theta', simulate z', accept on the prior x
/// proposal ratio AND the tolerance indicator; otherwise (theta, z) repeats
/// (z is not re-simulated on rejection).
inline Trace abc_mcmc(const GenerativeModel& model, const Vec& x_obs, const AbcConfig& cfg,
                      const ProposalSpec& proposal, std::size_t n, RandomStream& stream) {
  if (!model.prior_logdensity)
    throw std::runtime_error("abc_mcmc: prior_logdensity required");
  const auto* fixed = std::get_if<FixedTolerance>(&cfg.tolerance);
  if (!fixed) throw std::invalid_argument("abc_mcmc: fixed tolerance required");
  const Vec obs_summary = cfg.summary(x_obs);

  std::vector<double> scales;
  if (cfg.mad_scaling) {
    std::vector<Vec> pilot(cfg.pilot_size);
    for (auto& s : pilot) s = cfg.summary(model.simulator(model.prior_sampler(stream), stream));
    scales = detail::mad_scales(pilot);
  }

  // initial (theta, z) from one ABC rejection acceptance
  Vec theta, summary;
  {
    std::size_t sims = 0;
    while (true) {
      if (sims++ >= cfg.simulation_budget)
        throw BudgetExhausted("abc_mcmc: could not initialize within budget");
      Vec cand = model.prior_sampler(stream);
      Vec s = cfg.summary(model.simulator(cand, stream));
      if (detail::scaled_distance(s, obs_summary, scales) <= fixed->epsilon) {
        theta = std::move(cand);
        summary = std::move(s);
        break;
      }
    }
  }

  Trace trace;
  trace.kernel_label = "abc_mcmc";
  if (const auto* seeded = dynamic_cast<const SeededStream*>(&stream)) {
    trace.seed = seeded->seed();
    trace.stream_id = seeded->stream_id();
  }
  trace.states.push_back(theta);
  double lp = model.prior_logdensity(theta);
  for (std::size_t t = 0; t < n; ++t) {
    auto [cand, log_q_ratio] = detail::propose(theta, proposal, stream);
    const double lp_cand = model.prior_logdensity(cand);
    bool accepted = false;
    if (lp_cand > neg_inf) {
      Vec z_summary = cfg.summary(model.simulator(cand, stream));
      const double u = stream.uniform01();
      const double log_alpha = lp_cand - lp + log_q_ratio;
      if (u <= std::exp(log_alpha) &&
          detail::scaled_distance(z_summary, obs_summary, scales) <= fixed->epsilon) {
        theta = std::move(cand);
        lp = lp_cand;
        accepted = true;
      }
    }
    trace.states.push_back(theta);
    trace.accept_flags.push_back(accepted);
  }
  return trace;
}

/// ABC estimate of the Bayes factor B12: acceptance frequencies divided by the
/// simulation frequencies. By default models are simulated proportionally to
/// their prior probabilities; sim_freq1 overrides the simulation share of
/// model 1, with the correction keeping the estimate invariant.
inline double abc_bayes_factor(const GenerativeModel& m1, const GenerativeModel& m2,
                               double prior_prob1, const Vec& x_obs, const AbcConfig& cfg,
                               std::size_t n_total, RandomStream& stream,
                               std::optional<double> sim_freq1 = std::nullopt) {
  if (!(prior_prob1 > 0.0 && prior_prob1 < 1.0))
    throw std::invalid_argument("abc_bayes_factor: prior_prob1 must be in (0,1)");
  const double s1 = sim_freq1.value_or(prior_prob1);
  if (!(s1 > 0.0 && s1 < 1.0))
    throw std::invalid_argument("abc_bayes_factor: sim_freq1 must be in (0,1)");
  detail::check_tolerance(cfg);
  const Vec obs_summary = cfg.summary(x_obs);

  std::vector<char> model_idx(n_total);
  std::vector<Vec> summaries(n_total);
  std::size_t sims1 = 0;
  for (std::size_t i = 0; i < n_total; ++i) {
    const bool first = stream.uniform01() < s1;
    const GenerativeModel& m = first ? m1 : m2;
    model_idx[i] = first ? 1 : 2;
    sims1 += first;
    summaries[i] = cfg.summary(m.simulator(m.prior_sampler(stream), stream));
  }
  const std::vector<double> scales =
      cfg.mad_scaling ? detail::mad_scales(summaries) : std::vector<double>{};
  std::vector<double> dist(n_total);
  for (std::size_t i = 0; i < n_total; ++i)
    dist[i] = detail::scaled_distance(summaries[i], obs_summary, scales);
  double eps;
  if (const auto* f = std::get_if<FixedTolerance>(&cfg.tolerance))
    eps = f->epsilon;
  else
    eps = select_tolerance(dist, std::get<QuantileTolerance>(cfg.tolerance).q);

  std::size_t acc1 = 0, acc2 = 0;
  for (std::size_t i = 0; i < n_total; ++i) {
    if (dist[i] <= eps) (model_idx[i] == 1 ? acc1 : acc2)++;
  }
  if (acc1 == 0 || acc2 == 0)
    throw std::runtime_error("abc_bayes_factor: zero acceptances for one model");
  const std::size_t sims2 = n_total - sims1;
  return (static_cast<double>(acc1) / static_cast<double>(sims1)) /
         (static_cast<double>(acc2) / static_cast<double>(sims2));
}

// --- Built-in generative models ---------------------------------------------

namespace models {

/// Uniform(0,1) prior on theta, n Bernoulli(theta) observations.
inline GenerativeModel bernoulli_toy(std::size_t n_obs = 5) {
  GenerativeModel m;
  m.label = "bernoulli_toy";
  m.prior_sampler = [](RandomStream& s) { return Vec{s.uniform01()}; };
  m.prior_logdensity = [](const Vec& th) {
    return (th[0] > 0.0 && th[0] < 1.0) ? 0.0 : neg_inf;
  };
  m.simulator = [n_obs](const Vec& th, RandomStream& s) {
    Vec z(n_obs);
    for (auto& v : z) v = s.uniform01() < th[0] ? 1.0 : 0.0;
    return z;
  };
  return m;
}

/// Uniform(-10,10) prior on theta, n Normal(theta,1) observations. The
/// companion summary is (median, mad).
inline GenerativeModel normal_location(std::size_t n_obs = 50) {
  GenerativeModel m;
  m.label = "normal_location";
  m.prior_sampler = [](RandomStream& s) { return Vec{-10.0 + 20.0 * s.uniform01()}; };
  m.prior_logdensity = [](const Vec& th) {
    return (th[0] > -10.0 && th[0] < 10.0) ? -std::log(20.0) : neg_inf;
  };
  m.simulator = [n_obs](const Vec& th, RandomStream& s) {
    Vec z(n_obs);
    for (auto& v : z) v = s.normal(th[0], 1.0);
    return z;
  };
  return m;
}

inline Vec median_mad_summary(const Vec& data) {
  auto [med, mad] = median_mad(data);
  return Vec{med, mad};
}

inline double poisson_draw(double lambda, RandomStream& s) {
  const double limit = std::exp(-lambda);
  double p = 1.0;
  double k = -1.0;
  do {
    p *= s.uniform_open01();
    k += 1.0;
  } while (p > limit);
  return k;
}

/// Exp(1) prior on lambda, n Poisson(lambda) observations.
inline GenerativeModel poisson_counts(std::size_t n_obs = 10) {
  GenerativeModel m;
  m.label = "poisson_counts";
  m.prior_sampler = [](RandomStream& s) { return Vec{s.exponential(1.0)}; };
  m.prior_logdensity = [](const Vec& th) { return th[0] < 0.0 ? neg_inf : -th[0]; };
  m.simulator = [n_obs](const Vec& th, RandomStream& s) {
    Vec z(n_obs);
    for (auto& v : z) v = poisson_draw(th[0], s);
    return z;
  };
  return m;
}

/// Uniform(0,1) prior on p, n Geometric(p) observations on {0,1,...}.
inline GenerativeModel geometric_counts(std::size_t n_obs = 10) {
  GenerativeModel m;
  m.label = "geometric_counts";
  m.prior_sampler = [](RandomStream& s) { return Vec{s.uniform_open01()}; };
  m.prior_logdensity = [](const Vec& th) {
    return (th[0] > 0.0 && th[0] < 1.0) ? 0.0 : neg_inf;
  };
  m.simulator = [n_obs](const Vec& th, RandomStream& s) {
    Vec z(n_obs);
    for (auto& v : z)
      v = std::floor(std::log1p(-s.uniform01()) / std::log1p(-th[0]));
    return z;
  };
  return m;
}

inline Vec sum_summary(const Vec& data) {
  return Vec{std::accumulate(data.begin(), data.end(), 0.0)};
}

}  // namespace models

}  // namespace mcforge

#endif
