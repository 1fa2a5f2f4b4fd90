#ifndef MCFORGE_CLASSIC_MC_HPP
#define MCFORGE_CLASSIC_MC_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mcforge/math.hpp"
#include "mcforge/rng.hpp"
#include "mcforge/target.hpp"

namespace mcforge {

struct WeightedSample {
  std::vector<Vec> points;
  std::vector<double> log_weights;  // finite or -inf (zero weight off-support)
};

struct AcceptRejectReport {
  std::vector<Vec> accepted;
  std::size_t proposals_used = 0;
  double acceptance_rate = 0.0;
};

struct EnvelopeViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateSample : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Accept-reject with envelope p(y) <= M g(y). The bound is a precondition the
/// code polices: any proposal breaking it raises EnvelopeViolation naming y.
inline AcceptRejectReport accept_reject(const TargetDensity& p,
                                        const std::function<Vec(RandomStream&)>& g_sampler,
                                        const std::function<double(const Vec&)>& g_logdensity,
                                        double envelope_m, std::size_t n_proposals,
                                        RandomStream& stream) {
  if (!(envelope_m > 0.0)) throw std::invalid_argument("accept_reject: M must be positive");
  const double log_m = std::log(envelope_m);
  AcceptRejectReport report;
  for (std::size_t i = 0; i < n_proposals; ++i) {
    Vec y = g_sampler(stream);
    const double lp = p.log_unnorm(y);
    const double lg = g_logdensity(y);
    const double log_ratio = lp - log_m - lg;
    if (log_ratio > 1e-12) {
      std::ostringstream os;
      os << "accept_reject: envelope violated at y = (";
      for (std::size_t k = 0; k < y.size(); ++k) os << (k ? "," : "") << y[k];
      os << "): p(y) > M*g(y)";
      throw EnvelopeViolation(os.str());
    }
    const double u = stream.uniform01();
    if (u < std::exp(log_ratio)) report.accepted.push_back(std::move(y));
  }
  report.proposals_used = n_proposals;
  report.acceptance_rate =
      static_cast<double>(report.accepted.size()) / static_cast<double>(n_proposals);
  return report;
}

struct ImportanceEstimate {
  std::optional<double> raw_estimate;  // absent when f is only known up to a constant
  double self_normalized = 0.0;
  double ess = 0.0;  // (sum w)^2 / sum w^2
  WeightedSample weighted;
};

/// Importance sampling of E_f[h]. Weights live in log space with a max-shift
/// before exponentiation; the raw (1/N sum h*w) average is only reported when
/// f_log is flagged as a normalized density.
inline ImportanceEstimate importance_estimate(
    const std::function<double(const Vec&)>& h,
    const std::function<Vec(RandomStream&)>& q_sampler,
    const std::function<double(const Vec&)>& q_logdensity,
    const std::function<double(const Vec&)>& f_log, bool f_is_normalized,
    std::size_t n, RandomStream& stream) {
  if (n < 1) throw std::invalid_argument("importance_estimate: N must be >= 1");
  ImportanceEstimate out;
  out.weighted.points.reserve(n);
  out.weighted.log_weights.reserve(n);
  std::vector<double> h_vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec x = q_sampler(stream);
    const double lw = f_log(x) - q_logdensity(x);
    h_vals[i] = h(x);
    out.weighted.points.push_back(std::move(x));
    out.weighted.log_weights.push_back(lw);
  }
  double max_lw = neg_inf;
  for (double lw : out.weighted.log_weights) max_lw = std::max(max_lw, lw);
  if (max_lw == neg_inf)
    throw DegenerateSample("importance_estimate: all weights are zero");
  double sw = 0.0, sw2 = 0.0, shw = 0.0, raw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(out.weighted.log_weights[i] - max_lw);
    sw += w;
    sw2 += w * w;
    shw += h_vals[i] * w;
    if (f_is_normalized)
      raw += h_vals[i] * std::exp(out.weighted.log_weights[i]);
  }
  out.self_normalized = shw / sw;
  out.ess = sw * sw / sw2;
  if (f_is_normalized) out.raw_estimate = raw / static_cast<double>(n);
  return out;
}

/// Multinomial resampling by normalized weights. The resample is NOT exactly
/// distributed from the target, only approximately so.
inline std::vector<Vec> sir_resample(const WeightedSample& w, std::size_t m,
                                     RandomStream& stream) {
  if (w.points.size() != w.log_weights.size())
    throw std::invalid_argument("sir_resample: length mismatch");
  const std::size_t n = w.points.size();
  double max_lw = neg_inf;
  for (double lw : w.log_weights) max_lw = std::max(max_lw, lw);
  if (n == 0 || max_lw == neg_inf)
    throw DegenerateSample("sir_resample: all weights are zero");
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += std::exp(w.log_weights[i] - max_lw);
    cum[i] = acc;
  }
  std::vector<Vec> out;
  out.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double u = stream.uniform01() * acc;
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const std::size_t idx = std::min<std::size_t>(it - cum.begin(), n - 1);
    out.push_back(w.points[idx]);
  }
  return out;
}

}  // namespace mcforge

#endif
