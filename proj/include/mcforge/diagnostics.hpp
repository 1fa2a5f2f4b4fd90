#ifndef MCFORGE_DIAGNOSTICS_HPP
#define MCFORGE_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcforge/math.hpp"

namespace mcforge {

/// Biased (1/N-normalized) sample autocovariance at the given lag.
inline double autocovariance(std::span<const double> series, std::size_t lag) {
  const std::size_t n = series.size();
  if (lag >= n) throw std::invalid_argument("autocovariance: lag >= length");
  const double m = mean(series);
  double s = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) s += (series[t] - m) * (series[t + lag] - m);
  return s / static_cast<double>(n);
}

/// Asymptotic variance of the chain average, var + 2*sum of autocovariances,
/// truncated by the initial-positive-sequence rule: consecutive-lag pairs
/// (gamma_2k + gamma_2k+1) are summed until a pair goes non-positive.
inline double asymptotic_variance(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw std::invalid_argument("asymptotic_variance: need length >= 100");
  const double gamma0 = autocovariance(series, 0);
  if (gamma0 <= 0.0) throw std::runtime_error("asymptotic_variance: constant series");
  double total = -gamma0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = autocovariance(series, 2 * k) + autocovariance(series, 2 * k + 1);
    if (pair <= 0.0) break;
    total += 2.0 * pair;
  }
  return std::max(total, 0.0);
}

/// Effective sample size implied by the chain autocorrelation.
inline double ess_chain(std::span<const double> series) {
  const double av = asymptotic_variance(series);
  return static_cast<double>(series.size()) * autocovariance(series, 0) / av;
}

/// Sup-distance between the empirical CDF of the sample and the given CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Asymptotic KS critical value at the given significance.
inline double ks_critical(double significance, std::size_t n) {
  return std::sqrt(-0.5 * std::log(significance / 2.0)) / std::sqrt(static_cast<double>(n));
}

/// Two-sample KS statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    // advance past ties on both sides before comparing the ECDFs
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Shortest contiguous window of the sorted sample containing ceil(level*n)
/// points.
inline std::pair<double, double> hpd_interval(std::vector<double> sample, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("hpd_interval: level must be in (0,1)");
  if (sample.empty()) throw std::invalid_argument("hpd_interval: empty sample");
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  const std::size_t k = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::ceil(level * static_cast<double>(n))));
  std::size_t best = 0;
  double best_width = pos_inf;
  for (std::size_t i = 0; i + k <= n; ++i) {
    const double w = sample[i + k - 1] - sample[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }
  return {sample[best], sample[best + k - 1]};
}

struct DiagnosticsReport {
  std::vector<double> mean;
  std::vector<double> variance;
  double acceptance_rate = 0.0;
  double ess = 0.0;
  double asymptotic_variance = 0.0;
};

/// Scalar-chain summary. A leading burn-in fraction (default 10%) is discarded
/// before computing moments; the chain's acceptance rate is passed through.
inline DiagnosticsReport summarize_chain(std::span<const double> series, double acceptance_rate,
                                         double burn_in_fraction = 0.1) {
  const std::size_t burn =
      static_cast<std::size_t>(burn_in_fraction * static_cast<double>(series.size()));
  auto kept = series.subspan(burn);
  DiagnosticsReport rep;
  rep.mean = {mcforge::mean(kept)};
  rep.variance = {mcforge::variance(kept)};
  rep.acceptance_rate = acceptance_rate;
  rep.asymptotic_variance = mcforge::asymptotic_variance(kept);
  rep.ess = static_cast<double>(kept.size()) * rep.variance[0] / rep.asymptotic_variance;
  return rep;
}

}  // namespace mcforge

#endif
