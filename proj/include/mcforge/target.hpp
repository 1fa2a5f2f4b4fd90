#ifndef MCFORGE_TARGET_HPP
#define MCFORGE_TARGET_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcforge/math.hpp"

namespace mcforge {

using Vec = std::vector<double>;

/// A density known up to a normalizing constant. The support is encoded
/// entirely through the log-density: -inf off support, finite on it.
class TargetDensity {
 public:
  using LogFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  /// Maps a log level L to the interval {x : log_unnorm(x) >= L}; only
  /// meaningful for unimodal scalar targets that admit analytic inversion.
  using SliceFn = std::function<std::pair<double, double>(double)>;

  TargetDensity(int dim, LogFn log_unnorm, std::string support_label,
                GradFn grad = nullptr, SliceFn slice_interval = nullptr)
      : dim_(dim),
        log_unnorm_(std::move(log_unnorm)),
        grad_(std::move(grad)),
        slice_interval_(std::move(slice_interval)),
        support_label_(std::move(support_label)) {
    if (dim_ <= 0) throw std::invalid_argument("TargetDensity: dim must be positive");
  }

  int dim() const { return dim_; }
  const std::string& support_label() const { return support_label_; }
  bool has_gradient() const { return static_cast<bool>(grad_); }
  bool has_slice_interval() const { return static_cast<bool>(slice_interval_); }

  double log_unnorm(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("log_unnorm: dimension mismatch");
    return log_unnorm_(x);
  }

  /// Scalar convenience for dim-1 targets.
  double log_unnorm(double x) const { return log_unnorm(Vec{x}); }

  Vec grad_log_unnorm(const Vec& x) const {
    if (!grad_) throw std::runtime_error("grad_log_unnorm: gradient not available");
    if (static_cast<int>(x.size()) != dim_)
      throw std::invalid_argument("grad_log_unnorm: dimension mismatch");
    if (log_unnorm_(x) == neg_inf)
      throw std::domain_error("grad_log_unnorm: point off support");
    return grad_(x);
  }

  std::pair<double, double> slice_interval(double log_level) const {
    if (!slice_interval_) throw std::runtime_error("slice_interval: not available");
    return slice_interval_(log_level);
  }

 private:
  int dim_;
  LogFn log_unnorm_;
  GradFn grad_;
  SliceFn slice_interval_;
  std::string support_label_;
};

/// Prior + likelihood for a fixed dataset; composed into one unnormalized
/// log-density. The marginal likelihood is deliberately never represented.
struct PosteriorSpec {
  int dim = 1;
  std::function<double(const Vec&)> log_prior;
  std::function<double(const Vec&)> log_likelihood;  // data is baked in
  std::string label = "posterior";
};

inline TargetDensity make_posterior(PosteriorSpec spec) {
  auto lp = spec.log_prior;
  auto ll = spec.log_likelihood;
  return TargetDensity(
      spec.dim,
      [lp, ll](const Vec& x) {
        const double a = lp(x);
        if (a == neg_inf) return neg_inf;
        const double b = ll(x);
        if (b == neg_inf) return neg_inf;
        return a + b;
      },
      spec.label);
}

// ---------------------------------------------------------------------------
// Built-in catalog
// ---------------------------------------------------------------------------

namespace targets {

/// p(x) = x^a (1-x)^b on (0,1), bounded by 1 for a,b >= 0.
inline TargetDensity beta_unnorm(double a, double b) {
  return TargetDensity(
      1,
      [a, b](const Vec& x) {
        const double t = x[0];
        if (t <= 0.0 || t >= 1.0) return neg_inf;
        return a * std::log(t) + b * std::log1p(-t);
      },
      "(0,1)",
      [a, b](const Vec& x) { return Vec{a / x[0] - b / (1.0 - x[0])}; });
}

inline TargetDensity normal(double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("normal target: sd must be positive");
  return TargetDensity(
      1,
      [mean, sd](const Vec& x) { return -0.5 * sqr((x[0] - mean) / sd); },
      "R",
      [mean, sd](const Vec& x) { return Vec{-(x[0] - mean) / (sd * sd)}; },
      [mean, sd](double log_level) {
        // exp(-z^2/2) >= exp(L) with the peak at log level 0
        const double half_width = sd * std::sqrt(std::max(0.0, -2.0 * log_level));
        return std::pair{mean - half_width, mean + half_width};
      });
}

inline TargetDensity std_normal() { return normal(0.0, 1.0); }

inline TargetDensity exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential target: rate must be positive");
  return TargetDensity(
      1,
      [rate](const Vec& x) { return x[0] < 0.0 ? neg_inf : -rate * x[0]; },
      "[0,inf)",
      [rate](const Vec&) { return Vec{-rate}; });
}

inline TargetDensity student_t(double nu, double shift) {
  return TargetDensity(
      1,
      [nu, shift](const Vec& x) {
        return -0.5 * (nu + 1.0) * std::log1p(sqr(x[0] - shift) / nu);
      },
      "R",
      [nu, shift](const Vec& x) {
        const double z = x[0] - shift;
        return Vec{-(nu + 1.0) * z / (nu + z * z)};
      });
}

/// N(4,1) density truncated to (0,1); support handled purely by -inf.
inline TargetDensity trunc_normal_target() {
  return TargetDensity(
      1,
      [](const Vec& x) {
        if (x[0] <= 0.0 || x[0] >= 1.0) return neg_inf;
        return -0.5 * sqr(x[0] - 4.0);
      },
      "(0,1)");
}

/// pi(mu) ∝ exp{-(log mu - 1)^2} exp{-(log mu - 3)^4/4} on (0,inf).
inline TargetDensity log_bump() {
  return TargetDensity(
      1,
      [](const Vec& x) {
        if (x[0] <= 0.0) return neg_inf;
        const double l = std::log(x[0]);
        return -sqr(l - 1.0) - 0.25 * sqr(sqr(l - 3.0));
      },
      "(0,inf)",
      [](const Vec& x) {
        const double l = std::log(x[0]);
        return Vec{(-2.0 * (l - 1.0) - std::pow(l - 3.0, 3)) / x[0]};
      });
}

/// pi(theta|x) ∝ exp{-||theta-x||^2 - ||theta+x||^4 - ||theta-2x||^6} in R^18.
/// The observation x is a free constructor parameter; default all 0.5.
inline TargetDensity artificial18(Vec obs = Vec(18, 0.5)) {
  if (obs.size() != 18) throw std::invalid_argument("artificial18: obs must have 18 coordinates");
  return TargetDensity(
      18,
      [obs](const Vec& th) {
        double s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (int i = 0; i < 18; ++i) {
          s1 += sqr(th[i] - obs[i]);
          s2 += sqr(th[i] + obs[i]);
          s3 += sqr(th[i] - 2.0 * obs[i]);
        }
        return -s1 - sqr(s2) - s3 * s3 * s3;
      },
      "R^18",
      [obs](const Vec& th) {
        double s2 = 0.0, s3 = 0.0;
        for (int i = 0; i < 18; ++i) {
          s2 += sqr(th[i] + obs[i]);
          s3 += sqr(th[i] - 2.0 * obs[i]);
        }
        Vec g(18);
        for (int i = 0; i < 18; ++i) {
          g[i] = -2.0 * (th[i] - obs[i]) - 4.0 * s2 * (th[i] + obs[i]) -
                 6.0 * s3 * s3 * (th[i] - 2.0 * obs[i]);
        }
        return g;
      });
}

}  // namespace targets

/// Catalog lookup keyed by the stable CLI names.
inline TargetDensity builtin(const std::string& name, const Vec& params = {}) {
  auto want = [&](std::size_t n) {
    if (params.size() != n)
      throw std::invalid_argument("builtin: wrong parameter count for " + name);
  };
  if (name == "beta_unnorm") { want(2); return targets::beta_unnorm(params[0], params[1]); }
  if (name == "std_normal") { want(0); return targets::std_normal(); }
  if (name == "normal") { want(2); return targets::normal(params[0], params[1]); }
  if (name == "exponential") { want(1); return targets::exponential(params[0]); }
  if (name == "student_t") { want(2); return targets::student_t(params[0], params[1]); }
  if (name == "trunc_normal_target") { want(0); return targets::trunc_normal_target(); }
  if (name == "log_bump") { want(0); return targets::log_bump(); }
  if (name == "artificial18") {
    if (params.empty()) return targets::artificial18();
    return targets::artificial18(params);
  }
  throw std::out_of_range("builtin: unknown target name '" + name + "'");
}

}  // namespace mcforge

#endif
