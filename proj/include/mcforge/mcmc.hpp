#ifndef MCFORGE_MCMC_HPP
#define MCFORGE_MCMC_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mcforge/math.hpp"
#include "mcforge/rng.hpp"
#include "mcforge/target.hpp"

namespace mcforge {

/// Current chain position with its log-density cached so each step evaluates
/// the target once, on the proposal only.
struct ChainState {
  Vec position;
  double cached_log_unnorm = 0.0;

  static ChainState at(const Vec& x, const TargetDensity& target) {
    return ChainState{x, target.log_unnorm(x)};
  }
};

// --- Proposals --------------------------------------------------------------

/// Symmetric Gaussian random walk; one scale, or one per coordinate.
struct RandomWalkProposal {
  Vec scales;
  explicit RandomWalkProposal(double scale) : scales{scale} {}
  explicit RandomWalkProposal(Vec per_coord) : scales(std::move(per_coord)) {}
  double scale_for(std::size_t i) const {
    return scales.size() == 1 ? scales[0] : scales.at(i);
  }
};

/// Proposal not depending on the current point.
struct IndependentProposal {
  std::function<Vec(RandomStream&)> sampler;
  std::function<double(const Vec&)> logdensity;
};

/// N+(current, sigma^2): Normal centered at the current scalar state,
/// truncated to (0,inf). Proposed by inverse-CDF, one uniform per draw.
struct TruncatedNormalPositiveProposal {
  double sigma;
};

using ProposalSpec =
    std::variant<RandomWalkProposal, IndependentProposal, TruncatedNormalPositiveProposal>;

namespace detail {

inline void check_proposal(const ProposalSpec& prop) {
  if (const auto* rw = std::get_if<RandomWalkProposal>(&prop)) {
    for (double s : rw->scales)
      if (!(s > 0.0)) throw std::invalid_argument("random walk scale must be positive");
  } else if (const auto* tn = std::get_if<TruncatedNormalPositiveProposal>(&prop)) {
    if (!(tn->sigma > 0.0)) throw std::invalid_argument("truncated normal sigma must be positive");
  }
}

/// Draws x' and returns (x', log q(x|x') - log q(x'|x)).
inline std::pair<Vec, double> propose(const Vec& x, const ProposalSpec& prop,
                                      RandomStream& stream) {
  if (const auto* rw = std::get_if<RandomWalkProposal>(&prop)) {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      y[i] = x[i] + rw->scale_for(i) * stream.normal(0.0, 1.0);
    return {std::move(y), 0.0};
  }
  if (const auto* ip = std::get_if<IndependentProposal>(&prop)) {
    Vec y = ip->sampler(stream);
    const double ratio = ip->logdensity(x) - ip->logdensity(y);
    return {std::move(y), ratio};
  }
  const auto& tn = std::get<TruncatedNormalPositiveProposal>(prop);
  if (x.size() != 1)
    throw std::invalid_argument("truncated normal proposal is one-dimensional");
  const double mu = x[0];
  const double lo = normal_cdf(-mu / tn.sigma);
  const double u = stream.uniform01();
  const double y = mu + tn.sigma * inverse_normal_cdf(lo + u * (1.0 - lo));
  // phi terms are symmetric; only the truncation masses survive
  const double ratio = std::log(normal_cdf(mu / tn.sigma)) - std::log(normal_cdf(y / tn.sigma));
  return {Vec{y}, ratio};
}

}  // namespace detail

/// One Metropolis-Hastings transition. Off-support proposals get alpha = 0 and
/// the state repeats; the uniform is always consumed, keeping streams aligned.
inline std::pair<ChainState, bool> mh_step(const ChainState& s, const TargetDensity& target,
                                           const ProposalSpec& prop, RandomStream& stream) {
  detail::check_proposal(prop);
  auto [y, log_q_ratio] = detail::propose(s.position, prop, stream);
  const double lp_y = target.log_unnorm(y);
  const double log_alpha = lp_y - s.cached_log_unnorm + log_q_ratio;
  const double u = stream.uniform01();
  if (log_alpha >= 0.0 || u < std::exp(log_alpha))
    return {ChainState{std::move(y), lp_y}, true};
  return {s, false};
}

/// Uncapped independent-MH ratio [f_Y(x')/f_V(x')] * [f_V(x)/f_Y(x)].
inline double indep_mh_ratio(double x_curr, double x_prop,
                             const std::function<double(double)>& f_target_log,
                             const std::function<double(double)>& f_prop_log) {
  return std::exp(f_target_log(x_prop) - f_prop_log(x_prop) + f_prop_log(x_curr) -
                  f_target_log(x_curr));
}

inline double indep_mh_alpha(double x_curr, double x_prop,
                             const std::function<double(double)>& f_target_log,
                             const std::function<double(double)>& f_prop_log) {
  return std::min(1.0, indep_mh_ratio(x_curr, x_prop, f_target_log, f_prop_log));
}

struct TruncNormAlpha {
  double alpha_full;
  double alpha_simplified;
};

/// Acceptance probability for the N+(mu, sigma^2) proposal, both as the full
/// three-factor ratio and in the simplified form; they agree by phi symmetry.
inline TruncNormAlpha truncnorm_mh_alpha(double mu_prev, double mu_prop, double sigma,
                                         const TargetDensity& target) {
  if (!(mu_prop > 0.0)) throw std::domain_error("truncnorm_mh_alpha: mu_prop must be positive");
  const double lpi = target.log_unnorm(mu_prop) - target.log_unnorm(mu_prev);
  const double ltrunc =
      std::log(normal_cdf(mu_prev / sigma)) - std::log(normal_cdf(mu_prop / sigma));
  const double lphi = normal_logpdf((mu_prev - mu_prop) / sigma) -
                      normal_logpdf((mu_prop - mu_prev) / sigma);
  return {std::min(1.0, std::exp(lpi + lphi + ltrunc)),
          std::min(1.0, std::exp(lpi + ltrunc))};
}

// --- Slice sampler ----------------------------------------------------------

/// One scalar slice move: draw a level uniformly under the density, then draw
/// uniformly from the level set {x : p(x) >= eps * p(x_prev)}. Uses the
/// target's analytic level-set inverse when available, else stepping-out with
/// initial width 1.0 (at most 64 expansions) and shrinkage.
inline double slice_step(double x_prev, const TargetDensity& target, RandomStream& stream) {
  if (target.dim() != 1) throw std::invalid_argument("slice_step: target must be scalar");
  const double lp_prev = target.log_unnorm(x_prev);
  if (lp_prev == neg_inf) throw std::domain_error("slice_step: x_prev off support");
  const double log_level = std::log(stream.uniform_open01()) + lp_prev;

  if (target.has_slice_interval()) {
    auto [lo, hi] = target.slice_interval(log_level);
    return lo + stream.uniform01() * (hi - lo);
  }

  const double width = 1.0;
  const double r = stream.uniform01();
  double lo = x_prev - r * width;
  double hi = x_prev + (1.0 - r) * width;
  int expansions = 0;
  while (target.log_unnorm(lo) >= log_level) {
    lo -= width;
    if (++expansions > 64) throw std::runtime_error("slice_step: level set bracketing failed");
  }
  expansions = 0;
  while (target.log_unnorm(hi) >= log_level) {
    hi += width;
    if (++expansions > 64) throw std::runtime_error("slice_step: level set bracketing failed");
  }
  for (int iter = 0; iter < 1024; ++iter) {
    const double x = lo + stream.uniform01() * (hi - lo);
    if (target.log_unnorm(x) >= log_level) return x;
    if (x > x_prev)
      hi = x;
    else
      lo = x;
  }
  throw std::runtime_error("slice_step: shrinkage did not terminate");
}

// --- Metropolis-within-Gibbs ------------------------------------------------

/// One-dimensional proposal for a single coordinate. The independent variant
/// sees the full current position, so a full-conditional proposal (Gibbs
/// proper, acceptance one) is expressible.
struct CoordRandomWalk {
  double scale;
};
struct CoordIndependent {
  std::function<double(const Vec&, std::size_t, RandomStream&)> sampler;
  std::function<double(const Vec&, std::size_t, double)> logdensity;
};
using CoordProposal = std::variant<CoordRandomWalk, CoordIndependent>;

/// One fixed-scan sweep: coordinates updated in order 0..dim-1, each by a
/// scalar MH move against the full target.
inline ChainState mwg_sweep(const ChainState& s, const TargetDensity& target,
                            const std::vector<CoordProposal>& per_coord, RandomStream& stream) {
  if (static_cast<int>(per_coord.size()) != target.dim())
    throw std::invalid_argument("mwg_sweep: need one proposal per coordinate");
  ChainState cur = s;
  for (std::size_t i = 0; i < per_coord.size(); ++i) {
    double z;
    double log_q_ratio = 0.0;
    if (const auto* rw = std::get_if<CoordRandomWalk>(&per_coord[i])) {
      if (!(rw->scale > 0.0)) throw std::invalid_argument("mwg_sweep: scale must be positive");
      z = cur.position[i] + rw->scale * stream.normal(0.0, 1.0);
    } else {
      const auto& ip = std::get<CoordIndependent>(per_coord[i]);
      z = ip.sampler(cur.position, i, stream);
      log_q_ratio = ip.logdensity(cur.position, i, cur.position[i]) -
                    ip.logdensity(cur.position, i, z);
    }
    Vec cand = cur.position;
    cand[i] = z;
    const double lp_cand = target.log_unnorm(cand);
    const double log_alpha = lp_cand - cur.cached_log_unnorm + log_q_ratio;
    const double u = stream.uniform01();
    if (log_alpha >= 0.0 || u < std::exp(log_alpha))
      cur = ChainState{std::move(cand), lp_cand};
  }
  return cur;
}

// --- Chain runner -----------------------------------------------------------

struct Trace {
  std::vector<Vec> states;            // length N+1, starts at x0
  std::vector<bool> accept_flags;     // length N, one per transition
  std::vector<bool> divergent;        // empty unless produced by HMC
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::string kernel_label;

  std::vector<double> component(std::size_t i = 0) const {
    std::vector<double> out(states.size());
    for (std::size_t t = 0; t < states.size(); ++t) out[t] = states[t].at(i);
    return out;
  }

  double acceptance_rate() const {
    if (accept_flags.empty()) return 0.0;
    std::size_t acc = 0;
    for (bool a : accept_flags) acc += a;
    return static_cast<double>(acc) / static_cast<double>(accept_flags.size());
  }
};

using StepKernel = std::function<std::pair<ChainState, bool>(const ChainState&, RandomStream&)>;

inline Trace run_chain(const StepKernel& kernel, const Vec& x0, std::size_t n,
                       const TargetDensity& target, RandomStream& stream,
                       std::string label = "mh") {
  const double lp0 = target.log_unnorm(x0);
  if (lp0 == neg_inf) throw std::invalid_argument("run_chain: x0 off support");
  Trace trace;
  trace.kernel_label = std::move(label);
  if (const auto* seeded = dynamic_cast<const SeededStream*>(&stream)) {
    trace.seed = seeded->seed();
    trace.stream_id = seeded->stream_id();
  }
  trace.states.reserve(n + 1);
  trace.accept_flags.reserve(n);
  ChainState cur{x0, lp0};
  trace.states.push_back(cur.position);
  for (std::size_t t = 0; t < n; ++t) {
    auto [next, accepted] = kernel(cur, stream);
    cur = std::move(next);
    trace.states.push_back(cur.position);
    trace.accept_flags.push_back(accepted);
  }
  return trace;
}

inline StepKernel make_mh_kernel(const TargetDensity& target, ProposalSpec prop) {
  return [&target, prop = std::move(prop)](const ChainState& s, RandomStream& stream) {
    return mh_step(s, target, prop, stream);
  };
}

}  // namespace mcforge

#endif
