#ifndef MCFORGE_HMC_HPP
#define MCFORGE_HMC_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mcforge/math.hpp"
#include "mcforge/mcmc.hpp"
#include "mcforge/rng.hpp"
#include "mcforge/target.hpp"

namespace mcforge {

struct PhaseState {
  Vec position;
  Vec momentum;
};

/// Diagonal mass matrix; identity by default.
struct MassSpec {
  Vec diagonal;  // empty means identity

  double mass(std::size_t i) const { return diagonal.empty() ? 1.0 : diagonal.at(i); }

  void validate(std::size_t dim) const {
    if (diagonal.empty()) return;
    if (diagonal.size() != dim) throw std::invalid_argument("MassSpec: dimension mismatch");
    for (double m : diagonal)
      if (!(m > 0.0)) throw std::invalid_argument("MassSpec: entries must be positive");
  }
};

namespace detail {
inline double kinetic(const Vec& v, const MassSpec& mass) {
  double k = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) k += v[i] * v[i] / mass.mass(i);
  return 0.5 * k;
}
}  // namespace detail

/// H(x,v) = -log p(x) + v' M^-1 v / 2, additive constants dropped.
inline double hamiltonian(const PhaseState& s, const TargetDensity& target,
                          const MassSpec& mass = {}) {
  if (s.position.size() != s.momentum.size())
    throw std::invalid_argument("hamiltonian: position/momentum dimension mismatch");
  mass.validate(s.position.size());
  const double lp = target.log_unnorm(s.position);
  if (lp == neg_inf) throw std::domain_error("hamiltonian: position off support");
  return -lp + detail::kinetic(s.momentum, mass);
}

struct LeapfrogResult {
  PhaseState state;
  bool divergent = false;  // trajectory left the support or produced non-finite values
};

/// L symmetric leapfrog steps: half momentum kick, full position drift, half
/// momentum kick. Time-reversible and volume preserving.
inline LeapfrogResult leapfrog(const PhaseState& s, double eps, std::size_t steps,
                               const TargetDensity& target, const MassSpec& mass = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("leapfrog: eps must be positive");
  if (steps < 1) throw std::invalid_argument("leapfrog: L must be >= 1");
  if (!target.has_gradient()) throw std::runtime_error("leapfrog: target gradient not available");
  mass.validate(s.position.size());

  LeapfrogResult out{s, false};
  Vec& x = out.state.position;
  Vec& v = out.state.momentum;
  const std::size_t d = x.size();

  auto grad_or_diverge = [&](Vec& g) {
    if (target.log_unnorm(x) == neg_inf) return false;
    g = target.grad_log_unnorm(x);
    for (double gi : g)
      if (!std::isfinite(gi)) return false;
    return true;
  };

  Vec g(d);
  if (!grad_or_diverge(g)) {
    out.divergent = true;
    return out;
  }
  for (std::size_t step = 0; step < steps; ++step) {
    for (std::size_t i = 0; i < d; ++i) v[i] += 0.5 * eps * g[i];
    for (std::size_t i = 0; i < d; ++i) x[i] += eps * v[i] / mass.mass(i);
    if (!grad_or_diverge(g)) {
      out.divergent = true;
      return out;
    }
    for (std::size_t i = 0; i < d; ++i) v[i] += 0.5 * eps * g[i];
  }
  return out;
}

struct HmcStepResult {
  Vec position;
  bool accepted = false;
  bool divergent = false;
};

/// |dH| beyond this marks a divergent trajectory (auto-reject). Conventional
/// guard value; tunable.
inline constexpr double hmc_divergence_threshold = 1000.0;

/// One HMC iteration with full momentum refresh v ~ N(0, M).
inline HmcStepResult hmc_step(const Vec& x, double eps, std::size_t steps,
                              const TargetDensity& target, const MassSpec& mass,
                              RandomStream& stream) {
  const double lp = target.log_unnorm(x);
  if (lp == neg_inf) throw std::invalid_argument("hmc_step: x off support");
  mass.validate(x.size());
  Vec v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    v[i] = std::sqrt(mass.mass(i)) * stream.normal(0.0, 1.0);

  const double h0 = -lp + detail::kinetic(v, mass);
  LeapfrogResult traj = leapfrog(PhaseState{x, v}, eps, steps, target, mass);
  const double u = stream.uniform01();
  if (traj.divergent) return {x, false, true};

  // H(x*, -v*) == H(x*, v*) exactly: the kinetic term is even in v.
  const double h1 = -target.log_unnorm(traj.state.position) + detail::kinetic(traj.state.momentum, mass);
  if (!std::isfinite(h1) || std::abs(h1 - h0) > hmc_divergence_threshold)
    return {x, false, true};
  const double log_alpha = h0 - h1;
  if (log_alpha >= 0.0 || u < std::exp(log_alpha))
    return {std::move(traj.state.position), true, false};
  return {x, false, false};
}

/// HMC chain with per-step divergence flags recorded in the trace.
inline Trace run_hmc_chain(const Vec& x0, double eps, std::size_t steps, std::size_t n,
                           const TargetDensity& target, const MassSpec& mass,
                           RandomStream& stream, std::string label = "hmc") {
  if (target.log_unnorm(x0) == neg_inf)
    throw std::invalid_argument("run_hmc_chain: x0 off support");
  Trace trace;
  trace.kernel_label = std::move(label);
  if (const auto* seeded = dynamic_cast<const SeededStream*>(&stream)) {
    trace.seed = seeded->seed();
    trace.stream_id = seeded->stream_id();
  }
  trace.states.reserve(n + 1);
  trace.states.push_back(x0);
  Vec cur = x0;
  for (std::size_t t = 0; t < n; ++t) {
    HmcStepResult step = hmc_step(cur, eps, steps, target, mass, stream);
    cur = step.position;
    trace.states.push_back(cur);
    trace.accept_flags.push_back(step.accepted);
    trace.divergent.push_back(step.divergent);
  }
  return trace;
}

}  // namespace mcforge

#endif
