#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "popalloc/errors.hpp"
#include "popalloc/game.hpp"
#include "popalloc/graph.hpp"

namespace popalloc {

/// Parameters of the distributed trigger rule: agent i broadcasts when
/// e_i^2 > theta_i f_i^2 with theta_i = rho_i a (lambda2 - a |N_i|) / |N_i|.
struct DistributedRuleParams {
  Eigen::VectorXd rho;  // each in (0,1)
  double a = 0.0;       // Young's-inequality weight, > 0

  void validate() const {
    if (rho.size() < 1) throw std::invalid_argument("trigger: rho must be non-empty");
    if ((rho.array() <= 0.0).any() || (rho.array() >= 1.0).any())
      throw validation_error("trigger.rho", "each rho_i must lie in (0,1)");
    if (a <= 0.0) throw validation_error("trigger.a", "a must be positive");
  }

  /// Feasibility lambda2 - a |N_i| > 0 for every agent with neighbors.
  void check_feasible(const Graph& g, double lambda2) const {
    for (int i = 0; i < g.size(); ++i) {
      const int deg = g.degree(i);
      if (deg >= 1 && lambda2 - a * deg <= 0.0)
        throw infeasible_parameter_error(
            i, "trigger: infeasible parameters at agent " + std::to_string(i) +
                   ": lambda2 " + std::to_string(lambda2) + " <= a*|N_i| " +
                   std::to_string(a * deg));
    }
  }
};

/// Centralized ISS rule: broadcast everyone when ||e||^2 > gamma ||f||^2.
/// phi >= gamma^{-1/2}; the default is the tightest admissible value.
struct CentralizedRuleParams {
  double gamma = 0.0;
  double phi = 0.0;

  static CentralizedRuleParams from_gamma(double gamma) {
    if (gamma <= 0.0) throw validation_error("trigger.gamma", "gamma must be positive");
    return {gamma, 1.0 / std::sqrt(gamma)};
  }

  void validate() const {
    if (gamma <= 0.0) throw validation_error("trigger.gamma", "gamma must be positive");
    if (phi < 1.0 / std::sqrt(gamma) - 1e-15)
      throw validation_error("trigger.phi", "phi must be >= gamma^(-1/2)");
  }
};

struct EventRecord {
  double t = 0.0;
  int agent = 0;
  double f_hat = 0.0;  // fitness broadcast at t
  double p_hat = 0.0;  // population broadcast at t
};

/// theta_i of the distributed rule. Validation of 0 < rho_i < 1 is the
/// caller's concern (DistributedRuleParams::validate); boundary values stay
/// computable here.
inline double distributed_threshold(double rho_i, double a, double lambda2, int agent,
                                    int degree) {
  if (degree < 1)
    throw std::invalid_argument("distributed_threshold: agent " + std::to_string(agent) +
                                " has no neighbors");
  if (lambda2 - a * degree <= 0.0)
    throw infeasible_parameter_error(
        agent, "distributed_threshold: lambda2 " + std::to_string(lambda2) +
                   " <= a*|N_i| " + std::to_string(a * degree) + " at agent " +
                   std::to_string(agent));
  return rho_i * a * (lambda2 - a * degree) / degree;
}

/// Agent-level trigger decision: fire iff e_i^2 > theta_i f_i^2.
inline bool check_distributed(double e_i, double f_i, double theta_i) {
  if (theta_i < 0.0) throw std::invalid_argument("check_distributed: theta_i < 0");
  return e_i * e_i > theta_i * f_i * f_i;
}

/// Centralized trigger decision: fire iff ||e||^2 > gamma ||f||^2.
inline bool check_centralized(const Eigen::VectorXd& e, const Eigen::VectorXd& f,
                              double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("check_centralized: gamma must be positive");
  if (e.size() != f.size())
    throw std::invalid_argument("check_centralized: vector length mismatch");
  return e.squaredNorm() > gamma * f.squaredNorm();
}

/// Lyapunov candidate V(f) = 1/2 f^T Pi^{-1} f; zero iff f == 0.
inline double lyapunov(const QuadraticPotential& pot, const Eigen::VectorXd& f) {
  if (f.size() != pot.size()) throw std::invalid_argument("lyapunov: length mismatch");
  return 0.5 * f.dot(pot.solve_curvature(f));
}

/// Centralized minimum inter-sampling interval tau = 1/(||Pi|| eta (1+phi)).
inline double tau_centralized(double pi_norm, double eta, double phi) {
  if (pi_norm <= 0.0 || eta <= 0.0 || phi <= 0.0)
    throw std::domain_error("tau_centralized: all inputs must be positive");
  return 1.0 / (pi_norm * eta * (1.0 + phi));
}

/// Per-agent minimum inter-sampling interval tau^i = beta_i/(||Pi|| eta (beta_i + q_i)),
/// with beta_i the square root of the agent's trigger threshold.
inline double tau_agent(double beta_i, double q_i, double pi_norm, double eta) {
  if (beta_i <= 0.0 || q_i <= 0.0 || pi_norm <= 0.0 || eta <= 0.0)
    throw std::domain_error("tau_agent: all inputs must be positive");
  return beta_i / (pi_norm * eta * (beta_i + q_i));
}

/// Analytic Zeno lower bounds. tau_i / beta_i / q_i entries are NaN for
/// agents without neighbors (no trigger rule applies to them).
struct ZenoBounds {
  double tau = 0.0;
  Eigen::VectorXd tau_i;
  Eigen::VectorXd beta_i;
  Eigen::VectorXd q_i;
  double pi_norm = 0.0;
  double eta = 0.0;
};

/// Bounds for a distributed-rule configuration. lambda2 is supplied per
/// agent (the agent's connected component; identical entries on a connected
/// graph). When no centralized gamma is given, the rule's implied ISS
/// envelope gamma = max_i theta_i is used for the centralized bound; q_i
/// defaults to sqrt(n).
inline ZenoBounds zeno_bounds(const Graph& g, const QuadraticPotential& pot,
                              const DistributedRuleParams& rule,
                              const Eigen::VectorXd& lambda2,
                              std::optional<Eigen::VectorXd> q_override = std::nullopt,
                              std::optional<double> gamma_override = std::nullopt) {
  rule.validate();
  const auto bound = spectral_norm_bound(g, pot.total());
  if (bound.edgeless)
    throw std::domain_error("zeno_bounds: undefined on an edgeless graph (eta = 0)");
  const int n = g.size();
  if (rule.rho.size() != n || lambda2.size() != n)
    throw std::invalid_argument("zeno_bounds: parameter length != agent count");
  ZenoBounds z;
  z.eta = bound.eta;
  z.pi_norm = pot.curvature_norm();
  z.tau_i = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  z.beta_i = z.tau_i;
  z.q_i = z.tau_i;
  double max_theta = 0.0;
  for (int i = 0; i < n; ++i) {
    const int deg = g.degree(i);
    if (deg < 1) continue;
    const double theta = distributed_threshold(rule.rho[i], rule.a, lambda2[i], i, deg);
    max_theta = std::max(max_theta, theta);
    z.beta_i[i] = std::sqrt(theta);
    z.q_i[i] = q_override ? (*q_override)[i] : std::sqrt(static_cast<double>(n));
    z.tau_i[i] = tau_agent(z.beta_i[i], z.q_i[i], z.pi_norm, z.eta);
  }
  const double gamma = gamma_override.value_or(max_theta);
  const auto central = CentralizedRuleParams::from_gamma(gamma);
  z.tau = tau_centralized(z.pi_norm, z.eta, central.phi);
  return z;
}

inline ZenoBounds zeno_bounds(const Graph& g, const QuadraticPotential& pot,
                              const DistributedRuleParams& rule, double lambda2,
                              std::optional<Eigen::VectorXd> q_override = std::nullopt,
                              std::optional<double> gamma_override = std::nullopt) {
  return zeno_bounds(g, pot, rule, Eigen::VectorXd::Constant(g.size(), lambda2),
                     std::move(q_override), gamma_override);
}

/// Bounds for a centralized-rule configuration: only tau is defined.
inline ZenoBounds zeno_bounds_centralized(const Graph& g, const QuadraticPotential& pot,
                                          const CentralizedRuleParams& rule) {
  rule.validate();
  const auto bound = spectral_norm_bound(g, pot.total());
  if (bound.edgeless)
    throw std::domain_error("zeno_bounds: undefined on an edgeless graph (eta = 0)");
  ZenoBounds z;
  z.eta = bound.eta;
  z.pi_norm = pot.curvature_norm();
  const int n = g.size();
  z.tau_i = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  z.beta_i = z.tau_i;
  z.q_i = z.tau_i;
  z.tau = tau_centralized(z.pi_norm, z.eta, rule.phi);
  return z;
}

}  // namespace popalloc
