#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "popalloc/errors.hpp"
#include "popalloc/game.hpp"
#include "popalloc/graph.hpp"

namespace popalloc {

struct PopulationState {
  Eigen::VectorXd p;
  double t = 0.0;
};

/// Last-broadcast values per agent. Right after agent i broadcasts at time t,
/// f_hat[i] = f_i(p(t)) and p_hat[i] = p_i(t), so its gap e_i = f_hat_i - f_i
/// is zero at t+.
struct SampledState {
  Eigen::VectorXd f_hat;
  Eigen::VectorXd p_hat;
  Eigen::VectorXd last_event_t;

  static SampledState synced(const QuadraticPotential& pot, const Eigen::VectorXd& p,
                             double t) {
    SampledState s;
    s.f_hat = pot.fitness(p);
    s.p_hat = p;
    s.last_event_t = Eigen::VectorXd::Constant(p.size(), t);
    return s;
  }

  void broadcast(int agent, double f_value, double p_value, double t) {
    f_hat[agent] = f_value;
    p_hat[agent] = p_value;
    last_event_t[agent] = t;
  }
};

inline void require_simplex(const Eigen::VectorXd& p, double total_population,
                            const char* op) {
  if (std::abs(p.sum() - total_population) > 1e-6 * total_population)
    throw state_error(std::string(op) + ": population sum " + std::to_string(p.sum()) +
                      " off simplex total " + std::to_string(total_population));
}

/// Classic replicator: pdot_i = p_i [f_i(p) - fbar(p)].
inline Eigen::VectorXd classic_replicator_field(const QuadraticPotential& pot,
                                                const Eigen::VectorXd& p) {
  require_simplex(p, pot.total(), "classic_replicator_field");
  const Eigen::VectorXd f = pot.fitness(p);
  const double fbar = p.dot(f) / pot.total();
  return p.cwiseProduct((f.array() - fbar).matrix());
}

/// Distributed replicator: pdot_i = sum_{j in N_i} p_i p_j (f_i - f_j),
/// accumulated as antisymmetric per-edge flows so sum pdot_i == 0 exactly.
inline Eigen::VectorXd distributed_replicator_field(const Graph& g,
                                                    const QuadraticPotential& pot,
                                                    const Eigen::VectorXd& p) {
  require_simplex(p, pot.total(), "distributed_replicator_field");
  const Eigen::VectorXd f = pot.fitness(p);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p.size());
  for (auto [i, j] : g.edges()) {
    const double flow = p[i] * p[j] * (f[i] - f[j]);
    v[i] += flow;
    v[j] -= flow;
  }
  return v;
}

/// Fitness dynamic fdot = -Pi L(p) f(p), computed via the matrix route
/// (independent of the edge-flow accumulation above).
inline Eigen::VectorXd fitness_field(const Graph& g, const QuadraticPotential& pot,
                                     const Eigen::VectorXd& p) {
  require_simplex(p, pot.total(), "fitness_field");
  const Eigen::VectorXd f = pot.fitness(p);
  const Eigen::MatrixXd L = laplacian(g, p);
  if (pot.is_diagonal()) return -pot.curvature().diagonal().cwiseProduct(L * f);
  return -pot.curvature() * (L * f);
}

/// Event-sampled field: interaction weights come from the last-broadcast
/// populations, the consensus drive from current fitness differences:
///   pdot_i = sum_{j in N_i} p_hat_i p_hat_j (f_i(p) - f_j(p)).
/// Flows stay antisymmetric (exact conservation) and the drift vanishes at
/// fitness consensus, so the sampled run settles instead of chattering at
/// the trigger dead zone.
inline Eigen::VectorXd triggered_field(const Graph& g, const QuadraticPotential& pot,
                                       const Eigen::VectorXd& p, const SampledState& s) {
  require_simplex(p, pot.total(), "triggered_field");
  if (s.f_hat.size() != p.size() || s.p_hat.size() != p.size())
    throw std::invalid_argument("triggered_field: sampled state length mismatch");
  const Eigen::VectorXd f = pot.fitness(p);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p.size());
  for (auto [i, j] : g.edges()) {
    const double flow = s.p_hat[i] * s.p_hat[j] * (f[i] - f[j]);
    v[i] += flow;
    v[j] -= flow;
  }
  return v;
}

/// Classical fixed-step RK4. Deterministic; throws numerical_error on any
/// non-finite component in the result.
template <typename Field>
Eigen::VectorXd rk4_step(Field&& field, const Eigen::VectorXd& y, double h) {
  if (h <= 0.0) throw std::invalid_argument("rk4_step: step size must be positive");
  const Eigen::VectorXd k1 = field(y);
  const Eigen::VectorXd k2 = field(y + 0.5 * h * k1);
  const Eigen::VectorXd k3 = field(y + 0.5 * h * k2);
  const Eigen::VectorXd k4 = field(y + h * k3);
  Eigen::VectorXd next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite())
    throw numerical_error("rk4_step: non-finite state component after step");
  return next;
}

/// RK4 step that keeps the population non-negative: a step producing a
/// negative component is retried as 2,4,8,..,min_split substeps; if the
/// finest split still fails, negatives are clamped to zero and the deficit
/// redistributed proportionally within the agent's connected component.
/// Returns the number of clamp interventions (0 in the common case).
template <typename Field>
int guarded_rk4_step(Field&& field, Eigen::VectorXd& p, double h,
                     const std::vector<std::vector<int>>& components,
                     int min_split = 16) {
  Eigen::VectorXd candidate = rk4_step(field, p, h);
  if ((candidate.array() >= 0.0).all()) {
    p = std::move(candidate);
    return 0;
  }
  for (int splits = 2; splits <= min_split; splits *= 2) {
    Eigen::VectorXd q = p;
    const double sub = h / splits;
    bool negative = false;
    for (int k = 0; k < splits; ++k) {
      q = rk4_step(field, q, sub);
      if ((q.array() < 0.0).any()) negative = true;
    }
    if (!negative) {
      p = std::move(q);
      return 0;
    }
    candidate = std::move(q);  // finest full-length attempt, clamped below if needed
  }
  // clamp and redistribute inside each affected component
  int clamps = 0;
  for (const auto& members : components) {
    double target = 0.0, clamped_sum = 0.0;
    bool any_negative = false;
    for (int i : members) {
      target += p[i];
      if (candidate[i] < 0.0) any_negative = true;
    }
    if (!any_negative) {
      for (int i : members) p[i] = candidate[i];
      continue;
    }
    ++clamps;
    for (int i : members) {
      if (candidate[i] < 0.0) candidate[i] = 0.0;
      clamped_sum += candidate[i];
    }
    if (clamped_sum <= 0.0 && target > 0.0)
      throw numerical_error(
          "state guard: component population collapsed below zero; integration diverged");
    const double scale = clamped_sum > 0.0 ? target / clamped_sum : 0.0;
    for (int i : members) p[i] = candidate[i] * scale;
  }
  return clamps;
}

}  // namespace popalloc
