#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "popalloc/errors.hpp"

namespace popalloc {

/// Strictly concave quadratic potential S(p) = -1/2 p^T Pi p + b^T p + c
/// over the simplex {p >= 0, sum p = P_tot}. Pi is symmetric positive
/// definite, so the fitness f(p) = grad S(p) = -Pi p + b and the Hessian
/// of S is exactly -Pi.
class QuadraticPotential {
 public:
  QuadraticPotential(Eigen::MatrixXd curvature, Eigen::VectorXd linear, double offset,
                     double total_population)
      : curvature_(std::move(curvature)),
        linear_(std::move(linear)),
        offset_(offset),
        total_(total_population) {
    const auto n = curvature_.rows();
    if (n < 1 || curvature_.cols() != n)
      throw std::invalid_argument("potential: Pi must be square and non-empty");
    if (linear_.size() != n)
      throw std::invalid_argument("potential: b length does not match Pi");
    if (total_ <= 0.0) throw std::domain_error("potential: P_tot must be positive");
    const double scale = std::max(1.0, curvature_.cwiseAbs().maxCoeff());
    if ((curvature_ - curvature_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::domain_error("potential: Pi is not symmetric");
    curvature_ = 0.5 * (curvature_ + curvature_.transpose());
    diagonal_ = true;
    for (Eigen::Index i = 0; i < n && diagonal_; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && std::abs(curvature_(i, j)) > 1e-14 * scale) {
          diagonal_ = false;
          break;
        }
    if (diagonal_) {
      if ((curvature_.diagonal().array() <= 0.0).any())
        throw std::domain_error("potential: Pi must be positive definite");
      curvature_norm_ = curvature_.diagonal().maxCoeff();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(curvature_, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success)
        throw numerical_error("potential: eigen-solver failed on Pi");
      if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::domain_error("potential: Pi must be positive definite");
      curvature_norm_ = es.eigenvalues().maxCoeff();
      llt_.compute(curvature_);
    }
  }

  static QuadraticPotential diagonal(const Eigen::VectorXd& pi_diagonal,
                                     Eigen::VectorXd linear, double offset,
                                     double total_population) {
    return QuadraticPotential(Eigen::MatrixXd(pi_diagonal.asDiagonal()), std::move(linear),
                              offset, total_population);
  }

  int size() const { return static_cast<int>(curvature_.rows()); }
  double total() const { return total_; }
  const Eigen::MatrixXd& curvature() const { return curvature_; }
  const Eigen::VectorXd& linear() const { return linear_; }
  double offset() const { return offset_; }
  bool is_diagonal() const { return diagonal_; }

  /// ||Pi||_2 = largest eigenvalue (max diagonal entry in the diagonal case).
  double curvature_norm() const { return curvature_norm_; }

  /// f(p) = -Pi p + b.
  Eigen::VectorXd fitness(const Eigen::VectorXd& p) const {
    check_length(p, "fitness");
    if (diagonal_) return -curvature_.diagonal().cwiseProduct(p) + linear_;
    return -curvature_ * p + linear_;
  }

  /// S(p) = -1/2 p^T Pi p + b^T p + c.
  double value(const Eigen::VectorXd& p) const {
    check_length(p, "potential_value");
    if (diagonal_)
      return -0.5 * curvature_.diagonal().dot(p.cwiseProduct(p)) + linear_.dot(p) + offset_;
    return -0.5 * p.dot(curvature_ * p) + linear_.dot(p) + offset_;
  }

  /// Pi^{-1} rhs. Pi is PD by construction so the solve cannot fail.
  Eigen::VectorXd solve_curvature(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != curvature_.rows())
      throw std::invalid_argument("solve_curvature: length mismatch");
    if (diagonal_) return rhs.cwiseQuotient(curvature_.diagonal());
    return llt_.solve(rhs);
  }

  /// Inverse of the fitness map: p = Pi^{-1} (b - f).
  Eigen::VectorXd population_from_fitness(const Eigen::VectorXd& f) const {
    return solve_curvature(linear_ - f);
  }

 private:
  void check_length(const Eigen::VectorXd& p, const char* op) const {
    if (p.size() != curvature_.rows())
      throw std::invalid_argument(std::string(op) + ": vector length " +
                                  std::to_string(p.size()) + " != " +
                                  std::to_string(curvature_.rows()));
  }

  Eigen::MatrixXd curvature_;
  Eigen::VectorXd linear_;
  double offset_;
  double total_;
  bool diagonal_;
  double curvature_norm_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Quadratic generator costs C_i(P) = alpha_i P^2 + beta_i P + gamma_i and
/// the demand they must jointly cover.
struct DispatchCosts {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  double demand = 0.0;

  void validate() const {
    const auto n = alpha.size();
    if (n < 1) throw std::invalid_argument("dispatch: at least one generator required");
    if (beta.size() != n || gamma.size() != n)
      throw std::invalid_argument("dispatch: coefficient vectors must share length");
    if ((alpha.array() <= 0.0).any())
      throw std::domain_error("dispatch: alpha_i must be positive (concavity)");
    if (demand <= 0.0) throw std::domain_error("dispatch: demand must be positive");
  }
};

/// Cost minimization as utility maximization: U(p) = -sum C_i(p_i), so
/// Pi = diag(2 alpha), b = -beta, c = -sum gamma, P_tot = demand. Fitness
/// becomes the negated incremental cost -(2 alpha_i p_i + beta_i).
inline QuadraticPotential from_dispatch(const DispatchCosts& costs) {
  costs.validate();
  return QuadraticPotential::diagonal(2.0 * costs.alpha, -costs.beta, -costs.gamma.sum(),
                                      costs.demand);
}

struct KktSolution {
  Eigen::VectorXd p;        // unique maximizer over {sum p = P_tot}
  double lambda = 0.0;      // equality multiplier; f_i(p*) = lambda for all i
  std::vector<int> negative_components;  // p*_i < 0 (non-negativity relaxed)
};

/// Closed-form solution of max S(p) s.t. sum p = P_tot with p >= 0 relaxed:
/// stationarity -Pi p + b = lambda 1, so for diagonal Pi
/// lambda = (sum b_i/Pi_ii - P_tot) / sum 1/Pi_ii and p_i = (b_i - lambda)/Pi_ii.
/// Full symmetric PD Pi is handled through the bordered linear system.
inline KktSolution kkt_allocate(const QuadraticPotential& pot) {
  const int n = pot.size();
  KktSolution sol;
  if (pot.is_diagonal()) {
    const Eigen::VectorXd d = pot.curvature().diagonal();
    const double inv_sum = (1.0 / d.array()).sum();
    sol.lambda = ((pot.linear().array() / d.array()).sum() - pot.total()) / inv_sum;
    sol.p = (pot.linear().array() - sol.lambda) / d.array();
  } else {
    Eigen::MatrixXd kkt(n + 1, n + 1);
    kkt.setZero();
    kkt.topLeftCorner(n, n) = pot.curvature();
    kkt.topRightCorner(n, 1).setOnes();
    kkt.bottomLeftCorner(1, n).setOnes();
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = pot.linear();
    rhs[n] = pot.total();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible())
      throw std::domain_error("kkt_allocate: singular stationarity system");
    Eigen::VectorXd x = lu.solve(rhs);
    sol.p = x.head(n);
    sol.lambda = x[n];
  }
  for (int i = 0; i < n; ++i)
    if (sol.p[i] < 0.0) sol.negative_components.push_back(i);
  return sol;
}

/// Population-weighted average fitness (1/P_tot) sum p_j f_j.
inline double avg_fitness(const Eigen::VectorXd& p, const Eigen::VectorXd& f,
                          double total_population) {
  if (total_population <= 0.0)
    throw std::domain_error("avg_fitness: P_tot must be positive");
  if (p.size() != f.size())
    throw std::invalid_argument("avg_fitness: vector length mismatch");
  if (std::abs(p.sum() - total_population) > 1e-9 * total_population)
    throw state_error("avg_fitness: population sum " + std::to_string(p.sum()) +
                      " violates total " + std::to_string(total_population));
  return p.dot(f) / total_population;
}

}  // namespace popalloc
