// Acceptance suite: one test case per release criterion, each printing a
// single [PASS]/[FAIL] line with the measured quantities.

#include <catch2/catch_amalgamated.hpp>
#include <chrono>
#include <iostream>

#include "popalloc/popalloc.hpp"
#include "test_support.hpp"

using namespace popalloc;
using Catch::Approx;
namespace ts = test_support;

namespace {

class CriterionReporter : public Catch::EventListenerBase {
 public:
  using Catch::EventListenerBase::EventListenerBase;
  void testCaseEnded(const Catch::TestCaseStats& stats) override {
    std::cout << (stats.totals.assertions.allOk() ? "[PASS] " : "[FAIL] ")
              << stats.testInfo->name << std::endl;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::VectorXd projected_gradient_solve(const QuadraticPotential& pot) {
  const int n = pot.size();
  Eigen::VectorXd p = Eigen::VectorXd::Constant(n, pot.total() / n);
  const double step = 0.9 / pot.curvature_norm();
  for (int it = 0; it < 400000; ++it) {
    Eigen::VectorXd g = pot.fitness(p);
    g.array() -= g.mean();
    p += step * g;
    if (g.cwiseAbs().maxCoeff() < 1e-13) break;
  }
  return p;
}

struct OracleTiming {
  KktSolution solution;
  double seconds = 0.0;
};

OracleTiming timed_oracle(const QuadraticPotential& pot) {
  OracleTiming best;
  best.seconds = 1e9;
  for (int rep = 0; rep < 5; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    auto sol = kkt_allocate(pot);
    const double dt = seconds_since(t0);
    if (dt < best.seconds) best = {std::move(sol), dt};
  }
  return best;
}

const RunResult& dispatch_run() {
  static const RunResult result = run(ts::load_shipped("dispatch_140.json"));
  return result;
}

}  // namespace

CATCH_REGISTER_LISTENER(CriterionReporter)

TEST_CASE("criterion 1: oracle fidelity on the P_D = 140 dispatch") {
  const auto cfg = ts::load_shipped("dispatch_140.json");
  const auto timed = timed_oracle(cfg.potential);
  const auto& sol = timed.solution;

  REQUIRE(sol.lambda == Approx(-8.9776).margin(1e-3));
  const Eigen::Vector4d expected(40.404, 38.664, 30.703, 30.229);
  REQUIRE((sol.p - expected).cwiseAbs().maxCoeff() < 1e-3);
  REQUIRE(timed.seconds < 1e-3);

  // independent confirmation by the projected-gradient brute force
  const Eigen::VectorXd brute = projected_gradient_solve(cfg.potential);
  REQUIRE((sol.p - brute).cwiseAbs().maxCoeff() < 1e-6);

  // the CLI surface agrees
  const auto cli = ts::run_cli("oracle " + (ts::config_dir() / "dispatch_140.json").string());
  REQUIRE(cli.exit_code == 0);
  const auto j = nlohmann::json::parse(cli.out);
  REQUIRE(j.at("lambda_star").get<double>() == Approx(-8.9776).margin(1e-3));

  std::cout << "  lambda* = " << sol.lambda << ", p* = " << sol.p.transpose()
            << ", oracle runtime " << timed.seconds * 1e6 << " us\n";
}

TEST_CASE("criterion 2: fixed-point partial reproduction at total = 46.3610") {
  const auto cfg = ts::load_shipped("dispatch_4p9085.json");
  const auto timed = timed_oracle(cfg.potential);
  const auto& sol = timed.solution;

  REQUIRE(sol.lambda == Approx(-4.9085).margin(1e-3));
  const Eigen::Vector4d expected(19.211, 10.406, 11.326, 5.418);
  REQUIRE((sol.p - expected).cwiseAbs().maxCoeff() < 1e-2);
  // published trajectories pin down agents 1, 3, 4; agent 2's published value
  // is inconsistent with the consensus incremental cost and is not a target
  REQUIRE(std::abs(sol.p[0] - 19.2112) < 2e-2);
  REQUIRE(std::abs(sol.p[2] - 11.3250) < 2e-2);
  REQUIRE(std::abs(sol.p[3] - 5.4164) < 2e-2);
  REQUIRE(timed.seconds < 1e-3);

  const auto cli =
      ts::run_cli("oracle " + (ts::config_dir() / "dispatch_4p9085.json").string());
  REQUIRE(cli.exit_code == 0);
  REQUIRE(nlohmann::json::parse(cli.out).at("lambda_star").get<double>() ==
          Approx(-4.9085).margin(1e-3));

  std::cout << "  lambda* = " << sol.lambda << ", p* = " << sol.p.transpose()
            << ", oracle runtime " << timed.seconds * 1e6 << " us\n";
}

TEST_CASE("criterion 3: event-triggered dispatch converges to the oracle") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& result = dispatch_run();
  const double elapsed = seconds_since(t0);
  const auto& sum = result.summary;

  REQUIRE(sum.consensus_residual <= 1e-3);
  REQUIRE(sum.oracle_gap.has_value());
  REQUIRE(*sum.oracle_gap <= 0.05);
  REQUIRE(sum.conservation_error <= 1e-6 * 140.0);
  REQUIRE(elapsed < 10.0);

  std::cout << "  residual = " << sum.consensus_residual << ", oracle gap = "
            << *sum.oracle_gap << ", conservation = " << sum.conservation_error
            << ", events = " << result.events.size() << ", runtime " << elapsed
            << " s\n";
}

TEST_CASE("criterion 4: lyapunov monotonicity on randomized scenarios") {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sc = ts::random_connected_scenario(rng, 8);
    TriggerSettings trigger;
    trigger.mode = TriggerMode::distributed;
    trigger.rho = sc.rho;
    trigger.a = sc.a;
    ScenarioConfig cfg{sc.graph,  sc.potential, sc.initial, trigger,
                       {1e-3, 5.0}, {10},        {}};
    const auto result = run(cfg);
    const double budget = 1e-7 * result.trajectory.front().V;
    for (size_t k = 1; k < result.trajectory.size(); ++k)
      REQUIRE(result.trajectory[k].V <= result.trajectory[k - 1].V + budget);
  }
  const double elapsed = seconds_since(t0);
  REQUIRE(elapsed < 30.0);
  std::cout << "  20 scenarios, V non-increasing within 1e-7*V(0); runtime " << elapsed
            << " s\n";
}

TEST_CASE("criterion 5: fitness dynamic matches the mapped population dynamic") {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(424242);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto sc = ts::random_connected_scenario(rng, 8);
    const double h = 1e-3;
    Eigen::VectorXd p = sc.initial;
    Eigen::VectorXd f = sc.potential.fitness(p);
    double sup = 0.0;
    for (int k = 0; k < 10000; ++k) {
      p = rk4_step(
          [&](const Eigen::VectorXd& q) {
            return distributed_replicator_field(sc.graph, sc.potential, q);
          },
          p, h);
      f = rk4_step(
          [&](const Eigen::VectorXd& fv) {
            return fitness_field(sc.graph, sc.potential,
                                 sc.potential.population_from_fitness(fv));
          },
          f, h);
      sup = std::max(sup, (f - sc.potential.fitness(p)).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, sup);
    REQUIRE(sup < 1e-6);
  }
  const double elapsed = seconds_since(t0);
  REQUIRE(elapsed < 10.0);
  std::cout << "  worst sup-norm deviation " << worst << " over T = 10; runtime "
            << elapsed << " s\n";
}

TEST_CASE("criterion 6: complete-graph field identity") {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(606060);
  std::uniform_int_distribution<int> n_dist(2, 8);
  std::uniform_real_distribution<double> pi_dist(0.5, 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> tot_dist(0.5, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = n_dist(rng);
    Eigen::VectorXd pi(n), b(n);
    for (int i = 0; i < n; ++i) {
      pi[i] = pi_dist(rng);
      b[i] = gauss(rng);
    }
    const double total = tot_dist(rng);
    const auto pot = QuadraticPotential::diagonal(pi, b, 0.0, total);
    const Eigen::VectorXd p = ts::random_simplex_point(rng, n, total);
    const double diff = (distributed_replicator_field(Graph::complete(n), pot, p) -
                         total * classic_replicator_field(pot, p))
                            .cwiseAbs()
                            .maxCoeff();
    worst = std::max(worst, diff);
    REQUIRE(diff < 1e-12);
  }
  const double elapsed = seconds_since(t0);
  REQUIRE(elapsed < 1.0);
  std::cout << "  worst deviation " << worst << " across 100 instances; runtime "
            << elapsed << " s\n";
}

TEST_CASE("criterion 7: zeno bounds and event-log sanity") {
  // analytic bounds through the CLI surface
  const auto cli = ts::run_cli("bounds " + (ts::config_dir() / "dispatch_140.json").string());
  REQUIRE(cli.exit_code == 0);
  const auto j = nlohmann::json::parse(cli.out);
  REQUIRE(j.at("tau").get<double>() > 0.0);
  for (size_t i = 0; i < 4; ++i) REQUIRE(j.at("tau_i").at(i).get<double>() > 0.0);

  // hand case ||Pi|| = 1, eta = 2, phi = 1
  REQUIRE(tau_centralized(1.0, 2.0, 1.0) == 0.25);
  const auto hand =
      ts::run_cli("bounds " + (ts::config_dir() / "k2_centralized.json").string());
  REQUIRE(hand.exit_code == 0);
  REQUIRE(nlohmann::json::parse(hand.out).at("tau").get<double>() == 0.25);

  // event log of the criterion-3 run: no same-agent events within one step,
  // finite count, and second-half sparsification
  const auto& result = dispatch_run();
  const auto cfg = ts::load_shipped("dispatch_140.json");
  const double h = cfg.integrator.h;
  std::vector<double> last(4, -1.0);
  for (const auto& ev : result.events) {
    const auto i = static_cast<size_t>(ev.agent);
    if (last[i] >= 0.0) REQUIRE(ev.t - last[i] >= h - 1e-12);
    last[i] = ev.t;
  }
  const long steps = std::llround(cfg.integrator.T / h);
  REQUIRE(static_cast<long>(result.events.size()) < 4 * (steps + 1));
  long first_half = 0, second_half = 0;
  for (const auto& ev : result.events)
    (ev.t < cfg.integrator.T / 2 ? first_half : second_half)++;
  REQUIRE(second_half < first_half);

  std::cout << "  tau = " << j.at("tau").get<double>() << ", min tau_i = "
            << j.at("tau_i").at(1).get<double>() << ", events " << first_half << " / "
            << second_half << " (first/second half)\n";
}

TEST_CASE("criterion 8: disconnected graphs conserve and agree per component") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = ts::load_shipped("two_components.json");
  const auto result = run(cfg);
  const auto components = connected_components(cfg.graph);
  REQUIRE(components.size() == 2);
  double worst_residual = 0.0;
  for (const auto& members : components) {
    double before = 0.0, after = 0.0;
    double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
    for (int i : members) {
      before += cfg.initial[i];
      after += result.summary.p_final[i];
      fmin = std::min(fmin, result.summary.f_final[i]);
      fmax = std::max(fmax, result.summary.f_final[i]);
    }
    REQUIRE(std::abs(after - before) <= 1e-6 * before);
    REQUIRE(fmax - fmin <= 1e-3);
    worst_residual = std::max(worst_residual, fmax - fmin);
  }
  const double elapsed = seconds_since(t0);
  REQUIRE(elapsed < 5.0);
  std::cout << "  worst per-component residual " << worst_residual << "; runtime "
            << elapsed << " s\n";
}

TEST_CASE("criterion 9: laplacian property suite over random simplex points") {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(909090);
  const std::vector<Graph> graphs{Graph::ring(4), Graph::path(5), Graph::complete(6),
                                  Graph(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}})};
  const double total = 3.0;
  long checked = 0;
  for (const auto& g : graphs) {
    const auto bound = spectral_norm_bound(g, total);
    for (int trial = 0; trial < 250; ++trial) {
      const Eigen::VectorXd p = ts::random_simplex_point(rng, g.size(), total);
      const Eigen::MatrixXd L = laplacian(g, p);
      const double scale = std::max(1e-300, L.cwiseAbs().maxCoeff());
      REQUIRE((L * Eigen::VectorXd::Ones(g.size())).cwiseAbs().maxCoeff() <=
              1e-12 * scale);
      REQUIRE((L - L.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
      REQUIRE(es.eigenvalues().minCoeff() >= -1e-9);
      REQUIRE(es.eigenvalues().cwiseAbs().maxCoeff() <= bound.eta * (1 + 1e-12));
      ++checked;
    }
  }
  const double elapsed = seconds_since(t0);
  REQUIRE(elapsed < 5.0);
  std::cout << "  " << checked << " random simplex points checked; runtime " << elapsed
            << " s\n";
}
