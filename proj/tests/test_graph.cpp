#include <catch2/catch_amalgamated.hpp>

#include "popalloc/graph.hpp"
#include "test_support.hpp"

using namespace popalloc;
using Catch::Approx;

TEST_CASE("graph construction validates the edge list") {
  CHECK_THROWS_AS(Graph(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(3, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(3, {{-1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}}), std::invalid_argument);  // duplicate
  CHECK_NOTHROW(Graph(1, {}));
}

TEST_CASE("neighbors") {
  const Graph k2(2, {{0, 1}});
  CHECK(k2.neighbors(0) == std::vector<int>{1});

  const Graph p3 = Graph::path(3);
  CHECK(p3.neighbors(1) == std::vector<int>{0, 2});

  const Graph isolated(1, {});
  CHECK(isolated.neighbors(0).empty());

  CHECK_THROWS_AS(k2.neighbors(2), std::invalid_argument);
  CHECK_THROWS_AS(k2.neighbors(-1), std::invalid_argument);
}

TEST_CASE("neighbor sets are symmetric") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = test_support::random_connected_graph(rng, 8);
    for (int i = 0; i < g.size(); ++i)
      for (int j : g.neighbors(i)) {
        const auto& back = g.neighbors(j);
        CHECK(std::find(back.begin(), back.end(), i) != back.end());
      }
  }
}

TEST_CASE("population-weighted laplacian") {
  const Graph k2(2, {{0, 1}});
  Eigen::MatrixXd L = laplacian(k2, Eigen::Vector2d(1.0, 2.0));
  Eigen::MatrixXd expected(2, 2);
  expected << 2, -2, -2, 2;
  CHECK((L - expected).cwiseAbs().maxCoeff() == 0.0);

  const Graph triangle = Graph::complete(3);
  L = laplacian(triangle, Eigen::Vector3d::Ones());
  expected.resize(3, 3);
  expected << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  CHECK((L - expected).cwiseAbs().maxCoeff() == 0.0);

  // zero population nullifies the edge weight
  L = laplacian(k2, Eigen::Vector2d(0.0, 5.0));
  CHECK(L.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(laplacian(k2, Eigen::Vector3d::Ones()), std::invalid_argument);
  CHECK_THROWS_AS(laplacian(k2, Eigen::Vector2d(-1.0, 1.0)), std::domain_error);
}

TEST_CASE("fiedler value") {
  const Graph k2(2, {{0, 1}});
  CHECK(fiedler_value(laplacian(k2, Eigen::Vector2d(1, 1))) == Approx(2.0).margin(1e-10));
  CHECK(fiedler_value(laplacian(k2, Eigen::Vector2d(1, 2))) == Approx(4.0).margin(1e-10));

  const Graph p3 = Graph::path(3);
  CHECK(fiedler_value(laplacian(p3, Eigen::Vector3d::Ones())) ==
        Approx(1.0).margin(1e-10));

  CHECK_THROWS_AS(fiedler_value(Eigen::MatrixXd::Zero(1, 1)), std::domain_error);
}

TEST_CASE("connected components") {
  CHECK(connected_components(Graph::complete(3)) ==
        std::vector<std::vector<int>>{{0, 1, 2}});
  CHECK(connected_components(Graph(4, {{0, 1}, {2, 3}})) ==
        std::vector<std::vector<int>>{{0, 1}, {2, 3}});
  CHECK(connected_components(Graph(3, {})) ==
        std::vector<std::vector<int>>{{0}, {1}, {2}});
}

TEST_CASE("component count equals zero-eigenvalue multiplicity of the unit laplacian") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> n_dist(2, 9);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = n_dist(rng);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (coin(rng) < 0.25) edges.emplace_back(i, j);
    const Graph g(n, std::move(edges));
    const Eigen::MatrixXd L = laplacian(g, Eigen::VectorXd::Ones(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
    const long zero_multiplicity = (es.eigenvalues().array().abs() < 1e-9).count();
    CHECK(static_cast<long>(connected_components(g).size()) == zero_multiplicity);
  }
}

TEST_CASE("connected components are invariant under edge-list permutation") {
  std::mt19937_64 rng(13);
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {4, 5}, {2, 3}, {5, 6}};
  const auto reference = connected_components(Graph(8, edges));
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(edges.begin(), edges.end(), rng);
    CHECK(connected_components(Graph(8, edges)) == reference);
  }
}

TEST_CASE("spectral norm bound") {
  CHECK(spectral_norm_bound(Graph(2, {{0, 1}}), 2.0).eta == Approx(2.0));
  CHECK(spectral_norm_bound(Graph::complete(3), 3.0).eta == Approx(9.0));

  const auto edgeless = spectral_norm_bound(Graph(3, {}), 1.0);
  CHECK(edgeless.eta == 0.0);
  CHECK(edgeless.edgeless);

  CHECK_THROWS_AS(spectral_norm_bound(Graph(2, {{0, 1}}), 0.0), std::domain_error);
  CHECK_THROWS_AS(spectral_norm_bound(Graph(2, {{0, 1}}), -1.0), std::domain_error);
}

TEST_CASE("laplacian properties over random simplex points") {
  std::mt19937_64 rng(17);
  const std::vector<Graph> graphs{Graph::ring(4), Graph::path(5), Graph::complete(6),
                                  Graph(5, {{0, 1}, {1, 2}, {3, 4}})};
  const double total = 3.0;
  for (const auto& g : graphs) {
    const auto bound = spectral_norm_bound(g, total);
    const bool connected = connected_components(g).size() == 1;
    for (int trial = 0; trial < 250; ++trial) {
      const Eigen::VectorXd p = test_support::random_simplex_point(rng, g.size(), total);
      const Eigen::MatrixXd L = laplacian(g, p);
      const double scale = std::max(1e-300, L.cwiseAbs().maxCoeff());

      CHECK((L * Eigen::VectorXd::Ones(g.size())).cwiseAbs().maxCoeff() <= 1e-12 * scale);
      CHECK((L - L.transpose()).cwiseAbs().maxCoeff() == 0.0);

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-9);
      CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= bound.eta * (1 + 1e-12));

      // interior p: positive fiedler value iff connected
      const double lambda2 = fiedler_value(L);
      if (connected)
        CHECK(lambda2 > 0.0);
      else
        CHECK(lambda2 <= 1e-9);
    }
  }
}
