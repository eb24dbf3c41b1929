#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dce/estimator.hpp"
#include "dce/rng.hpp"

using namespace dce;

namespace {

Matrix remark5_adjacency() {
  Matrix a(2, 2);
  a << 0.0, 1.0, 0.3, 0.0;
  return a;
}

struct RandomInstance {
  int nodes, n, d;
  WeightedDigraph graph;
  std::vector<Matrix> obs;
  std::vector<int> node_dims;
};

RandomInstance random_instance(RngStream& rng, int max_nodes = 4, int max_n = 6, int max_d = 3) {
  const int nodes = 2 + rng.below(max_nodes - 1);
  const int n = 1 + rng.below(max_n);
  const int d = rng.below(max_d + 1);
  Matrix a = Matrix::Zero(nodes, nodes);
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j)
      if (i != j && rng.uniform01() < 0.7) a(i, j) = rng.uniform(-1.0, 1.0);
  std::vector<Matrix> obs;
  std::vector<int> dims;
  for (int i = 0; i < nodes; ++i) {
    const int ni = 1 + rng.below(n);
    Matrix h(ni, n);
    for (int r = 0; r < ni; ++r)
      for (int c = 0; c < n; ++c) h(r, c) = rng.uniform(-1.0, 1.0);
    obs.push_back(h);
    dims.push_back(ni);
  }
  return RandomInstance{nodes, n, d, WeightedDigraph(a), std::move(obs), std::move(dims)};
}

DelayRealization random_delays(RngStream& rng, int nodes, int d) {
  IntMatrix lam = IntMatrix::Zero(nodes, nodes);
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j)
      if (i != j) lam(i, j) = rng.below(d + 1);
  return DelayRealization(lam, d);
}

Matrix benchmark_block_one() {
  Matrix h1t(5, 4);
  h1t << -1, 0, 0, 0,
          0, 0, 0, -1,
          1, 0, 0, -1,
         -1, 0, 0, -1,
         -1, 0, -1, 3;
  Matrix h1 = Matrix::Zero(5, 13);
  h1.leftCols(4) = h1t;
  return h1;
}

}  // namespace

TEST_CASE("gain schedules") {
  auto s = GainSchedule::power_law(1.0, 1.0);
  CHECK(s.a(0) == 1.0);
  CHECK(s.a(9) == doctest::Approx(0.1));
  CHECK(s.ratio(7) == doctest::Approx(1.0));
  CHECK_THROWS_AS(GainSchedule::power_law(0.4, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(GainSchedule::power_law(0.8, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(GainSchedule::power_law(1.2, 0.8), std::invalid_argument);

  // nonincreasing on any queried prefix
  auto t = GainSchedule::power_law(0.9, 0.6);
  for (long k = 0; k < 300; ++k) {
    CHECK(t.a(k + 1) <= t.a(k));
    CHECK(t.b(k + 1) <= t.b(k));
  }
  CHECK(t.ratio_bound(1000) == doctest::Approx(1.0));
}

TEST_CASE("below_ceiling bound") {
  SUBCASE("d = 0 collapses to the first expression at kappa -> 1") {
    const int nodes = 3;
    const double beta_a = 0.8, beta_h = 1.1, c_a = 1.0;
    auto bd = gain_ceiling(nodes, beta_a, beta_h, c_a, 0);
    const double expected =
        1.0 / (2.0 * (nodes * beta_a + nodes * std::sqrt(3.0) * beta_a + c_a * beta_h * beta_h));
    CHECK(bd.bound == doctest::Approx(expected).epsilon(1e-8));
    CHECK(bd.kappa_star > 0.999);
  }
  SUBCASE("nonincreasing in d") {
    double prev = std::numeric_limits<double>::infinity();
    for (int d : {0, 1, 2, 5}) {
      auto bd = gain_ceiling(2, 0.5, 1.0, 1.0, d);
      CHECK(bd.bound <= prev * (1.0 + 1e-12));
      CHECK(bd.bound > 0.0);
      prev = bd.bound;
    }
  }
  SUBCASE("vanishing weight bound leaves the observation term") {
    auto bd = gain_ceiling(1, 1e-12, 2.0, 1.5, 2);
    CHECK(bd.bound == doctest::Approx(1.0 / (2.0 * 1.5 * 4.0)).epsilon(1e-4));
    CHECK(bd.kappa_star > 0.999);
  }
  SUBCASE("positive for admissible constants") {
    RngStream rng(31);
    for (int t = 0; t < 50; ++t) {
      auto bd = gain_ceiling(1 + rng.below(6), rng.uniform(0.05, 3.0), rng.uniform(0.0, 3.0),
                          1.0 + rng.uniform01() * 3.0, rng.below(5));
      CHECK(bd.bound > 0.0);
      CHECK(bd.kappa_star > 0.0);
      CHECK(bd.kappa_star < 1.0);
    }
  }
}

TEST_CASE("gain assumption checks") {
  AssumptionConstants c(1.0, 1.0, 1.0, 1.0, 0.5, 0);

  SUBCASE("power law tau1 = tau2 = 1") {
    auto rep = check_gain_assumptions(GainSchedule::power_law(1.0, 1.0), c, 2, 2000);
    CHECK(rep.decrease_ok);
    CHECK(rep.square_summable_ok);
    CHECK(rep.decrease_analytic);
    CHECK(rep.positive);
    CHECK(rep.monotone);
    // b(0) = 1 sits far above the admissible consensus-gain ceiling
    CHECK_FALSE(rep.below_ceiling);
    CHECK(rep.sup_b == 1.0);
  }
  SUBCASE("custom harmonic passes the square-summability proxy") {
    auto g = GainSchedule::custom([](long k) { return 1.0 / (k + 1); },
                                  [](long k) { return 1.0 / (k + 1); });
    auto rep = check_gain_assumptions(g, c, 2, 2000);
    CHECK(rep.square_summable_ok);
    CHECK_FALSE(rep.square_summable_analytic);
    CHECK(rep.decrease_ok);
  }
  SUBCASE("constant gains fail the decrease-to-zero clause") {
    auto g = GainSchedule::custom([](long) { return 0.3; }, [](long) { return 0.3; });
    auto rep = check_gain_assumptions(g, c, 2, 2000);
    CHECK_FALSE(rep.decrease_ok);
    CHECK_FALSE(rep.square_summable_ok);
  }
  SUBCASE("scaled schedule below the ceiling passes below_ceiling") {
    auto bd = gain_ceiling(2, c);
    auto g = GainSchedule::scaled_power_law(0.9 * bd.bound, 0.9 * bd.bound, 0.6, 0.6);
    auto rep = check_gain_assumptions(g, c, 2, 2000);
    CHECK(rep.below_ceiling);
    CHECK(rep.kappa_star == doctest::Approx(bd.kappa_star));
  }
}

TEST_CASE("measurement") {
  SUBCASE("identity observation reads the parameter") {
    Vector x0(2);
    x0 << 0.3, -1.2;
    MeasurementModel m(x0, {2});
    Vector z = measure(m, Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK((z - x0).isZero());
  }
  SUBCASE("zero observation returns the noise") {
    Vector x0 = Vector::Ones(3);
    MeasurementModel m(x0, {2});
    Vector v(2);
    v << 0.5, -0.25;
    CHECK((measure(m, Matrix::Zero(2, 3), v) - v).isZero());
  }
  SUBCASE("benchmark block against its first column") {
    Vector x0 = Vector::Zero(13);
    x0(0) = 1.0;
    MeasurementModel m(x0, {5});
    Vector z = measure(m, benchmark_block_one(), Vector::Zero(5));
    Vector expected(5);
    expected << -1, 0, 1, -1, -1;
    CHECK((z - expected).isZero());
  }
  SUBCASE("shape mismatch") {
    MeasurementModel m(Vector::Ones(2), {1});
    CHECK_THROWS_AS(measure(m, Matrix::Identity(2, 2), Vector::Zero(2)), std::invalid_argument);
  }
}

TEST_CASE("node update") {
  WeightedDigraph g(remark5_adjacency());
  auto delays = DelayRealization::zero(2, 0);

  SUBCASE("frozen gains keep the estimate") {
    NetworkState s(2, 1, 0, Vector::Ones(2));
    Vector xi = node_update(s, 0, Matrix::Ones(1, 1), Vector::Zero(1), g, delays, 0.0, 0.0);
    CHECK(xi(0) == 1.0);
  }
  SUBCASE("single node with identity observation corrects in one step") {
    Matrix a0 = Matrix::Zero(1, 1);
    WeightedDigraph lone(a0);
    auto d0 = DelayRealization::zero(1, 0);
    Vector x0(3);
    x0 << 0.2, -0.4, 1.0;
    NetworkState s(1, 3, 0, Vector::Ones(3));
    Vector z = x0;  // H = I, v = 0
    Vector next = node_update(s, 0, Matrix::Identity(3, 3), z, lone, d0, 1.0, 0.0);
    CHECK((next - x0).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("hand-evaluated two-node step") {
    Vector init(2);
    init << 1.0, 0.0;
    NetworkState s(2, 1, 0, init);
    // x0 = 0, zero noise -> z = 0 at both nodes
    Vector next0 = node_update(s, 0, Matrix::Zero(1, 1), Vector::Zero(1), g, delays, 0.1, 0.1);
    Vector next1 = node_update(s, 1, Matrix::Ones(1, 1), Vector::Zero(1), g, delays, 0.1, 0.1);
    CHECK(next0(0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(next1(0) == doctest::Approx(0.03).epsilon(1e-15));
  }
}

TEST_CASE("network step") {
  SUBCASE("b = 0 decouples the nodes") {
    RngStream rng(5);
    auto inst = random_instance(rng);
    auto delays = DelayRealization::zero(inst.nodes, inst.d);
    Vector init = Vector::Zero(inst.nodes * inst.n);
    NetworkState coupled(inst.nodes, inst.n, inst.d, init);
    Vector z = Vector::Zero([&] {
      int t = 0;
      for (int d : inst.node_dims) t += d;
      return t;
    }());
    network_step(coupled, inst.obs, inst.graph, delays, z, 0.2, 0.0);

    // per-node gradient steps computed in isolation
    Vector expected(inst.nodes * inst.n);
    int zrow = 0;
    for (int i = 0; i < inst.nodes; ++i) {
      Vector xi = Vector::Zero(inst.n);
      Vector zi = z.segment(zrow, inst.node_dims[i]);
      zrow += inst.node_dims[i];
      expected.segment(i * inst.n, inst.n) =
          xi + 0.2 * inst.obs[i].transpose() * (zi - inst.obs[i] * xi);
    }
    CHECK((coupled.current() - expected).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("zero adjacency equals b = 0") {
    RngStream rng(6);
    auto inst = random_instance(rng);
    WeightedDigraph empty(Matrix::Zero(inst.nodes, inst.nodes));
    auto delays = random_delays(rng, inst.nodes, inst.d);
    int zdim = 0;
    for (int d : inst.node_dims) zdim += d;
    Vector z(zdim);
    for (int r = 0; r < zdim; ++r) z(r) = rng.uniform(-1.0, 1.0);
    Vector init(inst.nodes * inst.n);
    for (int r = 0; r < init.size(); ++r) init(r) = rng.uniform(-1.0, 1.0);

    NetworkState with_graph(inst.nodes, inst.n, inst.d, init);
    NetworkState without(inst.nodes, inst.n, inst.d, init);
    network_step(with_graph, inst.obs, empty, delays, z, 0.2, 0.7);
    network_step(without, inst.obs, inst.graph, delays, z, 0.2, 0.0);
    CHECK((with_graph.current() - without.current()).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("per-node and compact routes agree") {
    RngStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      auto inst = random_instance(rng, 3, 2, 2);
      NetworkState s(inst.nodes, inst.n, inst.d, Vector::Zero(inst.nodes * inst.n));
      int zdim = 0;
      for (int d : inst.node_dims) zdim += d;
      for (int k = 0; k < 30; ++k) {
        auto delays = random_delays(rng, inst.nodes, inst.d);
        Vector z(zdim);
        for (int r = 0; r < zdim; ++r) z(r) = rng.uniform(-1.0, 1.0);
        double diff = 0.0;
        network_step(s, inst.obs, inst.graph, delays, z, 0.5 / (k + 1), 0.3 / (k + 1), &diff);
        CHECK(diff <= 1e-12);
      }
    }
  }
}

TEST_CASE("error recursion") {
  SUBCASE("zero history and zero noise stay at equilibrium") {
    RngStream rng(8);
    auto inst = random_instance(rng);
    NetworkState e(inst.nodes, inst.n, inst.d, Vector::Zero(inst.nodes * inst.n));
    int vdim = 0;
    for (int d : inst.node_dims) vdim += d;
    error_step(e, inst.obs, inst.graph, random_delays(rng, inst.nodes, inst.d),
               Vector::Zero(vdim), 0.3, 0.2);
    CHECK(e.current().isZero());
  }
  SUBCASE("single node scalar contraction") {
    WeightedDigraph lone(Matrix::Zero(1, 1));
    NetworkState e(1, 1, 0, Vector::Ones(1));
    double val = 1.0;
    for (int k = 0; k < 10; ++k) {
      const double a = 1.0 / (k + 1);
      error_step(e, {Matrix::Identity(1, 1)}, lone, DelayRealization::zero(1, 0),
                 Vector::Zero(1), a, 0.0);
      val *= (1.0 - a);
      CHECK(e.current()(0) == doctest::Approx(val).epsilon(1e-14));
    }
  }
  SUBCASE("error equals estimate minus truth on shared draws") {
    RngStream rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      auto inst = random_instance(rng, 3, 3, 2);
      Vector x0(inst.n);
      for (int r = 0; r < inst.n; ++r) x0(r) = rng.uniform(-1.0, 1.0);
      MeasurementModel mm(x0, inst.node_dims);
      Vector ones_x0(inst.nodes * inst.n);
      for (int i = 0; i < inst.nodes; ++i) ones_x0.segment(i * inst.n, inst.n) = x0;

      NetworkState x(inst.nodes, inst.n, inst.d, Vector::Zero(inst.nodes * inst.n));
      NetworkState e(inst.nodes, inst.n, inst.d, -ones_x0);
      for (int k = 0; k < 100; ++k) {
        auto delays = random_delays(rng, inst.nodes, inst.d);
        Vector v(mm.total_obs_dim());
        for (int r = 0; r < v.size(); ++r) v(r) = 0.1 * rng.gaussian();
        Matrix stacked(mm.total_obs_dim(), inst.n);
        int row = 0;
        for (const auto& h : inst.obs) {
          stacked.middleRows(row, h.rows()) = h;
          row += h.rows();
        }
        Vector z = measure(mm, stacked, v);
        const double a = 0.4 / (k + 1), b = 0.2 / std::sqrt(double(k + 1));
        network_step(x, inst.obs, inst.graph, delays, z, a, b);
        error_step(e, inst.obs, inst.graph, delays, v, a, b);
        CHECK((e.current() - (x.current() - ones_x0)).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
  }
}

TEST_CASE("history ring") {
  NetworkState s(1, 1, 2, Vector::Constant(1, 5.0));
  CHECK(s.delayed(2)(0) == 5.0);
  CHECK_THROWS_AS(s.delayed(3), HistoryUnderflowError);
  s.push(Vector::Constant(1, 6.0));
  s.push(Vector::Constant(1, 7.0));
  CHECK(s.current()(0) == 7.0);
  CHECK(s.delayed(1)(0) == 6.0);
  CHECK(s.delayed(2)(0) == 5.0);
  CHECK(s.step() == 2);
}

TEST_CASE("zero-noise single-node stochastic approximation sanity") {
  WeightedDigraph lone(Matrix::Zero(1, 1));
  Vector x0(2);
  x0 << 1.0, -2.0;
  MeasurementModel mm(x0, {2});
  Matrix h = Matrix::Identity(2, 2);
  NetworkState x(1, 2, 0, Vector::Zero(2));
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing_tail = true;
  for (int k = 0; k < 200; ++k) {
    Vector z = measure(mm, h, Vector::Zero(2));
    network_step(x, {h}, lone, DelayRealization::zero(1, 0), z, 1.0 / (k + 1), 0.0);
    const double err = (x.current() - x0).norm();
    if (k >= 5 && err > prev + 1e-15) decreasing_tail = false;
    prev = err;
  }
  CHECK(decreasing_tail);
  CHECK(prev < 1e-10);
}
