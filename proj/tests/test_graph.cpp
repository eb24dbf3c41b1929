#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dce/graph.hpp"
#include "dce/rng.hpp"

using namespace dce;

namespace {

Matrix remark5_adjacency() {
  Matrix a(2, 2);
  a << 0.0, 1.0, 0.3, 0.0;
  return a;
}

WeightedDigraph random_digraph(RngStream& rng, int n, double density = 0.7,
                               bool nonnegative = false) {
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (rng.uniform01() < density) {
        double w = rng.uniform(-1.0, 1.0);
        a(i, j) = nonnegative ? std::abs(w) : w;
      }
    }
  return WeightedDigraph(a);
}

DelayRealization random_delays(RngStream& rng, int n, int d) {
  IntMatrix lam = IntMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) lam(i, j) = rng.below(d + 1);
  return DelayRealization(lam, d);
}

}  // namespace

TEST_CASE("degree matrix") {
  WeightedDigraph g(remark5_adjacency());
  Matrix d = degree_matrix(g);
  CHECK(d(0, 0) == doctest::Approx(1.0));
  CHECK(d(1, 1) == doctest::Approx(0.3));
  CHECK(d(0, 1) == 0.0);
  CHECK(d(1, 0) == 0.0);

  WeightedDigraph zero(Matrix::Zero(3, 3));
  CHECK(degree_matrix(zero).isZero());

  Matrix complete = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  Matrix dk = degree_matrix(WeightedDigraph(complete));
  for (int i = 0; i < 3; ++i) CHECK(dk(i, i) == doctest::Approx(2.0));
}

TEST_CASE("laplacian") {
  WeightedDigraph g(remark5_adjacency());
  Matrix l = laplacian(g);
  Matrix expected(2, 2);
  expected << 1.0, -1.0, -0.3, 0.3;
  CHECK((l - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  CHECK(laplacian(WeightedDigraph(Matrix::Zero(2, 2))).isZero());

  // row sums vanish for any admissible adjacency
  RngStream rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    WeightedDigraph h = random_digraph(rng, 2 + rng.below(5));
    Vector rowsum = laplacian(h) * Vector::Ones(h.node_count());
    CHECK(rowsum.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("symmetrized laplacian") {
  Matrix l(2, 2);
  l << 1.0, -1.0, -0.3, 0.3;
  Matrix s = symmetrized_laplacian(l);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 1) == doctest::Approx(-0.65));
  CHECK(s(1, 0) == doctest::Approx(-0.65));
  CHECK(s(1, 1) == 0.3);

  // symmetric input is a fixed point; antisymmetric input vanishes
  Matrix sym(2, 2);
  sym << 2.0, 0.5, 0.5, -1.0;
  CHECK((symmetrized_laplacian(sym) - sym).isZero());
  Matrix anti(2, 2);
  anti << 0.0, 3.0, -3.0, 0.0;
  CHECK(symmetrized_laplacian(anti).isZero());

  // output is symmetric to bit equality by construction
  RngStream rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 2 + rng.below(5);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
    Matrix out = symmetrized_laplacian(m);
    CHECK(out == out.transpose().eval());
  }
}

TEST_CASE("balance check") {
  CHECK_FALSE(is_balanced(WeightedDigraph(remark5_adjacency()), 1e-10));

  RngStream rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + rng.below(4);
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) m(i, j) = m(j, i) = rng.uniform01();
    CHECK(is_balanced(WeightedDigraph(m), 1e-10));
  }

  // directed 3-cycle with equal weights
  Matrix cyc = Matrix::Zero(3, 3);
  cyc(1, 0) = cyc(2, 1) = cyc(0, 2) = 0.7;
  CHECK(is_balanced(WeightedDigraph(cyc), 1e-10));

  // balance is preserved under transposition
  RngStream rng2(4);
  for (int trial = 0; trial < 20; ++trial) {
    WeightedDigraph g = random_digraph(rng2, 2 + rng2.below(4));
    WeightedDigraph gt(g.adjacency().transpose().eval());
    CHECK(is_balanced(g, 1e-10) == is_balanced(gt, 1e-10));
  }
}

TEST_CASE("spanning tree") {
  CHECK(has_spanning_tree(WeightedDigraph(remark5_adjacency())));
  CHECK_FALSE(has_spanning_tree(WeightedDigraph(Matrix::Zero(2, 2))));

  // directed path 1 -> 2 -> 3
  Matrix path = Matrix::Zero(3, 3);
  path(1, 0) = 1.0;
  path(2, 1) = 1.0;
  CHECK(has_spanning_tree(WeightedDigraph(path)));

  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS(has_spanning_tree(WeightedDigraph(neg)), std::invalid_argument);
}

TEST_CASE("digraph invariants") {
  Matrix bad = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(WeightedDigraph{bad}, std::invalid_argument);
  Matrix nan = Matrix::Zero(2, 2);
  nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(WeightedDigraph{nan}, std::invalid_argument);
}

TEST_CASE("delay matrices") {
  // delay-free realization
  DelayRealization free2 = DelayRealization::zero(2, 2);
  auto mats = delay_matrices(free2);
  REQUIRE(mats.size() == 3);
  CHECK(mats[0] == IntMatrix::Ones(2, 2));
  CHECK(mats[1].isZero());
  CHECK(mats[2].isZero());

  IntMatrix lam(2, 2);
  lam << 0, 1, 0, 0;
  auto m01 = delay_matrices(DelayRealization(lam, 1));
  IntMatrix q0(2, 2), q1(2, 2);
  q0 << 1, 0, 1, 1;
  q1 << 0, 1, 0, 0;
  CHECK(m01[0] == q0);
  CHECK(m01[1] == q1);

  // matrices partition the all-ones matrix on every realization
  RngStream rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + rng.below(5);
    int d = rng.below(5);
    auto r = random_delays(rng, n, d);
    IntMatrix sum = IntMatrix::Zero(n, n);
    for (const auto& mq : delay_matrices(r)) sum += mq;
    CHECK(sum == IntMatrix::Ones(n, n));
  }
}

TEST_CASE("delay realization invariants") {
  IntMatrix bad(2, 2);
  bad << 1, 0, 0, 0;
  CHECK_THROWS_AS((DelayRealization{bad, 1}), std::invalid_argument);
  IntMatrix big(2, 2);
  big << 0, 3, 0, 0;
  CHECK_THROWS_AS((DelayRealization{big, 2}), std::invalid_argument);
}

TEST_CASE("masked adjacency") {
  WeightedDigraph g(remark5_adjacency());

  SUBCASE("full mask recovers A kron I") {
    for (int n : {1, 2, 3}) {
      Matrix full = masked_adjacency(g, IntMatrix::Ones(2, 2), n);
      CHECK((full - kron_identity(g.adjacency(), n)).isZero());
    }
  }
  SUBCASE("zero mask") {
    CHECK(masked_adjacency(g, IntMatrix::Zero(2, 2), 2).isZero());
  }
  SUBCASE("off-diagonal mask, n=1") {
    IntMatrix iq(2, 2);
    iq << 0, 1, 1, 0;
    Matrix out = masked_adjacency(g, iq, 1);
    CHECK(out(0, 1) == 1.0);
    CHECK(out(1, 0) == 0.3);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(1, 1) == 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(masked_adjacency(g, IntMatrix::Ones(3, 3), 1), std::invalid_argument);
    IntMatrix two = IntMatrix::Constant(2, 2, 2);
    CHECK_THROWS_AS(masked_adjacency(g, two, 1), std::invalid_argument);
  }
}

TEST_CASE("masked adjacency reconstructs the full product over delay classes") {
  RngStream rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    int nn = 2 + rng.below(4);
    int d = rng.below(4);
    int n = 1 + rng.below(3);
    WeightedDigraph g = random_digraph(rng, nn);
    auto r = random_delays(rng, nn, d);
    auto mats = delay_matrices(r);
    Matrix sum = Matrix::Zero(nn * n, nn * n);
    for (const auto& mq : mats) sum += masked_adjacency(g, mq, n);
    Matrix whole = masked_adjacency(g, IntMatrix::Ones(nn, nn), n);
    // masking is entrywise selection, so the reconstruction is exact
    CHECK((sum - whole).isZero());
  }
}

TEST_CASE("delay model") {
  DelayModel m(3, 2);
  for (int i = 0; i < 3; ++i) {
    CHECK(m.link_pmf(i, i)[0] == 1.0);
  }
  m.set_link_pmf(0, 1, {0.2, 0.3, 0.5});
  CHECK(m.link_pmf(0, 1)[2] == 0.5);
  CHECK_THROWS_AS(m.set_link_pmf(1, 1, {0.0, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(m.set_link_pmf(0, 1, {0.5, 0.2, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(m.set_link_pmf(0, 1, {0.5, 0.5}), std::invalid_argument);

  m.set_uniform_offdiag();
  CHECK(m.link_pmf(2, 0)[1] == doctest::Approx(1.0 / 3.0));
  CHECK(m.link_pmf(1, 1)[0] == 1.0);
}
