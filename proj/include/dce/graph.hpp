#pragma once

#include <functional>
#include <vector>

#include "dce/linalg.hpp"

namespace dce {

// Weighted digraph on N nodes. Entry A(i, j) is the weight a_ij of the
// communication link from node j into node i; a_ij != 0 means node i
// receives from node j. The diagonal is identically zero.
class WeightedDigraph {
 public:
  explicit WeightedDigraph(Matrix adjacency);

  int node_count() const { return static_cast<int>(a_.rows()); }
  const Matrix& adjacency() const { return a_; }
  double weight(int to_i, int from_j) const { return a_(to_i, from_j); }

  // {j : a_ij != 0}
  std::vector<int> in_neighbors(int i) const;

  double max_abs_weight() const { return max_abs(a_); }

 private:
  Matrix a_;
};

Matrix degree_matrix(const WeightedDigraph& g);
Matrix laplacian(const WeightedDigraph& g);

// (L + L^T)/2, built entrywise symmetric
Matrix symmetrized_laplacian(const Matrix& l);

// in-weight sum equals out-weight sum at every node, within tol
bool is_balanced(const WeightedDigraph& g, double tol = 1e-10);

// some root reaches every node along directed edges j -> i (a_ij > 0);
// throws std::invalid_argument if any weight is negative
bool has_spanning_tree(const WeightedDigraph& g);

// Per-link delay distributions. pmf(i, j) is the distribution of the delay
// on the link from node j into node i, supported on {0..d} and summing to 1.
// Self-delays are degenerate at zero. An optional per-step schedule makes
// the distributions time-varying; a coupled-sampler hook replaces the
// default independent per-link sampling.
class DelayModel {
 public:
  DelayModel(int n_nodes, int max_delay);

  int node_count() const { return n_; }
  int max_delay() const { return d_; }

  void set_link_pmf(int to_i, int from_j, std::vector<double> pmf);
  void set_uniform_offdiag();
  const std::vector<double>& link_pmf(int to_i, int from_j) const;

  using Schedule = std::function<std::vector<double>(long k, int to_i, int from_j)>;
  void set_schedule(Schedule s) { schedule_ = std::move(s); }
  std::vector<double> pmf_at(long k, int to_i, int from_j) const;

  using CoupledSampler = std::function<IntMatrix(long k, class RngStream&)>;
  void set_coupled_sampler(CoupledSampler s) { coupled_ = std::move(s); }
  const CoupledSampler& coupled_sampler() const { return coupled_; }

 private:
  int n_ = 0;
  int d_ = 0;
  std::vector<std::vector<double>> pmf_;  // row-major (to_i, from_j)
  Schedule schedule_;
  CoupledSampler coupled_;
};

// One realized delay pattern. Entry (i, j) is the delay lambda carried by
// the link from node j into node i, aligned with WeightedDigraph indexing.
class DelayRealization {
 public:
  DelayRealization(IntMatrix lambda, int max_delay);

  static DelayRealization zero(int n_nodes, int max_delay);

  int node_count() const { return static_cast<int>(lambda_.rows()); }
  int max_delay() const { return d_; }
  int delay(int to_i, int from_j) const { return lambda_(to_i, from_j); }
  const IntMatrix& matrix() const { return lambda_; }
  bool all_zero() const { return lambda_.isZero(); }

 private:
  IntMatrix lambda_;
  int d_ = 0;
};

// d+1 binary matrices; matrix q flags the links currently carrying delay
// exactly q. Entrywise they partition the all-ones matrix.
std::vector<IntMatrix> delay_matrices(const DelayRealization& r);

// (A ∘ iq) ⊗ I_n with iq a 0/1 mask; throws std::invalid_argument on
// dimension mismatch or non-binary mask entries
Matrix masked_adjacency(const WeightedDigraph& g, const IntMatrix& iq, int n);

}  // namespace dce
