#include "dce/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace dce {

WeightedDigraph::WeightedDigraph(Matrix adjacency) : a_(std::move(adjacency)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1)
    throw std::invalid_argument("WeightedDigraph: adjacency must be square and nonempty");
  for (Eigen::Index i = 0; i < a_.rows(); ++i) {
    if (a_(i, i) != 0.0)
      throw std::invalid_argument("WeightedDigraph: diagonal must be exactly zero");
    for (Eigen::Index j = 0; j < a_.cols(); ++j)
      if (!std::isfinite(a_(i, j)))
        throw std::invalid_argument("WeightedDigraph: non-finite weight");
  }
}

std::vector<int> WeightedDigraph::in_neighbors(int i) const {
  std::vector<int> out;
  for (int j = 0; j < node_count(); ++j)
    if (a_(i, j) != 0.0) out.push_back(j);
  return out;
}

Matrix degree_matrix(const WeightedDigraph& g) {
  const int n = g.node_count();
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = g.adjacency().row(i).sum();
  return d;
}

Matrix laplacian(const WeightedDigraph& g) {
  return degree_matrix(g) - g.adjacency();
}

Matrix symmetrized_laplacian(const Matrix& l) {
  if (l.rows() != l.cols())
    throw std::invalid_argument("symmetrized_laplacian: matrix must be square");
  Matrix out(l.rows(), l.cols());
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    out(i, i) = l(i, i);
    for (Eigen::Index j = i + 1; j < l.cols(); ++j) {
      const double v = 0.5 * (l(i, j) + l(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

bool is_balanced(const WeightedDigraph& g, double tol) {
  if (tol < 0.0) throw std::invalid_argument("is_balanced: tol must be nonnegative");
  const Matrix& a = g.adjacency();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (std::abs(a.row(i).sum() - a.col(i).sum()) > tol) return false;
  return true;
}

bool has_spanning_tree(const WeightedDigraph& g) {
  const Matrix& a = g.adjacency();
  const int n = g.node_count();
  if ((a.array() < 0.0).any())
    throw std::invalid_argument("has_spanning_tree: weights must be nonnegative");
  for (int root = 0; root < n; ++root) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{root};
    seen[root] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      // u sends to v iff a_vu > 0
      for (int v = 0; v < n; ++v) {
        if (!seen[v] && a(v, u) > 0.0) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    if (count == n) return true;
  }
  return false;
}

DelayModel::DelayModel(int n_nodes, int max_delay) : n_(n_nodes), d_(max_delay) {
  if (n_ < 1) throw std::invalid_argument("DelayModel: need at least one node");
  if (d_ < 0) throw std::invalid_argument("DelayModel: negative maximum delay");
  std::vector<double> delta0(d_ + 1, 0.0);
  delta0[0] = 1.0;
  pmf_.assign(static_cast<std::size_t>(n_) * n_, delta0);
}

void DelayModel::set_link_pmf(int to_i, int from_j, std::vector<double> pmf) {
  if (to_i == from_j)
    throw std::invalid_argument("DelayModel: self-delay is fixed at zero");
  if (static_cast<int>(pmf.size()) != d_ + 1)
    throw std::invalid_argument("DelayModel: pmf must have length d+1");
  double total = 0.0;
  for (double p : pmf) {
    if (p < 0.0) throw std::invalid_argument("DelayModel: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("DelayModel: pmf must sum to 1");
  pmf_[static_cast<std::size_t>(to_i) * n_ + from_j] = std::move(pmf);
}

void DelayModel::set_uniform_offdiag() {
  std::vector<double> uni(d_ + 1, 1.0 / (d_ + 1));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (i != j) pmf_[static_cast<std::size_t>(i) * n_ + j] = uni;
}

const std::vector<double>& DelayModel::link_pmf(int to_i, int from_j) const {
  return pmf_[static_cast<std::size_t>(to_i) * n_ + from_j];
}

std::vector<double> DelayModel::pmf_at(long k, int to_i, int from_j) const {
  if (schedule_ && to_i != from_j) return schedule_(k, to_i, from_j);
  return link_pmf(to_i, from_j);
}

DelayRealization::DelayRealization(IntMatrix lambda, int max_delay)
    : lambda_(std::move(lambda)), d_(max_delay) {
  if (lambda_.rows() != lambda_.cols() || lambda_.rows() < 1)
    throw std::invalid_argument("DelayRealization: matrix must be square and nonempty");
  if (d_ < 0) throw std::invalid_argument("DelayRealization: negative maximum delay");
  for (Eigen::Index i = 0; i < lambda_.rows(); ++i) {
    if (lambda_(i, i) != 0)
      throw std::invalid_argument("DelayRealization: self-delays must be zero");
    for (Eigen::Index j = 0; j < lambda_.cols(); ++j)
      if (lambda_(i, j) < 0 || lambda_(i, j) > d_)
        throw std::invalid_argument("DelayRealization: entry outside {0..d}");
  }
}

DelayRealization DelayRealization::zero(int n_nodes, int max_delay) {
  return DelayRealization(IntMatrix::Zero(n_nodes, n_nodes), max_delay);
}

std::vector<IntMatrix> delay_matrices(const DelayRealization& r) {
  const int n = r.node_count();
  std::vector<IntMatrix> out(r.max_delay() + 1, IntMatrix::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[r.matrix()(i, j)](i, j) = 1;
  return out;
}

Matrix masked_adjacency(const WeightedDigraph& g, const IntMatrix& iq, int n) {
  if (n < 1) throw std::invalid_argument("masked_adjacency: parameter dimension must be positive");
  if (iq.rows() != g.node_count() || iq.cols() != g.node_count())
    throw std::invalid_argument("masked_adjacency: mask dimension mismatch");
  for (Eigen::Index i = 0; i < iq.rows(); ++i)
    for (Eigen::Index j = 0; j < iq.cols(); ++j)
      if (iq(i, j) != 0 && iq(i, j) != 1)
        throw std::invalid_argument("masked_adjacency: mask entries must be 0 or 1");
  Matrix masked = g.adjacency().cwiseProduct(iq.cast<double>());
  return kron_identity(masked, n);
}

}  // namespace dce
