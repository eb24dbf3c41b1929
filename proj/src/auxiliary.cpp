#include "dce/auxiliary.hpp"

#include <cmath>

namespace dce {

Matrix phi_product(std::span<const Matrix> chain, long j, long i, long base_index) {
  if (chain.empty()) throw std::invalid_argument("phi_product: empty chain");
  const Eigen::Index dim = chain.front().rows();
  if (j < i) return Matrix::Identity(dim, dim);
  if (i < base_index || j >= base_index + static_cast<long>(chain.size()))
    throw std::out_of_range("phi_product: indices outside the stored range");
  Matrix out = chain[static_cast<std::size_t>(j - base_index)];
  for (long t = j - 1; t >= i; --t) out = out * chain[static_cast<std::size_t>(t - base_index)];
  return out;
}

AuxiliarySystem::AuxiliarySystem(int n_nodes, int param_dim, int max_delay, double kappa)
    : n_nodes_(n_nodes),
      param_dim_(param_dim),
      d_(max_delay),
      dim_(n_nodes * param_dim),
      kappa_(kappa) {
  if (n_nodes_ < 1 || param_dim_ < 1)
    throw std::invalid_argument("AuxiliarySystem: dimensions must be positive");
  if (d_ < 0) throw std::invalid_argument("AuxiliarySystem: negative delay bound");
  if (!(kappa_ > 0.0 && kappa_ < 1.0))
    throw std::invalid_argument("AuxiliarySystem: kappa must lie in (0,1)");
  f_ring_.assign(d_ + 1, Matrix::Identity(dim_, dim_));
  f_inv_ring_.assign(d_ + 1, Matrix::Identity(dim_, dim_));
  c_.assign(d_, Matrix::Zero(dim_, dim_));
  g_current_ = Matrix::Zero(dim_, dim_);
}

int AuxiliarySystem::slot(long k) const {
  long r = k % (d_ + 1);
  if (r < 0) r += d_ + 1;
  return static_cast<int>(r);
}

const Matrix& AuxiliarySystem::transition(long k) const {
  if (k > k_ || k < k_ - d_)
    throw std::out_of_range("AuxiliarySystem: transition index outside stored window");
  return f_ring_[slot(k)];
}

const Matrix& AuxiliarySystem::transition_inverse(long k) const {
  if (k > k_ || k < k_ - d_)
    throw std::out_of_range("AuxiliarySystem: transition index outside stored window");
  return f_inv_ring_[slot(k)];
}

const Matrix& AuxiliarySystem::correction(int q) const {
  if (q < 1 || q > d_) throw std::out_of_range("AuxiliarySystem: correction index outside 1..d");
  return c_[q - 1];
}

Matrix AuxiliarySystem::phi_inverse(long j, long i) const {
  if (j < i) return Matrix::Identity(dim_, dim_);
  if (j > k_ || i < k_ - d_)
    throw std::out_of_range("AuxiliarySystem: product indices outside stored window");
  // [F(j)...F(i)]^{-1} = F(i)^{-1} ... F(j)^{-1}
  Matrix out = f_inv_ring_[slot(i)];
  for (long t = i + 1; t <= j; ++t) out = out * f_inv_ring_[slot(t)];
  return out;
}

void AuxiliarySystem::advance(const WeightedDigraph& g, const DelayRealization& delays,
                              const std::vector<Matrix>& obs, double a_k, double b_k) {
  if (g.node_count() != n_nodes_ || delays.node_count() != n_nodes_ ||
      static_cast<int>(obs.size()) != n_nodes_)
    throw std::invalid_argument("AuxiliarySystem: node count mismatch");
  if (delays.max_delay() > d_)
    throw std::invalid_argument("AuxiliarySystem: delay realization exceeds the declared bound");

  const long k = k_ + 1;

  std::vector<Matrix> abar(d_ + 1);
  {
    const auto masks = delay_matrices(delays);
    for (int q = 0; q <= d_; ++q)
      abar[q] = q < static_cast<int>(masks.size())
                    ? masked_adjacency(g, masks[q], param_dim_)
                    : Matrix::Zero(dim_, dim_);
  }

  // [Phi_F(k-1, k-q)]^{-1} for q = 0..d, built from the stored inverses
  std::vector<Matrix> chain_inv(d_ + 1);
  chain_inv[0] = Matrix::Identity(dim_, dim_);
  for (int q = 1; q <= d_; ++q)
    chain_inv[q] = f_inv_ring_[slot(k - q)] * chain_inv[q - 1];

  const Matrix degree_kron = kron_identity(degree_matrix(g), param_dim_);
  const Matrix gram = gram_blockdiag(obs, param_dim_);

  Matrix gk = b_k * degree_kron + a_k * gram;
  for (int q = 0; q <= d_; ++q) gk -= b_k * (abar[q] * chain_inv[q]);
  Matrix fk = Matrix::Identity(dim_, dim_) - gk;

  Eigen::FullPivLU<Matrix> lu(fk);
  if (!lu.isInvertible()) throw SingularSystemError(spectral_norm(gk));
  Matrix fk_inv = lu.inverse();
  {
    Eigen::PartialPivLU<Matrix> plu(fk);
    const double rc = plu.rcond();
    last_cond_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  }

  // corrections from the closed form; Psi(i,q) = [Phi_F(k-i, k-q)]^{-1}
  std::vector<Matrix> c_next(d_, Matrix::Zero(dim_, dim_));
  for (int i = 1; i <= d_; ++i) {
    Matrix psi = f_inv_ring_[slot(k - i)];  // q = i
    Matrix acc = abar[i] * psi;
    for (int q = i + 1; q <= d_; ++q) {
      psi = f_inv_ring_[slot(k - q)] * psi;
      acc += abar[q] * psi;
    }
    c_next[i - 1] = -b_k * acc;
  }

  // re-check the triangular relations that define the system
  double residual = 0.0;
  {
    Matrix top = fk - (Matrix::Identity(dim_, dim_) - b_k * degree_kron - a_k * gram +
                       b_k * abar[0]);
    if (d_ >= 1) top += c_next[0];
    residual = max_abs(top);
    for (int i = 1; i < d_; ++i) {
      Matrix r = c_next[i - 1] * f_ring_[slot(k - i)] - c_next[i] + b_k * abar[i];
      residual = std::max(residual, max_abs(r));
    }
    if (d_ >= 1) {
      Matrix r = c_next[d_ - 1] * f_ring_[slot(k - d_)] + b_k * abar[d_];
      residual = std::max(residual, max_abs(r));
    }
  }
  if (residual > 1e-10)
    throw std::runtime_error("AuxiliarySystem: defining relations violated; residual " +
                             std::to_string(residual));

  last_residual_ = residual;
  g_current_ = std::move(gk);
  c_ = std::move(c_next);
  k_ = k;
  f_ring_[slot(k)] = std::move(fk);
  f_inv_ring_[slot(k)] = std::move(fk_inv);
}

InverseNormCertificate certify_inverse_norm(const AuxiliarySystem& sys, long k) {
  const Matrix& f = sys.transition(k);
  Eigen::JacobiSVD<Matrix> svd(f);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  InverseNormCertificate cert{};
  cert.bound = 1.0 / (1.0 - sys.kappa());
  cert.invertible = smin > 0.0;
  cert.inv_norm = cert.invertible ? 1.0 / smin : std::numeric_limits<double>::infinity();
  return cert;
}

double g_residual(const AuxiliarySystem& sys, std::span<const Vector> error_window,
                  const Vector& innovation_noise, double a_k) {
  const int d = sys.max_delay();
  const long k = sys.step();
  if (k < d) throw std::invalid_argument("g_residual: needs at least d advanced steps");
  if (static_cast<int>(error_window.size()) != d + 2)
    throw std::invalid_argument("g_residual: window must hold e(k-d)..e(k+1)");
  for (const Vector& e : error_window)
    if (e.size() != sys.dim()) throw std::invalid_argument("g_residual: bad error dimension");

  // g(j) = e(j+1) - F(j) e(j), j = k-d .. k
  std::vector<Vector> g(d + 1);
  for (int t = 0; t <= d; ++t) {
    const long j = k - d + t;
    g[t] = error_window[t + 1] - sys.transition(j) * error_window[t];
  }
  Vector lhs = g[d];
  for (int q = 1; q <= d; ++q) lhs -= sys.correction(q) * g[d - q];
  lhs -= a_k * innovation_noise;
  return lhs.norm();
}

}  // namespace dce
