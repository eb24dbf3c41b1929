#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "dce/estimator.hpp"
#include "dce/graph.hpp"
#include "dce/linalg.hpp"

namespace dce {

struct SingularSystemError : std::runtime_error {
  explicit SingularSystemError(double defect)
      : std::runtime_error("auxiliary transition matrix is singular"), defect_norm(defect) {}
  double defect_norm;  // ||I - F(k)||
};

// Left-to-right descending-index product Z(j)...Z(i); identity when j < i.
// chain[t] holds Z(base_index + t).
Matrix phi_product(std::span<const Matrix> chain, long j, long i, long base_index);

// Rolling construction of the delay-absorbing transition system: at each
// step the matrices F(k), C_1(k)..C_d(k) and G(k) are rebuilt from the
// realized graph, delays and observation matrices, with
//
//   F(k) = I - [ b D(k) ⊗ I_n + a H'H(k) - b sum_q Abar(k,q) PhiF(k-1,k-q)^{-1} ]
//   C_i(k) = -b sum_{q=i}^{d} Abar(k,q) PhiF(k-i,k-q)^{-1}
//
// and F prefilled with the identity before step zero. The triangular
// relations that define the system are re-checked at every step.
class AuxiliarySystem {
 public:
  AuxiliarySystem(int n_nodes, int param_dim, int max_delay, double kappa);

  void advance(const WeightedDigraph& g, const DelayRealization& delays,
               const std::vector<Matrix>& obs, double a_k, double b_k);

  long step() const { return k_; }
  int max_delay() const { return d_; }
  int dim() const { return dim_; }
  double kappa() const { return kappa_; }

  const Matrix& transition(long k) const;          // F(k), k in [step-d, step]
  const Matrix& transition_inverse(long k) const;  // F(k)^{-1}
  const Matrix& correction(int q) const;           // C_q at the current step, 1 <= q <= d
  const Matrix& gain_matrix() const { return g_current_; }   // G at the current step

  // [Phi_F(j, i)]^{-1} over the stored window; identity when j < i
  Matrix phi_inverse(long j, long i) const;

  double max_defining_residual() const { return last_residual_; }
  double last_condition_estimate() const { return last_cond_; }

 private:
  int slot(long k) const;

  int n_nodes_, param_dim_, d_, dim_;
  double kappa_;
  long k_ = -1;
  std::vector<Matrix> f_ring_;      // F(step-d .. step), slot by k mod (d+1)
  std::vector<Matrix> f_inv_ring_;
  std::vector<Matrix> c_;           // C_1..C_d at the current step
  Matrix g_current_;
  double last_residual_ = 0.0;
  double last_cond_ = 1.0;
};

struct InverseNormCertificate {
  bool invertible;
  double inv_norm;  // ||F(k)^{-1}||
  double bound;     // (1 - kappa)^{-1}
  bool within_bound() const { return invertible && inv_norm <= bound + 1e-9; }
};

// Spectral certification of the inverse-norm bound at a stored step.
InverseNormCertificate certify_inverse_norm(const AuxiliarySystem& sys, long k);

// Residual of the noise-driven recursion at the current step k = sys.step():
// with g(j) := e(j+1) - F(j) e(j), returns
//   || g(k) - sum_{q=1}^{d} C_q(k) g(k-q) - a(k) H'(k) v(k) ||
// error_window holds e(k-d) .. e(k+1); innovation_noise is H'(k) v(k).
double g_residual(const AuxiliarySystem& sys, std::span<const Vector> error_window,
                  const Vector& innovation_noise, double a_k);

}  // namespace dce
