#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dce/graph.hpp"
#include "dce/linalg.hpp"

namespace dce {

struct HistoryUnderflowError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Innovation gain a(k) and consensus gain b(k). The power-law kind is
// a(k) = 1/(k+1)^tau1, b(k) = 1/(k+1)^tau2 with 0.5 < tau2 <= tau1 <= 1
// enforced at construction; anything else is a custom pair of sequences.
class GainSchedule {
 public:
  static GainSchedule power_law(double tau1, double tau2);
  static GainSchedule custom(std::function<double(long)> a, std::function<double(long)> b);
  // c_a/(k+1)^tau1, c_b/(k+1)^tau2 as a custom schedule; the scales make the
  // consensus gain small enough to sit below the admissibility ceiling
  static GainSchedule scaled_power_law(double c_a, double c_b, double tau1, double tau2);
  // min(a_max, c_a/(k+1)^tau1) and likewise for b: flat while the power law
  // would exceed the cap, then decaying; still positive and nonincreasing
  static GainSchedule capped_power_law(double a_max, double b_max, double c_a, double c_b,
                                       double tau1, double tau2);

  double a(long k) const { return a_(k); }
  double b(long k) const { return b_(k); }
  double ratio(long k) const { return b_(k) / a_(k); }

  bool is_power_law() const { return power_law_; }
  double tau1() const;
  double tau2() const;

  // C_a with a(k) <= C_a b(k), taken as the max of a/b over the horizon
  double ratio_bound(long horizon) const;

 private:
  GainSchedule() = default;
  std::function<double(long)> a_, b_;
  bool power_law_ = false;
  double tau1_ = 0.0, tau2_ = 0.0;
};

// Scenario-wide bounds: weight and observation norms, noise variance,
// gain ratio, the contraction margin, and the delay bound.
struct AssumptionConstants {
  double beta_a;   // weight magnitude bound
  double beta_H;   // per-node observation norm bound
  double beta_v;   // noise conditional-variance bound
  double C_a;      // gain ratio bound, a(k) <= C_a b(k)
  double kappa;    // contraction margin in (0,1)
  int d;           // maximum delay

  AssumptionConstants(double beta_a, double beta_H, double beta_v, double C_a,
                      double kappa, int d);
};

struct GainCeiling {
  double bound;       // open-interval supremum over kappa of the two-term min
  double kappa_star;  // maximizing kappa
};

// sup over kappa in (0,1) of
//   min{ kappa / (2[N beta_a + N sqrt(N) beta_a + C_a beta_H^2]),
//        kappa / (2 N sqrt(N) beta_a sum_{j=0}^{d} (1-kappa)^{-j}) }
// (the second factor written with the geometric sum, which equals the
// (1-(1-kappa)^{-1}) / (1-(1-kappa)^{-(d+1)}) ratio form on (0,1))
GainCeiling gain_ceiling(int n_nodes, double beta_a, double beta_H, double C_a, int d);
GainCeiling gain_ceiling(int n_nodes, const AssumptionConstants& c);

// Per-clause gain-assumption report. Verdicts are analytic for power-law
// schedules; custom schedules get finite-horizon proxies, flagged as such.
struct GainAssumptionReport {
  bool positive;                 // a(k), b(k) > 0 on the prefix
  bool monotone;                 // nonincreasing on the prefix
  bool decays_to_zero;           // proxy: a(K-1) <= a(0)/2 and b(K-1) <= b(0)/2
  bool b2_over_a_decreasing;     // proxy: value at K-1 <= half the value at 0
  double partial_sum_a;          // sum of a(k) over the prefix
  double partial_sum_a_half;     // sum over the first half
  bool decrease_ok;
  bool square_summable_ok;
  bool decrease_analytic;
  bool square_summable_analytic;
  double sup_b;                  // b(0) for nonincreasing schedules
  double ceiling;
  double kappa_star;
  bool below_ceiling;

  bool all_pass() const { return decrease_ok && square_summable_ok && below_ceiling; }
};

GainAssumptionReport check_gain_assumptions(const GainSchedule& s, const AssumptionConstants& c,
                                            int n_nodes, long horizon);

// True parameter and the per-node measurement dimensions.
class MeasurementModel {
 public:
  MeasurementModel(Vector x0, std::vector<int> node_dims);

  const Vector& x0() const { return x0_; }
  int param_dim() const { return static_cast<int>(x0_.size()); }
  int node_count() const { return static_cast<int>(node_dims_.size()); }
  const std::vector<int>& node_dims() const { return node_dims_; }
  int total_obs_dim() const { return total_; }

 private:
  Vector x0_;
  std::vector<int> node_dims_;
  int total_ = 0;
};

// z = H x0 + v for the stacked observation matrix
Vector measure(const MeasurementModel& m, const Matrix& stacked_obs, const Vector& noise);

// Stacked estimates with a depth-(d+1) history ring so that reads of
// x_j(k - q) are well defined for 0 <= q <= d. The pre-initial history is
// filled with the initial value.
class NetworkState {
 public:
  NetworkState(int n_nodes, int param_dim, int max_delay, Vector x_init);

  long step() const { return k_; }
  int node_count() const { return n_nodes_; }
  int param_dim() const { return param_dim_; }
  int max_delay() const { return max_delay_; }

  const Vector& current() const { return slot(0); }
  const Vector& delayed(int q) const;            // x(k-q)
  Vector node(int i) const;                      // x_i(k)
  Vector delayed_node(int i, int q) const;       // x_i(k-q)

  void push(Vector x_next);                      // advance to k+1

 private:
  const Vector& slot(int q) const { return ring_[(head_ + q) % ring_.size()]; }

  int n_nodes_, param_dim_, max_delay_;
  long k_ = 0;
  std::size_t head_ = 0;  // index of x(k)
  std::vector<Vector> ring_;
};

// One node's estimate update: innovation plus delayed-neighbor consensus.
Vector node_update(const NetworkState& s, int i, const Matrix& h_i, const Vector& z_i,
                   const WeightedDigraph& g, const DelayRealization& delays,
                   double a_k, double b_k);

// Full-network update by the per-node rule. When cross_check is non-null the
// compact stacked form is evaluated as well and the largest coordinate
// difference between the two routes is reported there.
void network_step(NetworkState& s, const std::vector<Matrix>& obs, const WeightedDigraph& g,
                  const DelayRealization& delays, const Vector& z, double a_k, double b_k,
                  double* cross_check = nullptr);

// Error recursion driven by the same draws; evolves e(k) in place.
void error_step(NetworkState& e, const std::vector<Matrix>& obs, const WeightedDigraph& g,
                const DelayRealization& delays, const Vector& noise, double a_k, double b_k);

// blockdiag(H_i^T H_i), Nn x Nn
Matrix gram_blockdiag(const std::vector<Matrix>& obs, int param_dim);

// stacked H^T w without forming the block-diagonal matrix
Vector blockdiag_transpose_apply(const std::vector<Matrix>& obs, const Vector& w);

}  // namespace dce
