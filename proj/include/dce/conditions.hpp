#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dce/auxiliary.hpp"
#include "dce/estimator.hpp"
#include "dce/processes.hpp"

namespace dce {

struct UnreliableEstimateError : std::runtime_error {
  UnreliableEstimateError(double rate)
      : std::runtime_error("too many rejected window samples"), rejection_rate(rate) {}
  double rejection_rate;
};

// Window excitation level for a finite joint Markov chain, conditioned on the
// state occupied just before the window:
//   lambda_min[ sum_{k=mh}^{(m+1)h-1} ( (b(k)/a(k)) E[Lhat(k)|state] ⊗ I_n
//                                       + E[H'H(k)|state] ) ]
// with the conditional expectations written as exact finite sums over the
// k-step transition probabilities.
double window_excitation_markov(const JointMarkovProcess& chain, const GainSchedule& gains,
                        int h, long m, int conditioning_state, int param_dim);

// Moment certificate for the norm condition: the max over states of
// ||L_l|| + ||H_l' H_l|| dominates the conditional power mean at every order,
// hence certifies the moment condition for every window length.
double norm_moment_bound(const JointMarkovProcess& chain, int h);

struct StationaryStructureReport {
  bool stationary_nonneg;
  bool balanced;
  bool spanning_tree;
  double joint_obs_lambda;  // lambda_min of the stationary-averaged observation Gramian
  bool verdict;
};

// Structural checks on the stationary graph plus joint observability.
StationaryStructureReport check_stationary_structure(const JointMarkovProcess& chain, int param_dim);

// Scenario bundle consumed by the conditional Monte Carlo estimators.
struct McScenario {
  ProcessDriver driver;  // prototype positioned at the initial state
  DelayModel delays;
  GainSchedule gains;
  double kappa;     // contraction margin used by the auxiliary system
  int param_dim;
};

// Realized history up to the step before the window: the joint-state index
// there plus the trailing transition matrices the in-window inverse chains
// reach back into.
struct FrozenPrefix {
  long m = 0;
  int h = 0;
  int state_index = 0;
  std::vector<Matrix> f_tail;      // F(mh-d) .. F(mh-1)
  std::vector<Matrix> f_tail_inv;
};

FrozenPrefix freeze_prefix(const McScenario& sc, int h, long m, std::uint64_t seed);

struct McEstimate {
  double value;
  double std_error;  // jackknife
  int samples;       // accepted
  int rejected;
};

// Conditional Monte Carlo estimate of the delayed-case window excitation:
// per window offset the sample averages of Lhat ⊗ I, H'H and
// Abar(k,q)([Phi_F(k-1,k-q)]^{-1} - I) are assembled into the two-sided
// display, symmetrized, and the minimum eigenvalue is returned with a
// jackknife standard error. Samples whose in-window transition matrix is
// singular are rejected and counted; more than 1% rejections aborts.
McEstimate delayed_excitation_mc(const McScenario& sc, int h, long m, const FrozenPrefix& prefix,
                              int samples, std::uint64_t seed);

// Same sampling machinery for the delay-penalty term: accumulates the norms
// of the per-(k,q) averaged Abar(k,q)([Phi_F]^{-1} - I), weighted by b/a.
McEstimate delay_penalty_mc(const McScenario& sc, int h, long m, const FrozenPrefix& prefix,
                       int samples, std::uint64_t seed);

struct ConditionReport {
  int h = 1;
  long m_lo = 0, m_hi = 0;
  std::vector<double> values;
  std::vector<double> stderrs;  // empty for analytic scans
  double theta_hat = 0.0;       // min over the scanned m
  std::string method;           // "analytic_markov" or "monte_carlo"
  int samples = 0;
  double theta_user = 0.0;
  bool verdict = false;
  std::string note;

  nlohmann::json to_json() const;
};

// Finite-m scan standing in for the infimum over all windows. The verdict
// requires the minimum to clear theta_user, with a 3-standard-error guard
// band when the profile is Monte Carlo based.
ConditionReport infimum_scan(const std::function<double(long)>& value_at, int h, long m_max,
                             double theta_user = 0.0);
ConditionReport infimum_scan_mc(const std::function<McEstimate(long)>& estimate_at, int h,
                                long m_max, double theta_user = 0.0);

}  // namespace dce
