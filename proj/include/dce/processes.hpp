#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dce/graph.hpp"
#include "dce/linalg.hpp"
#include "dce/rng.hpp"

namespace dce {

struct NonUniqueStationaryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// π with πP = π, computed as the normalized left null vector of P - I.
// Throws NonUniqueStationaryError when the eigenvalue-1 left eigenspace has
// dimension greater than one.
Vector stationary_distribution(const Matrix& transition);

// Geometric total-variation envelope: D_n <= R r^{-n} for n = 1..horizon,
// where D_n = max_x sum_y |P^n(x,y) - pi_y|. Empty when D_n fails to decay
// below 1e-6 by the horizon.
struct ErgodicityFit {
  double envelope_scale;  // R
  double decay_rate;      // r > 1
};
std::optional<ErgodicityFit> ergodicity_diagnostic(const Matrix& transition, int horizon);

// One state of the joint <observation matrices, adjacency> process, with
// the derived per-state matrices cached for the condition checkers.
struct JointState {
  std::vector<Matrix> observation;  // per-node H_i, n_i x n
  WeightedDigraph graph;

  JointState(std::vector<Matrix> h, WeightedDigraph g);

  int node_count() const { return graph.node_count(); }
  int param_dim() const { return static_cast<int>(observation.front().cols()); }

  Matrix stacked_observation() const;  // rows H_1..H_N stacked, (sum n_i) x n
  const Matrix& gram_blockdiag() const { return gram_blockdiag_; }    // H^T H, Nn x Nn
  const Matrix& laplacian_sym() const { return laplacian_sym_; }      // (L + L^T)/2, N x N
  const Matrix& degree() const { return degree_; }

 private:
  Matrix gram_blockdiag_;
  Matrix laplacian_sym_;
  Matrix degree_;
};

// Finite truncation of the joint Markov chain of observation matrices and
// communication graphs, with a row-stochastic transition matrix.
class JointMarkovProcess {
 public:
  JointMarkovProcess(std::vector<JointState> states, Matrix transition);

  int state_count() const { return static_cast<int>(states_.size()); }
  int node_count() const { return states_.front().node_count(); }
  int param_dim() const { return states_.front().param_dim(); }
  const JointState& state(int l) const { return states_.at(l); }
  const std::vector<JointState>& states() const { return states_; }
  const Matrix& transition() const { return transition_; }

  // computed on demand; throws NonUniqueStationaryError for reducible chains
  Vector stationary() const { return stationary_distribution(transition_); }

 private:
  std::vector<JointState> states_;
  Matrix transition_;
};

// Unified per-replicate source of the joint-state sequence. A driver owns
// its random stream and is stepped by exactly one worker.
class ProcessDriver {
 public:
  static ProcessDriver markov(std::shared_ptr<const JointMarkovProcess> chain,
                              int initial_state, RngStream rng);
  static ProcessDriver iid(std::shared_ptr<const JointMarkovProcess> states,
                           std::vector<double> weights, RngStream rng);
  static ProcessDriver deterministic(std::shared_ptr<const JointMarkovProcess> states,
                                     std::vector<int> schedule);

  // advances to step k and returns the state index there
  int next_state(long k);

  int current_index() const { return current_; }
  void set_current_index(int idx);
  const JointMarkovProcess& space() const { return *space_; }
  std::shared_ptr<const JointMarkovProcess> space_ptr() const { return space_; }
  bool is_markov() const { return kind_ == Kind::markov; }
  bool is_deterministic() const { return kind_ == Kind::deterministic; }

  // same process description, fresh stream, same current position
  ProcessDriver fork(RngStream rng) const;

 private:
  enum class Kind { markov, iid, deterministic };
  ProcessDriver(Kind k, std::shared_ptr<const JointMarkovProcess> space);

  Kind kind_;
  std::shared_ptr<const JointMarkovProcess> space_;
  std::vector<double> weights_;
  std::vector<int> schedule_;
  int current_ = 0;
  RngStream rng_;
};

// Zero-mean measurement noise with a known second-moment bound; a strict
// subclass of the admissible martingale-difference noises.
class NoiseModel {
 public:
  enum class Kind { zero, gaussian, uniform };

  static NoiseModel zero(std::vector<int> node_dims);
  static NoiseModel gaussian(std::vector<int> node_dims, std::vector<double> sigma);
  static NoiseModel uniform(std::vector<int> node_dims, std::vector<double> half_width);

  Vector sample(RngStream& rng) const;
  double beta_v() const { return beta_v_; }  // E||v||^2 over the stacked vector
  int total_dim() const { return total_dim_; }
  Kind kind() const { return kind_; }
  const std::vector<double>& scale() const { return scale_; }

 private:
  NoiseModel(Kind k, std::vector<int> dims, std::vector<double> scale);

  Kind kind_;
  std::vector<int> node_dims_;
  std::vector<double> scale_;  // sigma or half-width per node
  int total_dim_ = 0;
  double beta_v_ = 0.0;
};

// Independent per-link draw from the delay model (or its coupled sampler);
// self-delays are zero on every draw.
DelayRealization sample_delays(const DelayModel& model, long k, RngStream& rng);

}  // namespace dce
