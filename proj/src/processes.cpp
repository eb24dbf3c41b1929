#include "dce/processes.hpp"

#include <cmath>
#include <limits>

namespace dce {

namespace {

void validate_row_stochastic(const Matrix& p) {
  if (p.rows() != p.cols() || p.rows() < 1)
    throw std::invalid_argument("transition matrix must be square and nonempty");
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) < 0.0) throw std::invalid_argument("transition matrix has a negative entry");
      row += p(i, j);
    }
    if (std::abs(row - 1.0) > 1e-12)
      throw std::invalid_argument("transition matrix rows must sum to 1");
  }
}

}  // namespace

Vector stationary_distribution(const Matrix& transition) {
  validate_row_stochastic(transition);
  const Eigen::Index s = transition.rows();
  Matrix shifted = transition.transpose() - Matrix::Identity(s, s);
  Eigen::JacobiSVD<Matrix> svd(shifted, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * std::max(1.0, sv(0));
  int null_dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= tol) ++null_dim;
  if (null_dim != 1)
    throw NonUniqueStationaryError("stationary distribution is not unique");
  Vector pi = svd.matrixV().col(s - 1);
  if (pi.sum() < 0.0) pi = -pi;
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  if ((pi.transpose() * transition - pi.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw NonUniqueStationaryError("stationary balance residual too large");
  return pi;
}

std::optional<ErgodicityFit> ergodicity_diagnostic(const Matrix& transition, int horizon) {
  if (horizon < 1) throw std::invalid_argument("ergodicity_diagnostic: horizon must be >= 1");
  Vector pi = stationary_distribution(transition);
  const Eigen::Index s = transition.rows();

  std::vector<double> dist(horizon);
  Matrix power = transition;
  for (int n = 0; n < horizon; ++n) {
    double worst = 0.0;
    for (Eigen::Index x = 0; x < s; ++x)
      worst = std::max(worst, (power.row(x).transpose() - pi).cwiseAbs().sum());
    dist[n] = worst;
    if (n + 1 < horizon) power = power * transition;
  }

  bool all_zero = true;
  for (double d : dist)
    if (d > 1e-15) all_zero = false;
  if (all_zero) return ErgodicityFit{0.0, std::numeric_limits<double>::infinity()};

  if (dist.back() >= 1e-6) return std::nullopt;

  // least-squares slope of log D_n against n
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int n = 0; n < horizon; ++n) {
    if (dist[n] <= 1e-300) continue;
    const double x = n + 1, y = std::log(dist[n]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++count;
  }
  if (count < 2) {
    // dropped below the floor almost immediately; any steep rate works
    double rate = 1e6;
    double scale = 0.0;
    for (int n = 0; n < horizon; ++n) scale = std::max(scale, dist[n] * std::pow(rate, n + 1));
    return ErgodicityFit{scale, rate};
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  const double rate = std::exp(-slope);
  if (!(rate > 1.0)) return std::nullopt;
  double scale = 0.0;
  for (int n = 0; n < horizon; ++n) {
    if (dist[n] <= 0.0) continue;
    scale = std::max(scale, dist[n] * std::pow(rate, n + 1));
  }
  return ErgodicityFit{scale, rate};
}

JointState::JointState(std::vector<Matrix> h, WeightedDigraph g)
    : observation(std::move(h)), graph(std::move(g)) {
  if (observation.empty())
    throw std::invalid_argument("JointState: needs one observation matrix per node");
  if (static_cast<int>(observation.size()) != graph.node_count())
    throw std::invalid_argument("JointState: observation count differs from node count");
  const Eigen::Index n = observation.front().cols();
  for (const Matrix& hi : observation) {
    if (hi.cols() != n) throw std::invalid_argument("JointState: inconsistent parameter dimension");
    if (hi.rows() < 1 || hi.rows() > n)
      throw std::invalid_argument("JointState: node observation dimension must be in [1, n]");
  }
  const int nodes = graph.node_count();
  gram_blockdiag_ = Matrix::Zero(nodes * n, nodes * n);
  for (int i = 0; i < nodes; ++i)
    gram_blockdiag_.block(i * n, i * n, n, n) =
        observation[i].transpose() * observation[i];
  laplacian_sym_ = symmetrized_laplacian(laplacian(graph));
  degree_ = degree_matrix(graph);
}

Matrix JointState::stacked_observation() const {
  Eigen::Index rows = 0;
  for (const Matrix& hi : observation) rows += hi.rows();
  Matrix out(rows, param_dim());
  Eigen::Index at = 0;
  for (const Matrix& hi : observation) {
    out.middleRows(at, hi.rows()) = hi;
    at += hi.rows();
  }
  return out;
}

JointMarkovProcess::JointMarkovProcess(std::vector<JointState> states, Matrix transition)
    : states_(std::move(states)), transition_(std::move(transition)) {
  if (states_.empty()) throw std::invalid_argument("JointMarkovProcess: empty state space");
  validate_row_stochastic(transition_);
  if (transition_.rows() != static_cast<Eigen::Index>(states_.size()))
    throw std::invalid_argument("JointMarkovProcess: transition size differs from state count");
  const int nodes = states_.front().node_count();
  const int n = states_.front().param_dim();
  for (const JointState& s : states_) {
    if (s.node_count() != nodes || s.param_dim() != n)
      throw std::invalid_argument("JointMarkovProcess: states disagree on dimensions");
    for (int i = 0; i < nodes; ++i)
      if (s.observation[i].rows() != states_.front().observation[i].rows())
        throw std::invalid_argument("JointMarkovProcess: states disagree on block shapes");
  }
}

ProcessDriver::ProcessDriver(Kind k, std::shared_ptr<const JointMarkovProcess> space)
    : kind_(k), space_(std::move(space)) {
  if (!space_) throw std::invalid_argument("ProcessDriver: null state space");
}

ProcessDriver ProcessDriver::markov(std::shared_ptr<const JointMarkovProcess> chain,
                                    int initial_state, RngStream rng) {
  ProcessDriver d(Kind::markov, std::move(chain));
  d.set_current_index(initial_state);
  d.rng_ = rng;
  return d;
}

ProcessDriver ProcessDriver::iid(std::shared_ptr<const JointMarkovProcess> states,
                                 std::vector<double> weights, RngStream rng) {
  ProcessDriver d(Kind::iid, std::move(states));
  if (static_cast<int>(weights.size()) != d.space_->state_count())
    throw std::invalid_argument("ProcessDriver: weight count differs from state count");
  d.weights_ = std::move(weights);
  d.rng_ = rng;
  d.current_ = d.rng_.discrete(d.weights_);  // position at step -1
  return d;
}

ProcessDriver ProcessDriver::deterministic(std::shared_ptr<const JointMarkovProcess> states,
                                           std::vector<int> schedule) {
  ProcessDriver d(Kind::deterministic, std::move(states));
  if (schedule.empty()) throw std::invalid_argument("ProcessDriver: empty schedule");
  for (int idx : schedule)
    if (idx < 0 || idx >= d.space_->state_count())
      throw std::invalid_argument("ProcessDriver: schedule index out of range");
  d.schedule_ = std::move(schedule);
  d.current_ = d.schedule_.front();
  return d;
}

void ProcessDriver::set_current_index(int idx) {
  if (idx < 0 || idx >= space_->state_count())
    throw std::invalid_argument("ProcessDriver: state index out of range");
  current_ = idx;
}

int ProcessDriver::next_state(long k) {
  switch (kind_) {
    case Kind::markov: {
      const Matrix& p = space_->transition();
      std::vector<double> row(p.cols());
      for (Eigen::Index j = 0; j < p.cols(); ++j) row[j] = p(current_, j);
      current_ = rng_.discrete(row);
      break;
    }
    case Kind::iid:
      current_ = rng_.discrete(weights_);
      break;
    case Kind::deterministic:
      current_ = schedule_[static_cast<std::size_t>(k % static_cast<long>(schedule_.size()))];
      break;
  }
  return current_;
}

ProcessDriver ProcessDriver::fork(RngStream rng) const {
  ProcessDriver d = *this;
  d.rng_ = rng;
  return d;
}

NoiseModel::NoiseModel(Kind k, std::vector<int> dims, std::vector<double> scale)
    : kind_(k), node_dims_(std::move(dims)), scale_(std::move(scale)) {
  if (node_dims_.empty()) throw std::invalid_argument("NoiseModel: no nodes");
  if (scale_.size() != node_dims_.size())
    throw std::invalid_argument("NoiseModel: one scale per node required");
  for (std::size_t i = 0; i < node_dims_.size(); ++i) {
    if (node_dims_[i] < 1) throw std::invalid_argument("NoiseModel: node dimension must be positive");
    if (scale_[i] < 0.0) throw std::invalid_argument("NoiseModel: negative scale");
    total_dim_ += node_dims_[i];
    const double second_moment =
        kind_ == Kind::gaussian ? scale_[i] * scale_[i]
        : kind_ == Kind::uniform ? scale_[i] * scale_[i] / 3.0
                                 : 0.0;
    beta_v_ += node_dims_[i] * second_moment;
  }
}

NoiseModel NoiseModel::zero(std::vector<int> node_dims) {
  std::vector<double> s(node_dims.size(), 0.0);
  return NoiseModel(Kind::zero, std::move(node_dims), std::move(s));
}

NoiseModel NoiseModel::gaussian(std::vector<int> node_dims, std::vector<double> sigma) {
  return NoiseModel(Kind::gaussian, std::move(node_dims), std::move(sigma));
}

NoiseModel NoiseModel::uniform(std::vector<int> node_dims, std::vector<double> half_width) {
  return NoiseModel(Kind::uniform, std::move(node_dims), std::move(half_width));
}

Vector NoiseModel::sample(RngStream& rng) const {
  Vector v = Vector::Zero(total_dim_);
  if (kind_ == Kind::zero) return v;
  Eigen::Index at = 0;
  for (std::size_t i = 0; i < node_dims_.size(); ++i) {
    for (int c = 0; c < node_dims_[i]; ++c, ++at) {
      v(at) = kind_ == Kind::gaussian ? scale_[i] * rng.gaussian()
                                      : rng.uniform(-scale_[i], scale_[i]);
    }
  }
  return v;
}

DelayRealization sample_delays(const DelayModel& model, long k, RngStream& rng) {
  const int n = model.node_count();
  const int d = model.max_delay();
  if (model.coupled_sampler()) {
    IntMatrix lam = model.coupled_sampler()(k, rng);
    return DelayRealization(std::move(lam), d);
  }
  IntMatrix lam = IntMatrix::Zero(n, n);
  if (d > 0) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        lam(i, j) = rng.discrete(model.pmf_at(k, i, j));
      }
  }
  return DelayRealization(std::move(lam), d);
}

}  // namespace dce
