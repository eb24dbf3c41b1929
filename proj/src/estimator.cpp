#include "dce/estimator.hpp"

#include <cmath>

namespace dce {

GainSchedule GainSchedule::power_law(double tau1, double tau2) {
  if (!(0.5 < tau2 && tau2 <= tau1 && tau1 <= 1.0))
    throw std::invalid_argument("GainSchedule: power law requires 0.5 < tau2 <= tau1 <= 1");
  GainSchedule s;
  s.power_law_ = true;
  s.tau1_ = tau1;
  s.tau2_ = tau2;
  s.a_ = [tau1](long k) { return std::pow(double(k + 1), -tau1); };
  s.b_ = [tau2](long k) { return std::pow(double(k + 1), -tau2); };
  return s;
}

GainSchedule GainSchedule::custom(std::function<double(long)> a, std::function<double(long)> b) {
  if (!a || !b) throw std::invalid_argument("GainSchedule: null sequence");
  GainSchedule s;
  s.a_ = std::move(a);
  s.b_ = std::move(b);
  return s;
}

GainSchedule GainSchedule::scaled_power_law(double c_a, double c_b, double tau1, double tau2) {
  if (c_a <= 0.0 || c_b <= 0.0)
    throw std::invalid_argument("GainSchedule: scales must be positive");
  if (tau1 <= 0.0 || tau2 <= 0.0)
    throw std::invalid_argument("GainSchedule: exponents must be positive");
  return custom([c_a, tau1](long k) { return c_a * std::pow(double(k + 1), -tau1); },
                [c_b, tau2](long k) { return c_b * std::pow(double(k + 1), -tau2); });
}

GainSchedule GainSchedule::capped_power_law(double a_max, double b_max, double c_a, double c_b,
                                            double tau1, double tau2) {
  if (a_max <= 0.0 || b_max <= 0.0)
    throw std::invalid_argument("GainSchedule: caps must be positive");
  if (c_a <= 0.0 || c_b <= 0.0)
    throw std::invalid_argument("GainSchedule: scales must be positive");
  if (tau1 <= 0.0 || tau2 <= 0.0)
    throw std::invalid_argument("GainSchedule: exponents must be positive");
  return custom(
      [a_max, c_a, tau1](long k) {
        return std::min(a_max, c_a * std::pow(double(k + 1), -tau1));
      },
      [b_max, c_b, tau2](long k) {
        return std::min(b_max, c_b * std::pow(double(k + 1), -tau2));
      });
}

double GainSchedule::tau1() const {
  if (!power_law_) throw std::logic_error("GainSchedule: tau1 defined for power law only");
  return tau1_;
}

double GainSchedule::tau2() const {
  if (!power_law_) throw std::logic_error("GainSchedule: tau2 defined for power law only");
  return tau2_;
}

double GainSchedule::ratio_bound(long horizon) const {
  if (horizon < 1) throw std::invalid_argument("GainSchedule: horizon must be positive");
  double worst = 0.0;
  for (long k = 0; k < horizon; ++k) worst = std::max(worst, a_(k) / b_(k));
  return worst;
}

AssumptionConstants::AssumptionConstants(double beta_a_, double beta_H_, double beta_v_,
                                         double C_a_, double kappa_, int d_)
    : beta_a(beta_a_), beta_H(beta_H_), beta_v(beta_v_), C_a(C_a_), kappa(kappa_), d(d_) {
  if (beta_a <= 0.0) throw std::invalid_argument("AssumptionConstants: beta_a must be positive");
  if (beta_H < 0.0) throw std::invalid_argument("AssumptionConstants: beta_H must be nonnegative");
  if (beta_v < 0.0) throw std::invalid_argument("AssumptionConstants: beta_v must be nonnegative");
  if (C_a <= 0.0) throw std::invalid_argument("AssumptionConstants: C_a must be positive");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("AssumptionConstants: kappa must lie in (0,1)");
  if (d < 0) throw std::invalid_argument("AssumptionConstants: negative delay bound");
}

namespace {

// min of the two admissibility expressions at a given kappa; the second is
// written with the geometric sum so that it stays stable near both endpoints
double ceiling_objective(double kappa, int n_nodes, double beta_a, double beta_H, double C_a, int d) {
  const double nn = double(n_nodes);
  const double first = kappa / (2.0 * (nn * beta_a + nn * std::sqrt(nn) * beta_a + C_a * beta_H * beta_H));
  double geo = 0.0;
  double term = 1.0;
  const double growth = 1.0 / (1.0 - kappa);
  for (int j = 0; j <= d; ++j) {
    geo += term;
    term *= growth;
    if (!std::isfinite(term)) {
      geo = std::numeric_limits<double>::infinity();
      break;
    }
  }
  const double second = kappa / (2.0 * nn * std::sqrt(nn) * beta_a * geo);
  return std::min(first, second);
}

}  // namespace

GainCeiling gain_ceiling(int n_nodes, double beta_a, double beta_H, double C_a, int d) {
  if (n_nodes < 1) throw std::invalid_argument("gain_ceiling: need at least one node");
  if (beta_a <= 0.0) throw std::invalid_argument("gain_ceiling: beta_a must be positive");
  if (beta_H < 0.0) throw std::invalid_argument("gain_ceiling: beta_H must be nonnegative");
  if (C_a < 1.0) throw std::invalid_argument("gain_ceiling: C_a must be at least 1");
  if (d < 0) throw std::invalid_argument("gain_ceiling: negative delay bound");

  double best_k = 0.0, best_v = -1.0;
  const auto f = [&](double kappa) {
    const double v = ceiling_objective(kappa, n_nodes, beta_a, beta_H, C_a, d);
    if (v > best_v) {
      best_v = v;
      best_k = kappa;
    }
    return v;
  };

  // bracketing grid over (0,1), then golden-section refinement to 1e-10 in
  // kappa; the best evaluated point is kept since the second expression can
  // be steep where the two branches cross
  const int grid = 2048;
  const double lo_edge = 1e-12, hi_edge = 1.0 - 1e-12;
  for (int i = 0; i <= grid; ++i) f(lo_edge + (hi_edge - lo_edge) * double(i) / grid);
  const double cell = (hi_edge - lo_edge) / grid;
  double lo = std::max(lo_edge, best_k - cell);
  double hi = std::min(hi_edge, best_k + cell);
  const double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  f(0.5 * (lo + hi));
  return GainCeiling{best_v, best_k};
}

GainCeiling gain_ceiling(int n_nodes, const AssumptionConstants& c) {
  return gain_ceiling(n_nodes, c.beta_a, c.beta_H, c.C_a, c.d);
}

GainAssumptionReport check_gain_assumptions(const GainSchedule& s, const AssumptionConstants& c,
                                            int n_nodes, long horizon) {
  if (horizon < 2) throw std::invalid_argument("check_gain_assumptions: horizon must be >= 2");

  GainAssumptionReport rep{};
  std::vector<double> a(horizon), b(horizon);
  for (long k = 0; k < horizon; ++k) {
    a[k] = s.a(k);
    b[k] = s.b(k);
  }

  rep.positive = true;
  rep.monotone = true;
  for (long k = 0; k < horizon; ++k) {
    if (!(a[k] > 0.0) || !(b[k] > 0.0)) rep.positive = false;
    if (k + 1 < horizon) {
      if (a[k + 1] > a[k] * (1.0 + 1e-14)) rep.monotone = false;
      if (b[k + 1] > b[k] * (1.0 + 1e-14)) rep.monotone = false;
    }
  }
  rep.decays_to_zero = a[horizon - 1] <= 0.5 * a[0] && b[horizon - 1] <= 0.5 * b[0];
  const double ratio0 = b[0] * b[0] / a[0];
  const double ratio_end = b[horizon - 1] * b[horizon - 1] / a[horizon - 1];
  rep.b2_over_a_decreasing = ratio_end <= 0.5 * ratio0;

  rep.partial_sum_a = 0.0;
  rep.partial_sum_a_half = 0.0;
  double sum_b2 = 0.0, tail_b2 = 0.0;
  for (long k = 0; k < horizon; ++k) {
    rep.partial_sum_a += a[k];
    if (k < horizon / 2) rep.partial_sum_a_half += a[k];
    sum_b2 += b[k] * b[k];
    if (k >= horizon / 2) tail_b2 += b[k] * b[k];
  }

  if (s.is_power_law()) {
    // the constructor already pins 0.5 < tau2 <= tau1 <= 1
    rep.decrease_ok = true;
    rep.square_summable_ok = s.tau2() > 0.5;
    rep.decrease_analytic = true;
    rep.square_summable_analytic = true;
  } else {
    rep.decrease_ok = rep.positive && rep.monotone && rep.decays_to_zero && rep.b2_over_a_decreasing;
    rep.square_summable_ok = rep.positive && sum_b2 > 0.0 && tail_b2 <= 0.05 * sum_b2;
    rep.decrease_analytic = false;
    rep.square_summable_analytic = false;
  }

  rep.sup_b = *std::max_element(b.begin(), b.end());
  const GainCeiling bd = gain_ceiling(n_nodes, c);
  rep.ceiling = bd.bound;
  rep.kappa_star = bd.kappa_star;
  rep.below_ceiling = rep.sup_b <= bd.bound * (1.0 - 1e-9);
  return rep;
}

MeasurementModel::MeasurementModel(Vector x0, std::vector<int> node_dims)
    : x0_(std::move(x0)), node_dims_(std::move(node_dims)) {
  if (x0_.size() < 1) throw std::invalid_argument("MeasurementModel: empty parameter");
  if (node_dims_.empty()) throw std::invalid_argument("MeasurementModel: no nodes");
  for (int ni : node_dims_) {
    if (ni < 1 || ni > x0_.size())
      throw std::invalid_argument("MeasurementModel: node dimension must be in [1, n]");
    total_ += ni;
  }
}

Vector measure(const MeasurementModel& m, const Matrix& stacked_obs, const Vector& noise) {
  if (stacked_obs.rows() != m.total_obs_dim() || stacked_obs.cols() != m.param_dim())
    throw std::invalid_argument("measure: observation matrix shape mismatch");
  if (noise.size() != m.total_obs_dim())
    throw std::invalid_argument("measure: noise dimension mismatch");
  return stacked_obs * m.x0() + noise;
}

NetworkState::NetworkState(int n_nodes, int param_dim, int max_delay, Vector x_init)
    : n_nodes_(n_nodes), param_dim_(param_dim), max_delay_(max_delay) {
  if (n_nodes_ < 1 || param_dim_ < 1)
    throw std::invalid_argument("NetworkState: dimensions must be positive");
  if (max_delay_ < 0) throw std::invalid_argument("NetworkState: negative delay bound");
  if (x_init.size() != static_cast<Eigen::Index>(n_nodes_) * param_dim_)
    throw std::invalid_argument("NetworkState: initial vector must have size N*n");
  ring_.assign(max_delay_ + 1, x_init);
}

const Vector& NetworkState::delayed(int q) const {
  if (q < 0 || q > max_delay_)
    throw HistoryUnderflowError("NetworkState: delayed read outside history depth");
  return slot(q);
}

Vector NetworkState::node(int i) const { return current().segment(i * param_dim_, param_dim_); }

Vector NetworkState::delayed_node(int i, int q) const {
  return delayed(q).segment(i * param_dim_, param_dim_);
}

void NetworkState::push(Vector x_next) {
  if (x_next.size() != static_cast<Eigen::Index>(n_nodes_) * param_dim_)
    throw std::invalid_argument("NetworkState: pushed vector has wrong size");
  head_ = (head_ + ring_.size() - 1) % ring_.size();
  ring_[head_] = std::move(x_next);
  ++k_;
}

Vector node_update(const NetworkState& s, int i, const Matrix& h_i, const Vector& z_i,
                   const WeightedDigraph& g, const DelayRealization& delays,
                   double a_k, double b_k) {
  if (g.node_count() != s.node_count() || delays.node_count() != s.node_count())
    throw std::invalid_argument("node_update: node count mismatch");
  if (h_i.cols() != s.param_dim() || z_i.size() != h_i.rows())
    throw std::invalid_argument("node_update: observation shape mismatch");

  const Vector xi = s.node(i);
  Vector next = xi + a_k * (h_i.transpose() * (z_i - h_i * xi));
  for (int j = 0; j < s.node_count(); ++j) {
    const double w = g.weight(i, j);
    if (w == 0.0) continue;
    next += b_k * w * (s.delayed_node(j, delays.delay(i, j)) - xi);
  }
  return next;
}

Matrix gram_blockdiag(const std::vector<Matrix>& obs, int param_dim) {
  const int nodes = static_cast<int>(obs.size());
  Matrix out = Matrix::Zero(nodes * param_dim, nodes * param_dim);
  for (int i = 0; i < nodes; ++i)
    out.block(i * param_dim, i * param_dim, param_dim, param_dim) =
        obs[i].transpose() * obs[i];
  return out;
}

Vector blockdiag_transpose_apply(const std::vector<Matrix>& obs, const Vector& w) {
  Eigen::Index total = 0;
  for (const Matrix& h : obs) total += h.rows();
  if (w.size() != total)
    throw std::invalid_argument("blockdiag_transpose_apply: vector length mismatch");
  const Eigen::Index n = obs.front().cols();
  Vector out(static_cast<Eigen::Index>(obs.size()) * n);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out.segment(i * n, n) = obs[i].transpose() * w.segment(row, obs[i].rows());
    row += obs[i].rows();
  }
  return out;
}

void network_step(NetworkState& s, const std::vector<Matrix>& obs, const WeightedDigraph& g,
                  const DelayRealization& delays, const Vector& z, double a_k, double b_k,
                  double* cross_check) {
  const int nodes = s.node_count();
  const int n = s.param_dim();
  if (static_cast<int>(obs.size()) != nodes)
    throw std::invalid_argument("network_step: one observation matrix per node required");

  Vector next(nodes * n);
  Eigen::Index zrow = 0;
  for (int i = 0; i < nodes; ++i) {
    const Vector z_i = z.segment(zrow, obs[i].rows());
    zrow += obs[i].rows();
    next.segment(i * n, n) = node_update(s, i, obs[i], z_i, g, delays, a_k, b_k);
  }

  if (cross_check) {
    const Eigen::Index dim = static_cast<Eigen::Index>(nodes) * n;
    Matrix transition = Matrix::Identity(dim, dim) -
                        b_k * kron_identity(degree_matrix(g), n) -
                        a_k * gram_blockdiag(obs, n);
    Vector compact = transition * s.current();
    const auto masks = delay_matrices(delays);
    for (int q = 0; q < static_cast<int>(masks.size()); ++q)
      compact += b_k * (masked_adjacency(g, masks[q], n) * s.delayed(q));
    compact += a_k * blockdiag_transpose_apply(obs, z);
    *cross_check = (next - compact).cwiseAbs().maxCoeff();
  }

  s.push(std::move(next));
}

void error_step(NetworkState& e, const std::vector<Matrix>& obs, const WeightedDigraph& g,
                const DelayRealization& delays, const Vector& noise, double a_k, double b_k) {
  const int nodes = e.node_count();
  const int n = e.param_dim();
  if (static_cast<int>(obs.size()) != nodes)
    throw std::invalid_argument("error_step: one observation matrix per node required");
  const Eigen::Index dim = static_cast<Eigen::Index>(nodes) * n;

  Matrix transition = Matrix::Identity(dim, dim) -
                      b_k * kron_identity(degree_matrix(g), n) -
                      a_k * gram_blockdiag(obs, n);
  Vector next = transition * e.current();
  const auto masks = delay_matrices(delays);
  for (int q = 0; q < static_cast<int>(masks.size()); ++q)
    next += b_k * (masked_adjacency(g, masks[q], n) * e.delayed(q));
  next += a_k * blockdiag_transpose_apply(obs, noise);
  e.push(std::move(next));
}

}  // namespace dce
