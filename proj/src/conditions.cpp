#include "dce/conditions.hpp"

#include <cmath>
#include <optional>

namespace dce {

double window_excitation_markov(const JointMarkovProcess& chain, const GainSchedule& gains,
                        int h, long m, int conditioning_state, int param_dim) {
  if (h < 1) throw std::invalid_argument("window_excitation_markov: window length must be positive");
  if (m < 0) throw std::invalid_argument("window_excitation_markov: negative window index");
  if (conditioning_state < 0 || conditioning_state >= chain.state_count())
    throw std::invalid_argument("window_excitation_markov: conditioning state out of range");
  if (param_dim != chain.param_dim())
    throw std::invalid_argument("window_excitation_markov: parameter dimension mismatch");

  const int nodes = chain.node_count();
  const int dim = nodes * param_dim;
  const Matrix& p = chain.transition();

  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(chain.state_count());
  row(conditioning_state) = 1.0;

  Matrix acc = Matrix::Zero(dim, dim);
  for (int off = 0; off < h; ++off) {
    row = row * p;  // state distribution at mh + off given the state at mh-1
    const long k = m * static_cast<long>(h) + off;
    const double ratio = gains.ratio(k);
    Matrix lbar = Matrix::Zero(nodes, nodes);
    Matrix gbar = Matrix::Zero(dim, dim);
    for (int l = 0; l < chain.state_count(); ++l) {
      if (row(l) == 0.0) continue;
      lbar += row(l) * chain.state(l).laplacian_sym();
      gbar += row(l) * chain.state(l).gram_blockdiag();
    }
    acc += ratio * kron_identity(lbar, param_dim) + gbar;
  }

  const double skew = max_abs(acc - acc.transpose());
  if (skew >= 1e-8)
    throw std::logic_error("window_excitation_markov: accumulated window matrix is not symmetric");
  return min_eigenvalue_sym(symmetric_part(acc));
}

double norm_moment_bound(const JointMarkovProcess& chain, int h) {
  if (h < 1) throw std::invalid_argument("norm_moment_bound: window length must be positive");
  double bound = 0.0;
  for (const JointState& st : chain.states()) {
    const double val = spectral_norm(laplacian(st.graph)) + spectral_norm(st.gram_blockdiag());
    bound = std::max(bound, val);
  }
  return bound;
}

StationaryStructureReport check_stationary_structure(const JointMarkovProcess& chain, int param_dim) {
  if (param_dim != chain.param_dim())
    throw std::invalid_argument("check_stationary_structure: parameter dimension mismatch");
  const Vector pi = chain.stationary();
  const int nodes = chain.node_count();

  Matrix mean_adj = Matrix::Zero(nodes, nodes);
  Matrix mean_gram = Matrix::Zero(param_dim, param_dim);
  for (int l = 0; l < chain.state_count(); ++l) {
    mean_adj += pi(l) * chain.state(l).graph.adjacency();
    for (const Matrix& hi : chain.state(l).observation)
      mean_gram += pi(l) * (hi.transpose() * hi);
  }

  StationaryStructureReport rep{};
  rep.stationary_nonneg = (mean_adj.array() >= -1e-12).all();
  WeightedDigraph stationary_graph(mean_adj.cwiseMax(0.0));
  rep.balanced = rep.stationary_nonneg && is_balanced(stationary_graph, 1e-10);
  rep.spanning_tree = rep.stationary_nonneg && has_spanning_tree(stationary_graph);
  rep.joint_obs_lambda = min_eigenvalue_sym(symmetric_part(mean_gram));
  rep.verdict = rep.stationary_nonneg && rep.balanced && rep.spanning_tree &&
                rep.joint_obs_lambda > 1e-10;
  return rep;
}

namespace {

struct WindowDraw {
  Matrix w;                  // per-sample window matrix for the excitation level
  std::vector<Matrix> m_kq;  // h*(d+1) entries: Abar(k,q)([Phi_F]^{-1} - I)
};

// One conditional window continuation. Empty when an in-window transition
// matrix is singular.
std::optional<WindowDraw> draw_window(const McScenario& sc, const FrozenPrefix& prefix,
                                      int h, long m, std::uint64_t seed, int sample_idx) {
  const JointMarkovProcess& space = sc.driver.space();
  const int nodes = space.node_count();
  const int n = sc.param_dim;
  const int dim = nodes * n;
  const int d = sc.delays.max_delay();
  const long window_start = m * static_cast<long>(h);

  ProcessDriver drv =
      sc.driver.fork(RngStream::split(seed, sample_idx + 1, StreamPurpose::graph));
  drv.set_current_index(prefix.state_index);
  RngStream delay_rng = RngStream::split(seed, sample_idx + 1, StreamPurpose::delay);

  std::vector<Matrix> local_f_inv;
  const auto f_inv_at = [&](long t) -> const Matrix& {
    if (t < window_start)
      return prefix.f_tail_inv[static_cast<std::size_t>(t - (window_start - d))];
    return local_f_inv[static_cast<std::size_t>(t - window_start)];
  };

  WindowDraw draw;
  draw.w = Matrix::Zero(dim, dim);
  draw.m_kq.reserve(static_cast<std::size_t>(h) * (d + 1));

  for (int off = 0; off < h; ++off) {
    const long k = window_start + off;
    const JointState& st = space.state(drv.next_state(k));
    const DelayRealization delays = sample_delays(sc.delays, k, delay_rng);
    const auto masks = delay_matrices(delays);
    const double ratio = sc.gains.ratio(k);
    const double a_k = sc.gains.a(k), b_k = sc.gains.b(k);

    Matrix wk = 2.0 * ratio * kron_identity(st.laplacian_sym(), n) + 2.0 * st.gram_blockdiag();

    Matrix abar_phi_sum = Matrix::Zero(dim, dim);
    Matrix phi_inv = Matrix::Identity(dim, dim);
    for (int q = 0; q <= d; ++q) {
      if (q > 0) phi_inv = f_inv_at(k - q) * phi_inv;
      const Matrix abar = masked_adjacency(st.graph, masks[q], n);
      Matrix mkq = abar * (phi_inv - Matrix::Identity(dim, dim));
      abar_phi_sum += abar * phi_inv;
      wk -= ratio * (mkq + mkq.transpose());
      draw.m_kq.push_back(std::move(mkq));
    }
    draw.w += wk;

    // extend the transition chain for the later offsets
    if (d > 0 && off + 1 < h) {
      Matrix gk = b_k * kron_identity(st.degree(), n) + a_k * st.gram_blockdiag() -
                  b_k * abar_phi_sum;
      Matrix fk = Matrix::Identity(dim, dim) - gk;
      Eigen::FullPivLU<Matrix> lu(fk);
      if (!lu.isInvertible()) return std::nullopt;
      local_f_inv.push_back(lu.inverse());
    } else if (d > 0) {
      local_f_inv.push_back(Matrix::Identity(dim, dim));  // placeholder, never read
    }
  }
  return draw;
}

struct SampledWindows {
  std::vector<WindowDraw> draws;
  int rejected = 0;
};

SampledWindows collect_windows(const McScenario& sc, const FrozenPrefix& prefix, int h, long m,
                               int samples, std::uint64_t seed) {
  if (samples < 100)
    throw std::invalid_argument("conditional Monte Carlo needs at least 100 samples");
  if (prefix.h != h || prefix.m != m)
    throw std::invalid_argument("frozen prefix was built for a different window");
  SampledWindows out;
  out.draws.reserve(samples);
  for (int s = 0; s < samples; ++s) {
    auto draw = draw_window(sc, prefix, h, m, seed, s);
    if (draw)
      out.draws.push_back(std::move(*draw));
    else
      ++out.rejected;
  }
  if (out.rejected > samples / 100) {
    throw UnreliableEstimateError(double(out.rejected) / samples);
  }
  return out;
}

double jackknife_stderr(const std::vector<double>& leave_one_out) {
  const std::size_t s = leave_one_out.size();
  if (s < 2) return 0.0;
  double mean = 0.0;
  for (double v : leave_one_out) mean += v;
  mean /= double(s);
  double ss = 0.0;
  for (double v : leave_one_out) ss += (v - mean) * (v - mean);
  return std::sqrt((double(s) - 1.0) / double(s) * ss);
}

}  // namespace

FrozenPrefix freeze_prefix(const McScenario& sc, int h, long m, std::uint64_t seed) {
  if (h < 1) throw std::invalid_argument("freeze_prefix: window length must be positive");
  if (m < 0) throw std::invalid_argument("freeze_prefix: negative window index");
  const JointMarkovProcess& space = sc.driver.space();
  const int d = sc.delays.max_delay();

  ProcessDriver drv = sc.driver.fork(RngStream::split(seed, 0, StreamPurpose::graph));
  RngStream delay_rng = RngStream::split(seed, 0, StreamPurpose::delay);
  AuxiliarySystem aux(space.node_count(), sc.param_dim, d, sc.kappa);

  const long steps = m * static_cast<long>(h);
  for (long k = 0; k < steps; ++k) {
    const JointState& st = space.state(drv.next_state(k));
    const DelayRealization delays = sample_delays(sc.delays, k, delay_rng);
    aux.advance(st.graph, delays, st.observation, sc.gains.a(k), sc.gains.b(k));
  }

  FrozenPrefix prefix;
  prefix.m = m;
  prefix.h = h;
  prefix.state_index = drv.current_index();
  for (int q = d; q >= 1; --q) {
    const long t = steps - q;
    if (t < 0 || steps == 0) {
      const int dim = space.node_count() * sc.param_dim;
      prefix.f_tail.push_back(Matrix::Identity(dim, dim));
      prefix.f_tail_inv.push_back(Matrix::Identity(dim, dim));
    } else {
      prefix.f_tail.push_back(aux.transition(t));
      prefix.f_tail_inv.push_back(aux.transition_inverse(t));
    }
  }
  return prefix;
}

McEstimate delayed_excitation_mc(const McScenario& sc, int h, long m, const FrozenPrefix& prefix,
                              int samples, std::uint64_t seed) {
  SampledWindows sw = collect_windows(sc, prefix, h, m, samples, seed);
  const int s = static_cast<int>(sw.draws.size());
  const int dim = sw.draws.front().w.rows();

  Matrix total = Matrix::Zero(dim, dim);
  for (const auto& dr : sw.draws) total += dr.w;

  const auto lam = [](const Matrix& mat) { return min_eigenvalue_sym(symmetric_part(mat)); };
  McEstimate est{};
  est.value = lam(total / double(s));
  est.samples = s;
  est.rejected = sw.rejected;

  std::vector<double> loo(s);
  for (int i = 0; i < s; ++i) loo[i] = lam((total - sw.draws[i].w) / double(s - 1));
  est.std_error = jackknife_stderr(loo);
  return est;
}

McEstimate delay_penalty_mc(const McScenario& sc, int h, long m, const FrozenPrefix& prefix,
                       int samples, std::uint64_t seed) {
  SampledWindows sw = collect_windows(sc, prefix, h, m, samples, seed);
  const int s = static_cast<int>(sw.draws.size());
  const int d = sc.delays.max_delay();
  const std::size_t terms = static_cast<std::size_t>(h) * (d + 1);

  std::vector<Matrix> totals(terms);
  for (std::size_t t = 0; t < terms; ++t) totals[t] = Matrix::Zero(sw.draws.front().w.rows(), sw.draws.front().w.cols());
  for (const auto& dr : sw.draws)
    for (std::size_t t = 0; t < terms; ++t) totals[t] += dr.m_kq[t];

  const auto assemble = [&](const std::vector<Matrix>* minus, double divisor) {
    double value = 0.0;
    for (int off = 0; off < h; ++off) {
      const long k = m * static_cast<long>(h) + off;
      const double ratio = sc.gains.ratio(k);
      double inner = 0.0;
      for (int q = 0; q <= d; ++q) {
        const std::size_t t = static_cast<std::size_t>(off) * (d + 1) + q;
        Matrix avg = minus ? Matrix((totals[t] - (*minus)[t]) / divisor)
                           : Matrix(totals[t] / divisor);
        inner += spectral_norm(avg);
      }
      value += ratio * inner;
    }
    return value;
  };

  McEstimate est{};
  est.value = assemble(nullptr, double(s));
  est.samples = s;
  est.rejected = sw.rejected;

  std::vector<double> loo(s);
  for (int i = 0; i < s; ++i) loo[i] = assemble(&sw.draws[i].m_kq, double(s - 1));
  est.std_error = jackknife_stderr(loo);
  return est;
}

nlohmann::json ConditionReport::to_json() const {
  nlohmann::json j;
  j["h"] = h;
  j["m_lo"] = m_lo;
  j["m_hi"] = m_hi;
  j["values"] = values;
  if (!stderrs.empty()) j["stderr"] = stderrs;
  j["theta_hat"] = theta_hat;
  j["method"] = method;
  if (samples > 0) j["samples"] = samples;
  j["theta_user"] = theta_user;
  j["verdict"] = verdict;
  j["note"] = note;
  return j;
}

ConditionReport infimum_scan(const std::function<double(long)>& value_at, int h, long m_max,
                             double theta_user) {
  if (m_max < 1) throw std::invalid_argument("infimum_scan: m_max must be at least 1");
  ConditionReport rep;
  rep.h = h;
  rep.m_lo = 0;
  rep.m_hi = m_max;
  rep.method = "analytic_markov";
  rep.theta_user = theta_user;
  rep.theta_hat = std::numeric_limits<double>::infinity();
  for (long m = 0; m <= m_max; ++m) {
    const double v = value_at(m);
    rep.values.push_back(v);
    rep.theta_hat = std::min(rep.theta_hat, v);
  }
  rep.verdict = rep.theta_hat > theta_user;
  rep.note = "infimum certified on the finite scan m in [0," + std::to_string(m_max) + "] only";
  return rep;
}

ConditionReport infimum_scan_mc(const std::function<McEstimate(long)>& estimate_at, int h,
                                long m_max, double theta_user) {
  if (m_max < 1) throw std::invalid_argument("infimum_scan_mc: m_max must be at least 1");
  ConditionReport rep;
  rep.h = h;
  rep.m_lo = 0;
  rep.m_hi = m_max;
  rep.method = "monte_carlo";
  rep.theta_user = theta_user;
  rep.theta_hat = std::numeric_limits<double>::infinity();
  double guard = 0.0;
  for (long m = 0; m <= m_max; ++m) {
    const McEstimate est = estimate_at(m);
    rep.values.push_back(est.value);
    rep.stderrs.push_back(est.std_error);
    rep.samples = est.samples;
    if (est.value < rep.theta_hat) {
      rep.theta_hat = est.value;
      guard = est.std_error;
    }
  }
  rep.verdict = rep.theta_hat - 3.0 * guard > theta_user;
  rep.note = "infimum certified on the finite scan m in [0," + std::to_string(m_max) +
             "] only; verdict guarded by 3 standard errors";
  return rep;
}

}  // namespace dce
