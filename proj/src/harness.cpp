#include "dce/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace dce {

Scenario::Scenario(std::string name, MeasurementModel measurement,
                   std::shared_ptr<const JointMarkovProcess> states, DriverKind kind,
                   int initial_state, std::vector<double> iid_weights,
                   std::vector<int> schedule, DelayModel delays, NoiseModel noise,
                   GainSchedule gains, std::optional<Vector> x_init,
                   std::optional<AssumptionConstants> constants)
    : name_(std::move(name)),
      measurement_(std::move(measurement)),
      states_(std::move(states)),
      kind_(kind),
      initial_state_(initial_state),
      iid_weights_(std::move(iid_weights)),
      schedule_(std::move(schedule)),
      delays_(std::move(delays)),
      noise_(std::move(noise)),
      gains_(std::move(gains)),
      x_init_(Vector()),
      user_constants_(std::move(constants)) {
  if (!states_) throw ConfigError("scenario: missing joint-state process");

  const int nodes = measurement_.node_count();
  const int n = measurement_.param_dim();
  if (states_->node_count() != nodes)
    throw ConfigError("scenario: process node count differs from the measurement model");
  if (states_->param_dim() != n)
    throw ConfigError("scenario: process parameter dimension differs from the measurement model");
  for (const JointState& st : states_->states())
    for (int i = 0; i < nodes; ++i)
      if (st.observation[i].rows() != measurement_.node_dims()[i])
        throw ConfigError("scenario: observation block height differs from the node dimension");
  if (delays_.node_count() != nodes)
    throw ConfigError("scenario: delay model node count mismatch");
  if (noise_.total_dim() != measurement_.total_obs_dim())
    throw ConfigError("scenario: noise dimension differs from the stacked measurement");
  if (initial_state_ < 0 || initial_state_ >= states_->state_count())
    throw ConfigError("scenario: initial state out of range");
  if (kind_ == DriverKind::iid && static_cast<int>(iid_weights_.size()) != states_->state_count())
    throw ConfigError("scenario: iid weights must cover the state space");
  if (kind_ == DriverKind::deterministic && schedule_.empty())
    throw ConfigError("scenario: deterministic driver needs a schedule");

  if (x_init) {
    if (x_init->size() != static_cast<Eigen::Index>(nodes) * n)
      throw ConfigError("scenario: x_init must have size N*n");
    x_init_ = std::move(*x_init);
  } else {
    x_init_ = Vector::Zero(static_cast<Eigen::Index>(nodes) * n);
  }
}

ProcessDriver Scenario::make_driver(RngStream rng) const {
  switch (kind_) {
    case DriverKind::markov:
      return ProcessDriver::markov(states_, initial_state_, rng);
    case DriverKind::iid:
      return ProcessDriver::iid(states_, iid_weights_, rng);
    case DriverKind::deterministic:
      return ProcessDriver::deterministic(states_, schedule_);
  }
  throw std::logic_error("scenario: unknown driver kind");
}

AssumptionConstants Scenario::constants(long horizon) const {
  if (user_constants_) return *user_constants_;
  double beta_a = 0.0, beta_h = 0.0;
  for (const JointState& st : states_->states()) {
    beta_a = std::max(beta_a, st.graph.max_abs_weight());
    for (const Matrix& hi : st.observation) beta_h = std::max(beta_h, spectral_norm(hi));
  }
  beta_a = std::max(beta_a, 1e-12);
  const double c_a = std::max(1.0, gains_.ratio_bound(std::max<long>(horizon, 2)));
  const auto bd = gain_ceiling(node_count(), beta_a, beta_h, c_a, delays_.max_delay());
  return AssumptionConstants(beta_a, beta_h, noise_.beta_v(), c_a, bd.kappa_star,
                             delays_.max_delay());
}

void SimConfig::validate() const {
  if (horizon < 1) throw ConfigError("config: horizon must be at least 1");
  if (replicates < 1) throw ConfigError("config: replicate count must be at least 1");
  if (conditions.h < 1) throw ConfigError("config: condition window must be at least 1");
  if (conditions.m_max < 1) throw ConfigError("config: condition scan bound must be at least 1");
  if (conditions.samples < 100) throw ConfigError("config: condition sampling needs >= 100 draws");
}

ReplicateResult run_replicate(const SimConfig& cfg, int replicate) {
  cfg.validate();
  const Scenario& sc = cfg.scenario;
  const int nodes = sc.node_count();
  const int n = sc.param_dim();
  const int d = sc.delays().max_delay();
  const Vector& x0 = sc.measurement().x0();

  ProcessDriver driver = sc.make_driver(
      RngStream::split(cfg.master_seed, static_cast<std::uint64_t>(replicate), StreamPurpose::graph));
  RngStream noise_rng =
      RngStream::split(cfg.master_seed, static_cast<std::uint64_t>(replicate), StreamPurpose::noise);
  RngStream delay_rng =
      RngStream::split(cfg.master_seed, static_cast<std::uint64_t>(replicate), StreamPurpose::delay);

  NetworkState state(nodes, n, d, sc.x_init());

  ReplicateResult out;
  out.node_sq_err.resize(cfg.horizon + 1, std::vector<double>(nodes));
  out.max_err.resize(cfg.horizon + 1);
  out.state_log.reserve(cfg.horizon);

  const auto record = [&](long k) {
    double worst = 0.0;
    for (int i = 0; i < nodes; ++i) {
      const double err = (state.node(i) - x0).norm();
      out.node_sq_err[k][i] = err * err;
      worst = std::max(worst, err);
    }
    out.max_err[k] = worst;
  };
  record(0);

  for (long k = 0; k < cfg.horizon; ++k) {
    const JointState& st = sc.states().state(driver.next_state(k));
    out.state_log.push_back(driver.current_index());
    const DelayRealization delays = sample_delays(sc.delays(), k, delay_rng);
    const Vector v = sc.noise().sample(noise_rng);
    const Vector z = measure(sc.measurement(), st.stacked_observation(), v);
    network_step(state, st.observation, st.graph, delays, z, sc.gains().a(k), sc.gains().b(k));
    record(k + 1);
  }
  out.final_estimate = state.current();
  return out;
}

namespace {

int worker_count(int replicates) {
  if (const char* env = std::getenv("DCE_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return std::min(w, replicates);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return std::min<int>(std::max(1u, hw), replicates);
}

}  // namespace

RunMetrics monte_carlo(const SimConfig& cfg) {
  cfg.validate();
  const int reps = cfg.replicates;
  const int nodes = cfg.scenario.node_count();

  std::vector<ReplicateResult> results(reps);
  std::atomic<int> next{0};
  const int workers = worker_count(reps);
  std::vector<std::thread> pool;
  std::vector<std::string> failures(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
        try {
          results[r] = run_replicate(cfg, r);
        } catch (const std::exception& e) {
          failures[w] = "replicate " + std::to_string(r) + " (master_seed " +
                        std::to_string(cfg.master_seed) + "): " + e.what();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& f : failures)
    if (!f.empty()) throw std::runtime_error(f);  // a replicate failure aborts the run

  RunMetrics m;
  m.horizon = cfg.horizon;
  m.nodes = nodes;
  m.replicates = reps;
  m.mse.assign(cfg.horizon + 1, std::vector<double>(nodes, 0.0));
  m.mse_stderr.assign(cfg.horizon + 1, std::vector<double>(nodes, 0.0));
  m.network_mse.assign(cfg.horizon + 1, 0.0);

  std::vector<std::vector<double>> sumsq(cfg.horizon + 1, std::vector<double>(nodes, 0.0));
  for (int r = 0; r < reps; ++r) {
    for (long k = 0; k <= cfg.horizon; ++k)
      for (int i = 0; i < nodes; ++i) {
        const double v = results[r].node_sq_err[k][i];
        m.mse[k][i] += v;
        sumsq[k][i] += v * v;
      }
  }
  for (long k = 0; k <= cfg.horizon; ++k) {
    double net = 0.0;
    for (int i = 0; i < nodes; ++i) {
      m.mse[k][i] /= reps;
      if (reps > 1) {
        const double var =
            std::max(0.0, (sumsq[k][i] - reps * m.mse[k][i] * m.mse[k][i]) / (reps - 1));
        m.mse_stderr[k][i] = std::sqrt(var / reps);
      }
      net += m.mse[k][i];
    }
    m.network_mse[k] = net / nodes;
  }

  if (cfg.outputs.path_traces) {
    m.path_max_err.reserve(reps);
    for (auto& r : results) m.path_max_err.push_back(std::move(r.max_err));
  }
  if (cfg.outputs.condition_reports) {
    auto [reports, extras] = verify_conditions(cfg);
    m.condition_reports = std::move(reports);
    m.condition_extras = std::move(extras);
  }
  return m;
}

std::pair<std::vector<std::pair<std::string, ConditionReport>>, nlohmann::json>
verify_conditions(const SimConfig& cfg) {
  cfg.validate();
  const Scenario& sc = cfg.scenario;
  const AssumptionConstants constants = sc.constants(cfg.horizon);
  const auto bd = gain_ceiling(sc.node_count(), constants);
  const auto gain_report =
      check_gain_assumptions(sc.gains(), constants, sc.node_count(), std::max(cfg.horizon, 2L));

  std::vector<std::pair<std::string, ConditionReport>> reports;
  nlohmann::json extras;
  extras["gain_ceiling"] = bd.bound;
  extras["kappa_star"] = bd.kappa_star;
  extras["constants"] = {{"beta_a", constants.beta_a}, {"beta_H", constants.beta_H},
                         {"beta_v", constants.beta_v}, {"C_a", constants.C_a},
                         {"kappa", constants.kappa},   {"d", constants.d},
                         {"user_supplied", sc.constants_user_supplied()}};
  extras["gain_assumptions"] = {
      {"decrease", gain_report.decrease_ok},          {"square_summable_ok", gain_report.square_summable_ok},
      {"below_ceiling", gain_report.below_ceiling},          {"analytic", gain_report.decrease_analytic},
      {"sup_b", gain_report.sup_b},      {"ceiling", gain_report.ceiling},
      {"positive", gain_report.positive}, {"monotone", gain_report.monotone}};

  const int h = cfg.conditions.h;
  const long m_max = cfg.conditions.m_max;
  const double theta = cfg.conditions.theta;

  if (sc.kind() == DriverKind::markov) {
    extras["norm_moment_bound"] = norm_moment_bound(sc.states(), h);
    try {
      const auto c1 = check_stationary_structure(sc.states(), sc.param_dim());
      extras["stationary_checks"] = {{"stationary_nonneg", c1.stationary_nonneg},
                                     {"balanced", c1.balanced},
                                     {"spanning_tree", c1.spanning_tree},
                                     {"joint_obs_lambda", c1.joint_obs_lambda},
                                     {"verdict", c1.verdict}};
    } catch (const NonUniqueStationaryError& e) {
      extras["stationary_checks"] = {{"error", e.what()}};
    }

    // worst case over conditioning states stands in for the almost-sure
    // infimum on the finite chain
    auto scan = infimum_scan(
        [&](long m) {
          double worst = std::numeric_limits<double>::infinity();
          for (int s0 = 0; s0 < sc.states().state_count(); ++s0)
            worst = std::min(worst, window_excitation_markov(sc.states(), sc.gains(), h, m, s0,
                                                     sc.param_dim()));
          return worst;
        },
        h, m_max, theta);
    scan.note += "; per-m value is the worst case over conditioning states";
    reports.emplace_back("window_excitation", std::move(scan));
  }

  if (sc.delays_enabled() && !gain_report.below_ceiling) {
    // the delayed-case certificates presuppose the consensus gain sits below
    // the admissibility ceiling, which is what keeps the transition chain invertible
    extras["delayed_certificates"] =
        "skipped: sup b(k) exceeds the admissibility ceiling, so the inverse-chain "
        "certificates are not applicable to this gain schedule";
  } else if (sc.delays_enabled()) {
    McScenario mc{sc.make_driver(RngStream(0)), sc.delays(), sc.gains(), constants.kappa,
                  sc.param_dim()};
    const std::uint64_t cond_seed = cfg.master_seed ^ 0x9e3779b97f4a7c15ull;
    auto lam_scan = infimum_scan_mc(
        [&](long m) {
          auto prefix = freeze_prefix(mc, h, m, cond_seed + static_cast<std::uint64_t>(m));
          return delayed_excitation_mc(mc, h, m, prefix, cfg.conditions.samples,
                                    cond_seed * 31 + static_cast<std::uint64_t>(m));
        },
        h, m_max, theta);
    reports.emplace_back("delayed_excitation", std::move(lam_scan));

    if (sc.kind() == DriverKind::markov) {
      auto margin_scan = infimum_scan_mc(
          [&](long m) {
            auto prefix = freeze_prefix(mc, h, m, cond_seed + static_cast<std::uint64_t>(m));
            auto delta = delay_penalty_mc(mc, h, m, prefix, cfg.conditions.samples,
                                     cond_seed * 37 + static_cast<std::uint64_t>(m));
            const double lam = window_excitation_markov(sc.states(), sc.gains(), h, m,
                                                prefix.state_index, sc.param_dim());
            delta.value = lam - delta.value;
            return delta;
          },
          h, m_max, theta);
      margin_scan.note += "; per-m value is lambda_mh minus the delay penalty";
      reports.emplace_back("excitation_minus_penalty", std::move(margin_scan));
    }
  }
  return {std::move(reports), std::move(extras)};
}

}  // namespace dce
