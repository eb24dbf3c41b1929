#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dce/conditions.hpp"
#include "dce/estimator.hpp"
#include "dce/processes.hpp"

namespace dce {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DriverKind { markov, iid, deterministic };

// Fully resolved simulation scenario: measurement model, joint-state process,
// delays, noise, gains and the assumption constants attached to them.
class Scenario {
 public:
  Scenario(std::string name, MeasurementModel measurement,
           std::shared_ptr<const JointMarkovProcess> states, DriverKind kind,
           int initial_state, std::vector<double> iid_weights, std::vector<int> schedule,
           DelayModel delays, NoiseModel noise, GainSchedule gains,
           std::optional<Vector> x_init, std::optional<AssumptionConstants> constants);

  const std::string& name() const { return name_; }
  const MeasurementModel& measurement() const { return measurement_; }
  const JointMarkovProcess& states() const { return *states_; }
  std::shared_ptr<const JointMarkovProcess> states_ptr() const { return states_; }
  DriverKind kind() const { return kind_; }
  int initial_state() const { return initial_state_; }
  const DelayModel& delays() const { return delays_; }
  const NoiseModel& noise() const { return noise_; }
  const GainSchedule& gains() const { return gains_; }
  const Vector& x_init() const { return x_init_; }
  int node_count() const { return measurement_.node_count(); }
  int param_dim() const { return measurement_.param_dim(); }
  bool delays_enabled() const { return delays_.max_delay() > 0; }

  ProcessDriver make_driver(RngStream rng) const;

  // user-supplied constants, or constants derived from the finite state
  // space, the noise model and the gain ratios over the given horizon
  AssumptionConstants constants(long horizon) const;
  bool constants_user_supplied() const { return user_constants_.has_value(); }

 private:
  std::string name_;
  MeasurementModel measurement_;
  std::shared_ptr<const JointMarkovProcess> states_;
  DriverKind kind_;
  int initial_state_;
  std::vector<double> iid_weights_;
  std::vector<int> schedule_;
  DelayModel delays_;
  NoiseModel noise_;
  GainSchedule gains_;
  Vector x_init_;
  std::optional<AssumptionConstants> user_constants_;
};

struct OutputFlags {
  bool mse_curve = true;
  bool path_traces = false;
  bool condition_reports = false;
};

struct ConditionRequest {
  int h = 1;
  long m_max = 20;
  int samples = 2000;
  double theta = 0.0;
};

struct SimConfig {
  Scenario scenario;
  long horizon = 1;
  int replicates = 1;
  std::uint64_t master_seed = 0;
  OutputFlags outputs;
  ConditionRequest conditions;
  std::string sink = "out";

  void validate() const;
};

struct ReplicateResult {
  std::vector<std::vector<double>> node_sq_err;  // [k][node], k = 0..K
  std::vector<double> max_err;                   // [k], max over nodes
  std::vector<int> state_log;                    // joint-state index per step
  Vector final_estimate;
};

ReplicateResult run_replicate(const SimConfig& cfg, int replicate);

struct RunMetrics {
  long horizon = 0;
  int nodes = 0;
  int replicates = 0;
  std::vector<std::vector<double>> mse;         // [k][node]
  std::vector<std::vector<double>> mse_stderr;  // [k][node]
  std::vector<double> network_mse;              // [k]
  std::vector<std::vector<double>> path_max_err;  // [replicate][k], when requested
  std::vector<std::pair<std::string, ConditionReport>> condition_reports;
  nlohmann::json condition_extras;
};

// Seeded replicate sweep on a small worker pool (DCE_WORKERS bounds the
// thread count); aggregation runs in replicate order so results do not
// depend on scheduling.
RunMetrics monte_carlo(const SimConfig& cfg);

// Condition verifiers only: gain assumption report, analytic or Monte Carlo
// window-excitation scans, delay penalty, and the structural chain checks.
std::pair<std::vector<std::pair<std::string, ConditionReport>>, nlohmann::json>
verify_conditions(const SimConfig& cfg);

void export_csv(const RunMetrics& metrics, const std::string& path);
void export_path_traces(const RunMetrics& metrics, const std::string& path);
void export_json_summary(const SimConfig& cfg, const RunMetrics& metrics,
                         const std::string& path);

std::vector<std::string> preset_names();
Scenario make_preset(const std::string& name);

SimConfig load_config(const std::string& path);
SimConfig config_from_json(const nlohmann::json& j);

}  // namespace dce
