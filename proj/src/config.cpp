#include "dce/harness.hpp"

#include <fstream>

namespace dce {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError("config: " + what); }

Matrix parse_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) fail(what + " must be a 2-d array");
  const std::size_t rows = j.size(), cols = j.front().size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(what + " rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail(what + " entries must be numeric");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) fail(what + " must be a nonempty array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(what + " entries must be numeric");
    v(i) = j[i].get<double>();
  }
  return v;
}

std::vector<double> parse_doubles(const json& j, const std::string& what) {
  Vector v = parse_vector(j, what);
  return std::vector<double>(v.data(), v.data() + v.size());
}

GainSchedule parse_gains(const json& j) {
  if (!j.is_object() || !j.contains("kind")) fail("gains need a kind");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power_law")
    return GainSchedule::power_law(j.at("tau1").get<double>(), j.at("tau2").get<double>());
  if (kind == "scaled_power_law")
    return GainSchedule::scaled_power_law(j.at("c_a").get<double>(), j.at("c_b").get<double>(),
                                          j.at("tau1").get<double>(), j.at("tau2").get<double>());
  if (kind == "capped_power_law")
    return GainSchedule::capped_power_law(j.at("a_max").get<double>(), j.at("b_max").get<double>(),
                                          j.at("c_a").get<double>(), j.at("c_b").get<double>(),
                                          j.at("tau1").get<double>(), j.at("tau2").get<double>());
  fail("unknown gain kind: " + kind);
}

NoiseModel parse_noise(const json& j, std::vector<int> dims) {
  if (!j.is_object() || !j.contains("kind")) fail("noise needs a kind");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return NoiseModel::zero(std::move(dims));
  if (kind == "gaussian") return NoiseModel::gaussian(std::move(dims), parse_doubles(j.at("sigma"), "noise.sigma"));
  if (kind == "uniform")
    return NoiseModel::uniform(std::move(dims), parse_doubles(j.at("half_width"), "noise.half_width"));
  fail("unknown noise kind: " + kind);
}

DelayModel parse_delays(const json& j, int nodes) {
  if (j.is_null()) return DelayModel(nodes, 0);
  const int d = j.value("d", 0);
  DelayModel m(nodes, d);
  if (d == 0) return m;
  if (j.value("uniform", false)) {
    m.set_uniform_offdiag();
    return m;
  }
  if (j.contains("p")) {
    const json& p = j.at("p");
    if (!p.is_array() || static_cast<int>(p.size()) != nodes) fail("delays.p must be N x N");
    for (int i = 0; i < nodes; ++i) {
      if (!p[i].is_array() || static_cast<int>(p[i].size()) != nodes)
        fail("delays.p must be N x N");
      for (int jcol = 0; jcol < nodes; ++jcol) {
        if (i == jcol) continue;
        m.set_link_pmf(i, jcol, parse_doubles(p[i][jcol], "delays.p entry"));
      }
    }
    return m;
  }
  fail("delays with d > 0 need either uniform: true or an explicit p table");
}

Scenario parse_scenario(const json& j) {
  if (j.is_string()) return make_preset(j.get<std::string>());
  if (!j.is_object()) fail("scenario must be a preset name or an object");
  if (j.contains("preset")) return make_preset(j.at("preset").get<std::string>());

  if (!j.contains("process")) fail("inline scenario needs a process block");
  const json& proc = j.at("process");
  if (!proc.contains("states") || !proc.at("states").is_array() || proc.at("states").empty())
    fail("process.states must be a nonempty array");

  std::vector<JointState> states;
  std::vector<int> node_dims;
  for (const json& st : proc.at("states")) {
    if (!st.contains("H") || !st.at("H").is_array()) fail("state needs an H array (one per node)");
    std::vector<Matrix> h;
    for (const json& hi : st.at("H")) h.push_back(parse_matrix(hi, "state H block"));
    WeightedDigraph g(parse_matrix(st.at("A"), "state A"));
    if (node_dims.empty())
      for (const Matrix& hi : h) node_dims.push_back(static_cast<int>(hi.rows()));
    states.emplace_back(std::move(h), std::move(g));
  }
  const int n_states = static_cast<int>(states.size());
  const int nodes = states.front().node_count();

  const std::string kind_name = proc.value("kind", std::string("markov"));
  DriverKind kind;
  Matrix p = Matrix::Identity(n_states, n_states);
  std::vector<double> weights;
  std::vector<int> schedule;
  if (kind_name == "markov") {
    kind = DriverKind::markov;
    if (!proc.contains("P")) fail("markov process needs a transition matrix P");
    p = parse_matrix(proc.at("P"), "process.P");
  } else if (kind_name == "iid") {
    kind = DriverKind::iid;
    weights = parse_doubles(proc.at("weights"), "process.weights");
  } else if (kind_name == "deterministic") {
    kind = DriverKind::deterministic;
    for (const json& s : proc.at("schedule")) schedule.push_back(s.get<int>());
  } else {
    fail("unknown process kind: " + kind_name);
  }
  auto chain = std::make_shared<JointMarkovProcess>(std::move(states), p);

  if (!j.contains("x0")) fail("inline scenario needs x0");
  Vector x0 = parse_vector(j.at("x0"), "x0");
  MeasurementModel mm(x0, node_dims);

  DelayModel delays = parse_delays(j.contains("delays") ? j.at("delays") : json(), nodes);
  NoiseModel noise = j.contains("noise") ? parse_noise(j.at("noise"), node_dims)
                                         : NoiseModel::zero(node_dims);
  GainSchedule gains = j.contains("gains") ? parse_gains(j.at("gains"))
                                           : GainSchedule::power_law(1.0, 1.0);

  std::optional<Vector> x_init;
  if (j.contains("x_init")) x_init = parse_vector(j.at("x_init"), "x_init");

  std::optional<AssumptionConstants> constants;
  if (j.contains("constants")) {
    const json& c = j.at("constants");
    constants = AssumptionConstants(c.at("beta_a").get<double>(), c.at("beta_H").get<double>(),
                                    c.at("beta_v").get<double>(), c.at("C_a").get<double>(),
                                    c.at("kappa").get<double>(), c.at("d").get<int>());
  }

  return Scenario(j.value("name", std::string("inline")), std::move(mm), std::move(chain), kind,
                  proc.value("initial_state", 0), std::move(weights), std::move(schedule),
                  std::move(delays), std::move(noise), std::move(gains), std::move(x_init),
                  std::move(constants));
}

}  // namespace

SimConfig config_from_json(const json& j) {
  if (!j.is_object()) fail("top level must be an object");
  if (!j.contains("scenario")) fail("missing scenario");

  Scenario scenario = [&] {
    try {
      return parse_scenario(j.at("scenario"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }();
  SimConfig cfg{std::move(scenario),
                j.value("horizon", 1L),
                j.value("replicates", 1),
                j.value("master_seed", std::uint64_t{0}),
                OutputFlags{},
                ConditionRequest{},
                j.value("sink", std::string("out"))};
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    cfg.outputs.mse_curve = o.value("mse_curve", true);
    cfg.outputs.path_traces = o.value("path_traces", false);
    cfg.outputs.condition_reports = o.value("condition_reports", false);
  }
  if (j.contains("conditions")) {
    const json& c = j.at("conditions");
    cfg.conditions.h = c.value("h", 1);
    cfg.conditions.m_max = c.value("m_max", 20L);
    cfg.conditions.samples = c.value("samples", 2000);
    cfg.conditions.theta = c.value("theta", 0.0);
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace dce
