#include "dce/harness.hpp"

namespace dce {

namespace {

std::vector<Matrix> four_node_observation_blocks() {
  Matrix h1t(5, 4);
  h1t << -1, 0, 0, 0,
          0, 0, 0, -1,
          1, 0, 0, -1,
         -1, 0, 0, -1,
         -1, 0, -1, 3;
  Matrix h2t(7, 8);
  h2t << 0, 0, 0, 0, 0, -1, 1, 0,
         0, 0, -1, 0, 0, 1, 0, 0,
         0, 1, -1, 0, 0, 0, 0, 0,
         0, 1, -1, 0, 0, 0, 0, 0,
         0, 0, 1, 0, 0, 0, 0, -1,
         0, 0, 1, 0, 0, 1, 0, -1,
         0, 0, 1, -1, 0, 0, 0, 0;
  Matrix h3t(6, 9);
  h3t << 1, 0, 0, 0, 0, 0, -1, 0, 0,
         1, 0, 0, 0, 0, 0, 0, -1, 0,
         0, 0, 0, 0, 0, 0, 1, -1, 0,
        -1, 0, 0, 0, 0, 0, 2, 1, 0,
        -1, 0, 0, 0, 0, 0, -1, 3, -1,
         0, 0, 0, 0, 0, 0, 0, 1, -1;
  Matrix h4t(4, 6);
  h4t << 1, -1, 0, 0, 0, 0,
         1, 0, 0, 0, 0, -1,
        -1, 0, 0, 0, -1, 2,
         0, 1, -1, 0, 0, 0;

  const int n = 13;
  Matrix h1 = Matrix::Zero(5, n);
  h1.leftCols(4) = h1t;
  Matrix h2 = Matrix::Zero(7, n);
  h2.leftCols(8) = h2t;
  Matrix h3 = Matrix::Zero(6, n);
  h3.rightCols(9) = h3t;
  Matrix h4 = Matrix::Zero(4, n);
  h4.rightCols(6) = h4t;
  return {h1, h2, h3, h4};
}

Scenario remark5_scenario() {
  Matrix a(2, 2);
  a << 0.0, 1.0, 0.3, 0.0;
  std::vector<Matrix> h{Matrix::Zero(1, 1), Matrix::Ones(1, 1)};
  std::vector<JointState> states;
  states.emplace_back(std::move(h), WeightedDigraph(a));
  auto chain = std::make_shared<JointMarkovProcess>(std::move(states), Matrix::Ones(1, 1));

  Vector x0(1);
  x0 << 1.0;
  return Scenario("remark5", MeasurementModel(x0, {1, 1}), std::move(chain),
                  DriverKind::markov, 0, {}, {}, DelayModel(2, 0),
                  NoiseModel::gaussian({1, 1}, {0.1, 0.1}), GainSchedule::power_law(1.0, 1.0),
                  std::nullopt, std::nullopt);
}

Scenario four_node_scenario(const std::string& name, int max_delay) {
  auto blocks = four_node_observation_blocks();
  const int nodes = 4, n = 13;

  // two balanced directed rings whose union is strongly connected
  Matrix ring = Matrix::Zero(nodes, nodes);
  ring(1, 0) = ring(2, 1) = ring(3, 2) = ring(0, 3) = 1.0;
  Matrix reverse = Matrix::Zero(nodes, nodes);
  reverse(0, 1) = reverse(1, 2) = reverse(2, 3) = reverse(3, 0) = 1.0;

  std::vector<JointState> states;
  states.emplace_back(blocks, WeightedDigraph(ring));
  states.emplace_back(blocks, WeightedDigraph(reverse));
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.5, 0.5;
  auto chain = std::make_shared<JointMarkovProcess>(std::move(states), p);

  Vector x0(n);
  for (int j = 0; j < n; ++j) x0(j) = 1.0 + double(j) / n;

  DelayModel delays(nodes, max_delay);
  if (max_delay > 0) delays.set_uniform_offdiag();

  std::vector<int> dims{5, 7, 6, 4};
  return Scenario(name, MeasurementModel(x0, dims), std::move(chain), DriverKind::markov, 0,
                  {}, {}, std::move(delays),
                  NoiseModel::gaussian({5, 7, 6, 4}, {0.1, 0.1, 0.1, 0.1}),
                  GainSchedule::capped_power_law(0.08, 0.2, 1.0, 2.5, 0.6, 0.6), std::nullopt,
                  std::nullopt);
}

}  // namespace

std::vector<std::string> preset_names() { return {"remark5", "appendixD", "appendixD-delayed"}; }

Scenario make_preset(const std::string& name) {
  if (name == "remark5") return remark5_scenario();
  if (name == "appendixD") return four_node_scenario(name, 0);
  if (name == "appendixD-delayed") return four_node_scenario(name, 3);
  throw ConfigError("unknown preset: " + name);
}

}  // namespace dce
