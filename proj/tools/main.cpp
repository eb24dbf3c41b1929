#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dce/harness.hpp"

namespace {

dce::SimConfig resolve_config(const std::string& config_path, const std::string& preset) {
  if (!config_path.empty()) {
    dce::SimConfig cfg = dce::load_config(config_path);
    if (!preset.empty()) {
      dce::SimConfig swapped{dce::make_preset(preset), cfg.horizon,    cfg.replicates,
                             cfg.master_seed,          cfg.outputs,    cfg.conditions,
                             cfg.sink};
      return swapped;
    }
    return cfg;
  }
  if (preset.empty()) throw dce::ConfigError("either a config file or --preset is required");
  return dce::SimConfig{dce::make_preset(preset), 2000, 10, 1, dce::OutputFlags{},
                        dce::ConditionRequest{}, "out"};
}

void print_reports(const dce::RunMetrics& metrics) {
  for (const auto& [name, rep] : metrics.condition_reports) {
    std::printf("%-22s theta_hat=%.6g verdict=%s (h=%d, m<=%ld, %s)\n", name.c_str(),
                rep.theta_hat, rep.verdict ? "pass" : "fail", rep.h, rep.m_hi,
                rep.method.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed cooperative estimation simulator"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir;
  int replicates = -1;
  std::int64_t seed = -1;
  bool check_conditions = false;

  auto* run = app.add_subcommand("run", "run a seeded replicate sweep");
  run->add_option("config", config_path, "configuration file (JSON)");
  run->add_option("--replicates", replicates, "override replicate count");
  run->add_option("--seed", seed, "override master seed");
  run->add_option("--out", out_dir, "override output directory");
  run->add_option("--preset", preset, "use a built-in scenario");
  run->add_flag("--check-conditions", check_conditions, "attach condition reports");

  auto* check = app.add_subcommand("check", "run only the condition verifiers");
  check->add_option("config", config_path, "configuration file (JSON)");
  check->add_option("--preset", preset, "use a built-in scenario");
  check->add_option("--out", out_dir, "override output directory");

  auto* presets = app.add_subcommand("presets", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      for (const auto& name : dce::preset_names()) std::printf("%s\n", name.c_str());
      return 0;
    }

    dce::SimConfig cfg = [&] {
      try {
        dce::SimConfig c = resolve_config(config_path, preset);
        if (replicates > 0) c.replicates = replicates;
        if (seed >= 0) c.master_seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty()) c.sink = out_dir;
        if (check_conditions) c.outputs.condition_reports = true;
        c.validate();
        return c;
      } catch (const std::invalid_argument& e) {
        throw dce::ConfigError(e.what());
      }
    }();

    std::filesystem::create_directories(cfg.sink);

    if (check->parsed()) {
      auto [reports, extras] = dce::verify_conditions(cfg);
      dce::RunMetrics shell;
      shell.condition_reports = std::move(reports);
      shell.condition_extras = std::move(extras);
      print_reports(shell);
      dce::export_json_summary(cfg, shell, cfg.sink + "/conditions.json");
      std::printf("wrote %s/conditions.json\n", cfg.sink.c_str());
      return 0;
    }

    dce::RunMetrics metrics = dce::monte_carlo(cfg);
    if (cfg.outputs.mse_curve) dce::export_csv(metrics, cfg.sink + "/mse.csv");
    if (cfg.outputs.path_traces)
      dce::export_path_traces(metrics, cfg.sink + "/path_traces.csv");
    dce::export_json_summary(cfg, metrics, cfg.sink + "/summary.json");
    print_reports(metrics);
    std::printf("scenario=%s horizon=%ld replicates=%d  mse(0)=%.6g mse(K)=%.6g\n",
                cfg.scenario.name().c_str(), cfg.horizon, cfg.replicates,
                metrics.network_mse.front(), metrics.network_mse.back());
    std::printf("wrote %s/summary.json\n", cfg.sink.c_str());
    return 0;
  } catch (const dce::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return 2;
  }
}
