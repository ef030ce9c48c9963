#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "popalloc/popalloc.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw popalloc::validation_error("config", "cannot read file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

popalloc::ScenarioConfig load(const std::string& path,
                              const std::vector<std::string>& overrides) {
  nlohmann::json doc = nlohmann::json::parse(read_file(path));
  for (const auto& assignment : overrides) popalloc::apply_override(doc, assignment);
  auto cfg = popalloc::load_config(doc);
  for (const auto& warning : cfg.warnings) std::cerr << "warning: " << warning << "\n";
  return cfg;
}

nlohmann::json bounds_json(const popalloc::ZenoBounds& z) {
  nlohmann::json j;
  j["tau"] = z.tau;
  j["tau_i"] = popalloc::detail::vector_to_json(z.tau_i);
  j["beta_i"] = popalloc::detail::vector_to_json(z.beta_i);
  j["q_i"] = popalloc::detail::vector_to_json(z.q_i);
  j["pi_norm"] = z.pi_norm;
  j["eta"] = z.eta;
  return j;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::vector<std::string>& overrides) {
  const auto cfg = load(config_path, overrides);
  const auto result = popalloc::run(cfg);
  popalloc::write_outputs(result, out_dir);
  long total_events = 0;
  for (long c : result.summary.trigger_count) total_events += c;
  std::cout << "consensus_residual=" << result.summary.consensus_residual
            << " trigger_total=" << total_events
            << " conservation_error=" << result.summary.conservation_error << "\n";
  return 0;
}

int cmd_oracle(const std::string& config_path, const std::vector<std::string>& overrides) {
  const auto cfg = load(config_path, overrides);
  const auto sol = popalloc::kkt_allocate(cfg.potential);
  nlohmann::json j;
  j["p_star"] = popalloc::detail::vector_to_json(sol.p);
  j["lambda_star"] = sol.lambda;
  j["fitness"] = popalloc::detail::vector_to_json(cfg.potential.fitness(sol.p));
  j["negative_components"] = sol.negative_components;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_bounds(const std::string& config_path, const std::vector<std::string>& overrides) {
  const auto cfg = load(config_path, overrides);
  popalloc::ZenoBounds bounds;
  if (cfg.trigger.mode == popalloc::TriggerMode::distributed) {
    const int n = cfg.graph.size();
    Eigen::VectorXd lambda2 = Eigen::VectorXd::Zero(n);
    for (const auto& members : popalloc::connected_components(cfg.graph)) {
      if (members.size() < 2) continue;
      const double l2 =
          popalloc::detail::component_fiedler(cfg.graph, cfg.initial, members);
      for (int i : members) lambda2[i] = l2;
    }
    bounds = popalloc::zeno_bounds(cfg.graph, cfg.potential,
                                   {cfg.trigger.rho, cfg.trigger.a}, lambda2,
                                   cfg.trigger.q, cfg.trigger.gamma);
  } else if (cfg.trigger.mode == popalloc::TriggerMode::centralized) {
    bounds = popalloc::zeno_bounds_centralized(
        cfg.graph, cfg.potential,
        popalloc::CentralizedRuleParams{
            *cfg.trigger.gamma,
            cfg.trigger.phi.value_or(1.0 / std::sqrt(*cfg.trigger.gamma))});
  } else {
    throw popalloc::validation_error(
        "trigger.mode", "bounds requires a distributed or centralized trigger rule");
  }
  std::cout << bounds_json(bounds).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered distributed resource allocation simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> overrides;

  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write outputs");
  simulate->add_option("config", config_path, "Scenario config (JSON)")->required();
  simulate->add_option("outdir", out_dir, "Output directory")->required();
  simulate->add_option("--set", overrides, "Dotted-path config override key=value");

  auto* oracle = app.add_subcommand("oracle", "Print the KKT allocation for a scenario");
  oracle->add_option("config", config_path, "Scenario config (JSON)")->required();
  oracle->add_option("--set", overrides, "Dotted-path config override key=value");

  auto* bounds = app.add_subcommand("bounds", "Print analytic Zeno lower bounds");
  bounds->add_option("config", config_path, "Scenario config (JSON)")->required();
  bounds->add_option("--set", overrides, "Dotted-path config override key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir, overrides);
    if (oracle->parsed()) return cmd_oracle(config_path, overrides);
    if (bounds->parsed()) return cmd_bounds(config_path, overrides);
  } catch (const popalloc::simulation_aborted& e) {
    std::cerr << "numerical error: " << e.what() << " (" << e.partial().trajectory.size()
              << " samples recorded before abort)\n";
    return kExitNumerical;
  } catch (const popalloc::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const popalloc::io_error& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
