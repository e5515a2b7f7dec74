#include <yaml-cpp/yaml.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "scenarios.hpp"

namespace {

using cgq::ConfigError;
using cgq::cli::ScenarioConfig;

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kUnknownScenario = 2,
  kUnwritableOutput = 3,
  kIntegrationFailure = 4,
  kConfigError = 5,
};

struct Flags {
  std::optional<std::string> config, out, system, lindblads;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, t_final, mu, omega, alpha, epsilon, gamma, energy;
  std::optional<long> stride;
  std::optional<std::size_t> paths, orbits;
  std::optional<int> cutoff;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "YAML configuration file");
  app.add_option("--out", f.out, "Output CSV path");
  app.add_option("--seed", f.seed, "Base seed (u64)");
  app.add_option("--dt", f.dt, "Time step");
  app.add_option("--t-final", f.t_final, "Integration horizon");
  app.add_option("--stride", f.stride, "Record every n-th step");
  app.add_option("--paths", f.paths, "QSD paths (or draws / points for property runners)");
  app.add_option("--orbits", f.orbits, "Orbits in a Poincare section");
  app.add_option("--mu", f.mu, "Nonlinear coupling mu");
  app.add_option("--omega", f.omega, "Two-qubit field omega");
  app.add_option("--alpha", f.alpha, "Hopping alpha");
  app.add_option("--epsilon", f.epsilon, "Detuning epsilon2 - epsilon1");
  app.add_option("--gamma", f.gamma, "Dissipation rate gamma");
  app.add_option("--energy", f.energy, "Energy shell of the reduced flows");
  app.add_option("--cutoff", f.cutoff, "Fock cutoff per mode");
  app.add_option("--system", f.system, "Reduced two-qubit system")->check(CLI::IsMember({"s", "ns"}));
  app.add_option("--lindblads", f.lindblads, "Lindblad set")
      ->check(CLI::IsMember({"J", "quadrature"}));
}

template <typename T>
void take(const YAML::Node& node, const char* key, T& dst) {
  if (const auto v = node[key]) dst = v.as<T>();
}

template <typename T>
void take(const YAML::Node& node, const char* key, std::optional<T>& dst) {
  if (const auto v = node[key]) dst = v.as<T>();
}

void reject_unknown(const YAML::Node& node, const std::set<std::string>& known,
                    const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

void apply_yaml(const std::string& path, ScenarioConfig& c) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read config '" + path + "': " + e.what());
  }
  if (root.IsNull()) return;
  try {
    reject_unknown(root, {"scenario", "out", "seed", "integrator", "model", "ensemble"}, "config");
    take(root, "scenario", c.scenario);
    take(root, "out", c.out);
    take(root, "seed", c.seed);
    if (const auto n = root["integrator"]) {
      reject_unknown(n, {"dt", "t_final", "stride"}, "integrator");
      take(n, "dt", c.dt);
      take(n, "t_final", c.t_final);
      take(n, "stride", c.stride);
    }
    if (const auto n = root["model"]) {
      reject_unknown(n, {"mu", "omega", "alpha", "epsilon", "gamma", "energy", "cutoff", "system",
                         "lindblads"},
                     "model");
      take(n, "mu", c.mu);
      take(n, "omega", c.omega);
      take(n, "alpha", c.alpha);
      take(n, "epsilon", c.epsilon);
      take(n, "gamma", c.gamma);
      take(n, "energy", c.energy);
      take(n, "cutoff", c.cutoff);
      take(n, "system", c.system);
      take(n, "lindblads", c.lindblads);
    }
    if (const auto n = root["ensemble"]) {
      reject_unknown(n, {"paths", "orbits", "seed"}, "ensemble");
      take(n, "paths", c.paths);
      take(n, "orbits", c.orbits);
      take(n, "seed", c.seed);
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad value in config '" + path + "': " + e.what());
  }
}

template <typename T, typename U>
void override_with(const std::optional<T>& flag, U& dst) {
  if (flag) dst = *flag;
}

ScenarioConfig build_config(const std::string& subcommand, const Flags& f) {
  ScenarioConfig c;
  if (subcommand != "run") c.scenario = subcommand;
  if (f.config) apply_yaml(*f.config, c);
  if (subcommand != "run") c.scenario = subcommand;
  override_with(f.out, c.out);
  override_with(f.seed, c.seed);
  override_with(f.dt, c.dt);
  override_with(f.t_final, c.t_final);
  override_with(f.stride, c.stride);
  override_with(f.paths, c.paths);
  override_with(f.orbits, c.orbits);
  override_with(f.mu, c.mu);
  override_with(f.omega, c.omega);
  override_with(f.alpha, c.alpha);
  override_with(f.epsilon, c.epsilon);
  override_with(f.gamma, c.gamma);
  override_with(f.energy, c.energy);
  override_with(f.cutoff, c.cutoff);
  override_with(f.system, c.system);
  override_with(f.lindblads, c.lindblads);
  if (c.scenario.empty()) throw ConfigError("no scenario given (set 'scenario' in the config)");
  if (c.out.empty()) c.out = c.scenario + ".csv";
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained coarse-grained quantum dynamics"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<std::string> names;
  for (const auto& [name, fn] : cgq::cli::scenario_table()) names.push_back(name);
  names.push_back("run");
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, name == "run" ? "Run the scenario named in --config"
                                                       : "Run the '" + name + "' scenario");
    add_flags(*sub, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    const auto config = build_config(subcommand, flags);
    const auto result = cgq::cli::run_scenario(config);
    std::ostringstream csv;
    result.table.write(csv);
    std::ofstream file(config.out, std::ios::binary | std::ios::trunc);
    if (!file || !(file << csv.str()) || !file.flush()) {
      std::cerr << "error: cannot write output '" << config.out << "'\n";
      return kUnwritableOutput;
    }
    std::cout << result.summary << " -> " << config.out << "\n";
    return kOk;
  } catch (const cgq::cli::UnknownScenario& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnknownScenario;
  } catch (const cgq::IntegrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIntegrationFailure;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
