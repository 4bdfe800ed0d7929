#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cli/commands.hpp"

namespace {

using namespace cavpump::cli;

struct CommonOptions {
  std::string preset;
  std::vector<std::string> configs;
  std::vector<std::string> sets;
  std::string manifest;
  std::string out = "out";
  unsigned jobs = 0;
  std::optional<double> atoms;
  std::optional<double> eta;
  std::optional<std::string> delta_p;
  std::optional<std::string> kind;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& name) {
  cmd->add_option("--preset", o.preset, "Bundled configuration (see `presets list`)");
  cmd->add_option("-c,--config", o.configs, "INI configuration file; later files override earlier ones")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", o.sets, "Override one key, e.g. --set atoms.N=9200");
  cmd->add_option("--from-manifest", o.manifest, "Re-run the configuration recorded in a manifest")
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("-j,--jobs", o.jobs, "Worker threads for fig4 and sweep (0: hardware concurrency)");
  if (name != "sweep") {
    cmd->add_option("--atoms", o.atoms, name == "rates" ? "Atom number (rates.N)" : "Atom number (atoms.N)");
    cmd->add_option("--eta", o.eta, name == "rates" ? "Pump rate in MHz (rates.eta_MHz)"
                                                    : "Pump rate in MHz (drive.eta_MHz)");
  }
  if (name == "spectrum" || name == "dynamics")
    cmd->add_option("--delta-p", o.delta_p, "Probe detuning(s) in MHz (drive.delta_p_MHz)");
  if (name == "dynamics") cmd->add_option("--kind", o.kind, "dynamics, fig2, fig3 or fig4 (dynamics.kind)");
  if (name == "rates") cmd->add_option("--kind", o.kind, "single or fig5 (rates.kind)");
}

Invocation build(const std::string& name, const CommonOptions& o) {
  Invocation inv;
  if (!o.manifest.empty()) {
    inv = invocation_from_manifest(o.manifest);
    if (inv.command != name)
      throw ConfigError("manifest was written by '" + inv.command + "', not '" + name + "'");
  } else {
    inv.command = name;
  }
  Settings& s = inv.settings;
  if (!o.preset.empty()) s.load_file(preset_path(o.preset));
  for (const auto& c : o.configs) s.load_file(c);
  const bool rates = name == "rates";
  if (o.atoms) s.set(rates ? "rates.N" : "atoms.N", format_number(*o.atoms));
  if (o.eta) s.set(rates ? "rates.eta_MHz" : "drive.eta_MHz", format_number(*o.eta));
  if (o.delta_p) s.set("drive.delta_p_MHz", *o.delta_p);
  if (o.kind) s.set(rates ? "rates.kind" : "dynamics.kind", *o.kind);
  for (const auto& a : o.sets) s.assign(a);
  inv.jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  return inv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field and rate-model simulations of multilevel atoms in a driven cavity", "cavpump"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  const std::vector<std::string> names{"spectrum", "dynamics", "rates", "sweep"};
  const std::vector<std::string> help{
      "Steady-state transmission spectrum and normal-mode splitting",
      "Time-dependent mean-field runs (dynamics, fig2, fig3, fig4)",
      "Two-transition rate model (single run or fig5 landscape)",
      "Grid sweep of scalar observables over one or two config keys",
  };
  std::vector<CommonOptions> options(names.size());
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < names.size(); ++i) {
    commands.push_back(app.add_subcommand(names[i], help[i]));
    add_common(commands.back(), options[i], names[i]);
  }
  auto* presets = app.add_subcommand("presets", "Bundled configurations");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "List bundled presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : config_error;
  }

  if (*list) {
    for (const auto& n : preset_names()) std::cout << n << "\n";
    return ok;
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!*commands[i]) continue;
    Invocation inv;
    try {
      inv = build(names[i], options[i]);
    } catch (...) {
      return report_exception(std::cerr);
    }
    return execute(inv, options[i].out, std::cout, std::cerr);
  }
  return config_error;
}
