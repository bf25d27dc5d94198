#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hmasim/config.hpp"
#include "hmasim/engine.hpp"
#include "hmasim/presets.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hmasim: time-slotted single-cell simulator for coexisting "
               "scheduled/non-scheduled URLLC traffic with hybrid-access slicing"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed_override = 0;
  bool have_seed = false;

  CLI::App* run_cmd = app.add_subcommand("run", "Train and evaluate one configuration");
  run_cmd->add_option("--config", config_path, "Path to config file")->required();
  run_cmd->add_option("--seed", seed_override, "Override sim.seed")
      ->each([&](const std::string&) { have_seed = true; });
  run_cmd->add_option("--out", out_dir, "Output directory (default: out)");

  std::string preset_name;
  int reps = 4;
  CLI::App* preset_cmd = app.add_subcommand("preset", "Run a canned experiment");
  preset_cmd->add_option("name", preset_name, "rate_vs_eps | power_alloc | oracle_check")
      ->required();
  preset_cmd->add_option("--out", out_dir, "Output directory (default: out)");
  preset_cmd->add_option("--reps", reps, "Replications per point (rate_vs_eps)")
      ->check(CLI::PositiveNumber);

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Parse and validate a config, print warnings");
  validate_cmd->add_option("--config", config_path, "Path to config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      hmasim::SimConfig cfg = hmasim::load_config(config_path);
      if (have_seed) cfg.seed = seed_override;
      for (const std::string& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';
      const hmasim::Metrics m = hmasim::run(cfg);
      const auto path = hmasim::write_run_summary(out_dir, cfg, m);
      std::cout << "wrote " << path.string() << '\n'
                << "mode=" << hmasim::policy_name(cfg.policy) << " slice=["
                << m.learned_slice.n_ded_ns << ',' << m.learned_slice.n_shared << ','
                << m.learned_slice.n_ded_s << "] goodput_bps=" << m.scheduled_goodput_bps
                << " ns_outage=" << m.ns_outage_rate() << " (" << m.ns_outages << '/'
                << m.ns_attempts << ")\n";
      return 0;
    }
    if (*preset_cmd) {
      hmasim::PresetResult res;
      if (preset_name == "rate_vs_eps")
        res = hmasim::run_rate_vs_eps(out_dir, reps, have_seed ? seed_override : 0);
      else if (preset_name == "power_alloc")
        res = hmasim::run_power_alloc(out_dir);
      else if (preset_name == "oracle_check")
        res = hmasim::run_oracle_check(out_dir);
      else {
        std::cerr << "error: unknown preset '" << preset_name
                  << "' (expected rate_vs_eps, power_alloc, or oracle_check)\n";
        return 2;
      }
      for (const auto& f : res.files) std::cout << "wrote " << f.string() << '\n';
      for (const auto& n : res.notes) std::cout << n << '\n';
      return 0;
    }
    if (*validate_cmd) {
      const hmasim::SimConfig cfg = hmasim::load_config(config_path);
      for (const std::string& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';
      std::cout << config_path << ": OK (mode=" << hmasim::policy_name(cfg.policy)
                << ", seed=" << cfg.seed << ")\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
