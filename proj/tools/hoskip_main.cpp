#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hoskip/experiment.hpp"
#include "hoskip/version.hpp"

namespace {

int run_simulate(const std::string& config_file,
                 const std::vector<std::string>& overrides,
                 std::optional<std::uint64_t> seed, const std::string& out,
                 bool fast, int threads) {
  hoskip::ScenarioConfig cfg = hoskip::load_config(config_file);
  for (const auto& o : overrides) hoskip::apply_override(cfg, o);
  if (seed) cfg.master_seed = *seed;
  if (threads >= 0) cfg.threads = threads;
  if (fast) cfg.apply_fast_mode();
  cfg.validate();

  const auto result = hoskip::run_scenario(cfg);
  const auto files = hoskip::write_scenario_outputs(result, out);
  for (const auto& s : result.schemes) {
    std::printf("%-12s R=%.4f +/- %.4f  H_l=%.4f/km  skips=%.3f\n",
                s.policy.name.c_str(), s.rate.mean, s.rate.std_err,
                s.ho_per_km, s.skip_fraction);
  }
  std::printf("wrote %zu file(s) under %s (%.1f s)\n", files.size(),
              out.c_str(), result.wall_seconds);
  return 0;
}

int run_reproduce(const std::string& id, const std::string& out, bool fast) {
  const auto outcome =
      hoskip::reproduce(hoskip::parse_repro_id(id), out, fast);
  int fails = 0;
  for (const auto& c : outcome.checks) {
    std::printf("%s %s: %s\n", c.pass ? "[PASS]" : "[FAIL]", c.name.c_str(),
                c.detail.c_str());
    if (!c.pass) ++fails;
  }
  std::printf("%zu file(s) written; %d check(s) failed\n",
              outcome.files.size(), fails);
  return 0;
}

int run_calibrate(const std::string& scheme, std::optional<double> target_r,
                  std::optional<double> target_skip,
                  std::optional<double> fixed_area,
                  const std::string& config_file,
                  const std::vector<std::string>& overrides, bool fast,
                  int threads) {
  hoskip::ScenarioConfig cfg = config_file.empty()
                                   ? hoskip::single_tier_base_config()
                                   : hoskip::load_config(config_file);
  for (const auto& o : overrides) hoskip::apply_override(cfg, o);
  if (threads >= 0) cfg.threads = threads;
  if (fast) cfg.apply_fast_mode();

  hoskip::PolicyConfig policy;
  policy.name = scheme;
  if (scheme == "la") policy.kind = hoskip::PolicyKind::LocationAware;
  else if (scheme == "sa") policy.kind = hoskip::PolicyKind::SizeAware;
  else if (scheme == "hb") policy.kind = hoskip::PolicyKind::Hybrid;
  else
    throw std::invalid_argument(
        "calibrate: scheme must be one of la, sa, hb");
  // Placeholders; the search overwrites the scheme's free threshold. The
  // hybrid search holds the area threshold fixed at --area.
  policy.min_dist_threshold_km = 1e-3;
  policy.area_threshold_km2 =
      fixed_area ? *fixed_area
                 : 0.38 / cfg.model.effective_intensity();
  policy.area_probe_count = cfg.area_probe_count;

  hoskip::CalibrationTarget target;
  target.rate = target_r;
  target.skip_fraction = target_skip;
  const auto res = hoskip::calibrate_threshold(cfg, policy, target);
  const char* unit =
      policy.kind == hoskip::PolicyKind::SizeAware ? "km^2" : "km";
  std::printf("threshold = %.6g %s (achieved %.4f in %d evaluations%s)\n",
              res.threshold, unit, res.achieved, res.evaluations,
              res.converged ? "" : ", not converged");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator for handover skipping in dense "
               "downlink cellular networks"};
  app.set_version_flag("--version", hoskip::kVersion);
  app.require_subcommand(1);

  std::string config_file, out = "out", id, scheme;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> target_r, target_skip, fixed_area;
  bool fast = false;
  int threads = -1;

  auto* sim = app.add_subcommand("simulate", "Run a scenario from a config file");
  sim->add_option("--config", config_file, "scenario config file")->required();
  sim->add_option("--set", overrides,
                  "override a config key, e.g. --set model.lambda=30");
  sim->add_option("--seed", seed, "override the master seed");
  sim->add_option("--out", out, "output directory");
  sim->add_option("--threads", threads, "worker threads (0 = hardware)");
  sim->add_flag("--fast", fast, "divide sampling budgets for smoke runs");

  auto* rep = app.add_subcommand("reproduce",
                                 "Run a canned study and emit plot data "
                                 "plus a pass/fail check file");
  rep->add_option("--id", id, "fig2|fig3|fig4|fig6|table2|table3")->required();
  rep->add_option("--out", out, "output directory");
  rep->add_flag("--fast", fast, "divide sampling budgets for smoke runs");

  auto* cal = app.add_subcommand(
      "calibrate", "Search a skipping threshold for a target rate or "
                   "skip fraction");
  cal->add_option("--scheme", scheme, "la|sa|hb")->required();
  cal->add_option("--target-r", target_r, "target spectral efficiency");
  cal->add_option("--target-skip", target_skip, "target skip fraction");
  cal->add_option("--area", fixed_area,
                  "fixed area threshold for the hybrid search (km^2)");
  cal->add_option("--config", config_file, "base scenario config file");
  cal->add_option("--set", overrides, "override a config key");
  cal->add_option("--threads", threads, "worker threads (0 = hardware)");
  cal->add_flag("--fast", fast, "divide sampling budgets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return run_simulate(config_file, overrides, seed, out, fast, threads);
    if (rep->parsed()) return run_reproduce(id, out, fast);
    if (cal->parsed())
      return run_calibrate(scheme, target_r, target_skip, fixed_area,
                           config_file, overrides, fast, threads);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
