#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hoskip/metrics.hpp"

namespace hoskip {

struct ModelConfig {
  ModelTag tag = ModelTag::Ppp;
  // PPP (single tier)
  double lambda = 50.0;
  double power = 1.0;
  double path_loss_exp = 4.0;
  // Matern cluster (two tier)
  PcpParams pcp;

  double effective_intensity() const {
    return tag == ModelTag::Ppp ? lambda : pcp.total_intensity();
  }
};

// Everything a scenario run depends on. Negative step/tol/guard select the
// intensity-scaled defaults (0.1/sqrt(l'), 1e-4/sqrt(l'), 5/sqrt(l')).
struct ScenarioConfig {
  std::string name = "scenario";
  ModelConfig model;
  double window_side_km = 6.0;
  double guard_km = -1.0;
  double noise_power = 0.0;
  double trajectory_len_km = 2.0;
  double step_km = -1.0;
  double tol_km = -1.0;
  std::vector<PolicyConfig> policies;
  std::vector<double> velocities_kmh;
  double ho_delay_s = 1.0;
  double bandwidth_hz = 10e6;
  std::vector<double> thresholds_db;  // empty -> no coverage curves
  int n_replications = 200;
  int rate_samples_per_rep = 200;      // per policy
  int coverage_samples_per_rep = 200;  // per policy
  int area_probe_count = 20000;
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 -> hardware concurrency

  double resolved_guard() const;
  double resolved_step() const;
  double resolved_tol() const;
  Window make_window() const;

  void validate() const;      // throws naming the offending field
  void apply_fast_mode();     // divide sampling budgets by 10
};

struct SchemeResult {
  PolicyConfig policy;
  RateEstimate rate;        // std_err is the between-replication (cluster) SE
  double ho_per_km = 0.0;
  double ho_per_km_se = 0.0;
  double skip_fraction = 0.0;      // skipped visits / (visits - 1)
  double blackout_fraction = 0.0;  // arc-length fraction under blackout
  CoverageCurve coverage;
  // Per-replication rate means; schemes share replication geometry and draw
  // streams, so paired differences give the right SE for comparisons.
  std::vector<double> rep_rates;

  MetricsReport report_at(double velocity_kmh, double delay_s,
                          double bandwidth_hz) const;
};

struct ScenarioResult {
  ScenarioConfig config;
  std::vector<SchemeResult> schemes;
  double total_trajectory_km = 0.0;
  long total_visits = 0;
  int deployment_resamples = 0;
  int sliver_merges = 0;
  std::vector<std::uint64_t> replication_seeds;
  double wall_seconds = 0.0;

  const SchemeResult& scheme(const std::string& name) const;
};

// Seeded end-to-end run: per replication, sample a deployment, place a
// trajectory in the inner region, extract visits, apply every policy and
// accumulate rate/coverage/handover statistics. Replications are dispatched
// to a small worker pool; every random stream is keyed by (master_seed,
// replication), and reduction runs in replication order, so results do not
// depend on the thread count.
ScenarioResult run_scenario(const ScenarioConfig& config);

// out_dir/<scenario>/<scheme>/{metrics.csv,coverage.csv} plus a scenario
// manifest.json with seeds, parameters, counters and result summaries.
// CSVs are byte-stable for a fixed master seed.
std::vector<std::filesystem::path> write_scenario_outputs(
    const ScenarioResult& result, const std::filesystem::path& out_dir);

// INI-style config: [section] blocks of key = value lines, '#' comments.
ScenarioConfig load_config(const std::filesystem::path& file);
// Dotted override, e.g. "model.lambda=30"; throws on unknown keys.
void apply_override(ScenarioConfig& config, const std::string& assignment);
// Stable hex digest of the run-relevant fields.
std::string config_digest(const ScenarioConfig& config);

struct CalibrationTarget {
  std::optional<double> rate;           // nats/s/Hz
  std::optional<double> skip_fraction;  // in [0, 1]
  double tolerance = 0.005;
};

struct CalibrationResult {
  double threshold = 0.0;  // km (location) or km^2 (size)
  double achieved = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Bisection over the policy's free threshold (L for location-aware/hybrid,
// s for size-aware) until the simulated target is met. Deployments,
// trajectories and visit features are sampled once and reused across
// evaluations, so the objective is a deterministic monotone step function.
// Throws if the target is unreachable within the threshold bounds.
CalibrationResult calibrate_threshold(const ScenarioConfig& base,
                                      const PolicyConfig& policy,
                                      const CalibrationTarget& target);

// Canned reproduction scenarios ------------------------------------------

enum class ReproId { Fig2, Fig3, Fig4, Fig6, Table2, Table3 };

ReproId parse_repro_id(const std::string& id);  // throws on unknown id
const char* repro_id_name(ReproId id);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ReproOutcome {
  std::vector<std::filesystem::path> files;
  std::vector<CheckResult> checks;
};

// Runs the canned scenario behind the given artifact, writes plot-ready CSV
// (series,x,y,ci) and a pass/fail check file, and returns the checks.
ReproOutcome reproduce(ReproId id, const std::filesystem::path& out_dir,
                       bool fast = false);

// Single-tier pipeline shared by the table/throughput artifacts: calibrates
// the location/size/hybrid thresholds against the non-IC rate targets, then
// runs the full scenario with every scheme in its IC and non-IC variants.
struct SingleTierStudy {
  ScenarioResult result;
  CalibrationResult la_cal;
  CalibrationResult sa_cal;
  CalibrationResult hb_cal;
  double hb_area_km2 = 0.0;  // held fixed during the hybrid calibration
};
SingleTierStudy run_single_tier_study(bool fast = false);

// Two-tier pipeline: best-connected plus location-aware at the two canned
// distance thresholds, IC and non-IC.
ScenarioResult run_two_tier_study(bool fast = false);

ScenarioConfig single_tier_base_config();
ScenarioConfig two_tier_base_config();

// First velocity in [v_lo, v_hi] where scheme b's throughput meets or
// exceeds scheme a's, found by scan + bisection on the capped linear
// curves; NaN when there is no crossing in range.
double crossover_velocity(double rate_a, double ho_per_km_a, double rate_b,
                          double ho_per_km_b, double delay_s, double v_lo,
                          double v_hi);

// Mean downlink coverage of a best-connected user in an interference-limited
// (zero-noise) equal-power field with path-loss exponent 4.
double ppp_coverage_closed_form_eta4(double threshold_linear);

}  // namespace hoskip
