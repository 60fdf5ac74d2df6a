#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hoskip/mobility.hpp"
#include "hoskip/radio.hpp"

namespace hoskip {

enum class PolicyKind {
  BestConnected,  // handover at every cell boundary
  Alternating,    // skip every other visited cell
  LocationAware,  // skip cells the trajectory only grazes (min distance > L)
  SizeAware,      // skip cells with footprint below the area threshold
  Hybrid,         // union of the location and size predicates
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::BestConnected;
  std::string name;                                // output label
  std::optional<double> min_dist_threshold_km;     // L, LocationAware/Hybrid
  std::optional<double> area_threshold_km2;        // s, SizeAware/Hybrid
  bool ic_enabled = true;
  bool comp_enabled = false;
  int area_probe_count = 20000;

  void validate() const;  // missing thresholds -> invalid_argument
};

const char* policy_kind_name(PolicyKind kind);

// Per-visit features the skip predicates look at. Computed once per visit
// sequence so several policies can be evaluated on identical inputs.
struct VisitFeatures {
  std::vector<double> min_dist_km;  // per visit; min distance to the cell's BS
  std::vector<double> area_km2;     // per visit; empty unless areas requested
};

// Area estimates are keyed by station id off `rng`, so repeated calls (and
// different policies sharing one rng) see identical values.
VisitFeatures compute_visit_features(const VisitSequence& visits,
                                     const Trajectory& traj,
                                     const Deployment& dep, bool with_areas,
                                     int area_probe_count, const Rng& rng);

// Pure predicate step: first and last visits are never skipped.
std::vector<bool> decide_skips(const VisitSequence& visits,
                               const VisitFeatures& features,
                               const PolicyConfig& config);

// Convenience form that computes the features it needs.
std::vector<bool> decide_skips(const VisitSequence& visits,
                               const Trajectory& traj, const Deployment& dep,
                               const PolicyConfig& config, const Rng& rng);

struct ServiceSegment {
  double s_start = 0.0;
  double s_end = 0.0;
  ServiceMode mode;
};

// Contiguous service segments tiling [0, length]. A handover is counted at
// each entry into a kept cell; entering a skipped cell costs nothing, and
// the post-blackout join to the target counts once.
struct ServiceSchedule {
  std::vector<ServiceSegment> segments;
  int ho_count = 0;
  int skip_count = 0;

  const ServiceSegment& segment_at(double s) const;
  // CSV: s_start,s_end,mode,serving,target,skipped
  void write_csv(std::ostream& os) const;
};

// Kept visits become best-connected segments. Each maximal run of skipped
// visits becomes blackout segments bracketed by the last kept station before
// the run (serving) and the first kept one after it (target); the skipped
// station tracks the visit owning each stretch.
ServiceSchedule build_schedule(const VisitSequence& visits,
                               const std::vector<bool>& skip_flags,
                               const PolicyConfig& config);

}  // namespace hoskip
