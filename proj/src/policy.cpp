#include "hoskip/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

namespace hoskip {

const char* policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::BestConnected: return "best_connected";
    case PolicyKind::Alternating: return "alternating";
    case PolicyKind::LocationAware: return "location_aware";
    case PolicyKind::SizeAware: return "size_aware";
    case PolicyKind::Hybrid: return "hybrid";
  }
  return "?";
}

void PolicyConfig::validate() const {
  const bool needs_dist =
      kind == PolicyKind::LocationAware || kind == PolicyKind::Hybrid;
  const bool needs_area =
      kind == PolicyKind::SizeAware || kind == PolicyKind::Hybrid;
  if (needs_dist &&
      (!min_dist_threshold_km || !(*min_dist_threshold_km > 0.0)))
    throw std::invalid_argument(
        "policy: min_dist_threshold_km required and positive for "
        "location-aware skipping");
  if (needs_area && (!area_threshold_km2 || !(*area_threshold_km2 > 0.0)))
    throw std::invalid_argument(
        "policy: area_threshold_km2 required and positive for size-aware "
        "skipping");
  if (needs_area && area_probe_count < 10000)
    throw std::invalid_argument(
        "policy: area_probe_count must be at least 10000");
}

VisitFeatures compute_visit_features(const VisitSequence& visits,
                                     const Trajectory& traj,
                                     const Deployment& dep, bool with_areas,
                                     int area_probe_count, const Rng& rng) {
  VisitFeatures f;
  f.min_dist_km.reserve(visits.visits.size());
  std::map<int, double> area_memo;
  for (const auto& v : visits.visits) {
    const auto& bs = dep.station(dep.index_of(v.bs_id));
    f.min_dist_km.push_back(min_distance_in_visit(traj, v, bs));
    if (with_areas) {
      auto it = area_memo.find(v.bs_id);
      if (it == area_memo.end()) {
        // Keyed off the station id so every policy sharing `rng` sees the
        // same estimate regardless of evaluation order.
        Rng r = rng.fork(0xA5EAu, static_cast<std::uint64_t>(v.bs_id));
        const auto est = cell_area(bs, dep, area_probe_count, r);
        it = area_memo.emplace(v.bs_id, est.area_km2).first;
      }
      f.area_km2.push_back(it->second);
    }
  }
  return f;
}

std::vector<bool> decide_skips(const VisitSequence& visits,
                               const VisitFeatures& features,
                               const PolicyConfig& config) {
  config.validate();
  const std::size_t n = visits.visits.size();
  if (n == 0) throw std::invalid_argument("decide_skips: no visits");
  if (features.min_dist_km.size() != n)
    throw std::invalid_argument("decide_skips: features do not match visits");

  std::vector<bool> skip(n, false);
  auto dist_pred = [&](std::size_t i) {
    return features.min_dist_km[i] > *config.min_dist_threshold_km;
  };
  auto area_pred = [&](std::size_t i) {
    if (features.area_km2.size() != n)
      throw std::invalid_argument("decide_skips: area features missing");
    return features.area_km2[i] < *config.area_threshold_km2;
  };

  switch (config.kind) {
    case PolicyKind::BestConnected:
      break;
    case PolicyKind::Alternating:
      for (std::size_t i = 1; i < n; i += 2) skip[i] = true;
      break;
    case PolicyKind::LocationAware:
      for (std::size_t i = 1; i + 1 < n; ++i) skip[i] = dist_pred(i);
      break;
    case PolicyKind::SizeAware:
      for (std::size_t i = 1; i + 1 < n; ++i) skip[i] = area_pred(i);
      break;
    case PolicyKind::Hybrid:
      for (std::size_t i = 1; i + 1 < n; ++i)
        skip[i] = dist_pred(i) || area_pred(i);
      break;
  }
  // The user starts associated and there is no target beyond the end.
  skip.front() = false;
  skip.back() = false;
  return skip;
}

std::vector<bool> decide_skips(const VisitSequence& visits,
                               const Trajectory& traj, const Deployment& dep,
                               const PolicyConfig& config, const Rng& rng) {
  config.validate();
  const bool with_areas =
      config.kind == PolicyKind::SizeAware || config.kind == PolicyKind::Hybrid;
  const auto features = compute_visit_features(
      visits, traj, dep, with_areas, config.area_probe_count, rng);
  return decide_skips(visits, features, config);
}

const ServiceSegment& ServiceSchedule::segment_at(double s) const {
  if (segments.empty())
    throw std::out_of_range("schedule: empty");
  auto it = std::upper_bound(
      segments.begin(), segments.end(), s,
      [](double v, const ServiceSegment& seg) { return v < seg.s_end; });
  if (it == segments.end()) --it;
  return *it;
}

void ServiceSchedule::write_csv(std::ostream& os) const {
  os << "s_start,s_end,mode,serving,target,skipped\n";
  char line[160];
  for (const auto& seg : segments) {
    const char* mode = "bc";
    if (seg.mode.tag == ServiceTag::Blackout)
      mode = seg.mode.ic ? "bk_ic" : "bk";
    else if (seg.mode.tag == ServiceTag::BlackoutComp)
      mode = seg.mode.ic ? "bk_comp_ic" : "bk_comp";
    std::snprintf(line, sizeof line, "%.17g,%.17g,%s,%d,%d,%d\n", seg.s_start,
                  seg.s_end, mode, seg.mode.serving_id, seg.mode.target_id,
                  seg.mode.skipped_id);
    os << line;
  }
}

ServiceSchedule build_schedule(const VisitSequence& visits,
                               const std::vector<bool>& skip_flags,
                               const PolicyConfig& config) {
  const auto& vs = visits.visits;
  if (vs.empty()) throw std::invalid_argument("build_schedule: no visits");
  if (skip_flags.size() != vs.size())
    throw std::invalid_argument("build_schedule: flag/visit size mismatch");
  if (skip_flags.front() || skip_flags.back())
    throw std::invalid_argument(
        "build_schedule: first and last visits cannot be skipped");

  ServiceSchedule sched;
  int kept = 0;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (!skip_flags[i]) {
      ++kept;
      ServiceSegment seg;
      seg.s_start = vs[i].s_entry;
      seg.s_end = vs[i].s_exit;
      seg.mode.tag = ServiceTag::BestConnected;
      seg.mode.serving_id = vs[i].bs_id;
      sched.segments.push_back(seg);
      continue;
    }
    // Bracket of the blackout run this skipped visit belongs to.
    std::size_t prev = i - 1;
    while (skip_flags[prev]) --prev;
    std::size_t next = i + 1;
    while (skip_flags[next]) ++next;

    ServiceSegment seg;
    seg.s_start = vs[i].s_entry;
    seg.s_end = vs[i].s_exit;
    const int serving = vs[prev].bs_id;
    const int target = vs[next].bs_id;
    if (vs[i].bs_id == serving || vs[i].bs_id == target) {
      // Weighted cells can re-enter: the "skipped" stretch is owned by one
      // of the live associations, so it is plain service from that station.
      seg.mode.tag = ServiceTag::BestConnected;
      seg.mode.serving_id = vs[i].bs_id;
      sched.segments.push_back(seg);
      continue;
    }
    // A bracket collapsing to one station degenerates to single-server
    // service; cooperation needs two distinct transmitters.
    seg.mode.tag = (config.comp_enabled && serving != target)
                       ? ServiceTag::BlackoutComp
                       : ServiceTag::Blackout;
    seg.mode.serving_id = serving;
    seg.mode.target_id = target;
    seg.mode.skipped_id = vs[i].bs_id;
    seg.mode.ic = config.ic_enabled;
    sched.segments.push_back(seg);
  }
  sched.ho_count = kept - 1;
  sched.skip_count = static_cast<int>(vs.size()) - kept;
  return sched;
}

}  // namespace hoskip
