#include "hoskip/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace hoskip {

Point Trajectory::at(double s) const {
  if (s < 0.0 || s > length_km)
    throw std::out_of_range("trajectory: arc length outside [0, length]");
  return origin + s * direction;
}

void Trajectory::validate() const {
  const double n = std::hypot(direction.x, direction.y);
  if (std::abs(n - 1.0) > 1e-12)
    throw std::invalid_argument("trajectory.direction: must be a unit vector");
  if (!(length_km > 0.0))
    throw std::invalid_argument("trajectory.length: must be positive");
  if (velocity_kmh < 0.0)
    throw std::invalid_argument("trajectory.velocity: must be non-negative");
}

void VisitSequence::write_csv(std::ostream& os) const {
  os << "bs_id,s_entry,s_exit\n";
  char line[96];
  for (const auto& v : visits) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", v.bs_id, v.s_entry,
                  v.s_exit);
    os << line;
  }
}

VisitSequence extract_visits(const Trajectory& traj, const Deployment& dep,
                             double step_km, double tol_km) {
  traj.validate();
  if (dep.size() == 0)
    throw std::invalid_argument("extract_visits: empty deployment");
  if (!(step_km > 0.0) || !(tol_km > 0.0) || step_km < tol_km)
    throw std::invalid_argument(
        "extract_visits: need step > 0, tol > 0, step >= tol");

  auto serving = [&](double s) { return dep.serving_index(traj.at(s)); };

  VisitSequence seq;
  seq.length_km = traj.length_km;

  std::vector<CellVisit> raw;
  double s_prev = 0.0;
  int cur = serving(0.0);
  double entry = 0.0;

  while (s_prev < traj.length_km) {
    const double s_next = std::min(s_prev + step_km, traj.length_km);
    const int nxt = serving(s_next);
    if (nxt != cur) {
      // Refine the crossing; the id seen at `hi` may be a third cell.
      double lo = s_prev, hi = s_next;
      int hi_id = nxt;
      while (hi - lo > tol_km) {
        const double mid = 0.5 * (lo + hi);
        const int m = serving(mid);
        if (m == cur) {
          lo = mid;
        } else {
          hi = mid;
          hi_id = m;
        }
      }
      raw.push_back({dep.station(cur).id, entry, hi});
      entry = hi;
      cur = hi_id;
      s_prev = hi;
    } else {
      s_prev = s_next;
    }
  }
  raw.push_back({dep.station(cur).id, entry, traj.length_km});

  // Fold sub-tolerance dwells into a neighbour, then re-join any adjacent
  // visits that ended up with the same station.
  std::vector<CellVisit> merged;
  for (const auto& v : raw) {
    const bool sliver = (v.s_exit - v.s_entry) < tol_km && raw.size() > 1;
    if (sliver && !merged.empty()) {
      merged.back().s_exit = v.s_exit;
      ++seq.merged_slivers;
      continue;
    }
    if (!merged.empty() && merged.back().bs_id == v.bs_id) {
      merged.back().s_exit = v.s_exit;
      ++seq.merged_slivers;
      continue;
    }
    merged.push_back(v);
  }
  // A leading sliver merges forward instead.
  while (merged.size() > 1 &&
         (merged.front().s_exit - merged.front().s_entry) < tol_km) {
    merged[1].s_entry = merged.front().s_entry;
    merged.erase(merged.begin());
    ++seq.merged_slivers;
    if (merged.size() > 1 && merged[0].bs_id == merged[1].bs_id) {
      merged[1].s_entry = merged[0].s_entry;
      merged.erase(merged.begin());
    }
  }

  seq.visits = std::move(merged);
  return seq;
}

double min_distance_in_visit(const Trajectory& traj, const CellVisit& visit,
                             const BaseStation& bs) {
  const double s_perp = dot(bs.position - traj.origin, traj.direction);
  const double s = std::clamp(s_perp, visit.s_entry, visit.s_exit);
  return distance(traj.origin + s * traj.direction, bs.position);
}

}  // namespace hoskip
