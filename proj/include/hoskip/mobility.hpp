#pragma once

#include <vector>

#include "hoskip/geometry.hpp"

namespace hoskip {

// Directed line segment traversed at constant velocity.
struct Trajectory {
  Point origin;
  Point direction;  // unit vector
  double length_km = 0.0;
  double velocity_kmh = 0.0;

  Point at(double s) const;  // throws std::out_of_range for s outside [0, length]
  Point endpoint() const { return origin + length_km * direction; }
  void validate() const;
};

// One cell visit in arc-length coordinates along the trajectory.
struct CellVisit {
  int bs_id = 0;
  double s_entry = 0.0;
  double s_exit = 0.0;
};

// Contiguous cell visits covering [0, length]; consecutive visits have
// distinct stations. Handover count along the trajectory is visits - 1.
struct VisitSequence {
  std::vector<CellVisit> visits;
  double length_km = 0.0;
  int merged_slivers = 0;  // sub-tolerance dwells folded into a neighbour

  std::size_t handovers() const {
    return visits.empty() ? 0 : visits.size() - 1;
  }
  // CSV: bs_id,s_entry,s_exit
  void write_csv(std::ostream& os) const;
};

// Walks the trajectory in `step_km` increments, detecting serving-station
// changes and refining each boundary crossing by bisection to within
// `tol_km`. Distinct crossings closer together than the tolerance may merge.
VisitSequence extract_visits(const Trajectory& traj, const Deployment& dep,
                             double step_km, double tol_km);

// Minimum distance between the station and the trajectory stretch covered by
// the visit (point-to-segment distance clamped to the visit interval).
double min_distance_in_visit(const Trajectory& traj, const CellVisit& visit,
                             const BaseStation& bs);

}  // namespace hoskip
