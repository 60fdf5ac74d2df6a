#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "hoskip/rng.hpp"

namespace hoskip {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double c, Point p) { return {c * p.x, c * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(Point a, Point b) {
  return std::sqrt(squared_distance(a, b));
}

// Rectangular simulation window (km). Measurements are confined to the
// guard-excluded inner rectangle to suppress edge effects.
struct Window {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double guard = 0.0;

  static Window square(double side_km, double guard_km = 0.0);

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double inner_width() const { return width() - 2.0 * guard; }
  double inner_height() const { return height() - 2.0 * guard; }
  double inner_area() const { return inner_width() * inner_height(); }

  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool inner_contains(Point p) const {
    return p.x >= x_min + guard && p.x <= x_max - guard &&
           p.y >= y_min + guard && p.y <= y_max - guard;
  }

  // Window grown by `margin` on every side, same guard.
  Window dilated(double margin) const;

  void validate() const;  // throws std::invalid_argument
};

struct BaseStation {
  int id = 0;
  Point position;
  int tier = 1;
  double power = 1.0;          // transmit power, watt
  double path_loss_exp = 4.0;  // > 2
};

// Distance-averaged received signal strength P * r^-eta (fading excluded);
// +inf at zero distance.
double rss(const BaseStation& bs, Point p);

enum class ModelTag { Ppp, MaternPcp };

// Matern cluster process: tier-1 parents form a PPP of intensity lambda_p,
// each spawning Poisson(lambda_c) tier-2 daughters uniform in a disk of
// radius `radius`. Total intensity lambda_p * (1 + lambda_c).
struct PcpParams {
  double lambda_p = 1.0;  // parents per km^2
  double lambda_c = 0.0;  // mean daughters per cluster
  double radius = 1.0;    // cluster disk radius, km
  double p1 = 1.0;
  double p2 = 1.0;
  double eta1 = 4.0;
  double eta2 = 4.0;

  double total_intensity() const { return lambda_p * (1.0 + lambda_c); }
  void validate() const;
};

// Immutable set of base stations with a uniform-grid spatial index for
// max-RSS association queries. Safe to share read-only across threads.
class Deployment {
 public:
  Deployment(std::vector<BaseStation> stations, Window window, ModelTag tag,
             std::uint64_t seed, int resample_count = 0);

  const std::vector<BaseStation>& stations() const { return stations_; }
  const BaseStation& station(int index) const { return stations_[index]; }
  std::size_t size() const { return stations_.size(); }
  const Window& window() const { return window_; }
  ModelTag model_tag() const { return tag_; }
  std::uint64_t seed() const { return seed_; }
  int resample_count() const { return resample_count_; }

  int index_of(int station_id) const;  // throws on unknown id

  // Stations per km^2 over the full window.
  double empirical_intensity() const;
  // Stations per km^2 over the guard-excluded inner rectangle.
  double inner_intensity() const;

  // Index of the station with maximal average RSS at p. Equal-parameter
  // single tier reduces to the Euclidean nearest neighbour. Exact ties go
  // to the lowest id.
  int serving_index(Point p) const;
  const BaseStation& serving_station(Point p) const {
    return stations_[serving_index(p)];
  }

  // Flat CSV: id,x,y,tier,power,eta
  void write_csv(std::ostream& os) const;
  static Deployment read_csv(std::istream& is, Window window, ModelTag tag,
                             std::uint64_t seed);

 private:
  void build_index();
  double rss_upper_bound(double dist) const;

  std::vector<BaseStation> stations_;
  Window window_;
  ModelTag tag_;
  std::uint64_t seed_;
  int resample_count_ = 0;

  // CSR grid over the window bounding box.
  int nx_ = 0, ny_ = 0;
  double cell_size_ = 0.0;
  std::vector<int> cell_start_;
  std::vector<int> cell_items_;
  // Distinct (power, eta) pairs, for the search-radius bound.
  std::vector<std::pair<double, double>> tier_params_;
  bool ids_are_indices_ = false;
  std::vector<std::pair<int, int>> id_index_;  // sorted (id, index), fallback
};

// Homogeneous PPP of the given intensity; all stations tier 1 with the given
// power and path-loss exponent. A draw whose inner region is empty is
// rejected and resampled; the count is recorded on the deployment.
Deployment sample_ppp(double lambda, const Window& window, std::uint64_t seed,
                      double power = 1.0, double path_loss_exp = 4.0);

// Matern cluster deployment. Parents are sampled in the window dilated by
// the cluster radius so the clipped daughter process stays stationary inside
// the window; parents outside the window contribute daughters only.
Deployment sample_matern_pcp(const PcpParams& params, const Window& window,
                             std::uint64_t seed);

struct CellAreaEstimate {
  double area_km2 = 0.0;
  double rel_std_err = std::numeric_limits<double>::infinity();
  bool unbounded = false;  // probe box hit the window-size cap
};

// Monte Carlo footprint estimate: uniform probes in a box centred on the
// station, grown (doubling) until a ring of boundary probes all serve other
// stations, capped at the window size.
CellAreaEstimate cell_area(const BaseStation& bs, const Deployment& dep,
                           int n_probe, Rng& rng);

}  // namespace hoskip
