#include "hoskip/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hoskip {

namespace {

constexpr int kMaxResampleAttempts = 1000;

// P * (r^2)^(-eta/2) with the ubiquitous eta = 4 special-cased.
inline double rss_from_r2(double power, double eta, double r2) {
  if (r2 <= 0.0) return std::numeric_limits<double>::infinity();
  if (eta == 4.0) return power / (r2 * r2);
  return power * std::pow(r2, -0.5 * eta);
}

}  // namespace

Window Window::square(double side_km, double guard_km) {
  Window w{0.0, side_km, 0.0, side_km, guard_km};
  w.validate();
  return w;
}

Window Window::dilated(double margin) const {
  return Window{x_min - margin, x_max + margin, y_min - margin,
                y_max + margin, guard};
}

void Window::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min))
    throw std::invalid_argument("window: x_max/y_max must exceed x_min/y_min");
  if (guard < 0.0 || guard >= 0.5 * std::min(width(), height()))
    throw std::invalid_argument(
        "window.guard: must be in [0, min(width, height)/2)");
}

double rss(const BaseStation& bs, Point p) {
  return rss_from_r2(bs.power, bs.path_loss_exp,
                     squared_distance(bs.position, p));
}

void PcpParams::validate() const {
  if (!(lambda_p > 0.0))
    throw std::invalid_argument("pcp.lambda_p: must be positive");
  if (lambda_c < 0.0)
    throw std::invalid_argument("pcp.lambda_c: must be non-negative");
  if (!(radius > 0.0)) throw std::invalid_argument("pcp.radius: must be positive");
  if (!(p1 > 0.0) || !(p2 > 0.0))
    throw std::invalid_argument("pcp.p1/p2: powers must be positive");
  if (!(eta1 > 2.0) || !(eta2 > 2.0))
    throw std::invalid_argument("pcp.eta1/eta2: exponents must exceed 2");
}

Deployment::Deployment(std::vector<BaseStation> stations, Window window,
                       ModelTag tag, std::uint64_t seed, int resample_count)
    : stations_(std::move(stations)),
      window_(window),
      tag_(tag),
      seed_(seed),
      resample_count_(resample_count) {
  window_.validate();
  for (const auto& bs : stations_) {
    if (!window_.contains(bs.position))
      throw std::invalid_argument("deployment: station outside the window");
    if (!(bs.power > 0.0) || !(bs.path_loss_exp > 2.0))
      throw std::invalid_argument("deployment: invalid station parameters");
  }
  build_index();
}

void Deployment::build_index() {
  ids_are_indices_ = true;
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    if (stations_[i].id != static_cast<int>(i)) {
      ids_are_indices_ = false;
      break;
    }
  }
  if (!ids_are_indices_) {
    id_index_.reserve(stations_.size());
    for (std::size_t i = 0; i < stations_.size(); ++i)
      id_index_.emplace_back(stations_[i].id, static_cast<int>(i));
    std::sort(id_index_.begin(), id_index_.end());
    for (std::size_t i = 1; i < id_index_.size(); ++i)
      if (id_index_[i].first == id_index_[i - 1].first)
        throw std::invalid_argument("deployment: duplicate station id");
  }

  for (const auto& bs : stations_) {
    std::pair<double, double> pe{bs.power, bs.path_loss_exp};
    if (std::find(tier_params_.begin(), tier_params_.end(), pe) ==
        tier_params_.end())
      tier_params_.push_back(pe);
  }

  // Aim for about one station per grid cell.
  const double target =
      stations_.empty()
          ? std::max(window_.width(), window_.height())
          : std::sqrt(window_.area() / static_cast<double>(stations_.size()));
  nx_ = std::max(1, static_cast<int>(window_.width() / target));
  ny_ = std::max(1, static_cast<int>(window_.height() / target));
  nx_ = std::min(nx_, 4096);
  ny_ = std::min(ny_, 4096);
  // Lower bound on a cell dimension, used in the ring-distance bound.
  cell_size_ = std::min(window_.width() / nx_, window_.height() / ny_);

  std::vector<int> counts(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  auto cell_of = [&](Point p) {
    int ix = static_cast<int>((p.x - window_.x_min) / window_.width() * nx_);
    int iy = static_cast<int>((p.y - window_.y_min) / window_.height() * ny_);
    ix = std::clamp(ix, 0, nx_ - 1);
    iy = std::clamp(iy, 0, ny_ - 1);
    return iy * nx_ + ix;
  };
  for (const auto& bs : stations_) ++counts[cell_of(bs.position) + 1];
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  cell_start_ = counts;
  cell_items_.resize(stations_.size());
  std::vector<int> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < stations_.size(); ++i)
    cell_items_[fill[cell_of(stations_[i].position)]++] =
        static_cast<int>(i);
}

int Deployment::index_of(int station_id) const {
  if (ids_are_indices_) {
    if (station_id < 0 || station_id >= static_cast<int>(stations_.size()))
      throw std::invalid_argument("deployment: unknown station id");
    return station_id;
  }
  auto it = std::lower_bound(id_index_.begin(), id_index_.end(),
                             std::make_pair(station_id, -1));
  if (it == id_index_.end() || it->first != station_id)
    throw std::invalid_argument("deployment: unknown station id");
  return it->second;
}

double Deployment::empirical_intensity() const {
  return static_cast<double>(stations_.size()) / window_.area();
}

double Deployment::inner_intensity() const {
  long n = 0;
  for (const auto& bs : stations_)
    if (window_.inner_contains(bs.position)) ++n;
  return static_cast<double>(n) / window_.inner_area();
}

double Deployment::rss_upper_bound(double dist) const {
  const double r2 = dist * dist;
  double best = 0.0;
  for (const auto& [p, eta] : tier_params_)
    best = std::max(best, rss_from_r2(p, eta, r2));
  return best;
}

int Deployment::serving_index(Point p) const {
  if (stations_.empty())
    throw std::invalid_argument("deployment: empty, no serving station");

  int ci = static_cast<int>((p.x - window_.x_min) / window_.width() * nx_);
  int cj = static_cast<int>((p.y - window_.y_min) / window_.height() * ny_);
  ci = std::clamp(ci, 0, nx_ - 1);
  cj = std::clamp(cj, 0, ny_ - 1);

  int best = -1;
  double best_rss = -1.0;
  const int max_ring = std::max(nx_, ny_);

  auto scan_cell = [&](int ix, int iy) {
    const int c = iy * nx_ + ix;
    for (int k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
      const int idx = cell_items_[k];
      const auto& bs = stations_[idx];
      const double v =
          rss_from_r2(bs.power, bs.path_loss_exp,
                      squared_distance(bs.position, p));
      if (v > best_rss ||
          (v == best_rss && best >= 0 && bs.id < stations_[best].id)) {
        best_rss = v;
        best = idx;
      }
    }
  };

  for (int ring = 0; ring <= max_ring + 1; ++ring) {
    if (ring > 0 && best >= 0) {
      // Any station on this ring or beyond is at least (ring-1) cells away.
      const double d_min = (ring - 1) * cell_size_;
      if (d_min > 0.0 && rss_upper_bound(d_min) <= best_rss) break;
    }
    const int lo_x = ci - ring, hi_x = ci + ring;
    const int lo_y = cj - ring, hi_y = cj + ring;
    if (hi_x < 0 || lo_x >= nx_ || hi_y < 0 || lo_y >= ny_) {
      if (best >= 0) break;
      continue;
    }
    for (int ix = std::max(0, lo_x); ix <= std::min(nx_ - 1, hi_x); ++ix) {
      if (lo_y >= 0) scan_cell(ix, lo_y);
      if (hi_y != lo_y && hi_y < ny_) scan_cell(ix, hi_y);
    }
    for (int iy = std::max(0, lo_y + 1); iy <= std::min(ny_ - 1, hi_y - 1);
         ++iy) {
      if (lo_x >= 0) scan_cell(lo_x, iy);
      if (hi_x != lo_x && hi_x < nx_) scan_cell(hi_x, iy);
    }
  }
  return best;
}

void Deployment::write_csv(std::ostream& os) const {
  os << "id,x,y,tier,power,eta\n";
  char line[160];
  for (const auto& bs : stations_) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%d,%.17g,%.17g\n", bs.id,
                  bs.position.x, bs.position.y, bs.tier, bs.power,
                  bs.path_loss_exp);
    os << line;
  }
}

Deployment Deployment::read_csv(std::istream& is, Window window, ModelTag tag,
                                std::uint64_t seed) {
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("deployment csv: missing header");
  std::vector<BaseStation> stations;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    BaseStation bs;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    if (!(ls >> bs.id >> bs.position.x >> bs.position.y >> bs.tier >>
          bs.power >> bs.path_loss_exp))
      throw std::invalid_argument("deployment csv: malformed row");
    stations.push_back(bs);
  }
  return Deployment(std::move(stations), window, tag, seed);
}

namespace {

bool inner_nonempty(const std::vector<BaseStation>& stations,
                    const Window& window) {
  for (const auto& bs : stations)
    if (window.inner_contains(bs.position)) return true;
  return false;
}

}  // namespace

Deployment sample_ppp(double lambda, const Window& window, std::uint64_t seed,
                      double power, double path_loss_exp) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda: must be positive");
  window.validate();
  Rng rng(mix64(seed, 0x9070u));
  for (int attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
    const long n = rng.poisson(lambda * window.area());
    std::vector<BaseStation> stations;
    stations.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
      BaseStation bs;
      bs.id = static_cast<int>(i);
      bs.position = {rng.uniform(window.x_min, window.x_max),
                     rng.uniform(window.y_min, window.y_max)};
      bs.tier = 1;
      bs.power = power;
      bs.path_loss_exp = path_loss_exp;
      stations.push_back(bs);
    }
    if (!inner_nonempty(stations, window)) continue;
    return Deployment(std::move(stations), window, ModelTag::Ppp, seed,
                      attempt);
  }
  throw std::runtime_error(
      "sample_ppp: resample limit reached with an empty inner region");
}

Deployment sample_matern_pcp(const PcpParams& params, const Window& window,
                             std::uint64_t seed) {
  params.validate();
  window.validate();
  const Window parent_win = window.dilated(params.radius);
  Rng rng(mix64(seed, 0x6D43u));
  for (int attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
    std::vector<BaseStation> stations;
    const long n_parents = rng.poisson(params.lambda_p * parent_win.area());
    int next_id = 0;
    for (long i = 0; i < n_parents; ++i) {
      const Point parent{rng.uniform(parent_win.x_min, parent_win.x_max),
                         rng.uniform(parent_win.y_min, parent_win.y_max)};
      if (window.contains(parent)) {
        stations.push_back(
            {next_id++, parent, 1, params.p1, params.eta1});
      }
      const long n_daughters = rng.poisson(params.lambda_c);
      for (long d = 0; d < n_daughters; ++d) {
        const double rad = params.radius * std::sqrt(rng.uniform());
        const double ang = rng.uniform(0.0, 2.0 * M_PI);
        const Point pos{parent.x + rad * std::cos(ang),
                        parent.y + rad * std::sin(ang)};
        if (window.contains(pos))
          stations.push_back({next_id++, pos, 2, params.p2, params.eta2});
      }
    }
    if (!inner_nonempty(stations, window)) continue;
    return Deployment(std::move(stations), window, ModelTag::MaternPcp, seed,
                      attempt);
  }
  throw std::runtime_error(
      "sample_matern_pcp: resample limit reached with an empty inner region");
}

CellAreaEstimate cell_area(const BaseStation& bs, const Deployment& dep,
                           int n_probe, Rng& rng) {
  if (n_probe <= 0)
    throw std::invalid_argument("cell_area: probe budget must be positive");
  const int self = dep.index_of(bs.id);
  const double lambda = std::max(dep.empirical_intensity(),
                                 1.0 / dep.window().area());
  const double cap = std::max(dep.window().width(), dep.window().height());
  double side = std::min(4.0 / std::sqrt(lambda), cap);

  // Grow the box until a full ring of boundary probes serves other stations.
  constexpr int kBoundaryProbes = 64;
  bool unbounded = false;
  for (;;) {
    bool hit = false;
    for (int k = 0; k < kBoundaryProbes && !hit; ++k) {
      const double t = (k + 0.5) / kBoundaryProbes * 4.0;  // perimeter coord
      const double half = 0.5 * side;
      Point q = bs.position;
      if (t < 1.0) {
        q.x += -half + t * side;
        q.y += -half;
      } else if (t < 2.0) {
        q.x += half;
        q.y += -half + (t - 1.0) * side;
      } else if (t < 3.0) {
        q.x += half - (t - 2.0) * side;
        q.y += half;
      } else {
        q.x += -half;
        q.y += half - (t - 3.0) * side;
      }
      hit = dep.serving_index(q) == self;
    }
    if (!hit) break;
    if (side >= cap) {
      unbounded = true;
      break;
    }
    side = std::min(2.0 * side, cap);
  }

  long inside = 0;
  for (int k = 0; k < n_probe; ++k) {
    const Point q{bs.position.x + (rng.uniform() - 0.5) * side,
                  bs.position.y + (rng.uniform() - 0.5) * side};
    if (dep.serving_index(q) == self) ++inside;
  }
  const double p = static_cast<double>(inside) / n_probe;
  CellAreaEstimate est;
  est.area_km2 = p * side * side;
  est.unbounded = unbounded;
  if (inside > 0)
    est.rel_std_err = std::sqrt((1.0 - p) / static_cast<double>(inside));
  return est;
}

}  // namespace hoskip
