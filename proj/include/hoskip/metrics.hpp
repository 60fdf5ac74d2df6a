#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hoskip/policy.hpp"

namespace hoskip {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }

struct RateEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;
};

// Exceedance probabilities over a sorted threshold grid, with 95% normal
// half-widths. Probabilities are non-increasing in the threshold.
struct CoverageCurve {
  std::vector<double> threshold;  // linear SINR values, ascending
  std::vector<double> probability;
  std::vector<double> ci_halfwidth;
  std::size_t n_samples = 0;
};

// (sum, sum of squares, count) monoid; merge order only matters through
// floating-point rounding, so reductions happen in a fixed order.
struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  void merge(const MeanAccumulator& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
  }
  RateEstimate estimate() const;
};

struct CoverageAccumulator {
  std::vector<double> threshold;  // ascending
  std::vector<std::size_t> exceed;
  std::size_t n = 0;

  explicit CoverageAccumulator(std::vector<double> thresholds_linear);
  void add(double sinr);
  void merge(const CoverageAccumulator& o);
  CoverageCurve curve() const;
};

// Coverage along one schedule: samples arc-length positions uniformly,
// evaluates the owning segment's service mode with fresh fading (streams
// keyed by sample index), and counts threshold exceedances. One SINR draw
// feeds every threshold, so the curve is monotone by construction.
CoverageCurve estimate_coverage(const ServiceSchedule& schedule,
                                const Trajectory& traj, const Deployment& dep,
                                const ChannelParams& chan,
                                std::span<const double> thresholds_linear,
                                int n_samples, const Rng& rng);

// Arc-length-weighted Monte Carlo mean of ln(1 + SINR), nats/s/Hz.
RateEstimate estimate_spectral_efficiency(const ServiceSchedule& schedule,
                                          const Trajectory& traj,
                                          const Deployment& dep,
                                          const ChannelParams& chan,
                                          int n_samples, const Rng& rng);

// Handovers per second for a homogeneous network of the given intensity
// under constant-velocity motion: (4 v / pi) sqrt(lambda), v in km/s.
double analytic_ho_rate(double lambda_per_km2, double velocity_kmh);

// Fraction of airtime lost to handover signalling: min(H_l * v * d, 1).
double ho_cost(double ho_per_km, double velocity_kmh, double delay_s);

// W * R * (1 - D), nats/s.
double throughput(double spectral_eff, double ho_cost_value,
                  double bandwidth_hz);

// One reporting row: a scheme evaluated at one velocity.
struct MetricsReport {
  std::string scheme;
  double velocity_kmh = 0.0;
  double spectral_eff = 0.0;      // R, nats/s/Hz
  double spectral_eff_se = 0.0;
  double ho_per_km = 0.0;         // H_l
  double ho_per_km_se = 0.0;
  double ho_per_s = 0.0;          // H_t = H_l * v
  double cost = 0.0;              // D in [0, 1]
  double bandwidth_hz = 0.0;
  double throughput_nats_s = 0.0;
  double throughput_ci = 0.0;     // from the rate CI at fixed D
};

MetricsReport make_report(const std::string& scheme, double velocity_kmh,
                          const RateEstimate& rate, double ho_per_km,
                          double ho_per_km_se, double delay_s,
                          double bandwidth_hz);

}  // namespace hoskip
