#include "hoskip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hoskip {

RateEstimate MeanAccumulator::estimate() const {
  RateEstimate e;
  e.n = n;
  if (n == 0) return e;
  e.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double var =
        std::max(0.0, (sum_sq - sum * sum / static_cast<double>(n)) /
                          static_cast<double>(n - 1));
    e.std_err = std::sqrt(var / static_cast<double>(n));
  }
  return e;
}

CoverageAccumulator::CoverageAccumulator(std::vector<double> thresholds_linear)
    : threshold(std::move(thresholds_linear)), exceed(threshold.size(), 0) {
  if (threshold.empty())
    throw std::invalid_argument("coverage: empty threshold list");
  if (!std::is_sorted(threshold.begin(), threshold.end()))
    throw std::invalid_argument("coverage: thresholds must be ascending");
}

void CoverageAccumulator::add(double sinr) {
  ++n;
  // One draw feeds every threshold; exceedances are monotone in T.
  for (std::size_t i = 0; i < threshold.size(); ++i) {
    if (sinr > threshold[i])
      ++exceed[i];
    else
      break;
  }
}

void CoverageAccumulator::merge(const CoverageAccumulator& o) {
  if (o.threshold != threshold)
    throw std::invalid_argument("coverage: merging mismatched grids");
  for (std::size_t i = 0; i < exceed.size(); ++i) exceed[i] += o.exceed[i];
  n += o.n;
}

CoverageCurve CoverageAccumulator::curve() const {
  CoverageCurve c;
  c.threshold = threshold;
  c.n_samples = n;
  c.probability.resize(threshold.size(), 0.0);
  c.ci_halfwidth.resize(threshold.size(), 0.0);
  if (n == 0) return c;
  for (std::size_t i = 0; i < threshold.size(); ++i) {
    const double p = static_cast<double>(exceed[i]) / static_cast<double>(n);
    c.probability[i] = p;
    c.ci_halfwidth[i] =
        1.96 * std::sqrt(std::max(0.0, p * (1.0 - p)) /
                         static_cast<double>(n));
  }
  return c;
}

namespace {

// Shared sampling core: position stream and fading stream are forked per
// sample index, so evaluation order cannot change the draw.
template <typename Sink>
void sample_schedule(const ServiceSchedule& schedule, const Trajectory& traj,
                     const Deployment& dep, const ChannelParams& chan,
                     int n_samples, const Rng& rng, Sink&& sink) {
  if (n_samples <= 0)
    throw std::invalid_argument("sampling: n_samples must be positive");
  if (schedule.segments.empty())
    throw std::invalid_argument("sampling: empty schedule");
  for (int j = 0; j < n_samples; ++j) {
    Rng r = rng.fork(0x5A3Fu, static_cast<std::uint64_t>(j));
    const double s = r.uniform(0.0, traj.length_km);
    const auto& seg = schedule.segment_at(s);
    const SinrSample sample = evaluate_sinr(traj.at(s), seg.mode, dep, chan, r);
    sink(sample.sinr);
  }
}

}  // namespace

CoverageCurve estimate_coverage(const ServiceSchedule& schedule,
                                const Trajectory& traj, const Deployment& dep,
                                const ChannelParams& chan,
                                std::span<const double> thresholds_linear,
                                int n_samples, const Rng& rng) {
  CoverageAccumulator acc(
      std::vector<double>(thresholds_linear.begin(), thresholds_linear.end()));
  sample_schedule(schedule, traj, dep, chan, n_samples, rng,
                  [&](double sinr) { acc.add(sinr); });
  return acc.curve();
}

RateEstimate estimate_spectral_efficiency(const ServiceSchedule& schedule,
                                          const Trajectory& traj,
                                          const Deployment& dep,
                                          const ChannelParams& chan,
                                          int n_samples, const Rng& rng) {
  MeanAccumulator acc;
  sample_schedule(schedule, traj, dep, chan, n_samples, rng,
                  [&](double sinr) { acc.add(std::log1p(sinr)); });
  return acc.estimate();
}

double analytic_ho_rate(double lambda_per_km2, double velocity_kmh) {
  if (!(lambda_per_km2 > 0.0))
    throw std::invalid_argument("analytic_ho_rate: intensity must be positive");
  if (velocity_kmh < 0.0)
    throw std::invalid_argument("analytic_ho_rate: negative velocity");
  const double v_km_s = velocity_kmh / 3600.0;
  return 4.0 * v_km_s / M_PI * std::sqrt(lambda_per_km2);
}

double ho_cost(double ho_per_km, double velocity_kmh, double delay_s) {
  if (ho_per_km < 0.0 || velocity_kmh < 0.0 || delay_s < 0.0)
    throw std::invalid_argument("ho_cost: negative input");
  return std::min(ho_per_km * (velocity_kmh / 3600.0) * delay_s, 1.0);
}

double throughput(double spectral_eff, double ho_cost_value,
                  double bandwidth_hz) {
  if (spectral_eff < 0.0)
    throw std::invalid_argument("throughput: negative spectral efficiency");
  if (ho_cost_value < 0.0 || ho_cost_value > 1.0)
    throw std::invalid_argument("throughput: cost outside [0, 1]");
  if (!(bandwidth_hz > 0.0))
    throw std::invalid_argument("throughput: bandwidth must be positive");
  return bandwidth_hz * spectral_eff * (1.0 - ho_cost_value);
}

MetricsReport make_report(const std::string& scheme, double velocity_kmh,
                          const RateEstimate& rate, double ho_per_km,
                          double ho_per_km_se, double delay_s,
                          double bandwidth_hz) {
  MetricsReport r;
  r.scheme = scheme;
  r.velocity_kmh = velocity_kmh;
  r.spectral_eff = rate.mean;
  r.spectral_eff_se = rate.std_err;
  r.ho_per_km = ho_per_km;
  r.ho_per_km_se = ho_per_km_se;
  r.ho_per_s = ho_per_km * (velocity_kmh / 3600.0);
  r.cost = ho_cost(ho_per_km, velocity_kmh, delay_s);
  r.bandwidth_hz = bandwidth_hz;
  r.throughput_nats_s = throughput(rate.mean, r.cost, bandwidth_hz);
  r.throughput_ci = 1.96 * rate.std_err * bandwidth_hz * (1.0 - r.cost);
  return r;
}

}  // namespace hoskip
