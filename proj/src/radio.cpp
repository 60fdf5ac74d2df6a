#include "hoskip/radio.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hoskip {

namespace {

inline double path_gain(const BaseStation& bs, Point p) {
  const double r2 = squared_distance(bs.position, p);
  if (r2 <= 0.0) return std::numeric_limits<double>::infinity();
  if (bs.path_loss_exp == 4.0) return bs.power / (r2 * r2);
  return bs.power * std::pow(r2, -0.5 * bs.path_loss_exp);
}

// sqrt(P) * r^(-eta/2), the amplitude weight of a cooperative branch.
inline double branch_amplitude(const BaseStation& bs, Point p) {
  const double r2 = squared_distance(bs.position, p);
  if (r2 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(bs.power) * std::pow(r2, -0.25 * bs.path_loss_exp);
}

inline SinrSample finish(double signal, double interference, long terms,
                         double noise) {
  SinrSample out;
  out.interference_free = terms == 0;
  const double denom = interference + noise;
  if (denom <= 0.0) {
    out.sinr = std::numeric_limits<double>::max();
    return out;
  }
  out.sinr = signal / denom;
  return out;
}

// Single-server evaluation: the station at `signal_idx` provides the signal;
// `skip_idx` (when >= 0) is excluded from the interference sum. Fading is
// drawn for every station in index order so that evaluations with different
// exclusion sets stay coupled sample-path-wise.
SinrSample eval_single_server(Point p, int signal_idx, int skip_idx,
                              const Deployment& dep, const ChannelParams& chan,
                              Rng& rng) {
  const auto& stations = dep.stations();
  double signal = 0.0;
  double interference = 0.0;
  long terms = 0;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const double w = path_gain(stations[i], p);
    const double h = chan.forced.h ? *chan.forced.h : rng.exponential();
    if (static_cast<int>(i) == signal_idx) {
      signal = w * h;
    } else if (static_cast<int>(i) == skip_idx) {
      // cancelled
    } else {
      interference += w * h;
      ++terms;
    }
  }
  return finish(signal, interference, terms, chan.noise_power);
}

}  // namespace

void ServiceMode::validate() const {
  if (tag == ServiceTag::BestConnected) return;
  if (serving_id < 0 || target_id < 0 || skipped_id < 0)
    throw std::invalid_argument(
        "service mode: blackout requires serving/target/skipped ids");
  if (skipped_id == serving_id || skipped_id == target_id)
    throw std::invalid_argument(
        "service mode: skipped station must differ from serving and target");
}

SinrSample sinr_best_connected(Point p, const Deployment& dep,
                               const ChannelParams& chan, Rng& rng) {
  if (dep.size() == 0)
    throw std::invalid_argument("sinr: empty deployment");
  return eval_single_server(p, dep.serving_index(p), -1, dep, chan, rng);
}

SinrSample sinr_blackout_ic(Point p, const ServiceMode& mode,
                            const Deployment& dep, const ChannelParams& chan,
                            Rng& rng) {
  if (mode.tag != ServiceTag::Blackout)
    throw std::invalid_argument("sinr_blackout_ic: mode tag mismatch");
  mode.validate();
  const int s = dep.index_of(mode.serving_id);
  const int t = dep.index_of(mode.target_id);
  const int k = dep.index_of(mode.skipped_id);
  const double rs2 = squared_distance(dep.station(s).position, p);
  const double rt2 = squared_distance(dep.station(t).position, p);
  const int x = rs2 <= rt2 ? s : t;
  return eval_single_server(p, x, mode.ic ? k : -1, dep, chan, rng);
}

SinrSample sinr_blackout_comp(Point p, const ServiceMode& mode,
                              const Deployment& dep, const ChannelParams& chan,
                              Rng& rng) {
  if (mode.tag != ServiceTag::BlackoutComp)
    throw std::invalid_argument("sinr_blackout_comp: mode tag mismatch");
  mode.validate();
  const int s = dep.index_of(mode.serving_id);
  const int t = dep.index_of(mode.target_id);
  const int k = dep.index_of(mode.skipped_id);
  if (s == t)  // degenerate bracket, single transmitter in practice
    return eval_single_server(p, s, mode.ic ? k : -1, dep, chan, rng);

  const auto& stations = dep.stations();
  double interference = 0.0;
  long terms = 0;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const double w = path_gain(stations[i], p);
    const double h = chan.forced.h ? *chan.forced.h : rng.exponential();
    const int ii = static_cast<int>(i);
    if (ii == s || ii == t) continue;       // joint transmitters
    if (ii == k && mode.ic) continue;       // cancelled
    interference += w * h;
    ++terms;
  }
  const std::complex<double> gs =
      chan.forced.g_serving ? *chan.forced.g_serving : rng.complex_normal();
  const std::complex<double> gt =
      chan.forced.g_target ? *chan.forced.g_target : rng.complex_normal();
  const std::complex<double> sum = gs * branch_amplitude(dep.station(s), p) +
                                   gt * branch_amplitude(dep.station(t), p);
  return finish(std::norm(sum), interference, terms, chan.noise_power);
}

SinrSample evaluate_sinr(Point p, const ServiceMode& mode,
                         const Deployment& dep, const ChannelParams& chan,
                         Rng& rng) {
  switch (mode.tag) {
    case ServiceTag::BestConnected: {
      const int serving = mode.serving_id >= 0 ? dep.index_of(mode.serving_id)
                                               : dep.serving_index(p);
      return eval_single_server(p, serving, -1, dep, chan, rng);
    }
    case ServiceTag::Blackout:
      return sinr_blackout_ic(p, mode, dep, chan, rng);
    case ServiceTag::BlackoutComp:
      return sinr_blackout_comp(p, mode, dep, chan, rng);
  }
  throw std::logic_error("evaluate_sinr: unknown service tag");
}

}  // namespace hoskip
