#pragma once

#include <complex>
#include <optional>

#include "hoskip/geometry.hpp"
#include "hoskip/rng.hpp"

namespace hoskip {

// Test-only hook that pins fading draws to fixed values. `h` replaces every
// Rayleigh power gain; `g_*` replace the two cooperative-branch channels.
struct FadingOverride {
  std::optional<double> h;
  std::optional<std::complex<double>> g_serving;
  std::optional<std::complex<double>> g_target;
};

struct ChannelParams {
  double noise_power = 0.0;  // sigma^2, watt
  FadingOverride forced;     // leave disengaged outside tests
};

enum class ServiceTag {
  BestConnected,  // served by the max-RSS station
  Blackout,       // nearest station skipped; served by one of serving/target
  BlackoutComp,   // nearest skipped; non-coherent joint serving+target
};

// Who serves a stretch of trajectory. Blackout modes carry the bracketing
// serving/target pair and the skipped (instantaneously nearest) station;
// `ic` removes the skipped station's signal from the interference sum.
struct ServiceMode {
  ServiceTag tag = ServiceTag::BestConnected;
  int serving_id = -1;
  int target_id = -1;
  int skipped_id = -1;
  bool ic = true;

  void validate() const;
};

struct SinrSample {
  double sinr = 0.0;
  // Set when the interference sum had no terms; with zero noise the value
  // is a finite sentinel (max double) rather than +inf.
  bool interference_free = false;
};

// Instantaneous SINR with i.i.d. Rayleigh power gains drawn per station.
// The serving station's own signal never appears in the interference sum.
SinrSample sinr_best_connected(Point p, const Deployment& dep,
                               const ChannelParams& chan, Rng& rng);

// Blackout, single server: signal comes from the geometrically closer of
// {serving, target}; the farther one keeps interfering. With `ic` the
// skipped station is removed from the interference sum as well.
SinrSample sinr_blackout_ic(Point p, const ServiceMode& mode,
                            const Deployment& dep, const ChannelParams& chan,
                            Rng& rng);

// Blackout with non-coherent cooperation: the received power is the squared
// magnitude of the sum of the two complex-Gaussian branch channels, each
// weighted by its station's sqrt(power) and r^(-eta/2). Serving and target
// both leave the interference sum; `ic` removes the skipped station too.
SinrSample sinr_blackout_comp(Point p, const ServiceMode& mode,
                              const Deployment& dep, const ChannelParams& chan,
                              Rng& rng);

// Dispatch on mode.tag. BestConnected uses mode.serving_id when set and
// falls back to the max-RSS station at p.
SinrSample evaluate_sinr(Point p, const ServiceMode& mode,
                         const Deployment& dep, const ChannelParams& chan,
                         Rng& rng);

}  // namespace hoskip
