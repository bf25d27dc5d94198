#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hmasim/channel.hpp"
#include "hmasim/rng.hpp"

namespace hmasim {

enum class TrafficClass { Scheduled, NonScheduledCapable };

/// A user terminal. NonScheduledCapable devices also carry saturated
/// scheduled traffic; they additionally emit infrequent urgent packets.
struct Device {
  int id = 0;
  Position pos;
  TrafficClass cls = TrafficClass::NonScheduledCapable;
  double tx_power_dbm = 23.0;
  int delay_budget_slots = 1;
  std::optional<long> next_ns_arrival_slot;
};

/// Exponential inter-arrival process, rate in arrivals per slot.
struct ArrivalProcess {
  double rate_per_slot = 0.01;

  void validate() const {
    if (!(rate_per_slot > 0 && rate_per_slot < 1))
      throw std::invalid_argument("ArrivalProcess: rate must be in (0,1)");
  }
};

/// Uniform-in-area placement over the annulus [r_min, r_max].
inline std::vector<Device> place_users(int n, Rng& rng, double r_min = 30.0,
                                       double r_max = 3000.0) {
  if (n < 1) throw std::invalid_argument("place_users: n must be >= 1");
  if (!(r_min > 0 && r_max > r_min))
    throw std::invalid_argument("place_users: bad annulus");
  std::vector<Device> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Device d;
    d.id = i;
    const double r2 = r_min * r_min + rng.uniform() * (r_max * r_max - r_min * r_min);
    d.pos.radius_m = std::sqrt(r2);
    d.pos.azimuth_rad = rng.uniform() * kTwoPi;
    out.push_back(d);
  }
  return out;
}

/// Next urgent-packet arrival slot: now + ceil(X), X exponential with mean
/// 1/rate. Always strictly in the future.
inline long next_ns_arrival(const ArrivalProcess& process, long now_slot, Rng& rng) {
  process.validate();
  const double gap = rng.exponential() / process.rate_per_slot;
  return now_slot + static_cast<long>(std::ceil(std::max(gap, 1e-12)));
}

/// Scheduled queues are saturated: there is always data to send.
inline bool scheduled_has_data(const Device& device) {
  if (device.cls != TrafficClass::Scheduled &&
      device.cls != TrafficClass::NonScheduledCapable)
    throw std::logic_error("scheduled_has_data: not a scheduled-capable device");
  return true;
}

}  // namespace hmasim
