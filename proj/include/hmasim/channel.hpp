#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hmasim/rng.hpp"

namespace hmasim {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Polar position relative to the base station at the cell center.
struct Position {
  double radius_m = 30.0;
  double azimuth_rad = 0.0;
};

/// Log-distance path-loss model. Defaults hit -70 dB at the 30 m reference
/// and floor out at -120 dB exactly at the 3000 m cell edge.
struct ChannelParams {
  double pl_ref_db = -70.0;
  double d_ref_m = 30.0;
  double pl_exponent = 2.5;
  double pl_floor_db = -120.0;
  double noise_psd_dbm_hz = -174.0;

  void validate() const {
    if (!(pl_ref_db > pl_floor_db))
      throw std::invalid_argument("channel: pl_ref_db must exceed pl_floor_db");
    if (!(pl_exponent > 0))
      throw std::invalid_argument("channel: pl_exponent must be positive");
    if (!(d_ref_m > 0))
      throw std::invalid_argument("channel: d_ref_m must be positive");
  }
};

/// Distance-dependent path loss in dB (a negative gain), clamped to
/// [pl_floor_db, pl_ref_db].
inline double path_loss_db(const Position& pos, const ChannelParams& cp) {
  if (!(pos.radius_m > 0))
    throw std::domain_error("path_loss_db: radius must be positive");
  const double pl =
      cp.pl_ref_db - 10.0 * cp.pl_exponent * std::log10(pos.radius_m / cp.d_ref_m);
  return std::clamp(pl, cp.pl_floor_db, cp.pl_ref_db);
}

/// Total noise power over a bandwidth, dBm.
inline double noise_power_dbm(double psd_dbm_hz, double bandwidth_hz) {
  if (!(bandwidth_hz > 0))
    throw std::invalid_argument("noise_power_dbm: bandwidth must be positive");
  return psd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

/// Per-RRB link budget. Interference entries of nullopt mean a clean
/// (dedicated) RRB contributing zero interference power.
struct LinkBudget {
  double tx_power_dbm = 23.0;
  double pl_db = -80.0;
  std::vector<std::optional<double>> interference_psd_dbm_hz;  // per RRB
  double rrb_bandwidth_hz = 180000.0;
  double noise_psd_dbm_hz = -174.0;

  std::size_t n_rrbs() const { return interference_psd_dbm_hz.size(); }
};

/// Mean SNR (linear) on one RRB: transmit power through the path loss over
/// the noise-plus-interference floor, combined in the linear domain.
inline double mean_snr(const LinkBudget& lb, std::size_t rrb_index) {
  if (rrb_index >= lb.n_rrbs())
    throw std::out_of_range("mean_snr: rrb_index out of range");
  double psd_lin = db_to_linear(lb.noise_psd_dbm_hz);
  if (lb.interference_psd_dbm_hz[rrb_index])
    psd_lin += db_to_linear(*lb.interference_psd_dbm_hz[rrb_index]);
  const double floor_dbm = noise_power_dbm(linear_to_db(psd_lin), lb.rrb_bandwidth_hz);
  return db_to_linear(lb.tx_power_dbm + lb.pl_db - floor_dbm);
}

/// One mean SNR from scalar ingredients; nullopt interference = clean RRB.
inline double mean_snr(double tx_power_dbm, double pl_db,
                       std::optional<double> interference_psd_dbm_hz,
                       double bandwidth_hz, double noise_psd_dbm_hz = -174.0) {
  LinkBudget lb;
  lb.tx_power_dbm = tx_power_dbm;
  lb.pl_db = pl_db;
  lb.interference_psd_dbm_hz = {interference_psd_dbm_hz};
  lb.rrb_bandwidth_hz = bandwidth_hz;
  lb.noise_psd_dbm_hz = noise_psd_dbm_hz;
  return mean_snr(lb, 0);
}

/// Unit-mean exponential power gain (Rayleigh amplitude fading).
inline double draw_fading(Rng& rng) { return rng.exponential(); }

}  // namespace hmasim
