#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hmasim/channel.hpp"

namespace hmasim {

inline constexpr int kRrbCount = 5;

enum class AccessMode { Oma, Noma, Hma };

/// Partition of the RRB pool into dedicated non-scheduled, dedicated
/// scheduled, and shared sets. RRB indices are laid out in that order:
/// [0, n_ded_ns) dedicated-NS, then n_shared shared, then dedicated-S.
struct SliceConfig {
  int n_ded_ns = 1;
  int n_ded_s = 2;
  int n_shared = 2;

  void validate() const {
    if (n_ded_ns < 0 || n_ded_s < 0 || n_shared < 0)
      throw std::invalid_argument("SliceConfig: negative counts");
    if (n_ded_ns + n_ded_s + n_shared != kRrbCount)
      throw std::invalid_argument("SliceConfig: counts must sum to 5");
  }

  int n_ns_usable() const { return n_ded_ns + n_shared; }
  bool rrb_is_ded_ns(int i) const { return i < n_ded_ns; }
  bool rrb_is_shared(int i) const { return i >= n_ded_ns && i < n_ded_ns + n_shared; }
  bool rrb_is_ded_s(int i) const { return i >= n_ded_ns + n_shared; }

  bool operator==(const SliceConfig&) const = default;
};

/// Builds the partition for a mode. OMA admits no shared RRBs, NOMA shares
/// everything, HMA accepts any consistent triple.
inline SliceConfig make_mode(AccessMode mode, int n_ded_ns, int n_ded_s) {
  SliceConfig cfg;
  cfg.n_ded_ns = n_ded_ns;
  cfg.n_ded_s = n_ded_s;
  cfg.n_shared = kRrbCount - n_ded_ns - n_ded_s;
  switch (mode) {
    case AccessMode::Oma:
      if (cfg.n_shared != 0)
        throw std::invalid_argument("make_mode: OMA requires counts summing to 5");
      break;
    case AccessMode::Noma:
      if (n_ded_ns != 0 || n_ded_s != 0)
        throw std::invalid_argument("make_mode: NOMA admits no dedicated RRBs");
      break;
    case AccessMode::Hma:
      break;
  }
  cfg.validate();
  return cfg;
}

/// Allowed aggregate scheduled-traffic interference PSD at the BS on each
/// shared RRB.
struct InterferenceCap {
  double max_psd_dbm_hz = -172.0;

  void validate() const {
    if (!std::isfinite(max_psd_dbm_hz))
      throw std::invalid_argument("phy.max_interference_psd_dbm_hz must be finite");
  }
};

/// True iff the linear sum of contributions stays at or below the cap.
/// nullopt contributions add nothing. A contribution exactly at the cap is
/// admitted.
inline bool check_interference_cap(
    const InterferenceCap& cap,
    const std::vector<std::optional<double>>& per_user_psd_dbm_hz) {
  double sum = 0;
  for (const auto& c : per_user_psd_dbm_hz)
    if (c) sum += db_to_linear(*c);
  if (sum == 0) return true;
  return linear_to_db(sum) <= cap.max_psd_dbm_hz + 1e-9;
}

}  // namespace hmasim
