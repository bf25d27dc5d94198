#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hmasim/channel.hpp"
#include "hmasim/phy.hpp"
#include "hmasim/rl.hpp"
#include "hmasim/rng.hpp"
#include "hmasim/slicing.hpp"

namespace hmasim {

// ---------------------------------------------------------------------------
// Risk map: per-ring running estimate of the worst observed NS path loss.
// ---------------------------------------------------------------------------

class RiskMap {
 public:
  /// Rings spanning equal path-loss decades between pl_ref and pl_floor.
  static RiskMap with_default_rings(const ChannelParams& cp, int n_rings = 5) {
    RiskMap m;
    m.pl_relax_db_ = cp.pl_ref_db;
    m.pl_floor_db_ = cp.pl_floor_db;
    const double span = cp.pl_ref_db - cp.pl_floor_db;
    for (int k = 0; k <= n_rings; ++k) {
      const double pl = cp.pl_ref_db - span * k / n_rings;
      m.ring_edges_m_.push_back(
          cp.d_ref_m * std::pow(10.0, (cp.pl_ref_db - pl) / (10.0 * cp.pl_exponent)));
    }
    m.worst_pl_db_.assign(n_rings, cp.pl_ref_db);
    m.staleness_slots_.assign(n_rings, 0);
    return m;
  }

  int n_rings() const { return static_cast<int>(worst_pl_db_.size()); }

  int ring_for_radius(double radius_m) const {
    for (int k = 1; k < static_cast<int>(ring_edges_m_.size()) - 1; ++k)
      if (radius_m < ring_edges_m_[k]) return k - 1;
    return n_rings() - 1;
  }

  /// Records a path-loss observation in a ring: running minimum, staleness
  /// reset.
  void observe(int ring, double pl_db) {
    if (ring < 0 || ring >= n_rings())
      throw std::out_of_range("RiskMap: ring out of range");
    if (pl_db < pl_floor_db_ - 1e-9 || pl_db > pl_relax_db_ + 1e-9)
      throw std::invalid_argument("RiskMap: observation outside path-loss span");
    worst_pl_db_[ring] = std::min(worst_pl_db_[ring], pl_db);
    staleness_slots_[ring] = 0;
  }

  /// Ages every ring by the given number of slots, relaxing stale estimates
  /// exponentially toward the benign end of the span.
  void advance(long slots, double forget_rate_per_slot = 0.01) {
    for (int k = 0; k < n_rings(); ++k) {
      staleness_slots_[k] += slots;
      const double decay = std::exp(-forget_rate_per_slot * slots);
      worst_pl_db_[k] = pl_relax_db_ + (worst_pl_db_[k] - pl_relax_db_) * decay;
    }
  }

  double worst_pl_db(int ring) const { return worst_pl_db_.at(ring); }
  long staleness(int ring) const { return staleness_slots_.at(ring); }

  /// Cell-wide worst estimate and the ring holding it.
  double cell_worst_pl_db() const {
    return *std::min_element(worst_pl_db_.begin(), worst_pl_db_.end());
  }
  int worst_ring() const {
    return static_cast<int>(std::min_element(worst_pl_db_.begin(), worst_pl_db_.end()) -
                            worst_pl_db_.begin());
  }

 private:
  std::vector<double> ring_edges_m_;
  std::vector<double> worst_pl_db_;
  std::vector<long> staleness_slots_;
  double pl_relax_db_ = -70.0;
  double pl_floor_db_ = -120.0;
};

// ---------------------------------------------------------------------------
// Device-side power allocation (RRU).
// ---------------------------------------------------------------------------

/// Interference quantization levels for the RRU state.
enum class PsdLevel : int { None = 0, AtMost172 = 1, AtMost164 = 2, Above164 = 3 };

inline PsdLevel quantize_psd(std::optional<double> psd_dbm_hz) {
  if (!psd_dbm_hz) return PsdLevel::None;
  if (*psd_dbm_hz <= -172.0 + 1e-9) return PsdLevel::AtMost172;
  if (*psd_dbm_hz <= -164.0 + 1e-9) return PsdLevel::AtMost164;
  return PsdLevel::Above164;
}

inline std::size_t rru_state_id(const std::vector<PsdLevel>& levels) {
  std::size_t id = 0;
  for (PsdLevel l : levels) id = id * 4 + static_cast<std::size_t>(l);
  return id;
}

/// Discrete power-split candidates over n_primary "own" RRBs followed by
/// n_secondary shared RRBs: all power on the primary set, the global equal
/// split, and a grid of primary-set shares with the remainder spread
/// equally over the secondary set.
inline std::vector<PowerSplit> candidate_splits(int n_primary, int n_secondary) {
  const int k = n_primary + n_secondary;
  if (k <= 0) return {};
  std::vector<PowerSplit> out;
  auto push = [&](double primary_share) {
    PowerSplit ps;
    ps.fractions.assign(k, 0.0);
    for (int i = 0; i < n_primary; ++i) ps.fractions[i] = primary_share / n_primary;
    for (int i = n_primary; i < k; ++i)
      ps.fractions[i] = (1.0 - primary_share) / n_secondary;
    out.push_back(ps);
  };
  if (n_primary == 0 || n_secondary == 0) {
    PowerSplit all_first;
    all_first.fractions.assign(k, 0.0);
    all_first.fractions[0] = 1.0;
    out.push_back(all_first);
    PowerSplit equal;
    equal.fractions.assign(k, 1.0 / k);
    if (k > 1) out.push_back(equal);
    return out;
  }
  push(1.0);                                   // everything on the own set
  push(static_cast<double>(n_primary) / k);    // equal split overall
  for (int g = 0; g <= 9; ++g) push(g / 10.0); // grid, remainder on shared
  return out;
}

/// Device-side agent: learns which power split to use for each quantized
/// interference pattern. One-shot transmissions, so values are plain
/// per-action averages (visit-count learning rate, no bootstrapping).
class RruAgent {
 public:
  RruAgent(int n_primary, int n_secondary)
      : candidates_(candidate_splits(n_primary, n_secondary)),
        n_rrbs_(n_primary + n_secondary),
        q_(n_states(), candidates_.size()),
        visits_(n_states() * candidates_.size(), 0) {}

  std::size_t n_states() const {
    std::size_t s = 1;
    for (int i = 0; i < n_rrbs_; ++i) s *= 4;
    return s;
  }
  const std::vector<PowerSplit>& candidates() const { return candidates_; }
  const QTable& table() const { return q_; }
  QTable& table() { return q_; }

  std::size_t decide(std::size_t state, double epsilon, Rng& rng) const {
    LearningParams p;
    p.epsilon = epsilon;
    return select_action(q_, state, p, rng);
  }

  const PowerSplit& split_for(std::size_t action) const { return candidates_[action]; }

  /// Running-average value update for one observed outcome.
  void learn(std::size_t state, std::size_t action, double reward) {
    long& n = visits_[state * candidates_.size() + action];
    ++n;
    LearningParams p;
    p.alpha = 1.0 / static_cast<double>(n);
    p.gamma = 0.0;
    q_update(q_, state, action, reward, state, p);
  }

  /// Counterfactual sweep: given the per-RRB mean SNRs and fading gains of
  /// one transmission opportunity, scores every candidate split against the
  /// same channel and updates each action's average.
  void learn_all(std::size_t state, const std::vector<double>& mean_snrs,
                 const std::vector<double>& gains, double sinr_threshold) {
    for (std::size_t a = 0; a < candidates_.size(); ++a) {
      double snr = 0;
      for (std::size_t i = 0; i < mean_snrs.size(); ++i)
        snr += candidates_[a].fractions[i] * mean_snrs[i] * gains[i];
      learn(state, a, snr < sinr_threshold ? -1.0 : 1.0);
    }
  }

 private:
  std::vector<PowerSplit> candidates_;
  int n_rrbs_;
  QTable q_;
  std::vector<long> visits_;
};

// ---------------------------------------------------------------------------
// Conservative provisioning baseline.
// ---------------------------------------------------------------------------

struct ConservativeResult {
  bool feasible = false;
  SliceConfig slice{kRrbCount, 0, 0};
};

/// Smallest dedicated-NS pool that lets a cell-edge NS user meet the outage
/// target with equal power across the pool, judged by the Monte Carlo
/// estimator; remaining RRBs go to scheduled traffic, nothing shared.
inline ConservativeResult conservative_slice(double eps_ns, double ns_tx_dbm,
                                             const ChannelParams& cp,
                                             double bandwidth_hz,
                                             double ns_target_rate_bps,
                                             long n_samples, std::uint64_t seed) {
  if (!(eps_ns > 0 && eps_ns < 1))
    throw std::invalid_argument("conservative_slice: eps_ns must be in (0,1)");
  const double edge_snr =
      mean_snr(ns_tx_dbm, cp.pl_floor_db, std::nullopt, bandwidth_hz, cp.noise_psd_dbm_hz);
  ConservativeResult res;
  for (int n = 1; n <= kRrbCount; ++n) {
    PowerSplit split;
    split.fractions.assign(n, 1.0 / n);
    std::vector<double> snrs(n, edge_snr);
    Rng rng(seed);  // common draws across pool sizes
    const OutageEstimate est =
        multi_rrb_outage_mc(split, snrs, ns_target_rate_bps, bandwidth_hz, n_samples, rng);
    if (est.p_hat <= eps_ns) {
      res.feasible = true;
      res.slice = SliceConfig{n, kRrbCount - n, 0};
      return res;
    }
  }
  return res;  // infeasible even with all five RRBs dedicated
}

// ---------------------------------------------------------------------------
// Base-station scheduling (RRS).
// ---------------------------------------------------------------------------

struct SchedCandidate {
  int device_id = 0;
  int remaining_budget_slots = 1;
  double pl_db = -70.0;
  double tx_power_dbm = 21.0;
};

struct RrbGrant {
  std::optional<int> device_id;
  double tx_power_dbm = 0.0;
  double rx_psd_dbm_hz = 0.0;  // received PSD at the BS, valid when granted
};

/// Rule-based scheduler. Users are ranked by remaining delay budget, then
/// by their path-loss-predicted interference contribution. Dedicated-S
/// RRBs are filled at full power; shared RRBs admit one user each, power-
/// controlled so the received PSD stays within the cap.
inline std::vector<RrbGrant> rrs_schedule(
    std::vector<SchedCandidate> candidates, const SliceConfig& slice,
    const InterferenceCap& cap, double bandwidth_hz,
    const std::vector<std::optional<double>>& existing_shared_psd = {}) {
  slice.validate();
  std::sort(candidates.begin(), candidates.end(),
            [](const SchedCandidate& a, const SchedCandidate& b) {
              if (a.remaining_budget_slots != b.remaining_budget_slots)
                return a.remaining_budget_slots < b.remaining_budget_slots;
              const double ia = a.tx_power_dbm + a.pl_db;
              const double ib = b.tx_power_dbm + b.pl_db;
              if (ia != ib) return ia < ib;
              return a.device_id < b.device_id;
            });
  std::vector<RrbGrant> grants(kRrbCount);
  std::size_t next = 0;
  const double bw_db = 10.0 * std::log10(bandwidth_hz);
  for (int i = 0; i < kRrbCount && next < candidates.size(); ++i) {
    if (!slice.rrb_is_ded_s(i)) continue;
    const SchedCandidate& c = candidates[next++];
    grants[i].device_id = c.device_id;
    grants[i].tx_power_dbm = c.tx_power_dbm;
    grants[i].rx_psd_dbm_hz = c.tx_power_dbm + c.pl_db - bw_db;
  }
  for (int i = 0; i < kRrbCount && next < candidates.size(); ++i) {
    if (!slice.rrb_is_shared(i)) continue;
    const SchedCandidate& c = candidates[next];
    // Back the transmit power off until the received PSD meets the cap.
    const double tx_capped =
        std::min(c.tx_power_dbm, cap.max_psd_dbm_hz - c.pl_db + bw_db);
    const double rx_psd = tx_capped + c.pl_db - bw_db;
    auto contributions = existing_shared_psd;
    contributions.push_back(rx_psd);
    if (!check_interference_cap(cap, contributions)) continue;
    ++next;
    grants[i].device_id = c.device_id;
    grants[i].tx_power_dbm = tx_capped;
    grants[i].rx_psd_dbm_hz = rx_psd;
  }
  return grants;
}

// ---------------------------------------------------------------------------
// Control-center provisioning (RRP).
// ---------------------------------------------------------------------------

inline constexpr int kEpsDecades = 7;  // 1e-1 .. 1e-7

inline int eps_bucket(double eps_ns) {
  const int d = static_cast<int>(std::lround(-std::log10(eps_ns)));
  return std::clamp(d, 1, kEpsDecades) - 1;
}

/// All slice triples admissible under a mode, in a fixed enumeration order.
inline std::vector<SliceConfig> enumerate_slice_actions(AccessMode mode) {
  std::vector<SliceConfig> out;
  for (int ns = 0; ns <= kRrbCount; ++ns)
    for (int s = 0; ns + s <= kRrbCount; ++s) {
      const SliceConfig cfg{ns, s, kRrbCount - ns - s};
      switch (mode) {
        case AccessMode::Oma:
          if (cfg.n_shared == 0) out.push_back(cfg);
          break;
        case AccessMode::Noma:
          if (cfg.n_ded_ns == 0 && cfg.n_ded_s == 0) out.push_back(cfg);
          break;
        case AccessMode::Hma:
          out.push_back(cfg);
          break;
      }
    }
  return out;
}

/// Analytic outage an NS user at the given path loss would see under a
/// slice: equal power over its usable RRBs, shared ones carrying
/// interference at the cap. Used as the provisioning risk estimate.
inline double predict_ns_outage(const SliceConfig& slice, double pl_db,
                                double ns_tx_dbm, const ChannelParams& cp,
                                double bandwidth_hz, const InterferenceCap& cap,
                                double ns_target_rate_bps) {
  const int k = slice.n_ns_usable();
  if (k == 0) return 1.0;
  std::vector<double> branches;
  branches.reserve(k);
  for (int i = 0; i < k; ++i) {
    const std::optional<double> interference =
        i < slice.n_ded_ns ? std::nullopt
                           : std::optional<double>(cap.max_psd_dbm_hz);
    branches.push_back(
        mean_snr(ns_tx_dbm, pl_db, interference, bandwidth_hz, cp.noise_psd_dbm_hz) / k);
  }
  const double threshold = rate_threshold(ns_target_rate_bps, bandwidth_hz);
  return mrc_outage_analytic(branches, threshold);
}

/// Control-center agent: Q-learning over (reliability bucket, worst-risk
/// ring) states and slice-triple actions.
class RrpAgent {
 public:
  RrpAgent(AccessMode mode, int n_rings)
      : actions_(enumerate_slice_actions(mode)),
        q_(static_cast<std::size_t>(kEpsDecades) * n_rings, actions_.size()),
        n_rings_(n_rings) {}

  std::size_t state_id(double eps_ns, int worst_ring) const {
    return static_cast<std::size_t>(eps_bucket(eps_ns)) * n_rings_ + worst_ring;
  }

  const std::vector<SliceConfig>& actions() const { return actions_; }
  const QTable& table() const { return q_; }
  QTable& table() { return q_; }

  std::size_t decide(std::size_t state, double epsilon, Rng& rng) const {
    LearningParams p;
    p.epsilon = epsilon;
    return select_action(q_, state, p, rng);
  }

  void learn(std::size_t state, std::size_t action, double utility,
             const LearningParams& params) {
    q_update(q_, state, action, utility, state, params);
  }

 private:
  std::vector<SliceConfig> actions_;
  QTable q_;
  int n_rings_;
};

}  // namespace hmasim
