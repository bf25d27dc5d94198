#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmasim/agents.hpp"
#include "hmasim/channel.hpp"
#include "hmasim/phy.hpp"
#include "hmasim/rl.hpp"
#include "hmasim/rng.hpp"
#include "hmasim/slicing.hpp"
#include "hmasim/traffic.hpp"

namespace hmasim {

/// Resource-management policy for a run. The first three learn the slice
/// online under the corresponding access-mode action set; Conservative
/// provisions once for the worst-case cell edge and never adapts.
enum class RrmPolicy { Conservative, Oma, Noma, Hma };

inline AccessMode access_mode_for(RrmPolicy p) {
  switch (p) {
    case RrmPolicy::Oma: return AccessMode::Oma;
    case RrmPolicy::Noma: return AccessMode::Noma;
    case RrmPolicy::Hma:
    case RrmPolicy::Conservative: return AccessMode::Hma;
  }
  throw std::logic_error("unknown policy");
}

struct SimConfig {
  // sim
  std::uint64_t seed = 1;
  long n_slots_train = 120000;
  long n_slots_eval = 20000;
  long episode_slots = 200;
  double slot_duration_ms = 1.0;

  // cell / devices
  int n_devices = 20;
  int n_ns_devices = 5;
  double min_radius_m = 30.0;
  double max_radius_m = 3000.0;
  double tx_sched_dbm = 21.0;
  double tx_ns_dbm = 23.0;
  int sched_delay_budget_slots = 10;

  // channel / phy
  ChannelParams channel;
  double rrb_bandwidth_hz = 180000.0;
  InterferenceCap cap;

  // traffic
  ArrivalProcess arrival;       // per NS device
  bool arrivals_per_cell = false;  // when true, rate is split across NS devices

  // rrm
  RrmPolicy policy = RrmPolicy::Hma;
  double eps_ns = 1e-4;
  double eps_sched = 1e-4;
  double ns_target_rate_bps = 180000.0;
  double kappa = 10.0;
  double risk_forget_rate = 0.01;
  long conservative_mc_samples = 1000000;
  LearningParams learning;

  void validate() const {
    channel.validate();
    arrival.validate();
    learning.validate();
    cap.validate();
    if (n_slots_train < 0) throw std::invalid_argument("sim.n_slots_train must be >= 0");
    if (n_slots_eval <= 0) throw std::invalid_argument("sim.n_slots_eval must be > 0");
    if (episode_slots <= 0) throw std::invalid_argument("sim.episode_slots must be > 0");
    if (slot_duration_ms <= 0) throw std::invalid_argument("sim.slot_duration_ms must be > 0");
    if (n_devices <= 0) throw std::invalid_argument("cell.n_devices must be > 0");
    if (n_ns_devices < 0 || n_ns_devices > n_devices)
      throw std::invalid_argument("cell.n_ns_devices must be in [0, n_devices]");
    if (!(min_radius_m > 0) || !(max_radius_m >= min_radius_m))
      throw std::invalid_argument("cell.max_radius_m must be >= min_radius_m > 0");
    if (sched_delay_budget_slots <= 0)
      throw std::invalid_argument("cell.sched_delay_budget_slots must be > 0");
    if (rrb_bandwidth_hz <= 0) throw std::invalid_argument("phy.rrb_bandwidth_hz must be > 0");
    if (!(eps_ns > 0 && eps_ns < 1)) throw std::invalid_argument("rrm.eps_ns must be in (0,1)");
    if (!(eps_sched > 0 && eps_sched < 1))
      throw std::invalid_argument("rrm.eps_sched must be in (0,1)");
    if (ns_target_rate_bps <= 0)
      throw std::invalid_argument("rrm.ns_target_rate_bps must be > 0");
    if (kappa < 0) throw std::invalid_argument("rrm.kappa must be >= 0");
    if (risk_forget_rate < 0) throw std::invalid_argument("rrm.risk_forget_rate must be >= 0");
    if (conservative_mc_samples < 10000)
      throw std::invalid_argument("rrm.conservative_mc_samples must be >= 10000");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    const double expected_attempts =
        static_cast<double>(n_slots_eval) * arrival.rate_per_slot *
        (arrivals_per_cell ? 1.0 : std::max(n_ns_devices, 1));
    if (expected_attempts * eps_ns < 10.0)
      w.push_back("rrm.eps_ns = " + std::to_string(eps_ns) +
                  " is below the resolution of the evaluation window; measured "
                  "outage rates at this target are dominated by the analytic "
                  "risk estimate");
    return w;
  }
};

struct Metrics {
  long ns_attempts = 0;
  long ns_outages = 0;   // includes blocked attempts
  long ns_blocked = 0;
  long eval_slots = 0;
  double scheduled_goodput_bps = 0.0;  // mean eps_sched-reliable rate per slot
  std::array<double, kRrbCount> rrb_utilization{};
  SliceConfig learned_slice{0, 0, kRrbCount};
  bool conservative_feasible = true;

  double ns_outage_rate() const {
    return ns_attempts ? static_cast<double>(ns_outages) / ns_attempts : 0.0;
  }
};

class SimEngine {
 public:
  explicit SimEngine(const SimConfig& cfg)
      : cfg_(cfg),
        risk_(RiskMap::with_default_rings(cfg.channel)),
        rrp_(access_mode_for(cfg.policy), risk_.n_rings()) {
    cfg_.validate();
    place_devices();
    // NOMA grants full-power reuse on every RRB; the PSD cap is what
    // distinguishes the power-controlled sharing of HMA/OMA from it.
    effective_cap_ = cfg_.policy == RrmPolicy::Noma ? InterferenceCap{0.0} : cfg_.cap;
    if (cfg_.policy == RrmPolicy::Conservative) {
      const ConservativeResult r = conservative_slice(
          cfg_.eps_ns, cfg_.tx_ns_dbm, cfg_.channel, cfg_.rrb_bandwidth_hz,
          cfg_.ns_target_rate_bps, cfg_.conservative_mc_samples,
          splitmix64(cfg_.seed ^ 0xC0175EULL));
      conservative_ = r;
    }
    const double peak_snr = mean_snr(cfg_.tx_sched_dbm, cfg_.channel.pl_ref_db,
                                     std::nullopt, cfg_.rrb_bandwidth_hz,
                                     cfg_.channel.noise_psd_dbm_hz);
    max_goodput_bps_ =
        kRrbCount * eps_outage_rate(peak_snr, cfg_.eps_sched, cfg_.rrb_bandwidth_hz);
  }

  void train() {
    Rng rng = Rng::derive(cfg_.seed, 2);
    run_slots(cfg_.n_slots_train, cfg_.learning.epsilon, true, rng, nullptr);
  }

  Metrics evaluate() { return evaluate_with_seed(cfg_.seed); }

  /// Greedy evaluation with frozen tables under an arbitrary seed. Leaves
  /// the learned state (tables, risk map) untouched, so repeated calls with
  /// the same seed are identical.
  Metrics evaluate_with_seed(std::uint64_t seed) {
    Metrics m;
    Rng rng = Rng::derive(seed, 3);
    const RiskMap saved = risk_;
    run_slots(cfg_.n_slots_eval, 0.0, false, rng, &m);
    risk_ = saved;
    m.conservative_feasible =
        cfg_.policy != RrmPolicy::Conservative || conservative_.feasible;
    return m;
  }

  RrpAgent& rrp() { return rrp_; }
  const RrpAgent& rrp() const { return rrp_; }
  RiskMap& risk_map() { return risk_; }
  const SimConfig& config() const { return cfg_; }
  double max_goodput_bps() const { return max_goodput_bps_; }

  SliceConfig current_slice(double epsilon, Rng& rng) {
    if (cfg_.policy == RrmPolicy::Conservative) return conservative_.slice;
    const std::size_t s = rrp_.state_id(cfg_.eps_ns, risk_.worst_ring());
    return rrp_.actions()[rrp_.decide(s, epsilon, rng)];
  }

 private:
  struct Dev {
    Device d;
    double pl_db = -70.0;
  };

  void place_devices() {
    Rng rng = Rng::derive(cfg_.seed, 1);
    const std::vector<Device> placed =
        place_users(cfg_.n_devices, rng, cfg_.min_radius_m, cfg_.max_radius_m);
    Rng arr = Rng::derive(cfg_.seed, 4);
    for (int i = 0; i < cfg_.n_devices; ++i) {
      Dev dev;
      dev.d.id = i;
      dev.d.pos = placed[i].pos;
      dev.d.cls = i < cfg_.n_ns_devices ? TrafficClass::NonScheduledCapable
                                        : TrafficClass::Scheduled;
      dev.d.tx_power_dbm =
          dev.d.cls == TrafficClass::NonScheduledCapable ? cfg_.tx_ns_dbm : cfg_.tx_sched_dbm;
      dev.d.delay_budget_slots = cfg_.sched_delay_budget_slots;
      dev.pl_db = path_loss_db(placed[i].pos, cfg_.channel);
      if (dev.d.cls == TrafficClass::NonScheduledCapable)
        dev.d.next_ns_arrival_slot = next_ns_arrival(arrival_process(), -1, arr);
      devices_.push_back(dev);
    }
  }

  ArrivalProcess arrival_process() const {
    ArrivalProcess p = cfg_.arrival;
    if (cfg_.arrivals_per_cell && cfg_.n_ns_devices > 0)
      p.rate_per_slot = cfg_.arrival.rate_per_slot / cfg_.n_ns_devices;
    return p;
  }

  void run_slots(long n_slots, double epsilon, bool learn, Rng& rng, Metrics* m) {
    const double bw = cfg_.rrb_bandwidth_hz;
    const double bw_db = 10.0 * std::log10(bw);
    const double ns_threshold = rate_threshold(cfg_.ns_target_rate_bps, bw);
    const ArrivalProcess arrival = arrival_process();
    // Arrivals restart with every run so train/eval windows are
    // self-contained and repeatable.
    for (Dev& dev : devices_)
      if (dev.d.cls == TrafficClass::NonScheduledCapable)
        dev.d.next_ns_arrival_slot = next_ns_arrival(arrival, -1, rng);

    SliceConfig slice = conservative_.slice;
    std::size_t rrp_state = rrp_.state_id(cfg_.eps_ns, risk_.worst_ring());
    std::size_t rrp_action = 0;
    if (cfg_.policy != RrmPolicy::Conservative) {
      rrp_action = rrp_.decide(rrp_state, epsilon, rng);
      slice = rrp_.actions()[rrp_action];
    }
    if (m) m->learned_slice = slice;

    long ep_attempts = 0, ep_outages = 0;
    double ep_goodput = 0.0;
    double total_goodput = 0.0;

    for (long slot = 0; slot < n_slots; ++slot) {
      // 1. Scheduled grants for this slot.
      std::vector<SchedCandidate> cands;
      for (const Dev& dev : devices_) {
        if (!scheduled_has_data(dev.d)) continue;
        SchedCandidate c;
        c.device_id = dev.d.id;
        c.remaining_budget_slots =
            1 + static_cast<int>((slot + dev.d.id) % dev.d.delay_budget_slots);
        c.pl_db = dev.pl_db;
        c.tx_power_dbm = dev.d.tx_power_dbm;
        cands.push_back(c);
      }
      std::vector<RrbGrant> grants = rrs_schedule(cands, slice, effective_cap_, bw);

      // 2. Non-scheduled transmissions (uncoordinated, full power).
      std::array<std::optional<double>, kRrbCount> ns_psd_at_bs{};
      const int usable = slice.n_ns_usable();
      for (Dev& dev : devices_) {
        if (dev.d.cls != TrafficClass::NonScheduledCapable) continue;
        if (*dev.d.next_ns_arrival_slot != slot) {
          if (*dev.d.next_ns_arrival_slot < slot)
            dev.d.next_ns_arrival_slot = next_ns_arrival(arrival, slot, rng);
          continue;
        }
        dev.d.next_ns_arrival_slot = next_ns_arrival(arrival, slot, rng);
        if (m) ++m->ns_attempts;
        ++ep_attempts;
        if (usable == 0) {
          if (m) { ++m->ns_outages; ++m->ns_blocked; }
          ++ep_outages;
          continue;
        }
        std::vector<double> snrs(usable);
        std::vector<double> gains(usable);
        std::vector<PsdLevel> levels(usable);
        for (int i = 0; i < usable; ++i) {
          std::optional<double> interference;
          if (i >= slice.n_ded_ns) {  // shared RRB, may carry a grant
            const int rrb = i;        // layout: ded-NS first, then shared
            if (grants[rrb].device_id) interference = grants[rrb].rx_psd_dbm_hz;
          }
          levels[i] = quantize_psd(interference);
          snrs[i] = mean_snr(cfg_.tx_ns_dbm, dev.pl_db, interference, bw,
                             cfg_.channel.noise_psd_dbm_hz);
          gains[i] = draw_fading(rng);
        }
        const std::size_t state = rru_state_id(levels);
        RruAgent& rru = rru_for(slice);
        if (learn) rru.learn_all(state, snrs, gains, ns_threshold);
        const std::size_t action = rru.decide(state, 0.0, rng);
        const PowerSplit& split = rru.split_for(action);
        double snr = 0;
        for (int i = 0; i < usable; ++i) snr += split.fractions[i] * snrs[i] * gains[i];
        const bool outage = snr < ns_threshold;
        if (outage) {
          if (m) ++m->ns_outages;
          ++ep_outages;
        }
        risk_.observe(risk_.ring_for_radius(dev.d.pos.radius_m), dev.pl_db);
        // NS energy lands on every usable RRB it splits power over.
        for (int i = 0; i < usable; ++i) {
          if (split.fractions[i] <= 0) continue;
          const double psd =
              cfg_.tx_ns_dbm + 10.0 * std::log10(split.fractions[i]) + dev.pl_db - bw_db;
          double acc = ns_psd_at_bs[i] ? db_to_linear(*ns_psd_at_bs[i]) : 0.0;
          acc += db_to_linear(psd);
          ns_psd_at_bs[i] = linear_to_db(acc);
        }
      }

      // 3. Scheduled reliable rate given the interference seen this slot.
      double slot_goodput = 0.0;
      for (int rrb = 0; rrb < kRrbCount; ++rrb) {
        if (!grants[rrb].device_id) continue;
        const Dev& dev = devices_[static_cast<std::size_t>(*grants[rrb].device_id)];
        const double g = mean_snr(grants[rrb].tx_power_dbm, dev.pl_db,
                                  ns_psd_at_bs[rrb], bw, cfg_.channel.noise_psd_dbm_hz);
        slot_goodput += eps_outage_rate(g, cfg_.eps_sched, bw);
        if (m) m->rrb_utilization[rrb] += 1.0;
      }
      if (m) {
        for (int rrb = 0; rrb < kRrbCount; ++rrb)
          if (!grants[rrb].device_id && ns_psd_at_bs[rrb]) m->rrb_utilization[rrb] += 1.0;
      }
      ep_goodput += slot_goodput;
      total_goodput += slot_goodput;

      // 4. Episode boundary: provisioning reward and a fresh slice.
      if ((slot + 1) % cfg_.episode_slots == 0 || slot + 1 == n_slots) {
        risk_.advance(cfg_.episode_slots, cfg_.risk_forget_rate);
        if (learn && cfg_.policy != RrmPolicy::Conservative) {
          const long ep_len = ((slot % cfg_.episode_slots) + 1);
          const double norm_goodput = ep_goodput / ep_len / max_goodput_bps_;
          const bool measured_violation =
              ep_attempts > 0 &&
              static_cast<double>(ep_outages) > cfg_.eps_ns * ep_attempts;
          const double predicted = predict_ns_outage(
              rrp_.actions()[rrp_action], risk_.cell_worst_pl_db(), cfg_.tx_ns_dbm,
              cfg_.channel, bw, effective_cap_, cfg_.ns_target_rate_bps);
          const double r = norm_goodput - cfg_.kappa * (measured_violation ? 1.0 : 0.0) -
                           cfg_.kappa * (predicted > cfg_.eps_ns ? 1.0 : 0.0);
          rrp_.learn(rrp_state, rrp_action, risk_utility(r, cfg_.learning.beta),
                     cfg_.learning);
        }
        ep_attempts = 0;
        ep_outages = 0;
        ep_goodput = 0.0;
        if (cfg_.policy != RrmPolicy::Conservative) {
          rrp_state = rrp_.state_id(cfg_.eps_ns, risk_.worst_ring());
          rrp_action = rrp_.decide(rrp_state, epsilon, rng);
          slice = rrp_.actions()[rrp_action];
        }
      }
    }

    if (m) {
      m->eval_slots = n_slots;
      m->scheduled_goodput_bps = total_goodput / n_slots;
      for (double& u : m->rrb_utilization) u /= n_slots;
      if (cfg_.policy != RrmPolicy::Conservative) {
        // Report the slice the frozen policy picks in the final risk state.
        const std::size_t s = rrp_.state_id(cfg_.eps_ns, risk_.worst_ring());
        m->learned_slice = rrp_.actions()[rrp_.table().best_action(s)];
      } else {
        m->learned_slice = conservative_.slice;
      }
    }
  }

  RruAgent& rru_for(const SliceConfig& slice) {
    const int key = slice.n_ded_ns * 8 + slice.n_shared;
    auto it = rru_agents_.find(key);
    if (it == rru_agents_.end())
      it = rru_agents_.emplace(key, RruAgent(slice.n_ded_ns, slice.n_shared)).first;
    return it->second;
  }

  SimConfig cfg_;
  std::vector<Dev> devices_;
  RiskMap risk_;
  RrpAgent rrp_;
  std::map<int, RruAgent> rru_agents_;
  ConservativeResult conservative_;
  InterferenceCap effective_cap_;
  double max_goodput_bps_ = 1.0;
};

/// Trains then greedily evaluates one run.
inline Metrics run(const SimConfig& cfg) {
  SimEngine e(cfg);
  e.train();
  return e.evaluate();
}

struct ReplicationSummary {
  int n_reps = 0;
  double goodput_mean_bps = 0.0, goodput_ci_half = 0.0;
  double ns_outage_mean = 0.0, ns_outage_ci_half = 0.0;
  std::vector<Metrics> reps;
};

inline ReplicationSummary run_replications(SimConfig cfg, int n_reps) {
  if (n_reps <= 0) throw std::invalid_argument("n_reps must be > 0");
  ReplicationSummary s;
  s.n_reps = n_reps;
  for (int r = 0; r < n_reps; ++r) {
    cfg.seed = cfg.seed + (r ? 1u : 0u);
    s.reps.push_back(run(cfg));
  }
  auto mean_ci = [&](auto get, double& mean, double& half) {
    double sum = 0, sq = 0;
    for (const Metrics& m : s.reps) { const double v = get(m); sum += v; sq += v * v; }
    mean = sum / n_reps;
    const double var = n_reps > 1 ? std::max(0.0, (sq - n_reps * mean * mean) / (n_reps - 1)) : 0.0;
    half = n_reps > 1 ? 1.96 * std::sqrt(var / n_reps) : 0.0;
  };
  mean_ci([](const Metrics& m) { return m.scheduled_goodput_bps; }, s.goodput_mean_bps,
          s.goodput_ci_half);
  mean_ci([](const Metrics& m) { return m.ns_outage_rate(); }, s.ns_outage_mean,
          s.ns_outage_ci_half);
  return s;
}

}  // namespace hmasim
