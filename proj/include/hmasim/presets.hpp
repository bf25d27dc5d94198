#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmasim/config.hpp"
#include "hmasim/engine.hpp"

namespace hmasim {

/// Baseline scenario shared by the presets: a dense cell (all devices close
/// enough that path loss stays at or above -100 dB) with five NS-capable
/// devices over saturated scheduled traffic.
inline SimConfig preset_base_config() {
  SimConfig cfg;
  cfg.seed = 20260801;
  cfg.n_devices = 20;
  cfg.n_ns_devices = 5;
  cfg.max_radius_m = 475.0;
  cfg.n_slots_train = 300000;
  cfg.n_slots_eval = 20000;
  cfg.episode_slots = 200;
  cfg.learning.alpha = 0.02;
  cfg.learning.epsilon = 0.85;
  cfg.learning.gamma = 0.0;  // episodes are independent
  cfg.learning.beta = 0.05;
  return cfg;
}

/// Reference NS link used by the power-allocation experiment: one dedicated
/// and two shared RRBs at a device with -80 dB path loss.
inline constexpr double kPowerAllocPlDb = -80.0;
inline constexpr double kPowerAllocTxDbm = 23.0;
inline constexpr double kPowerAllocTargetBps = 3096000.0;  // 17.2 b/s/Hz x 180 kHz
inline constexpr long kPowerAllocSamples = 1000000;

namespace detail {

inline std::string fmt_prob(double p) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(6) << p;
  return os.str();
}

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

inline std::ofstream open_csv(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write output file '" + path.string() + "'");
  return out;
}

}  // namespace detail

struct PresetResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// rate_vs_eps: scheduled reliable rate vs the NS reliability target for the
// four provisioning policies.
// ---------------------------------------------------------------------------

struct RateVsEpsPoint {
  double eps_ns = 0;
  RrmPolicy policy = RrmPolicy::Hma;
  double rate_bps = 0;
  double outage_mean = 0;
  double outage_ci_half = 0;
  SliceConfig slice;
};

inline const std::vector<double>& rate_vs_eps_grid() {
  static const std::vector<double> grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
  return grid;
}

inline std::vector<RateVsEpsPoint> collect_rate_vs_eps(int reps, std::uint64_t seed = 0) {
  const std::vector<RrmPolicy> policies = {RrmPolicy::Conservative, RrmPolicy::Oma,
                                           RrmPolicy::Noma, RrmPolicy::Hma};
  std::vector<RateVsEpsPoint> points;
  for (double eps : rate_vs_eps_grid()) {
    for (RrmPolicy policy : policies) {
      SimConfig cfg = preset_base_config();
      if (seed) cfg.seed = seed;
      cfg.eps_ns = eps;
      cfg.policy = policy;
      if (policy == RrmPolicy::Conservative || policy == RrmPolicy::Noma)
        cfg.n_slots_train = 20000;  // no provisioning to learn, only RRU warm-up
      const ReplicationSummary s = run_replications(cfg, reps);
      RateVsEpsPoint p;
      p.eps_ns = eps;
      p.policy = policy;
      p.rate_bps = s.goodput_mean_bps;
      p.outage_mean = s.ns_outage_mean;
      p.outage_ci_half = s.ns_outage_ci_half;
      p.slice = s.reps.front().learned_slice;
      points.push_back(p);
    }
  }
  return points;
}

inline PresetResult run_rate_vs_eps(const std::filesystem::path& out_dir, int reps,
                                    std::uint64_t seed = 0) {
  const std::vector<RateVsEpsPoint> points = collect_rate_vs_eps(reps, seed);
  std::ofstream csv = detail::open_csv(out_dir / "rate_vs_eps.csv");
  csv << "eps_ns,mode,reliable_rate_bps,ns_outage_measured,ci_low,ci_high\n";
  std::map<std::pair<double, RrmPolicy>, double> rate;
  for (const RateVsEpsPoint& p : points) {
    rate[{p.eps_ns, p.policy}] = p.rate_bps;
    const double lo = std::max(0.0, p.outage_mean - p.outage_ci_half);
    const double hi = std::min(1.0, p.outage_mean + p.outage_ci_half);
    csv << detail::fmt_prob(p.eps_ns) << ',' << policy_name(p.policy) << ','
        << detail::fmt_num(p.rate_bps) << ',' << detail::fmt_prob(p.outage_mean) << ','
        << detail::fmt_prob(lo) << ',' << detail::fmt_prob(hi) << '\n';
  }
  csv.close();

  std::ofstream ratios = detail::open_csv(out_dir / "rate_vs_eps_ratios.csv");
  ratios << "eps_ns,rate_conservative_bps,rate_oma_bps,rate_noma_bps,rate_hma_bps,"
            "hma_over_conservative,hma_over_oma\n";
  PresetResult res;
  for (double eps : rate_vs_eps_grid()) {
    const double rc = rate[{eps, RrmPolicy::Conservative}];
    const double ro = rate[{eps, RrmPolicy::Oma}];
    const double rn = rate[{eps, RrmPolicy::Noma}];
    const double rh = rate[{eps, RrmPolicy::Hma}];
    ratios << detail::fmt_prob(eps) << ',' << detail::fmt_num(rc) << ',' << detail::fmt_num(ro)
           << ',' << detail::fmt_num(rn) << ',' << detail::fmt_num(rh) << ','
           << detail::fmt_num(rc > 0 ? rh / rc : 0.0) << ','
           << detail::fmt_num(ro > 0 ? rh / ro : 0.0) << '\n';
    if (eps == 1e-4 || eps == 1e-7)
      res.notes.push_back("eps_ns=" + detail::fmt_prob(eps) + ": HMA/conservative rate ratio " +
                          detail::fmt_num(rc > 0 ? rh / rc : 0.0));
  }
  ratios.close();
  res.files = {out_dir / "rate_vs_eps.csv", out_dir / "rate_vs_eps_ratios.csv"};
  return res;
}

// ---------------------------------------------------------------------------
// power_alloc: outage of each candidate power split under two shared-RRB
// interference cases, common random numbers across candidates.
// ---------------------------------------------------------------------------

struct PowerAllocCase {
  std::string label;
  std::vector<std::optional<double>> interference_psd_dbm_hz;
};

inline std::vector<PowerAllocCase> power_alloc_cases() {
  return {{"NONE_-172_-172", {std::nullopt, -172.0, -172.0}},
          {"NONE_-164_-164", {std::nullopt, -164.0, -164.0}}};
}

inline PresetResult run_power_alloc(const std::filesystem::path& out_dir,
                                    std::uint64_t seed = 0) {
  const std::uint64_t s = seed ? seed : 20260801;
  const ChannelParams cp;
  const double bw = 180000.0;
  const std::vector<PowerSplit> candidates = candidate_splits(1, 2);

  std::ofstream csv = detail::open_csv(out_dir / "power_alloc.csv");
  csv << "alpha,interference_psd_case,outage,ci\n";
  std::ofstream best = detail::open_csv(out_dir / "power_alloc_best.csv");
  best << "interference_psd_case,best_alpha,best_outage\n";

  PresetResult res;
  for (const PowerAllocCase& pc : power_alloc_cases()) {
    std::vector<double> snrs;
    for (const auto& i : pc.interference_psd_dbm_hz)
      snrs.push_back(mean_snr(kPowerAllocTxDbm, kPowerAllocPlDb, i, bw, cp.noise_psd_dbm_hz));
    double best_outage = 2.0, best_alpha = 0.0;
    for (const PowerSplit& split : candidates) {
      Rng rng(s);  // common random numbers: same draws for every candidate
      const OutageEstimate est = multi_rrb_outage_mc(split, snrs, kPowerAllocTargetBps, bw,
                                                     kPowerAllocSamples, rng);
      const double alpha = split.fractions[0];
      csv << detail::fmt_num(alpha) << ',' << pc.label << ',' << detail::fmt_prob(est.p_hat)
          << ',' << detail::fmt_prob(est.half_width_95) << '\n';
      if (est.p_hat < best_outage) {
        best_outage = est.p_hat;
        best_alpha = alpha;
      }
    }
    best << pc.label << ',' << detail::fmt_num(best_alpha) << ','
         << detail::fmt_prob(best_outage) << '\n';
    res.notes.push_back("case " + pc.label + ": best alpha " + detail::fmt_num(best_alpha));
  }
  res.files = {out_dir / "power_alloc.csv", out_dir / "power_alloc_best.csv"};
  return res;
}

// ---------------------------------------------------------------------------
// oracle_check: closed-form MRC outage vs Monte Carlo.
// ---------------------------------------------------------------------------

inline PresetResult run_oracle_check(const std::filesystem::path& out_dir,
                                     std::uint64_t seed = 0) {
  const std::uint64_t s = seed ? seed : 20260801;
  struct Case {
    std::vector<double> branch_snrs;  // f_i * gamma_i per active branch
    double threshold;
  };
  const std::vector<Case> cases = {
      {{1000.0}, 100.0},
      {{1000.0, 1000.0}, 400.0},
      {{2000.0, 500.0}, 300.0},
      {{1e6 / 3, 1e6 / 3, 1e6 / 3}, 150000.0},
      {{5e5, 2.5e5, 2.5e5}, 150000.0},
      {{1e4, 1e4, 1e4, 1e4, 1e4}, 9000.0},
  };
  std::ofstream csv = detail::open_csv(out_dir / "oracle_check.csv");
  csv << "case_id,n_branches,closed_form,mc_estimate,mc_sigma,abs_error,within_4sigma\n";
  const long n = 1000000;
  PresetResult res;
  bool all_ok = true;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const Case& k = cases[c];
    const double exact = mrc_outage_analytic(k.branch_snrs, k.threshold);
    PowerSplit split;
    split.fractions.assign(k.branch_snrs.size(), 1.0 / k.branch_snrs.size());
    std::vector<double> snrs;
    for (double b : k.branch_snrs) snrs.push_back(b * k.branch_snrs.size());
    const double bw = 1.0;
    const double rate = std::log2(1.0 + k.threshold) * bw;
    Rng rng(s + c);
    const OutageEstimate est = multi_rrb_outage_mc(split, snrs, rate, bw, n, rng);
    const double sigma = std::sqrt(std::max(exact * (1 - exact), 1e-12) / n);
    const bool ok = std::abs(exact - est.p_hat) <= 4.0 * sigma;
    all_ok = all_ok && ok;
    csv << c << ',' << k.branch_snrs.size() << ',' << detail::fmt_prob(exact) << ','
        << detail::fmt_prob(est.p_hat) << ',' << detail::fmt_prob(sigma) << ','
        << detail::fmt_prob(std::abs(exact - est.p_hat)) << ',' << (ok ? 1 : 0) << '\n';
  }
  res.files = {out_dir / "oracle_check.csv"};
  res.notes.push_back(all_ok ? "all cases within 4 sigma" : "MISMATCH beyond 4 sigma");
  return res;
}

// ---------------------------------------------------------------------------
// `run` subcommand output: single-run summary CSV.
// ---------------------------------------------------------------------------

inline std::filesystem::path write_run_summary(const std::filesystem::path& out_dir,
                                               const SimConfig& cfg, const Metrics& m) {
  std::ofstream csv = detail::open_csv(out_dir / "run_summary.csv");
  csv << "mode,eps_ns,seed,ns_attempts,ns_outages,ns_blocked,ns_outage_rate,"
         "scheduled_goodput_bps,slice_ded_ns,slice_shared,slice_ded_s,"
         "util_rrb0,util_rrb1,util_rrb2,util_rrb3,util_rrb4,conservative_feasible\n";
  csv << policy_name(cfg.policy) << ',' << detail::fmt_prob(cfg.eps_ns) << ',' << cfg.seed
      << ',' << m.ns_attempts << ',' << m.ns_outages << ',' << m.ns_blocked << ','
      << detail::fmt_prob(m.ns_outage_rate()) << ','
      << detail::fmt_num(m.scheduled_goodput_bps) << ',' << m.learned_slice.n_ded_ns << ','
      << m.learned_slice.n_shared << ',' << m.learned_slice.n_ded_s;
  for (double u : m.rrb_utilization) csv << ',' << detail::fmt_prob(u);
  csv << ',' << (m.conservative_feasible ? 1 : 0) << '\n';
  return out_dir / "run_summary.csv";
}

}  // namespace hmasim
