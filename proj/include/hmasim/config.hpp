#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hmasim/engine.hpp"

namespace hmasim {

inline RrmPolicy parse_policy(const std::string& raw) {
  std::string s = raw;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "conservative") return RrmPolicy::Conservative;
  if (s == "oma") return RrmPolicy::Oma;
  if (s == "noma") return RrmPolicy::Noma;
  if (s == "hma") return RrmPolicy::Hma;
  throw std::invalid_argument("rrm.mode must be one of conservative, OMA, NOMA, HMA (got '" +
                              raw + "')");
}

inline std::string policy_name(RrmPolicy p) {
  switch (p) {
    case RrmPolicy::Conservative: return "conservative";
    case RrmPolicy::Oma: return "OMA";
    case RrmPolicy::Noma: return "NOMA";
    case RrmPolicy::Hma: return "HMA";
  }
  return "?";
}

namespace detail {

using Setter = std::function<void(SimConfig&, const std::string&, const std::string&)>;

inline double parse_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("value for '" + key + "' is not a number: '" + value + "'");
  }
  while (used < value.size() && std::isspace(static_cast<unsigned char>(value[used]))) ++used;
  if (used != value.size())
    throw std::invalid_argument("value for '" + key + "' is not a number: '" + value + "'");
  return v;
}

inline long parse_integer(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  const long n = static_cast<long>(v);
  if (static_cast<double>(n) != v)
    throw std::invalid_argument("value for '" + key + "' must be an integer: '" + value + "'");
  return n;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("value for '" + key + "' must be true or false: '" + value + "'");
}

inline const std::map<std::string, Setter>& config_keys() {
  auto num = [](auto member) {
    return [member](SimConfig& c, const std::string& k, const std::string& v) {
      c.*member = parse_number(k, v);
    };
  };
  auto num_in = [](auto outer, auto member) {
    return [outer, member](SimConfig& c, const std::string& k, const std::string& v) {
      (c.*outer).*member = parse_number(k, v);
    };
  };
  static const std::map<std::string, Setter> keys = {
      {"sim.seed",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(parse_integer(k, v));
       }},
      {"sim.n_slots_train",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.n_slots_train = parse_integer(k, v);
       }},
      {"sim.n_slots_eval",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.n_slots_eval = parse_integer(k, v);
       }},
      {"sim.episode_slots",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.episode_slots = parse_integer(k, v);
       }},
      {"sim.slot_duration_ms", num(&SimConfig::slot_duration_ms)},
      {"cell.n_devices",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.n_devices = static_cast<int>(parse_integer(k, v));
       }},
      {"cell.n_ns_devices",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.n_ns_devices = static_cast<int>(parse_integer(k, v));
       }},
      {"cell.min_radius_m", num(&SimConfig::min_radius_m)},
      {"cell.max_radius_m", num(&SimConfig::max_radius_m)},
      {"cell.tx_sched_dbm", num(&SimConfig::tx_sched_dbm)},
      {"cell.tx_ns_dbm", num(&SimConfig::tx_ns_dbm)},
      {"cell.sched_delay_budget_slots",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.sched_delay_budget_slots = static_cast<int>(parse_integer(k, v));
       }},
      {"channel.pl_ref_db", num_in(&SimConfig::channel, &ChannelParams::pl_ref_db)},
      {"channel.d_ref_m", num_in(&SimConfig::channel, &ChannelParams::d_ref_m)},
      {"channel.pl_exponent", num_in(&SimConfig::channel, &ChannelParams::pl_exponent)},
      {"channel.pl_floor_db", num_in(&SimConfig::channel, &ChannelParams::pl_floor_db)},
      {"channel.noise_psd_dbm_hz",
       num_in(&SimConfig::channel, &ChannelParams::noise_psd_dbm_hz)},
      {"phy.rrb_bandwidth_hz", num(&SimConfig::rrb_bandwidth_hz)},
      {"phy.max_interference_psd_dbm_hz",
       num_in(&SimConfig::cap, &InterferenceCap::max_psd_dbm_hz)},
      {"traffic.rate_per_slot", num_in(&SimConfig::arrival, &ArrivalProcess::rate_per_slot)},
      {"traffic.arrivals_per_cell",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.arrivals_per_cell = parse_bool(k, v);
       }},
      {"rrm.mode",
       [](SimConfig& c, const std::string&, const std::string& v) {
         c.policy = parse_policy(v);
       }},
      {"rrm.eps_ns", num(&SimConfig::eps_ns)},
      {"rrm.eps_sched", num(&SimConfig::eps_sched)},
      {"rrm.ns_target_rate_bps", num(&SimConfig::ns_target_rate_bps)},
      {"rrm.kappa", num(&SimConfig::kappa)},
      {"rrm.risk_forget_rate", num(&SimConfig::risk_forget_rate)},
      {"rrm.conservative_mc_samples",
       [](SimConfig& c, const std::string& k, const std::string& v) {
         c.conservative_mc_samples = parse_integer(k, v);
       }},
      {"learning.alpha", num_in(&SimConfig::learning, &LearningParams::alpha)},
      {"learning.epsilon", num_in(&SimConfig::learning, &LearningParams::epsilon)},
      {"learning.gamma", num_in(&SimConfig::learning, &LearningParams::gamma)},
      {"learning.beta", num_in(&SimConfig::learning, &LearningParams::beta)},
  };
  return keys;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses a flat `section.key = value` configuration. Lines starting with
/// '#' and blank lines are ignored. Unknown keys, malformed values, and
/// invariant violations raise std::invalid_argument naming the key and, for
/// file content, the line number.
inline SimConfig parse_config(std::istream& in, SimConfig base = SimConfig{}) {
  std::string line;
  int lineno = 0;
  const auto& keys = detail::config_keys();
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'section.key = value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    auto it = keys.find(key);
    if (it == keys.end())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    try {
      it->second(base, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

/// Applies SIM_<SECTION>_<KEY> environment overrides on top of a config.
inline SimConfig apply_env_overrides(SimConfig cfg) {
  for (const auto& [key, setter] : detail::config_keys()) {
    std::string env = "SIM_" + key;
    std::replace(env.begin(), env.end(), '.', '_');
    std::transform(env.begin(), env.end(), env.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    if (const char* v = std::getenv(env.c_str())) {
      try {
        setter(cfg, key, v);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("environment override ") + env + ": " +
                                    e.what());
      }
    }
  }
  return cfg;
}

/// Loads, overrides, and validates a config file.
inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  SimConfig cfg;
  try {
    cfg = parse_config(in);
    cfg = apply_env_overrides(cfg);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return cfg;
}

}  // namespace hmasim
