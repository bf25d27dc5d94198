#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "hmasim/rng.hpp"

namespace hmasim {

struct LearningParams {
  double alpha = 0.1;    // learning rate
  double epsilon = 0.85; // exploration rate during training
  double gamma = 0.9;    // discount
  double beta = 1.0;     // risk-aversion coefficient

  void validate() const {
    if (!(alpha > 0 && alpha <= 1))
      throw std::invalid_argument("learning.alpha must be in (0,1]");
    if (epsilon < 0 || epsilon > 1)
      throw std::invalid_argument("learning.epsilon must be in [0,1]");
    if (!(gamma >= 0 && gamma < 1))
      throw std::invalid_argument("learning.gamma must be in [0,1)");
    if (beta < 0) throw std::invalid_argument("learning.beta must be >= 0");
  }
};

/// Dense tabular state-action value store over finite spaces declared at
/// construction. Values start at zero.
class QTable {
 public:
  QTable(std::size_t n_states, std::size_t n_actions)
      : n_states_(n_states), n_actions_(n_actions),
        values_(n_states * n_actions, 0.0) {
    if (n_states == 0 || n_actions == 0)
      throw std::invalid_argument("QTable: empty state or action space");
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }

  double q(std::size_t s, std::size_t a) const { return values_[index(s, a)]; }
  void set(std::size_t s, std::size_t a, double v) { values_[index(s, a)] = v; }

  /// Greedy action, ties broken by lowest action id.
  std::size_t best_action(std::size_t s) const {
    check_state(s);
    std::size_t best = 0;
    double best_v = q(s, 0);
    for (std::size_t a = 1; a < n_actions_; ++a)
      if (q(s, a) > best_v) {
        best_v = q(s, a);
        best = a;
      }
    return best;
  }

  double max_q(std::size_t s) const { return q(s, best_action(s)); }

  /// Flat text form: one "state action value" triple per line.
  void save(std::ostream& os) const {
    os.precision(17);
    for (std::size_t s = 0; s < n_states_; ++s)
      for (std::size_t a = 0; a < n_actions_; ++a)
        os << s << ' ' << a << ' ' << q(s, a) << '\n';
  }

  void load(std::istream& is) {
    std::size_t s, a;
    double v;
    while (is >> s >> a >> v) set(s, a, v);
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("QTable: cannot write '" + path + "'");
    save(os);
  }

  void load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("QTable: cannot read '" + path + "'");
    load(is);
  }

 private:
  std::size_t index(std::size_t s, std::size_t a) const {
    check_state(s);
    if (a >= n_actions_) throw std::out_of_range("QTable: action out of range");
    return s * n_actions_ + a;
  }
  void check_state(std::size_t s) const {
    if (s >= n_states_) throw std::out_of_range("QTable: state out of range");
  }

  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> values_;
};

/// One-step tabular update:
///   Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')).
inline void q_update(QTable& q, std::size_t s, std::size_t a, double reward,
                     std::size_t s_next, const LearningParams& params) {
  if (!std::isfinite(reward))
    throw std::invalid_argument("q_update: reward must be finite");
  const double target = reward + params.gamma * q.max_q(s_next);
  q.set(s, a, (1.0 - params.alpha) * q.q(s, a) + params.alpha * target);
}

/// Epsilon-greedy selection: uniform exploration with probability epsilon,
/// otherwise greedy with lowest-id tie-break.
inline std::size_t select_action(const QTable& q, std::size_t s,
                                 const LearningParams& params, Rng& rng) {
  if (rng.uniform() < params.epsilon)
    return static_cast<std::size_t>(rng.below(q.n_actions()));
  return q.best_action(s);
}

/// Exponential-utility transform: increasing and concave for beta > 0, so
/// outcome variance is penalized; the risk-neutral identity at beta = 0.
inline double risk_utility(double reward, double beta) {
  if (beta < 0) throw std::invalid_argument("risk_utility: beta must be >= 0");
  if (beta == 0) return reward;
  return -std::expm1(-beta * reward) / beta;
}

}  // namespace hmasim
