#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hmasim/rng.hpp"

namespace hmasim {

inline constexpr double kLn2 = 0.6931471805599453;

/// SINR threshold implied by a target rate: 2^(R/B) - 1, computed through
/// expm1 so tiny thresholds keep full relative precision.
inline double rate_threshold(double rate_bps, double bandwidth_hz) {
  return std::expm1(rate_bps / bandwidth_hz * kLn2);
}

/// Shannon rate in bits/s.
inline double shannon_rate(double sinr_linear, double bandwidth_hz) {
  if (sinr_linear < 0)
    throw std::invalid_argument("shannon_rate: negative SINR");
  return bandwidth_hz * std::log1p(sinr_linear) / kLn2;
}

/// Outage probability of a single Rayleigh-faded link: the SINR threshold
/// is missed with probability 1 - exp(-threshold / mean).
inline double rayleigh_outage(double mean_snr_linear, double sinr_threshold_linear) {
  if (!(mean_snr_linear > 0))
    throw std::invalid_argument("rayleigh_outage: mean SNR must be positive");
  if (sinr_threshold_linear < 0)
    throw std::invalid_argument("rayleigh_outage: negative threshold");
  return -std::expm1(-sinr_threshold_linear / mean_snr_linear);
}

/// Largest rate whose Rayleigh outage does not exceed epsilon.
inline double eps_outage_rate(double mean_snr_linear, double epsilon,
                              double bandwidth_hz) {
  if (!(epsilon > 0 && epsilon < 1))
    throw std::invalid_argument("eps_outage_rate: epsilon must be in (0,1)");
  const double threshold = -std::log1p(-epsilon) * mean_snr_linear;
  return shannon_rate(threshold, bandwidth_hz);
}

/// Power shares across usable RRBs; must sum to one.
struct PowerSplit {
  std::vector<double> fractions;

  void validate() const {
    double sum = 0;
    for (double f : fractions) {
      if (f < 0 || f > 1)
        throw std::invalid_argument("PowerSplit: share outside [0,1]");
      sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("PowerSplit: shares must sum to 1");
  }
};

struct OutageEstimate {
  double p_hat = 0;
  double half_width_95 = 0;
  long n_samples = 0;
};

inline OutageEstimate make_outage_estimate(long failures, long n) {
  OutageEstimate e;
  e.n_samples = n;
  e.p_hat = static_cast<double>(failures) / static_cast<double>(n);
  e.half_width_95 = 1.96 * std::sqrt(e.p_hat * (1.0 - e.p_hat) / n);
  return e;
}

/// Monte Carlo outage of one packet sent across several RRBs with the
/// given power split. Per-RRB Rayleigh gains are independent; the receiver
/// combines the branches (maximum-ratio), so the packet is lost when the
/// combined SNR falls below the target rate's threshold.
inline OutageEstimate multi_rrb_outage_mc(const PowerSplit& split,
                                          const std::vector<double>& mean_snrs,
                                          double target_rate_bps,
                                          double bandwidth_hz, long n_samples,
                                          Rng& rng) {
  if (split.fractions.size() != mean_snrs.size())
    throw std::invalid_argument("multi_rrb_outage_mc: split/mean_snrs length mismatch");
  if (n_samples < 10000)
    throw std::invalid_argument("multi_rrb_outage_mc: need at least 1e4 samples");
  split.validate();
  const std::size_t k = mean_snrs.size();
  std::vector<double> branch(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(mean_snrs[i] > 0))
      throw std::invalid_argument("multi_rrb_outage_mc: mean SNR must be positive");
    branch[i] = split.fractions[i] * mean_snrs[i];
  }
  const double threshold = rate_threshold(target_rate_bps, bandwidth_hz);
  long failures = 0;
  for (long s = 0; s < n_samples; ++s) {
    double snr = 0;
    for (std::size_t i = 0; i < k; ++i) snr += branch[i] * rng.exponential();
    if (snr < threshold) ++failures;
  }
  return make_outage_estimate(failures, n_samples);
}

namespace detail {

// exp(A) for a small matrix with scaling-and-squaring plus a Taylor series;
// adequate for the bidiagonal generators below (n <= 8, bounded norm after
// scaling).
template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

template <std::size_t N>
Mat<N> mat_mul(const Mat<N>& a, const Mat<N>& b, std::size_t n) {
  Mat<N> c{};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i][k];
      if (aik == 0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i][j] += aik * b[k][j];
    }
  return c;
}

template <std::size_t N>
Mat<N> mat_exp(Mat<N> a, std::size_t n) {
  double norm = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a[i][j]);
    norm = std::max(norm, row);
  }
  int squarings = 0;
  while (norm > 0.5) {
    norm /= 2;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] *= scale;

  Mat<N> result{};
  for (std::size_t i = 0; i < n; ++i) result[i][i] = 1.0;
  Mat<N> term = result;
  for (int order = 1; order <= 16; ++order) {
    term = mat_mul(term, a, n);
    const double inv = 1.0 / order;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        term[i][j] *= inv;
        result[i][j] += term[i][j];
      }
  }
  for (int s = 0; s < squarings; ++s) result = mat_mul(result, result, n);
  return result;
}

}  // namespace detail

/// Closed-form outage of maximum-ratio combining over independent Rayleigh
/// branches: P(sum of exponentials with the given means < threshold),
/// evaluated through the phase-type representation of the hypoexponential
/// distribution. Zero-power branches are skipped; no branches left means
/// certain outage for a positive threshold.
inline double mrc_outage_analytic(const std::vector<double>& branch_mean_snrs,
                                  double sinr_threshold_linear) {
  if (sinr_threshold_linear < 0)
    throw std::invalid_argument("mrc_outage_analytic: negative threshold");
  std::vector<double> rates;
  for (double m : branch_mean_snrs) {
    if (m < 0) throw std::invalid_argument("mrc_outage_analytic: negative branch mean");
    if (m > 0) rates.push_back(1.0 / m);
  }
  if (sinr_threshold_linear == 0) return 0.0;
  if (rates.empty()) return 1.0;
  constexpr std::size_t kMax = 8;
  if (rates.size() > kMax)
    throw std::invalid_argument("mrc_outage_analytic: too many branches");
  const std::size_t n = rates.size();
  detail::Mat<kMax> gen{};
  for (std::size_t i = 0; i < n; ++i) {
    gen[i][i] = -rates[i] * sinr_threshold_linear;
    if (i + 1 < n) gen[i][i + 1] = rates[i] * sinr_threshold_linear;
  }
  const auto e = detail::mat_exp(gen, n);
  double survival = 0;
  for (std::size_t j = 0; j < n; ++j) survival += e[0][j];
  return std::clamp(1.0 - survival, 0.0, 1.0);
}

}  // namespace hmasim
