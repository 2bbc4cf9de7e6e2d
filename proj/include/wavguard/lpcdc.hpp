#ifndef WAVGUARD_LPCDC_HPP
#define WAVGUARD_LPCDC_HPP

// LPC distribution constraint over the 256 mu-law levels.
//
// The mask is a Gaussian density evaluated pointwise at each level amplitude
// and normalized to unit mass. A predicted PMF is constrained by
//
//   p_mod[q]  ~  p[q] * mask[q]^rho
//
// All products run in the log domain with max subtraction: rho near 1 with
// sigma near 1e-3 underflows in direct arithmetic.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>

#include "wavguard/signal.hpp"

namespace wavguard {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class Pmf256 {
public:
  using Array = std::array<double, kNumLevels>;

  Pmf256() { p_.fill(1.0 / kNumLevels); }

  // Normalizes the given nonnegative weights.
  static Pmf256 from_weights(const Array& w) {
    double total = 0.0;
    for (double v : w) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("Pmf256: weights must be finite and >= 0");
      total += v;
    }
    if (!(total > 0.0)) throw std::invalid_argument("Pmf256: zero total mass");
    Pmf256 out;
    for (int q = 0; q < kNumLevels; ++q) out.p_[q] = w[q] / total;
    return out;
  }

  // Normalizes exp(log_w) after max subtraction; -inf entries become exact zeros.
  static Pmf256 from_log_weights(const Array& log_w) {
    const double peak = *std::max_element(log_w.begin(), log_w.end());
    if (!std::isfinite(peak)) throw std::invalid_argument("Pmf256: no finite log weight");
    Array w{};
    for (int q = 0; q < kNumLevels; ++q) w[q] = std::exp(log_w[q] - peak);
    return from_weights(w);
  }

  static Pmf256 uniform() { return Pmf256(); }

  double operator[](int q) const { return p_[static_cast<std::size_t>(q)]; }
  const Array& values() const noexcept { return p_; }

  int argmax() const {
    return static_cast<int>(std::max_element(p_.begin(), p_.end()) - p_.begin());
  }

  double total() const { return std::accumulate(p_.begin(), p_.end(), 0.0); }

private:
  Array p_{};
};

// A normalized PMF carried as log probabilities, so tails that underflow as
// probabilities are still usable after raising to a small power.
struct LogPmf256 {
  Pmf256::Array log_p{};

  static LogPmf256 from_pmf(const Pmf256& p) {
    LogPmf256 out;
    for (int q = 0; q < kNumLevels; ++q) out.log_p[q] = p[q] > 0.0 ? std::log(p[q]) : kNegInf;
    return out;
  }

  Pmf256 to_pmf() const { return Pmf256::from_log_weights(log_p); }
};

inline double log_sum_exp(std::span<const double> v) {
  const double peak = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - peak);
  return peak + std::log(acc);
}

inline LogPmf256 lpc_log_mask(double mu_lpc, double sigma_lpc, const LevelTable& table = LevelTable::instance()) {
  if (!std::isfinite(mu_lpc) || !std::isfinite(sigma_lpc)) {
    throw std::invalid_argument("lpc_mask: non-finite mean or sigma");
  }
  if (!(sigma_lpc > 0.0)) throw std::invalid_argument("lpc_mask: sigma must be positive");
  LogPmf256 out;
  for (int q = 0; q < kNumLevels; ++q) {
    const double z = (table[q] - mu_lpc) / sigma_lpc;
    out.log_p[q] = -0.5 * z * z;
  }
  const double norm = log_sum_exp(out.log_p);
  for (double& v : out.log_p) v -= norm;
  return out;
}

inline Pmf256 lpc_mask(double mu_lpc, double sigma_lpc, const LevelTable& table = LevelTable::instance()) {
  return lpc_log_mask(mu_lpc, sigma_lpc, table).to_pmf();
}

struct ConstraintResult {
  Pmf256 pmf;
  bool fallback = false;  // no usable overlap; pmf is the mask itself
};

/// Below this unnormalized mass the product is treated as empty.
inline constexpr double kMinConstraintMass = 1e-300;

inline ConstraintResult apply_constraint(const Pmf256& wn_pmf, const LogPmf256& mask, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("apply_constraint: rho must be finite and >= 0");
  if (rho == 0.0) return {wn_pmf, false};
  Pmf256::Array log_w{};
  for (int q = 0; q < kNumLevels; ++q) {
    log_w[q] = wn_pmf[q] > 0.0 ? std::log(wn_pmf[q]) + rho * mask.log_p[q] : kNegInf;
  }
  if (!(log_sum_exp(log_w) >= std::log(kMinConstraintMass))) {
    return {mask.to_pmf(), true};
  }
  return {Pmf256::from_log_weights(log_w), false};
}

inline ConstraintResult apply_constraint(const Pmf256& wn_pmf, const Pmf256& mask, double rho) {
  return apply_constraint(wn_pmf, LogPmf256::from_pmf(mask), rho);
}

}  // namespace wavguard

#endif  // WAVGUARD_LPCDC_HPP
