#include "weaksmith/napt_reg.h"

#include <cmath>

namespace weaksmith {

namespace {

void check(const ParamSnapshot& snap, const RegConfig& cfg) {
  if (snap.theta.size() != snap.theta_init.size()) {
    throw DimensionError("theta has " + std::to_string(snap.theta.size()) + " entries, theta_init " +
                         std::to_string(snap.theta_init.size()));
  }
  if (!std::isfinite(cfg.alpha) || !std::isfinite(cfg.beta)) throw NumericError("non-finite alpha or beta");
  if (cfg.alpha < 0.0 || cfg.beta < 0.0) throw ConfigError("alpha and beta must be non-negative");
  for (std::size_t i = 0; i < snap.theta.size(); ++i) {
    if (!std::isfinite(snap.theta[i]) || !std::isfinite(snap.theta_init[i])) {
      throw NumericError("non-finite parameter at index " + std::to_string(i));
    }
  }
}

// Returns (sum (theta - init)^2, sum theta^2).
std::pair<double, double> squared_norms(const ParamSnapshot& snap) {
  const std::size_t n = snap.theta.size();
  if (n < kCompensatedSumThreshold) {
    double diff = 0.0, plain = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = snap.theta[i] - snap.theta_init[i];
      diff += d * d;
      plain += snap.theta[i] * snap.theta[i];
    }
    return {diff, plain};
  }
  struct Neumaier {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
      const double t = sum + x;
      carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
    double value() const { return sum + carry; }
  } diff, plain;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = snap.theta[i] - snap.theta_init[i];
    diff.add(d * d);
    plain.add(snap.theta[i] * snap.theta[i]);
  }
  return {diff.value(), plain.value()};
}

}  // namespace

PenaltyTerms penalty_terms(const ParamSnapshot& snap, const RegConfig& cfg) {
  check(snap, cfg);
  auto [diff, plain] = squared_norms(snap);
  if (!cfg.squared) return {std::sqrt(diff), std::sqrt(plain)};
  return {diff, plain};
}

double napt_loss(double ce_loss, const ParamSnapshot& snap, const RegConfig& cfg) {
  if (!std::isfinite(ce_loss)) throw NumericError("non-finite cross-entropy loss");
  const auto terms = penalty_terms(snap, cfg);
  return ce_loss + cfg.alpha * terms.anchored + cfg.beta * terms.decay;
}

std::vector<double> napt_reg_gradient(const ParamSnapshot& snap, const RegConfig& cfg) {
  check(snap, cfg);
  const std::size_t n = snap.theta.size();
  std::vector<double> grad(n);
  if (cfg.squared) {
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = 2.0 * cfg.alpha * (snap.theta[i] - snap.theta_init[i]) + 2.0 * cfg.beta * snap.theta[i];
    }
    return grad;
  }
  auto [diff, plain] = squared_norms(snap);
  const double diff_norm = std::sqrt(diff), plain_norm = std::sqrt(plain);
  const double a = diff_norm > 0.0 ? cfg.alpha / diff_norm : 0.0;
  const double b = plain_norm > 0.0 ? cfg.beta / plain_norm : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    grad[i] = a * (snap.theta[i] - snap.theta_init[i]) + b * snap.theta[i];
  }
  return grad;
}

}  // namespace weaksmith
