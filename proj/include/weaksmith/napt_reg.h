#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "weaksmith/common.h"

namespace weaksmith {

// Coefficients of the two penalties added to the cross-entropy loss:
//   L = ce + alpha * ||theta - theta_init||^2 + beta * ||theta||^2
// With squared = false the plain Euclidean norms are used instead.
struct RegConfig {
  double alpha = 0.0;  // pull toward the initialization
  double beta = 0.0;   // ordinary weight decay
  bool squared = true;
};

struct ParamSnapshot {
  std::span<const double> theta;
  std::span<const double> theta_init;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Vectors at least this long are summed with Neumaier compensation.
inline constexpr std::size_t kCompensatedSumThreshold = 1'000'000;

double napt_loss(double ce_loss, const ParamSnapshot& snap, const RegConfig& cfg);

// Gradient of the two penalties only; the caller adds the CE gradient.
// In the unsquared form the gradient of a norm at zero is taken as zero.
std::vector<double> napt_reg_gradient(const ParamSnapshot& snap, const RegConfig& cfg);

struct PenaltyTerms {
  double anchored = 0.0;  // ||theta - theta_init||^2 (or the norm)
  double decay = 0.0;     // ||theta||^2 (or the norm)
};
PenaltyTerms penalty_terms(const ParamSnapshot& snap, const RegConfig& cfg);

}  // namespace weaksmith
