#pragma once

#include <cmath>
#include <string_view>

namespace colliderbias {

// Absolute tolerance for values on [-1, 1] scales (Cov, RD, LM) and the
// relative tolerance for ratio scales (RR, OR).
inline constexpr double kAbsTolerance = 1e-12;
inline constexpr double kRelTolerance = 1e-10;

enum class Sign { Negative, Zero, Positive };

std::string_view to_string(Sign sign);
Sign parse_sign(std::string_view text);

// Zero when |value| <= tol.
inline Sign sign_of(double value, double tol = kAbsTolerance) {
  if (std::abs(value) <= tol) return Sign::Zero;
  return value > 0.0 ? Sign::Positive : Sign::Negative;
}

// Sign of a multiplicative bias factor relative to 1.
inline Sign sign_of_factor(double factor, double tol = 10 * kAbsTolerance) {
  return sign_of(factor - 1.0, tol);
}

inline Sign operator*(Sign a, Sign b) {
  if (a == Sign::Zero || b == Sign::Zero) return Sign::Zero;
  return a == b ? Sign::Positive : Sign::Negative;
}

inline Sign operator-(Sign a) {
  if (a == Sign::Zero) return a;
  return a == Sign::Positive ? Sign::Negative : Sign::Positive;
}

}  // namespace colliderbias
