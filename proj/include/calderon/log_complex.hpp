#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "calderon/types.hpp"

namespace calderon {

/// Complex number stored as (log |z|, arg z). log_mod = -inf is the exact zero.
struct LogComplex {
  double log_mod = -std::numeric_limits<double>::infinity();
  double phase = 0.0;

  static LogComplex zero() { return {}; }
  static LogComplex from(Complex z);
  /// e^{exponent}.
  static LogComplex exp(Complex exponent);

  bool is_zero() const { return log_mod == -std::numeric_limits<double>::infinity(); }
  /// May overflow to infinity or underflow to zero.
  Complex to_complex() const;

  LogComplex operator*(const LogComplex& o) const;
  LogComplex operator/(const LogComplex& o) const;
  LogComplex operator+(const LogComplex& o) const;
  LogComplex operator-() const;
  LogComplex operator-(const LogComplex& o) const { return *this + (-o); }
  LogComplex scaled(double factor) const { return *this * from(Complex(factor, 0.0)); }
};

/// Wraps an angle to (-pi, pi].
double wrap_phase(double a);

/// log-sum-exp of sum_k coef_k e^{exponent_k} with max extraction and a
/// pairwise reduction of the rescaled terms.
LogComplex log_sum_exp(const std::vector<Complex>& exponents, const std::vector<Complex>& coefficients);

/// Sum of LogComplex terms.
LogComplex log_sum(const std::vector<LogComplex>& terms);

}  // namespace calderon
