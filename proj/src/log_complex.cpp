#include "calderon/log_complex.hpp"

#include <algorithm>
#include <stdexcept>

#include "calderon/geometry.hpp"

namespace calderon {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double wrap_phase(double a) {
  if (!std::isfinite(a)) return 0.0;
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

LogComplex LogComplex::from(Complex z) {
  if (z == Complex(0.0, 0.0)) return zero();
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::invalid_argument("LogComplex from a non-finite value");
  }
  // Rescale before taking the modulus so subnormal or huge parts stay exact.
  const double s = std::max(std::abs(z.real()), std::abs(z.imag()));
  return {std::log(s) + std::log(std::abs(z / s)), std::arg(z)};
}

LogComplex LogComplex::exp(Complex exponent) {
  if (exponent.real() == kNegInf) return zero();
  return {exponent.real(), wrap_phase(exponent.imag())};
}

Complex LogComplex::to_complex() const {
  if (is_zero()) return {0.0, 0.0};
  return std::polar(std::exp(log_mod), phase);
}

LogComplex LogComplex::operator*(const LogComplex& o) const {
  if (is_zero() || o.is_zero()) return zero();
  return {log_mod + o.log_mod, wrap_phase(phase + o.phase)};
}

LogComplex LogComplex::operator/(const LogComplex& o) const {
  if (o.is_zero()) throw std::domain_error("LogComplex division by zero");
  if (is_zero()) return zero();
  return {log_mod - o.log_mod, wrap_phase(phase - o.phase)};
}

LogComplex LogComplex::operator-() const {
  if (is_zero()) return zero();
  return {log_mod, wrap_phase(phase + kPi)};
}

LogComplex LogComplex::operator+(const LogComplex& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  const double m = std::max(log_mod, o.log_mod);
  const Complex s = std::polar(std::exp(log_mod - m), phase) + std::polar(std::exp(o.log_mod - m), o.phase);
  if (s == Complex(0.0, 0.0)) return zero();
  const LogComplex r = from(s);
  return {m + r.log_mod, r.phase};
}

LogComplex log_sum_exp(const std::vector<Complex>& exponents, const std::vector<Complex>& coefficients) {
  if (exponents.size() != coefficients.size()) throw std::invalid_argument("log_sum_exp size mismatch");
  double m = kNegInf;
  for (std::size_t k = 0; k < exponents.size(); ++k) {
    if (coefficients[k] != Complex(0.0, 0.0)) m = std::max(m, exponents[k].real());
  }
  if (m == kNegInf) return LogComplex::zero();
  std::vector<Complex> terms(exponents.size());
  for (std::size_t k = 0; k < exponents.size(); ++k) {
    terms[k] = coefficients[k] == Complex(0.0, 0.0) ? Complex(0.0, 0.0)
                                                     : coefficients[k] * std::exp(exponents[k] - m);
  }
  const Complex s = geometry::pairwise_sum(terms.data(), terms.size());
  if (s == Complex(0.0, 0.0)) return LogComplex::zero();
  const LogComplex r = LogComplex::from(s);
  return {m + r.log_mod, r.phase};
}

LogComplex log_sum(const std::vector<LogComplex>& terms) {
  std::vector<Complex> e, c;
  e.reserve(terms.size());
  c.reserve(terms.size());
  for (const auto& t : terms) {
    if (t.is_zero()) continue;
    e.emplace_back(t.log_mod, t.phase);
    c.emplace_back(1.0, 0.0);
  }
  return log_sum_exp(e, c);
}

}  // namespace calderon
