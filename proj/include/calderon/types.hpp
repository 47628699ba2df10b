#pragma once

#include <array>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>

namespace calderon {

using Complex = std::complex<double>;

/// Point of the plane. Geometry code also uses the complex form x1 + i x2.
struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double a, double b) : x1(a), x2(b) {}
  explicit Vec2(Complex z) : x1(z.real()), x2(z.imag()) {}

  Complex as_complex() const { return {x1, x2}; }
  double norm() const;
  double dot(const Vec2& o) const { return x1 * o.x1 + x2 * o.x2; }

  Vec2 operator+(const Vec2& o) const { return {x1 + o.x1, x2 + o.x2}; }
  Vec2 operator-(const Vec2& o) const { return {x1 - o.x1, x2 - o.x2}; }
  Vec2 operator*(double s) const { return {x1 * s, x2 * s}; }
};

/// Complex vector in C^2 (dimension-2 frequencies and Bargmann arguments).
using Complex2 = std::array<Complex, 2>;
/// Complex vector in C^3.
using Complex3 = std::array<Complex, 3>;

/// Complex-valued function on the plane.
using ScalarField = std::function<Complex(Vec2)>;

/// Raised when a numerical routine cannot deliver the requested accuracy
/// (ill-conditioning, non-convergence, overflow budget).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double diagnostic = 0.0)
      : std::runtime_error(what), diagnostic_(diagnostic) {}
  NumericalError(const std::string& what, const std::string& detail)
      : std::runtime_error(what + ": " + detail), diagnostic_(0.0) {}
  double diagnostic() const { return diagnostic_; }

 private:
  double diagnostic_;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace calderon
