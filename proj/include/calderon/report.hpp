#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "calderon/log_complex.hpp"

namespace calderon {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

/// Exponential-rate experiment: log of a measured quantity against 1/h.
struct DecayReport {
  std::vector<double> h_list;
  std::vector<double> log_norms;
  double fitted_slope = 0.0;
  double fitted_intercept = 0.0;
  double bound_slope = 0.0;
  double slope_tol = 0.05;
  /// Largest absolute residual of the linear fit.
  double fit_residual = 0.0;
  bool exact_zero = false;
  bool inconclusive = false;
  bool pass = false;
  std::string note;
};

/// Least-squares line log_norms ~ intercept + slope / h. Fills the fit fields
/// and the exact-zero convention (all norms zero: slope = -inf, pass).
void fit_decay(DecayReport& report, double inconclusive_residual = 1.0);

/// Pointwise bound check (slack = log rhs - log lhs, >= 0 means satisfied).
struct BoundReport {
  std::string name;
  std::size_t nodes = 0;
  double min_slack = 0.0;
  std::size_t worst_node = 0;
  double tolerance = 0.0;
  double measured_slope = 0.0;
  bool pass = false;
};

/// Doubles as JSON numbers; non-finite values become the strings "inf", "-inf", "nan".
Json json_number(double v);
Json json_numbers(const std::vector<double>& v);
double json_to_double(const Json& j);
Json to_json(const DecayReport& r);
Json to_json(const BoundReport& r);
Json to_json(const LogComplex& z);
Json to_json(Complex z);

/// FNV-1a 64-bit hash of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Serializes with 17 significant digits per double.
std::string dump_report(const Json& j);

/// CSV writer helper: header plus rows of doubles at 17 significant digits.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

}  // namespace calderon
