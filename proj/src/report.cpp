#include "calderon/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace calderon {

void fit_decay(DecayReport& r, double inconclusive_residual) {
  const std::size_t n = r.h_list.size();
  if (n != r.log_norms.size() || n < 2) throw std::invalid_argument("fit_decay needs matching lists of length >= 2");
  bool all_zero = true;
  for (double v : r.log_norms) all_zero = all_zero && v == -std::numeric_limits<double>::infinity();
  if (all_zero) {
    r.exact_zero = true;
    r.fitted_slope = -std::numeric_limits<double>::infinity();
    r.fitted_intercept = -std::numeric_limits<double>::infinity();
    r.fit_residual = 0.0;
    r.inconclusive = false;
    r.pass = true;
    r.note = "exact zero";
    return;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = 1.0 / r.h_list[k], y = r.log_norms[k];
    if (!std::isfinite(y)) {
      r.inconclusive = true;
      r.pass = false;
      r.note = "non-finite norm in sweep";
      return;
    }
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  r.fitted_slope = (n * sxy - sx * sy) / det;
  r.fitted_intercept = (sy - r.fitted_slope * sx) / n;
  r.fit_residual = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pred = r.fitted_intercept + r.fitted_slope / r.h_list[k];
    r.fit_residual = std::max(r.fit_residual, std::abs(pred - r.log_norms[k]));
  }
  r.inconclusive = r.fit_residual > inconclusive_residual;
  r.pass = !r.inconclusive && r.fitted_slope <= r.bound_slope + r.slope_tol;
}

Json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json json_numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

double json_to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("not a number: " + j.dump());
}

Json to_json(const DecayReport& r) {
  return Json{{"h_list", json_numbers(r.h_list)},
              {"log_norms", json_numbers(r.log_norms)},
              {"fitted_slope", json_number(r.fitted_slope)},
              {"fitted_intercept", json_number(r.fitted_intercept)},
              {"bound_slope", json_number(r.bound_slope)},
              {"slope_tol", r.slope_tol},
              {"fit_residual", json_number(r.fit_residual)},
              {"exact_zero", r.exact_zero},
              {"inconclusive", r.inconclusive},
              {"pass", r.pass},
              {"note", r.note}};
}

Json to_json(const BoundReport& r) {
  return Json{{"name", r.name},
              {"nodes", r.nodes},
              {"min_slack", json_number(r.min_slack)},
              {"worst_node", r.worst_node},
              {"tolerance", r.tolerance},
              {"measured_slope", json_number(r.measured_slope)},
              {"pass", r.pass}};
}

Json to_json(const LogComplex& z) {
  return Json{{"log_mod", json_number(z.log_mod)}, {"phase", z.phase}};
}

Json to_json(Complex z) { return Json::array({json_number(z.real()), json_number(z.imag())}); }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << "\n";
  char buf[40];
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", row[k]);
      out << (k ? "," : "") << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace calderon
