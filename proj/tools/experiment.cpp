#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "calderon/bargmann.hpp"
#include "calderon/cgo.hpp"
#include "calderon/laplace.hpp"
#include "calderon/pairing.hpp"
#include "calderon/parallel.hpp"
#include "calderon/runge.hpp"
#include "calderon/watermelon.hpp"

namespace calderon::cli {

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

bool Outcome::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

namespace {

// ---- parameter access with field-level diagnostics

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const Json& at(const Json& p, const std::string& key, const std::string& path) {
  if (!p.is_object() || !p.contains(key)) throw ConfigError(join(path, key), "missing");
  return p.at(key);
}

double number(const Json& p, const std::string& key, const std::string& path = "") {
  const auto& v = at(p, key, path);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key), "must be finite");
  return x;
}

double positive(const Json& p, const std::string& key, const std::string& path = "") {
  const double x = number(p, key, path);
  if (!(x > 0.0)) throw ConfigError(join(path, key), "must be > 0");
  return x;
}

double in_range(const Json& p, const std::string& key, double lo, double hi, const std::string& path = "") {
  const double x = number(p, key, path);
  if (x < lo || x > hi) {
    std::ostringstream s;
    s << "must lie in [" << lo << ", " << hi << "]";
    throw ConfigError(join(path, key), s.str());
  }
  return x;
}

int integer(const Json& p, const std::string& key, int lo, int hi, const std::string& path = "") {
  const auto& v = at(p, key, path);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > hi)
    throw ConfigError(join(path, key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(x);
}

bool boolean(const Json& p, const std::string& key, const std::string& path = "") {
  const auto& v = at(p, key, path);
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::string text(const Json& p, const std::string& key, const std::vector<std::string>& allowed,
                 const std::string& path = "") {
  const auto& v = at(p, key, path);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  const auto s = v.get<std::string>();
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw ConfigError(join(path, key), "must be one of " + list);
  }
  return s;
}

std::vector<double> numbers(const Json& p, const std::string& key, std::size_t min_size, const std::string& path = "") {
  const auto& v = at(p, key, path);
  if (!v.is_array()) throw ConfigError(join(path, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(join(path, key), "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  if (out.size() < min_size) throw ConfigError(join(path, key), "needs at least " + std::to_string(min_size) + " entries");
  return out;
}

std::vector<double> h_list(const Json& p, const std::string& key, std::size_t min_size, const std::string& path = "") {
  auto h = numbers(p, key, min_size, path);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0)) throw ConfigError(join(path, key), "entries must be > 0");
    if (i > 0 && !(h[i] < h[i - 1])) throw ConfigError(join(path, key), "must be strictly decreasing");
  }
  return h;
}

Vec2 point(const Json& p, const std::string& key, const std::string& path = "") {
  const auto v = numbers(p, key, 2, path);
  if (v.size() != 2) throw ConfigError(join(path, key), "expected [x1, x2]");
  return {v[0], v[1]};
}

int scaled(int n, double scale, int multiple) {
  const int m = static_cast<int>(std::lround(n * scale / multiple)) * multiple;
  return std::max(multiple, m);
}

// ---- domains and potentials

geometry::Domain2D parse_domain(const Json& p, const std::string& key, double scale) {
  const auto& j = at(p, key, "");
  const std::string path = key;
  geometry::ShapeSpec s;
  try {
    s.kind = geometry::shape_kind_from_string(text(j, "kind", {}, path));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(join(path, "kind"), e.what());
  }
  if (j.contains("center")) s.center = point(j, "center", path);
  if (j.contains("radius")) s.radius = positive(j, "radius", path);
  if (j.contains("semi_a")) s.semi_a = positive(j, "semi_a", path);
  if (j.contains("semi_b")) s.semi_b = positive(j, "semi_b", path);
  if (j.contains("amplitude")) s.amplitude = in_range(j, "amplitude", -0.5, 0.5, path);
  if (j.contains("mode")) s.mode = integer(j, "mode", 0, 64, path);
  if (j.contains("indent")) s.indent = in_range(j, "indent", 0.0, 0.9, path);
  const int nodes = scaled(integer(j, "nodes", 64, 1 << 14, path), scale, 16);
  try {
    return geometry::make_domain(s, nodes);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

Json domain_json(const std::string& kind, Vec2 center, double radius, int nodes) {
  return Json{{"kind", kind}, {"center", {center.x1, center.x2}}, {"radius", radius}, {"nodes", nodes}};
}

/// zero | constant | gaussian | bump | profile.
ScalarField parse_potential(const Json& p, const std::string& key) {
  const auto& j = at(p, key, "");
  const std::string path = key;
  const auto kind = text(j, "kind", {"zero", "constant", "gaussian", "bump", "profile"}, path);
  const double amp = j.contains("amplitude") ? number(j, "amplitude", path) : 1.0;
  if (kind == "zero") return [](Vec2) { return Complex(0.0); };
  if (kind == "constant") return [amp](Vec2) { return Complex(amp); };
  if (kind == "profile") {
    // exp(-0.1 / (-d - x1)) for x1 < -d
    const double d = positive(j, "distance", path);
    return [=](Vec2 x) { return x.x1 < -d ? Complex(amp * std::exp(-0.1 / (-d - x.x1))) : Complex(0.0); };
  }
  const Vec2 c = point(j, "center", path);
  if (kind == "gaussian") {
    const double sigma = positive(j, "sigma", path);
    const double cut = j.contains("cut_x1") ? number(j, "cut_x1", path) : std::numeric_limits<double>::infinity();
    return [=](Vec2 x) {
      if (x.x1 > cut) return Complex(0.0);
      const double r2 = (x.x1 - c.x1) * (x.x1 - c.x1) + (x.x2 - c.x2) * (x.x2 - c.x2);
      return Complex(amp * std::exp(-r2 / (2.0 * sigma * sigma)));
    };
  }
  const double rho = positive(j, "radius", path);
  return [=](Vec2 x) {
    const double t = ((x.x1 - c.x1) * (x.x1 - c.x1) + (x.x2 - c.x2) * (x.x2 - c.x2)) / (rho * rho);
    return t < 1.0 ? Complex(amp * std::exp(1.0 - 1.0 / (1.0 - t))) : Complex(0.0);
  };
}

Json merge(const Json& defaults, const Json& overrides, const std::string& path, bool strict) {
  Json out = defaults;
  for (auto it = overrides.begin(); it != overrides.end(); ++it) {
    const auto field = join(path, it.key());
    if (!defaults.contains(it.key())) {
      if (strict) throw ConfigError(field, "unknown parameter");
      out[it.key()] = it.value();
    } else if (defaults.at(it.key()).is_object()) {
      if (!it.value().is_object()) throw ConfigError(field, "expected an object");
      out[it.key()] = merge(defaults.at(it.key()), it.value(), field, false);
    } else {
      out[it.key()] = it.value();
    }
  }
  return out;
}

Json check(const std::string& name, bool pass) { return Json{{"name", name}, {"pass", pass}}; }

// ---- solve: Dirichlet oracles with harmonic polynomials, Green kernel against images

Json solve_defaults() {
  return Json{{"domain", domain_json("circle", {0.0, 0.0}, 1.0, 256)},
              {"modes", {0, 1, 3, 5}},
              {"radial", 12},
              {"angular", 64},
              {"green_pairs", 100},
              {"tol", 1e-8}};
}

Outcome run_solve(const Json& p, std::uint64_t seed, double scale) {
  const auto domain = parse_domain(p, "domain", scale);
  const auto modes = numbers(p, "modes", 1);
  const double tol = positive(p, "tol");
  const auto quad = geometry::interior_quadrature(domain, integer(p, "radial", 2, 256), integer(p, "angular", 8, 4096));
  const int pairs = integer(p, "green_pairs", 0, 100000);
  for (double k : modes)
    if (k < 0 || k != std::floor(k) || k > 32) throw ConfigError("modes", "entries must be integers in [0, 32]");

  Outcome out;
  const auto solver = laplace::make_solver(domain);
  const Complex c = domain.center().as_complex();
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (double k : modes) {
    for (int part = 0; part < (k == 0 ? 1 : 2); ++part) {
      // Re and Im of (z - c)^k are harmonic on any domain
      auto exact = [&](Vec2 x) {
        const Complex w = std::pow(x.as_complex() - c, static_cast<int>(k));
        return Complex(part == 0 ? w.real() : w.imag());
      };
      const auto u = solver->solve(exact);
      const auto values = u.evaluate_many(quad.nodes);
      double err = 0.0;
      for (std::size_t q = 0; q < quad.size(); ++q) err = std::max(err, std::abs(values[q] - exact(quad.nodes[q])));
      worst = std::max(worst, err);
      rows.push_back({k, static_cast<double>(part), err});
    }
  }
  out.results["dirichlet_max_error"] = json_number(worst);
  out.results["condition_estimate"] = json_number(solver->condition_estimate());
  out.checks.emplace_back("dirichlet_oracles", worst <= tol);
  out.files.emplace_back("solve_errors.csv", csv_table({"mode", "imaginary_part", "max_error"}, rows));

  const auto& j = p.at("domain");
  if (j.at("kind") == "circle" && pairs > 0) {
    const auto green = laplace::green_kernel(domain);
    const Vec2 center = domain.center();
    const double radius = j.contains("radius") ? j.at("radius").get<double>() : 1.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto sample = [&] {
      const double r = 0.9 * radius * std::sqrt(u(rng)), t = 2.0 * kPi * u(rng);
      return Vec2(center.as_complex() + std::polar(r, t));
    };
    double gerr = 0.0;
    for (int i = 0; i < pairs; ++i) {
      const Vec2 x = sample(), y = sample();
      gerr = std::max(gerr, std::abs(green(x, y).value - runge::disc_green(x, y, center, radius)));
    }
    out.results["green_max_error"] = json_number(gerr);
    out.checks.emplace_back("green_images", gerr <= tol);
  }
  return out;
}

// ---- cgo-decay: H1 norm of the correction along h

Json cgo_defaults() {
  return Json{{"domain", domain_json("circle", {-1.0, 0.0}, 1.0, 1024)},
              {"c", 0.2},
              {"vanishing_cutoff", false},
              {"zeta_scales", {1.0, 2.0}},
              {"h_list", {0.4, 0.25, 0.15}},
              {"slope_tol", 0.05},
              {"radial", 16},
              {"angular", 256}};
}

Outcome run_cgo(const Json& p, double scale) {
  const auto domain = parse_domain(p, "domain", scale);
  const cgo::CutoffSpec chi{in_range(p, "c", 1e-3, 0.45), boolean(p, "vanishing_cutoff")};
  const auto hs = h_list(p, "h_list", 2);
  const auto scales = numbers(p, "zeta_scales", 1);
  for (double s : scales)
    if (!(s > 0.0)) throw ConfigError("zeta_scales", "entries must be > 0");
  cgo::WBoundOptions opt;
  opt.slope_tol = positive(p, "slope_tol");
  opt.radial = scaled(integer(p, "radial", 2, 256), scale, 1);
  opt.angular = scaled(integer(p, "angular", 16, 8192), scale, 8);

  Outcome out;
  std::vector<std::vector<double>> rows;
  out.results["runs"] = Json::array();
  for (double s : scales) {
    const auto zeta = cgo::gamma_vector(2, s);
    DecayReport r;
    try {
      r = cgo::verify_w_bound(domain, zeta, chi, hs, opt);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("h_list", e.what());
    }
    Json run = to_json(r);
    run["zeta_scale"] = json_number(s);
    run["fitted_c2"] = json_number(cgo::fitted_c2(r, zeta, chi.c));
    out.results["runs"].push_back(run);
    std::ostringstream name;
    name << "w_bound_scale_" << s;
    out.checks.emplace_back(name.str(), r.pass);
    for (std::size_t i = 0; i < hs.size(); ++i) rows.push_back({s, hs[i], r.log_norms[i]});
  }
  out.files.emplace_back("cgo_decay.csv", csv_table({"zeta_scale", "h", "log_w_h1"}, rows));
  return out;
}

// ---- moment-identity: pairing identity and the Fourier estimate

Json moment_defaults() {
  return Json{{"domain", domain_json("circle", {-1.0, 0.0}, 1.0, 1024)},
              {"c", 0.6},
              {"a", 2.0},
              {"eps", 0.01},
              {"h_list", {0.3, 0.2, 0.15}},
              {"potential", {{"kind", "gaussian"}, {"center", {-1.4, 0.0}}, {"sigma", 0.15}, {"cut_x1", -0.5}}},
              {"radial", 24},
              {"angular", 384},
              {"quad_tol", 1e-8},
              {"slope_tol", 0.05}};
}

Outcome run_moment(const Json& p, double scale) {
  const auto domain = parse_domain(p, "domain", scale);
  pairing::FourierSetup setup;
  setup.domain = &domain;
  setup.chi = {in_range(p, "c", 1e-3, 0.9)};
  setup.radial = scaled(integer(p, "radial", 2, 256), scale, 1);
  setup.angular = scaled(integer(p, "angular", 16, 8192), scale, 8);
  setup.quad_tol = positive(p, "quad_tol");
  setup.slope_tol = positive(p, "slope_tol");
  const double a = positive(p, "a"), eps = positive(p, "eps");
  const auto hs = h_list(p, "h_list", 2);
  const auto f = parse_potential(p, "potential");

  pairing::FourierEstimateReport r;
  try {
    r = pairing::verify_fourier_estimate(f, setup, a, eps, hs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("eps", e.what());
  }
  Outcome out;
  out.results["decay"] = to_json(r.decay);
  out.results["bound_side_slope"] = json_number(r.bound_side_slope);
  out.results["c_meas"] = json_number(r.c_meas);
  out.results["identity_residuals"] = json_numbers(r.residuals);
  out.results["log_corrections"] = json_numbers(r.log_corrections);
  out.checks.emplace_back("moment_identity", r.identity_ok);
  out.checks.emplace_back("bound_bookkeeping", r.bound_bookkeeping_ok);
  out.checks.emplace_back("fourier_decay", r.decay.pass);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < hs.size(); ++i) rows.push_back({hs[i], 1.0 / hs[i], r.decay.log_norms[i], r.residuals[i]});
  out.files.emplace_back("moment_decay.csv", csv_table({"h", "inv_h", "log_moment", "identity_residual"}, rows));
  return out;
}

// ---- bargmann-map: a priori and half-space bounds on a z1 grid

Json bargmann_defaults() {
  return Json{{"domain", domain_json("circle", {-1.0, 0.0}, 1.0, 128)},
              {"potential", {{"kind", "bump"}, {"center", {-1.0, 0.0}}, {"radius", 0.8}}},
              {"radial", 24},
              {"angular", 128},
              {"h", 0.2},
              {"x_range", {-3.0, 3.0}},
              {"y_range", {-2.0, 2.0}},
              {"nx", 21},
              {"ny", 21},
              {"z2", 0.0},
              {"halfspace", true},
              {"tol", 1e-8}};
}

Outcome run_bargmann(const Json& p, double scale) {
  const auto domain = parse_domain(p, "domain", scale);
  const auto quad = geometry::interior_quadrature(domain, scaled(integer(p, "radial", 2, 256), scale, 1),
                                                  scaled(integer(p, "angular", 16, 8192), scale, 8));
  const auto f = pairing::sample_potential(domain, quad, parse_potential(p, "potential"));
  const double h = positive(p, "h"), tol = positive(p, "tol");
  const auto xr = numbers(p, "x_range", 2), yr = numbers(p, "y_range", 2);
  if (xr.size() != 2 || !(xr[0] < xr[1])) throw ConfigError("x_range", "expected [lo, hi] with lo < hi");
  if (yr.size() != 2 || !(yr[0] < yr[1])) throw ConfigError("y_range", "expected [lo, hi] with lo < hi");
  const int nx = integer(p, "nx", 2, 1001), ny = integer(p, "ny", 2, 1001);
  const double z2 = number(p, "z2");

  std::vector<Complex2> z;
  for (auto c : bargmann::box_grid(xr[0], xr[1], yr[0], yr[1], nx, ny)) z.push_back({c, z2});
  const auto grid = bargmann::evaluate_grid(f, z, h);
  Outcome out;
  const auto ap = bargmann::check_apriori_bound(grid, tol);
  out.results["apriori"] = to_json(ap.report);
  out.checks.emplace_back("apriori_bound", ap.report.pass);
  if (boolean(p, "halfspace")) {
    try {
      const auto hs = bargmann::check_halfspace_bound(grid, tol);
      out.results["halfspace"] = to_json(hs.report);
      out.checks.emplace_back("halfspace_bound", hs.report.pass);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("potential", e.what());
    }
  }
  out.results["sup_f"] = json_number(f.sup);
  out.files.emplace_back("bargmann_grid.csv", grid.csv());
  return out;
}

// ---- watermelon: barrier, propagation, optional vanishing pipeline

Json watermelon_defaults() {
  return Json{{"delta", 0.05},
              {"R", 10.0},
              {"L", 2.0},
              {"b", 0.5},
              {"cut", nullptr},
              {"c", 0.2},
              {"r", 1.0},
              {"h", 0.1},
              {"toy", "corrected"},
              {"mesh_scale", 1.0},
              {"probes", 1000},
              {"pipeline",
               {{"enabled", false},
                {"delta", 0.01},
                {"r", 0.5},
                {"domain", domain_json("circle", {-1.0, 0.0}, 1.0, 256)},
                {"potential", {{"kind", "profile"}, {"distance", 0.5}}},
                {"h_list", {0.04, 0.02, 0.01}},
                {"slices", 5},
                {"tol", 1e-6}}}};
}

watermelon::BarrierRegion parse_region(const Json& p, double delta, const std::string& path = "") {
  watermelon::BarrierRegion g;
  g.delta = delta;
  g.R = positive(p, "R");
  g.L = positive(p, "L");
  g.b = positive(p, "b");
  if (!p.at("cut").is_null()) g.cut = number(p, "cut");
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path.empty() ? "delta" : path, e.what());
  }
  return g;
}

Outcome run_watermelon(const Json& p, std::uint64_t seed, double scale) {
  const auto region = parse_region(p, in_range(p, "delta", 1e-3, 0.2));
  const double c = positive(p, "c"), r = positive(p, "r"), h = positive(p, "h");
  const auto toy = text(p, "toy", {"corrected", "literal", "zero"});
  watermelon::MeshOptions mesh;
  mesh.scale = in_range(p, "mesh_scale", 0.25, 8.0) * scale;
  const int probes = integer(p, "probes", 1, 1000000);
  if (r > region.corner_y() - 5.0 * region.corner_radius()) throw ConfigError("r", "reaches the rounded corners");
  const auto& pl = at(p, "pipeline", "");
  const bool pipeline = boolean(pl, "enabled", "pipeline");

  Outcome out;
  const auto phi = watermelon::build_barrier(region, c, mesh);
  const auto mp = watermelon::check_maximum_principle(phi, static_cast<std::size_t>(probes), static_cast<unsigned>(seed));
  out.results["maximum_principle"] = {{"probes", mp.probes},
                                      {"min_value", json_number(mp.min_value)},
                                      {"max_value", json_number(mp.max_value)},
                                      {"violation", json_number(mp.violation)}};
  out.checks.emplace_back("maximum_principle", mp.pass);

  const auto hopf = watermelon::check_hopf(phi, r);
  out.results["hopf"] = {{"min_derivative", json_number(hopf.min_derivative)},
                         {"at_y", json_number(hopf.at_y)},
                         {"max_derivative", json_number(hopf.max_derivative)},
                         {"c_prime_hopf", json_number(hopf.c_prime_hopf)},
                         {"degenerate", hopf.degenerate}};
  out.checks.emplace_back("hopf", hopf.pass);

  const auto har = watermelon::check_harnack(phi, r);
  out.results["harnack"] = {{"reference", json_number(har.reference)},
                            {"deviation", json_number(har.deviation)},
                            {"normalized_min", json_number(har.normalized_min)},
                            {"normalized_max", json_number(har.normalized_max)},
                            {"degenerate", har.degenerate}};

  // toys: literal e^{(s^2-c)/2h}, corrected e^{-(s^2+c)/2h}, zero
  std::function<double(Complex)> log_F = [](Complex) { return -std::numeric_limits<double>::infinity(); };
  if (toy == "literal") log_F = [=](Complex s) { return ((s * s).real() - c) / (2.0 * h); };
  if (toy == "corrected") log_F = [=](Complex s) { return -((s * s).real() + c) / (2.0 * h); };
  watermelon::PropagateOptions opt;
  opt.r = r;
  try {
    const auto prop = watermelon::propagate_decay(phi, log_F, h, opt);
    out.results["propagation"] = prop.to_json(region.delta, c);
    out.results["c_prime"] = json_number(prop.c_prime);
    out.checks.emplace_back("propagation", prop.pass && prop.c_prime > 0.0);
  } catch (const watermelon::HypothesisViolation& e) {
    out.results["propagation"] = {{"rejected", e.what()}, {"excess", json_number(e.excess())}};
    out.checks.emplace_back("propagation", false);
  }
  const double x0 = region.cut_x();
  out.files.emplace_back("barrier.csv", phi.csv(x0, region.L, -1.5, 1.5, 33, 31));

  if (pipeline) {
    watermelon::PipelineSetup setup;
    setup.region = parse_region(p, in_range(pl, "delta", 1e-3, 0.2, "pipeline"), "pipeline.delta");
    setup.c = c;
    setup.r = positive(pl, "r", "pipeline");
    setup.h_list = h_list(pl, "h_list", 3, "pipeline");
    setup.slices = integer(pl, "slices", 1, 101, "pipeline");
    setup.mesh.scale = scale;
    if (setup.r > setup.region.corner_y() - 5.0 * setup.region.corner_radius())
      throw ConfigError("pipeline.r", "reaches the rounded corners");
    const double tol = positive(pl, "tol", "pipeline");
    const auto domain = parse_domain(pl, "domain", scale);
    const auto f = parse_potential(pl, "potential");
    const auto rep = watermelon::run_vanishing_pipeline(domain, f, setup);
    Json j = rep.conclusion.to_json();
    j["c_prime"] = json_number(rep.c_prime);
    j["sup_f"] = json_number(rep.sup_f);
    j["strip_max_f"] = json_number(rep.strip_max_f);
    j["rejections"] = rep.rejections;
    out.results["pipeline"] = j;
    out.checks.emplace_back("vanishing_limit", !rep.conclusion.inconclusive && rep.conclusion.limit <= tol * rep.sup_f);
  }
  return out;
}

// ---- runge: convergence table and orthogonality identity

Json runge_defaults() {
  return Json{{"nodes", 256},
              {"indent", 0.3},
              {"margin1", 0.05},
              {"margin2", 0.1},
              {"n_list", {200, 400, 800}},
              {"lambda", 0.0},
              {"radial", 24},
              {"angular", 128},
              {"target", {{"center", {0.85, 0.0}}, {"radius", 0.08}}},
              {"tol", 1e-3},
              {"identity", true},
              {"identity_v", {{"kind", "gaussian"}, {"center", {-0.2, 0.1}}, {"sigma", 0.1}}},
              {"identity_tol", 1e-6},
              {"shared_tol", 1e-8}};
}

Outcome run_runge(const Json& p, double scale) {
  const int nodes = scaled(integer(p, "nodes", 64, 1 << 14), scale, 16);
  const double indent = in_range(p, "indent", 0.05, 0.8);
  const double m1 = positive(p, "margin1"), m2 = positive(p, "margin2");
  const auto nl = numbers(p, "n_list", 1);
  std::vector<std::size_t> ns;
  for (double n : nl) {
    if (n < 1 || n != std::floor(n) || n > 20000) throw ConfigError("n_list", "entries must be integers in [1, 20000]");
    if (!ns.empty() && n <= static_cast<double>(ns.back())) throw ConfigError("n_list", "must be strictly increasing");
    ns.push_back(static_cast<std::size_t>(n));
  }
  const double lambda = number(p, "lambda");
  if (lambda < 0.0) throw ConfigError("lambda", "must be >= 0");
  const auto& t = at(p, "target", "");
  const Vec2 kc = point(t, "center", "target");
  const double kr = positive(t, "radius", "target");
  const double tol = positive(p, "tol"), id_tol = positive(p, "identity_tol"), shared_tol = positive(p, "shared_tol");
  const auto v = parse_potential(p, "identity_v");

  auto nested = [&] {
    try {
      return runge::shared_arc_pair(ns.back(), nodes, indent, m1, m2);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("margin1", e.what());
    }
  };
  const runge::RungeProblem problem(nested(), scaled(integer(p, "radial", 2, 256), scale, 1),
                                    scaled(integer(p, "angular", 16, 8192), scale, 8));
  auto cubic = [](Vec2 x) { return x.x1 * x.x1 * x.x1 - 3.0 * x.x1 * x.x2 * x.x2 + x.x2; };
  std::optional<runge::AdjustedPolynomial> adjusted;
  try {
    adjusted.emplace(problem.pair().omega2, cubic, kc, kr);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("target", e.what());
  }
  const auto u = runge::harmonic_target(problem, [&](Vec2 x) { return (*adjusted)(x); });

  Outcome out;
  std::vector<runge::RungeResult> rows;
  for (auto n : ns) rows.push_back(runge::runge_approximate(problem, u, n, lambda));
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].l2_error <= rows[i - 1].l2_error * (1.0 + 1e-9);
  Json table = Json::array();
  for (const auto& r : rows)
    table.push_back({{"n_sources", r.sources},
                     {"l2_error", json_number(r.l2_error)},
                     {"relative_error", json_number(r.relative_error)},
                     {"rank", r.rank},
                     {"max_amplitude", json_number(r.amplitudes.cwiseAbs().maxCoeff())},
                     {"advice", r.advice}});
  out.results["convergence"] = table;
  out.results["shared_nodes"] = problem.pair().shared_count();
  if (lambda == 0.0) out.checks.emplace_back("non_increasing", monotone);
  out.checks.emplace_back("final_error", rows.back().relative_error <= tol);

  const auto sup = runge::green_superposition(problem, rows.back().amplitudes);
  out.results["shared_max"] = json_number(sup.shared_max);
  out.results["harmonic_residual"] = json_number(sup.harmonic_residual);
  out.checks.emplace_back("shared_boundary", sup.shared_max <= shared_tol);

  if (boolean(p, "identity")) {
    const auto id = runge::verify_orthogonality_identity(problem, v, u);
    out.results["identity"] = {{"lhs", json_number(id.lhs)},
                               {"rhs", json_number(id.rhs)},
                               {"residual", json_number(id.residual)},
                               {"relative", json_number(id.relative)}};
    out.checks.emplace_back("identity", id.relative <= id_tol);
  }
  out.files.emplace_back("runge_convergence.csv", runge::convergence_csv(rows));
  return out;
}

// ---- reconstruct: density demo from partial-data moments

Json reconstruct_defaults() {
  return Json{{"domain", domain_json("circle", {-1.0, 0.0}, 1.0, 512)},
              {"c", 0.6},
              {"radial", 24},
              {"angular", 256},
              {"pixels", {16, 16}},
              {"frequency", {{"a", 3.0}, {"h", 1.0}, {"n1", 20}, {"n2", 20}, {"k1_max", 6.0}, {"k2_max", 5.7}}},
              {"phantom", {{"kind", "gaussian"}, {"center", {-1.0, 0.0}}, {"sigma", 0.35}}},
              {"lambda", nullptr},
              {"quad_tol", 1e-8},
              {"tol", 0.1}};
}

Outcome run_reconstruct(const Json& p, double scale) {
  const auto domain = parse_domain(p, "domain", scale);
  const cgo::CutoffSpec chi{in_range(p, "c", 1e-3, 0.9)};
  const auto px = numbers(p, "pixels", 2);
  if (px.size() != 2 || px[0] < 1 || px[1] < 1 || px[0] > 256 || px[1] > 256 || px[0] != std::floor(px[0]) ||
      px[1] != std::floor(px[1]))
    throw ConfigError("pixels", "expected [nx, ny] with integers in [1, 256]");
  const auto& fj = at(p, "frequency", "");
  pairing::FrequencyGrid g;
  g.a = positive(fj, "a", "frequency");
  g.h = positive(fj, "h", "frequency");
  g.n1 = integer(fj, "n1", 1, 400, "frequency");
  g.n2 = integer(fj, "n2", 1, 400, "frequency");
  g.k1_max = positive(fj, "k1_max", "frequency");
  g.k2_max = positive(fj, "k2_max", "frequency");
  if (g.k2_max > 2.0 * g.a) throw ConfigError("frequency.k2_max", "must be <= 2a");
  std::optional<double> lambda;
  if (!p.at("lambda").is_null()) lambda = positive(p, "lambda");
  const double quad_tol = positive(p, "quad_tol"), tol = positive(p, "tol");
  const auto phantom = parse_potential(p, "phantom");

  const auto setup = pairing::ReconstructionSetup::create(
      domain, chi, scaled(integer(p, "radial", 2, 256), scale, 1), scaled(integer(p, "angular", 16, 8192), scale, 8),
      pairing::PixelGrid::bounding(domain, static_cast<int>(px[0]), static_cast<int>(px[1])));
  const auto f = pairing::sample_potential(domain, setup.quad, phantom);
  Eigen::MatrixXcd forward;
  const auto moments = pairing::generate_moments(f, setup, g, &forward);
  pairing::Reconstruction rec;
  try {
    rec = pairing::reconstruct(moments, setup, lambda, quad_tol, &forward);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("frequency", e.what());
  }

  Outcome out;
  out.results["moments"] = moments.entries.size();
  out.results["lambda"] = json_number(rec.lambda);
  out.results["condition"] = json_number(rec.condition);
  out.results["moment_residual"] = json_number(rec.moment_residual);
  if (f.sup == 0.0) {
    double m = 0.0;
    for (const auto& v : rec.pixels) m = std::max(m, std::abs(v));
    out.results["max_pixel"] = json_number(m);
    out.checks.emplace_back("zero_phantom", m <= 1e-12);
  } else {
    const double err = pairing::relative_pixel_error(rec, f, setup);
    out.results["relative_error"] = json_number(err);
    out.checks.emplace_back("relative_error", err <= tol);
  }
  out.files.emplace_back("reconstruction.csv", pairing::pixels_csv(rec, setup.grid));
  return out;
}

struct Entry {
  std::string name;
  Json (*defaults)();
  bool randomized;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r{{"solve", solve_defaults, true},
                                    {"cgo-decay", cgo_defaults, false},
                                    {"moment-identity", moment_defaults, false},
                                    {"bargmann-map", bargmann_defaults, false},
                                    {"watermelon", watermelon_defaults, true},
                                    {"runge", runge_defaults, false},
                                    {"reconstruct", reconstruct_defaults, false}};
  return r;
}

const Entry& entry(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw ConfigError("subcommand", "unknown subcommand '" + name + "'");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& e : registry()) n.push_back(e.name);
    return n;
  }();
  return names;
}

bool randomized(const std::string& subcommand) { return entry(subcommand).randomized; }

Json default_params(const std::string& subcommand) { return entry(subcommand).defaults(); }

Json ExperimentConfig::canonical() const {
  return Json{{"subcommand", subcommand},
              {"seed", seed ? Json(*seed) : Json(nullptr)},
              {"resolution_scale", json_number(resolution_scale)},
              {"params", params}};
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(dump_report(canonical())); }

ExperimentConfig make_config(const std::string& subcommand, const Json& file, std::optional<std::uint64_t> seed,
                             std::optional<double> resolution_scale, std::string out_dir) {
  const auto& e = entry(subcommand);
  if (!file.is_null() && !file.is_object()) throw ConfigError("config", "expected a JSON object");
  ExperimentConfig cfg;
  cfg.subcommand = subcommand;
  cfg.out_dir = std::move(out_dir);
  Json rest = file.is_null() ? Json::object() : file;
  if (rest.contains("subcommand")) {
    if (!rest.at("subcommand").is_string() || rest.at("subcommand").get<std::string>() != subcommand)
      throw ConfigError("subcommand", "config is for a different subcommand");
    rest.erase("subcommand");
  }
  if (rest.contains("seed")) {
    const auto& s = rest.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
    rest.erase("seed");
  }
  if (rest.contains("resolution_scale")) {
    cfg.resolution_scale = in_range(rest, "resolution_scale", 0.25, 8.0);
    rest.erase("resolution_scale");
  }
  if (seed) cfg.seed = seed;
  if (resolution_scale) {
    if (!(*resolution_scale >= 0.25 && *resolution_scale <= 8.0))
      throw ConfigError("resolution_scale", "must lie in [0.25, 8]");
    cfg.resolution_scale = *resolution_scale;
  }
  if (e.randomized && !cfg.seed) throw ConfigError("seed", "required for randomized subcommand '" + subcommand + "'");
  cfg.params = merge(e.defaults(), rest, "", true);
  return cfg;
}

Outcome run(const ExperimentConfig& config) {
  const auto& p = config.params;
  const double s = config.resolution_scale;
  const std::uint64_t seed = config.seed.value_or(0);
  const auto& name = config.subcommand;
  if (name == "solve") return run_solve(p, seed, s);
  if (name == "cgo-decay") return run_cgo(p, s);
  if (name == "moment-identity") return run_moment(p, s);
  if (name == "bargmann-map") return run_bargmann(p, s);
  if (name == "watermelon") return run_watermelon(p, seed, s);
  if (name == "runge") return run_runge(p, s);
  if (name == "reconstruct") return run_reconstruct(p, s);
  throw ConfigError("subcommand", "unknown subcommand '" + name + "'");
}

Json report_json(const ExperimentConfig& config, const Outcome& outcome) {
  Json checks = Json::array();
  for (const auto& [name, pass] : outcome.checks) checks.push_back(check(name, pass));
  Json files = Json::array();
  for (const auto& f : outcome.files) files.push_back(f.first);
  return Json{{"schema_version", kReportSchemaVersion},
              {"subcommand", config.subcommand},
              {"config_hash", config.hash()},
              {"seed", config.seed ? Json(*config.seed) : Json(nullptr)},
              {"config", config.canonical()},
              {"pass", outcome.pass()},
              {"checks", checks},
              {"results", outcome.results},
              {"files", files}};
}

int execute(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const auto outcome = run(config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json report = report_json(config, outcome);
  report["metadata"] = {{"timestamp_utc", utc_now()}, {"wall_seconds", wall}, {"threads", worker_count()}};
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const fs::path dir(config.out_dir);
  std::ofstream(dir / (config.subcommand + ".json")) << dump_report(report) << '\n';
  for (const auto& [name, csv] : outcome.files) std::ofstream(dir / name) << csv;

  for (const auto& [name, pass] : outcome.checks) std::cout << (pass ? "PASS " : "FAIL ") << name << '\n';
  std::cout << "report " << (dir / (config.subcommand + ".json")).string() << '\n';
  return outcome.pass() ? kExitPass : kExitFail;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"calderonlab: numerical experiments for partial-data Calderon uniqueness"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  double scale = 1.0;
  bool print_config = false;
  std::vector<std::pair<CLI::App*, std::string>> subs;
  std::vector<CLI::Option*> seed_opts, scale_opts;
  for (const auto& name : subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON experiment file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    seed_opts.push_back(sub->add_option("--seed", seed, "random seed"));
    scale_opts.push_back(sub->add_option("--resolution-scale", scale, "multiplies node and quadrature counts"));
    sub->add_flag("--print-config", print_config, "print the resolved configuration and exit");
    subs.emplace_back(sub, name);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInvalid;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i].first->parsed()) continue;
    const auto& name = subs[i].second;
    try {
      Json file;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        try {
          file = Json::parse(in);
        } catch (const Json::parse_error& e) {
          throw ConfigError("config", std::string("not valid JSON: ") + e.what());
        }
      }
      std::optional<std::uint64_t> s;
      if (seed_opts[i]->count() > 0) s = seed;
      std::optional<double> r;
      if (scale_opts[i]->count() > 0) r = scale;
      const auto cfg = make_config(name, file, s, r, out_dir);
      if (print_config) {
        std::cout << dump_report(cfg.canonical()) << '\n';
        return kExitPass;
      }
      return execute(cfg);
    } catch (const ConfigError& e) {
      std::cerr << "invalid config: field '" << e.field() << "': " << e.what() << '\n';
      return kExitInvalid;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitFail;
    }
  }
  return kExitInvalid;
}

}  // namespace calderon::cli
