#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>

#include "horo/errors.hpp"
#include "horo/geometry.hpp"

namespace horo::cli {

namespace {

constexpr double kPi = std::numbers::pi;
using nlohmann::json;

json cvec_json(std::span<const Complex> v) {
  json out = json::array();
  for (const auto& z : v) out.push_back(complex_json(z));
  return out;
}

json rvec_json(std::span<const double> v) { return json(RVec(v.begin(), v.end())); }

template <class T>
T value_or(const json& section, const char* key, T fallback) {
  if (!section.contains(key)) return fallback;
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(key) + " has the wrong type");
  }
}

RVec unit_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  RVec v(n);
  double len = 0.0;
  do {
    for (auto& c : v) c = g(rng);
    len = norm(v);
  } while (len < 1e-8);
  for (auto& c : v) c /= len;
  return v;
}

// xi = t a, eta = t b with a, b orthonormal.
ConePoint random_cone_point(std::mt19937_64& rng, std::size_t n, double t) {
  RVec a = unit_vector(rng, n);
  RVec b;
  double len = 0.0;
  do {
    b = unit_vector(rng, n);
    const double c = dot(a, b);
    for (std::size_t k = 0; k < n; ++k) b[k] -= c * a[k];
    len = norm(b);
  } while (len < 1e-6);
  for (std::size_t k = 0; k < n; ++k) {
    a[k] *= t;
    b[k] *= t / len;
  }
  return ConePoint(a, b);
}

std::vector<RealSpherePoint> point_list(const json& section, std::size_t n, std::uint64_t seed,
                                        const char* random_key) {
  std::vector<RealSpherePoint> pts;
  if (section.contains("points")) {
    if (!section["points"].is_array()) throw ConfigError("points must be an array");
    for (const auto& p : section["points"]) pts.emplace_back(rvec_from_json(p, n, "point"));
  }
  const int extra = value_or<int>(section, random_key, 0);
  if (extra < 0) throw ConfigError(std::string(random_key) + " must be >= 0");
  std::mt19937_64 rng(seed);
  for (int i = 0; i < extra; ++i) pts.emplace_back(unit_vector(rng, n));
  if (pts.empty()) throw ConfigError("no evaluation points");
  return pts;
}

void require_n3(const RunConfig& cfg, const char* what) {
  if (cfg.n != 3) throw ConfigError(std::string(what) + " is implemented for n = 3");
}

int status(bool converged, bool within) {
  if (!converged) return kNotConverged;
  return within ? kOk : kToleranceFailure;
}

const char* status_name(int code) {
  switch (code) {
    case kOk: return "ok";
    case kToleranceFailure: return "tolerance_failure";
    case kNotConverged: return "not_converged";
    default: return "error";
  }
}

void finish(Output& out, json summary, int code) {
  summary["status"] = status_name(code);
  summary["exit_code"] = code;
  out.summary(std::move(summary));
}

std::optional<TransformOracle> oracle_for(const FunctionSpec& spec) {
  if (spec.general_oracle) return spec.general_oracle;
  if (!spec.coeffs) return std::nullopt;
  return TransformOracle(*spec.coeffs, product_grid_for_degree(3, 2 * spec.coeffs->band_limit()));
}

}  // namespace

Output::Output(const std::string& path, std::string command) : os_(&std::cout), command_(std::move(command)) {
  if (!path.empty()) {
    file_.open(path, std::ios::out | std::ios::trunc);
    if (!file_) throw IoError("cannot open " + path + " for writing");
    os_ = &file_;
  }
}

void Output::write(json& j, const char* type) {
  j["schema_version"] = kSchemaVersion;
  j["type"] = type;
  j["command"] = command_;
  *os_ << j.dump() << '\n';
  os_->flush();
  if (!*os_) throw IoError("write failed");
}

void Output::record(json j) { write(j, "record"); }
void Output::summary(json j) { write(j, "summary"); }

int cmd_lemma_check(const RunConfig& cfg, Output& out) {
  const json& sec = cfg.section("lemma");
  const int cases = value_or<int>(sec, "cases", 1000);
  const double t_min = value_or<double>(sec, "t_min", 0.1), t_max = value_or<double>(sec, "t_max", 1.5);
  const int steps = value_or<int>(sec, "t_steps", 15);
  const double band = value_or<double>(sec, "boundary_band", 1e-3);
  const int iters = value_or<int>(sec, "refine_iters", 50);
  if (cases < 1 || steps < 1 || !(t_min > 0.0) || t_max < t_min) throw ConfigError("bad lemma sampling settings");
  const json seed_sec = sec.value("seed_grid", json::object());
  const SphereGrid seeds = horo::product_grid(cfg.n, value_or<std::size_t>(seed_sec, "m_theta", 12),
                                              value_or<std::size_t>(seed_sec, "m_phi", 24));
  const double miss_threshold = 1e-6;

  std::mt19937_64 rng(cfg.seed);
  int mismatches = 0, boundary = 0;
  for (int i = 0; i < cases; ++i) {
    const double t = steps == 1 ? t_min : t_min + (t_max - t_min) * (i % steps) / (steps - 1);
    const ConePoint z = random_cone_point(rng, cfg.n, t);
    const bool in_plus = is_in_xi_plus(z);
    const double d = horosphere_real_distance(Horosphere(z, 1.0), iters, seeds);
    const bool misses = d > miss_threshold;
    std::string cls = misses == in_plus ? "agree" : "mismatch";
    if (std::abs(t - 1.0) < band) {
      cls = "boundary";
      ++boundary;
    } else if (cls == "mismatch") {
      ++mismatches;
    }
    out.record({{"index", i},
                {"t", t},
                {"xi", rvec_json(z.xi())},
                {"eta", rvec_json(z.eta())},
                {"in_xi_plus", in_plus},
                {"real_distance", d},
                {"misses_real_sphere", misses},
                {"classification", cls}});
  }
  const int code = mismatches == 0 ? kOk : kToleranceFailure;
  finish(out, {{"cases", cases}, {"mismatches", mismatches}, {"boundary", boundary}}, code);
  return code;
}

int cmd_forward(const RunConfig& cfg, Output& out) {
  const json& sec = cfg.section("forward");
  const FunctionSpec spec = cfg.resolve_function();
  const SphereGrid grid = cfg.product_grid();
  const RVec f_values = sample(grid, spec.f);
  const auto oracle = oracle_for(spec);

  struct Point {
    ConePoint zeta;
    Complex p;
    int k;
  };
  std::vector<Point> points;
  if (sec.contains("points")) {
    if (!sec["points"].is_array()) throw ConfigError("forward.points must be an array");
    for (const auto& pj : sec["points"]) {
      try {
        points.push_back({ConePoint(rvec_from_json(pj.at("xi"), cfg.n, "xi"), rvec_from_json(pj.at("eta"), cfg.n, "eta")),
                          complex_from_json(pj.value("p", json::array({1.0, 0.0}))), pj.value("k", 0)});
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      } catch (const json::exception& e) {
        throw ConfigError(std::string("forward point: ") + e.what());
      }
      if (points.back().k < 0) throw ConfigError("derivative order must be >= 0");
    }
  }
  const int extra = value_or<int>(sec, "random_points", 0);
  const double t_max = value_or<double>(sec, "t_max", 0.8);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < extra; ++i) {
    const double t = 0.1 + (t_max - 0.1) * unif(rng);
    const ConePoint z = random_cone_point(rng, cfg.n, t);
    points.push_back({z, std::polar(1.0, 2.0 * kPi * unif(rng)), 0});
  }
  if (points.empty()) throw ConfigError("no forward evaluation points");

  const double tol = cfg.tolerance("forward");
  double max_err = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    const CVec z = pt.zeta.zeta();
    Complex value;
    try {
      value = forward_derivative(f_values, grid, z, pt.p, pt.k);
    } catch (const NearSingularError& e) {
      throw ConfigError(e.what());
    }
    json rec{{"index", i}, {"zeta", cvec_json(z)}, {"p", complex_json(pt.p)}, {"k", pt.k}, {"value", complex_json(value)}};
    if (oracle) {
      const OracleValue o = oracle->derivative(pt.zeta, pt.p, pt.k);
      const double mag = std::abs(o.value);
      const double err = mag > 1e-12 ? std::abs(value - o.value) / mag : std::abs(value - o.value);
      max_err = std::max(max_err, err);
      rec["oracle"] = complex_json(o.value);
      rec["rel_error"] = err;
      rec["series_warning"] = o.series_warning;
    }
    out.record(std::move(rec));
  }
  const int code = status(true, !oracle || max_err <= tol);
  json summary{{"points", points.size()}, {"function", spec.description}, {"grid", grid.id()}, {"tolerance", tol}};
  summary["max_rel_error"] = oracle ? json(max_err) : json(nullptr);
  finish(out, std::move(summary), code);
  return code;
}

int cmd_invert(const RunConfig& cfg, Output& out) {
  require_n3(cfg, "invert");
  const FunctionSpec spec = cfg.resolve_function();
  const InversionChoice inv = cfg.inversion();
  const auto points = point_list(cfg.section("invert"), cfg.n, cfg.seed, "random_points");
  const double tol = cfg.tolerance("invert");
  double max_err = 0.0;
  bool converged = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& x = points[i];
    const InversionResult r = invert_function(spec.f, x, inv.coeffs, inv.constant, cfg.pipeline);
    const double exact = spec.f(x.coords());
    const double err = std::abs(r.value - exact);
    max_err = std::max(max_err, err);
    converged = converged && r.converged;
    out.record({{"index", i},
                {"x", rvec_json(x.coords())},
                {"value", complex_json(r.value)},
                {"exact", exact},
                {"abs_error", err},
                {"error_estimate", r.error_estimate},
                {"converged", r.converged}});
  }
  const int code = status(converged, max_err <= tol);
  finish(out,
         {{"points", points.size()},
          {"function", spec.description},
          {"inversion", {{"a", inv.coeffs.a}, {"b", inv.coeffs.b}, {"constant", complex_json(inv.constant)},
                         {"source", inv.source}}},
          {"max_abs_error", max_err},
          {"tolerance", tol},
          {"converged", converged}},
         code);
  return code;
}

int cmd_roundtrip(const RunConfig& cfg, Output& out) {
  require_n3(cfg, "roundtrip");
  const json& sec = cfg.section("roundtrip");
  const InversionChoice inv = cfg.inversion();
  const double tol = cfg.tolerance("roundtrip");
  const RealSpherePoint x_ratio(rvec_from_json(cfg.section("calibrate").at("x"), 3, "calibrate.x"));

  bool converged = true;
  double max_ratio_err = 0.0;
  for (int l = 0; l <= cfg.band_limit; ++l) {
    const Complex r = inv.constant * roundtrip_ratio(l, x_ratio, inv.coeffs, cfg.pipeline);
    const double err = std::abs(r - 1.0);
    max_ratio_err = std::max(max_ratio_err, err);
    out.record({{"kind", "degree"}, {"l", l}, {"ratio", complex_json(r)}, {"abs_error", err}});
  }

  const HarmonicCoeffs coeffs = HarmonicCoeffs::random(cfg.band_limit, cfg.seed);
  const SphereFunction f = [&coeffs](std::span<const double> u) { return coeffs.evaluate(u); };
  const int count = value_or<int>(sec, "points", 20);
  if (count < 1) throw ConfigError("roundtrip.points must be >= 1");
  std::mt19937_64 rng(cfg.seed + 1);
  double max_err = 0.0;
  for (int i = 0; i < count; ++i) {
    const RealSpherePoint x(unit_vector(rng, 3));
    const InversionResult r = invert_function(f, x, inv.coeffs, inv.constant, cfg.pipeline);
    const double exact = f(x.coords());
    const double err = std::abs(r.value - exact);
    max_err = std::max(max_err, err);
    converged = converged && r.converged;
    out.record({{"kind", "point"},
                {"index", i},
                {"x", rvec_json(x.coords())},
                {"value", complex_json(r.value)},
                {"exact", exact},
                {"abs_error", err},
                {"error_estimate", r.error_estimate},
                {"converged", r.converged}});
  }
  const int code = status(converged, max_err <= tol);
  finish(out,
         {{"band_limit", cfg.band_limit},
          {"points", count},
          {"inversion", {{"a", inv.coeffs.a}, {"b", inv.coeffs.b}, {"constant", complex_json(inv.constant)},
                         {"source", inv.source}}},
          {"max_ratio_error", max_ratio_err},
          {"max_abs_error", max_err},
          {"tolerance", tol},
          {"converged", converged}},
         code);
  return code;
}

int cmd_calibrate(const RunConfig& cfg, Output& out) {
  require_n3(cfg, "calibrate");
  const json& sec = cfg.section("calibrate");
  CalibrationSetup setup;
  setup.x = RealSpherePoint(rvec_from_json(sec.at("x"), 3, "calibrate.x"));
  setup.l_max = value_or<int>(sec, "l_max", 8);
  setup.b_fixed = value_or<double>(sec, "b", -2.0);
  setup.tolerance = cfg.tolerance("calibration");
  setup.pipeline = cfg.pipeline;
  if (setup.l_max < 1) throw ConfigError("calibrate.l_max must be >= 1");
  for (int l = 0; l <= setup.l_max; ++l) {
    if (std::abs(eval_ylm(l, 0, setup.x)) < 0.1)
      throw ConfigError("calibrate.x is too close to a node of Y_{" + std::to_string(l) + ",0}");
  }
  const CalibrationReport rep = calibrate(setup);
  for (const auto& [l, r] : rep.per_degree_ratios) {
    out.record({{"l", l},
                {"ratio", complex_json(r)},
                {"nominal_ratio", complex_json(rep.nominal_ratios.at(l))},
                {"nominal_ratio_predicted", complex_json(rep.nominal_ratios_predicted.at(l))}});
  }
  const int code = status(rep.converged, rep.success);
  finish(out, {{"report", json::parse(rep.to_json())}, {"tolerance", setup.tolerance}}, code);
  return code;
}

namespace {

struct KappaSetup {
  double eps;
  std::size_t rings;
  std::size_t cycle_nodes;
};

KappaSetup kappa_setup(const json& sec) {
  KappaSetup s{value_or<double>(sec, "eps", 1e-3), value_or<std::size_t>(sec, "rings", 600),
               value_or<std::size_t>(sec, "cycle_nodes", 40000)};
  if (!(s.eps > 0.0 && s.eps < 0.5)) throw ConfigError("eps must lie in (0, 0.5)");
  if (s.rings < 4 || s.cycle_nodes < 4) throw ConfigError("rings and cycle_nodes must be >= 4");
  return s;
}

PolarGrid kappa_grid(const RealSpherePoint& x, const KappaSetup& s) {
  return PolarGrid(x, {s.rings, s.cycle_nodes, Grading::both_poles, s.eps / 4.0});
}

}  // namespace

int cmd_homotopy(const RunConfig& cfg, Output& out) {
  require_n3(cfg, "homotopy");
  const json& sec = cfg.section("homotopy");
  const FunctionSpec spec = cfg.resolve_function();
  const KappaSetup ks = kappa_setup(sec);
  const RealSpherePoint x(rvec_from_json(sec.at("x"), 3, "homotopy.x"));
  const RVec deltas = value_or<RVec>(sec, "deltas", RVec{0, 0.25, 0.5, 0.75, 1});
  if (deltas.empty()) throw ConfigError("homotopy.deltas is empty");
  for (double d : deltas)
    if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("homotopy.deltas must lie in [0, 1]");

  const PolarGrid grid = kappa_grid(x, ks);
  const RingSums sums = ring_sums(spec.f, grid);
  const double fx = spec.f(x.coords());
  CVec values;
  for (double d : deltas) {
    const CycleSpec cycle = gamma_delta_cycle(x, d, ks.cycle_nodes);
    const Complex k = kappa_cycle_integral(sums, grid, x, cycle, ks.eps);
    values.push_back(k);
    json rec{{"delta", d}, {"kappa", complex_json(k)}};
    rec["kappa_over_f"] = fx != 0.0 ? complex_json(k / fx) : json(nullptr);
    out.record(std::move(rec));
  }
  const Complex ref = values.front();
  double variation = 0.0;
  for (const auto& v : values) variation = std::max(variation, std::abs(v - ref) / std::abs(ref));
  const double tol = cfg.tolerance("homotopy_variation");
  const int code = status(true, variation <= tol);
  finish(out,
         {{"x", rvec_json(x.coords())},
          {"f_at_x", fx},
          {"eps", ks.eps},
          {"max_rel_variation", variation},
          {"tolerance", tol}},
         code);
  return code;
}

int cmd_radon(const RunConfig& cfg, Output& out) {
  require_n3(cfg, "radon");
  const json& sec = cfg.section("radon");
  const FunctionSpec spec = cfg.resolve_function();
  const KappaSetup ks = kappa_setup(sec);
  const auto points = point_list(sec, 3, cfg.seed, "random_points");
  const Complex claimed = radon_cycle_constant(3);
  const Complex measured = -16.0 * kPi * kPi;
  const std::string which = value_or<std::string>(sec, "constant", "measured");
  if (which != "measured" && which != "nominal") throw ConfigError("radon.constant must be measured or nominal");
  const Complex used = which == "nominal" ? claimed : measured;
  const double tol = cfg.tolerance("radon_spread");

  double max_err = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& x = points[i];
    const PolarGrid grid = kappa_grid(x, ks);
    const CycleSpec cycle = gamma_delta_cycle(x, 0.0, ks.cycle_nodes);
    const Complex k = kappa_cycle_integral(ring_sums(spec.f, grid), grid, x, cycle, ks.eps);
    const double fx = spec.f(x.coords());
    const Complex recon = k / used;
    const double scale = std::max(std::abs(fx), 1e-12);
    const double err = std::abs(recon - fx) / scale;
    max_err = std::max(max_err, err);
    out.record({{"index", i},
                {"x", rvec_json(x.coords())},
                {"kappa", complex_json(k)},
                {"reconstructed", complex_json(recon)},
                {"exact", fx},
                {"rel_error", err}});
  }
  const int code = status(true, max_err <= tol);
  finish(out,
         {{"points", points.size()},
          {"constant_used", which},
          {"measured_constant", complex_json(measured)},
          {"nominal_constant", complex_json(claimed)},
          {"discrepancy_factor", complex_json(measured / claimed)},
          {"max_rel_error", max_err},
          {"tolerance", tol}},
         code);
  return code;
}

int cmd_fourier_modes(const RunConfig& cfg, Output& out) {
  require_n3(cfg, "fourier-modes");
  const json& sec = cfg.section("fourier");
  const int l = value_or<int>(sec, "l", 3), m = value_or<int>(sec, "m", 0);
  if (l < 0 || std::abs(m) > l) throw ConfigError("fourier needs 0 <= |m| <= l");
  const int samples = value_or<int>(sec, "samples", 32);
  if (samples <= 2 * l) throw ConfigError("fourier.samples must exceed 2l");
  const int degree = value_or<int>(sec, "grid_degree", 60);
  ConePoint zeta = [&] {
    try {
      return ConePoint(rvec_from_json(sec.at("xi"), 3, "fourier.xi"), rvec_from_json(sec.at("eta"), 3, "fourier.eta"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }();
  if (!is_in_xi_plus(zeta)) throw ConfigError("fourier.xi, fourier.eta must lie in the interior (|xi| < 1)");

  const SphereGrid grid = product_grid_for_degree(3, degree);
  const RVec f_values = sample(grid, [l, m](std::span<const double> u) { return eval_ylm(l, m, u); });
  CVec values(static_cast<std::size_t>(samples));
  for (int j = 0; j < samples; ++j) {
    const Complex rot = std::polar(1.0, 2.0 * kPi * j / samples);
    values[static_cast<std::size_t>(j)] = forward(f_values, grid, zeta.scaled(rot).zeta(), 1.0);
  }
  const CVec c = discrete_fourier(values);
  std::size_t dominant = 0;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (std::abs(c[k]) > std::abs(c[dominant])) dominant = k;
  double side = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k != dominant) side += std::abs(c[k]);
    out.record({{"mode", k}, {"coefficient", complex_json(c[k])}, {"magnitude", std::abs(c[k])}});
  }
  const double rel_side = side / std::abs(c[dominant]);
  const double tol = cfg.tolerance("fourier_side_mass");
  const int code = status(true, dominant == static_cast<std::size_t>(l) && rel_side <= tol);
  finish(out,
         {{"l", l}, {"m", m}, {"dominant_mode", dominant}, {"side_mass_relative", rel_side}, {"tolerance", tol}},
         code);
  return code;
}

}  // namespace horo::cli
