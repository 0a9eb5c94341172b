#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "horo/errors.hpp"

namespace horo::cli {

namespace {

constexpr double kPi = std::numbers::pi;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class T>
T get(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + " is missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

Grading grading_from(const std::string& s) {
  if (s == "none") return Grading::none;
  if (s == "pole") return Grading::pole;
  if (s == "both_poles") return Grading::both_poles;
  throw ConfigError("unknown grading '" + s + "'");
}

HarmonicCoeffs zonal_coeffs(int l, std::span<const double> axis) {
  // P_l(a . u) = 4 pi / (2l + 1) sum_m Y_lm(a) Y_lm(u)
  HarmonicCoeffs c(l);
  for (int m = -l; m <= l; ++m) c.set(l, m, 4.0 * kPi / (2.0 * l + 1.0) * eval_ylm(l, m, axis));
  return c;
}

}  // namespace

nlohmann::json default_config() {
  return nlohmann::json::parse(R"({
    "n": 3,
    "grid": {"m_theta": 61, "m_phi": 121},
    "boundary_grid": {"m_theta": 240, "m_phi": 1024, "grading": "pole", "scale": 0.0},
    "band_limit": 5,
    "cycle_resolution": 32,
    "eps_schedule": [0.02, 0.01, 0.005, 0.0025, 0.00125, 0.000625],
    "seed": 1,
    "function": {"kind": "named", "name": "constant", "value": 1.0},
    "inversion": {"preset": "calibrated"},
    "output": "",
    "tolerances": {
      "forward": 1e-8,
      "invert": 1e-3,
      "roundtrip": 1e-3,
      "calibration": 1e-5,
      "homotopy_variation": 1e-2,
      "radon_spread": 1e-2,
      "fourier_side_mass": 1e-8
    },
    "lemma": {"cases": 1000, "t_min": 0.1, "t_max": 1.5, "t_steps": 15, "boundary_band": 1e-3,
              "refine_iters": 50, "seed_grid": {"m_theta": 12, "m_phi": 24}},
    "forward": {"points": [
      {"xi": [0.5, 0, 0], "eta": [0, 0.5, 0], "p": [1, 0], "k": 0, "epsilon": 0}
    ]},
    "invert": {"points": [], "random_points": 5},
    "roundtrip": {"points": 20},
    "calibrate": {"x": [0.1, 0.05, 1.0], "l_max": 8, "b": -2.0},
    "homotopy": {"x": [0.3, -0.2, 0.9], "deltas": [0, 0.25, 0.5, 0.75, 1], "eps": 1e-3,
                 "rings": 600, "cycle_nodes": 40000},
    "radon": {"points": [[0.3, -0.2, 0.9], [0.0, 0.6, -0.8]], "eps": 1e-3, "rings": 600, "cycle_nodes": 40000},
    "fourier": {"l": 3, "m": 1, "xi": [0.36, 0, 0.48], "eta": [0, 0.6, 0], "samples": 32, "grid_degree": 60}
  })");
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  std::string pointer;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("empty path component in override " + assignment);
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  config[nlohmann::json::json_pointer(pointer)] = value;
}

nlohmann::json load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  nlohmann::json config = default_config();
  if (path) {
    nlohmann::json user;
    try {
      user = nlohmann::json::parse(read_file(*path));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config " + *path + " does not parse: " + e.what());
    }
    if (!user.is_object()) throw ConfigError("config must be a JSON object");
    config.merge_patch(user);
  }
  for (const auto& o : overrides) apply_override(config, o);
  return config;
}

nlohmann::json complex_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

Complex complex_from_json(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError("complex values are written [re, im]");
}

RVec rvec_from_json(const nlohmann::json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n) throw ConfigError(what + " must be an array of " + std::to_string(n) + " numbers");
  RVec v;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(what + " must contain numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

RunConfig::RunConfig(const nlohmann::json& j) : raw(j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const int n_int = get<int>(j, "n", "config");
  if (n_int < 3) throw ConfigError("n must be >= 3");
  n = static_cast<std::size_t>(n_int);

  const auto& grid = section("grid");
  const int mt = get<int>(grid, "m_theta", "grid"), mp = get<int>(grid, "m_phi", "grid");
  if (mt < 1 || mp < 1) throw ConfigError("grid resolution must be positive");
  grid_m_theta = static_cast<std::size_t>(mt);
  grid_m_phi = static_cast<std::size_t>(mp);

  const auto& bg = section("boundary_grid");
  const int bt = get<int>(bg, "m_theta", "boundary_grid"), bp = get<int>(bg, "m_phi", "boundary_grid");
  if (bt < 1 || bp < 1) throw ConfigError("boundary_grid resolution must be positive");
  pipeline.grid = {static_cast<std::size_t>(bt), static_cast<std::size_t>(bp),
                   grading_from(get<std::string>(bg, "grading", "boundary_grid")),
                   get<double>(bg, "scale", "boundary_grid")};
  const int cycle = get<int>(j, "cycle_resolution", "config");
  if (cycle < 4) throw ConfigError("cycle_resolution must be >= 4");
  pipeline.cycle_nodes = static_cast<std::size_t>(cycle);

  const auto eps = get<RVec>(j, "eps_schedule", "config");
  if (eps.empty()) throw ConfigError("eps_schedule is empty");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0) || (k > 0 && !(eps[k] < eps[k - 1])))
      throw ConfigError("eps_schedule must be positive and strictly decreasing");
  }
  pipeline.boundary.eps_schedule = eps;

  band_limit = get<int>(j, "band_limit", "config");
  if (band_limit < 0) throw ConfigError("band_limit must be >= 0");
  seed = get<std::uint64_t>(j, "seed", "config");
  function = section("function");
  if (!j.contains("tolerances") || !j["tolerances"].is_object()) throw ConfigError("tolerances must be an object");
}

const nlohmann::json& RunConfig::section(const std::string& key) const {
  if (!raw.contains(key) || !raw.at(key).is_object()) throw ConfigError(key + " must be an object");
  return raw.at(key);
}

double RunConfig::tolerance(const std::string& key) const {
  const auto& t = raw.at("tolerances");
  if (!t.contains(key) || !t.at(key).is_number()) throw ConfigError("tolerances." + key + " must be a number");
  return t.at(key).get<double>();
}

SphereGrid RunConfig::product_grid() const {
  try {
    return horo::product_grid(n, grid_m_theta, grid_m_phi);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

FunctionSpec RunConfig::resolve_function() const {
  const std::string kind = get<std::string>(function, "kind", "function");
  FunctionSpec out;
  if (kind == "harmonics" || kind == "random") {
    if (n != 3) throw ConfigError("harmonic coefficient functions need n = 3");
    HarmonicCoeffs c = kind == "random" ? HarmonicCoeffs::random(band_limit, seed) : [&] {
      try {
        return HarmonicCoeffs::from_json(read_file(get<std::string>(function, "coeffs", "function")));
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }();
    out.f = [c](std::span<const double> u) { return c.evaluate(u); };
    out.coeffs = c;
    out.description = kind == "random" ? "random band limit " + std::to_string(band_limit) : "harmonics file";
    return out;
  }
  if (kind != "named") throw ConfigError("function.kind must be named, harmonics or random");
  const std::string name = get<std::string>(function, "name", "function");
  if (name == "constant") {
    const double value = function.contains("value") ? get<double>(function, "value", "function") : 1.0;
    out.f = [value](std::span<const double>) { return value; };
    if (n == 3) {
      HarmonicCoeffs c(0);
      c.set(0, 0, value * std::sqrt(4.0 * kPi));
      out.coeffs = c;
    } else {
      const SphereGrid g = horo::product_grid(n, 1, 1);
      out.general_oracle = TransformOracle(n, {MaxwellPolynomial(0, g, RVec(g.size(), value))});
    }
    out.description = "constant";
    return out;
  }
  if (name == "zonal_l") {
    const int l = get<int>(function, "l", "function");
    if (l < 0) throw ConfigError("function.l must be >= 0");
    RVec axis = function.contains("axis") ? rvec_from_json(function["axis"], n, "function.axis") : RVec{};
    if (axis.empty()) {
      axis.assign(n, 0.0);
      axis.back() = 1.0;
    }
    const double len = norm(axis);
    if (!(len > 0.0)) throw ConfigError("function.axis must be nonzero");
    for (auto& a : axis) a /= len;
    if (n == 3) {
      out.f = [l, axis](std::span<const double> u) { return legendre_P(l, std::clamp(dot(axis, u), -1.0, 1.0)); };
      out.coeffs = zonal_coeffs(l, axis);
    } else {
      out.f = [l, axis](std::span<const double> u) { return eval_zonal(l, axis, u); };
      const SphereGrid g = product_grid_for_degree(n, 2 * l);
      out.general_oracle = TransformOracle(n, {MaxwellPolynomial(l, g, sample(g, out.f))});
    }
    out.description = "zonal degree " + std::to_string(l);
    return out;
  }
  if (name == "gaussian_bump") {
    const RVec center = rvec_from_json(function.value("center", nlohmann::json()), n, "function.center");
    const double width = get<double>(function, "width", "function");
    if (!(width > 0.0)) throw ConfigError("function.width must be positive");
    out.f = [center, width](std::span<const double> u) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) d2 += (u[k] - center[k]) * (u[k] - center[k]);
      return std::exp(-d2 / (2.0 * width * width));
    };
    out.description = "gaussian bump";
    return out;
  }
  throw ConfigError("unknown function name '" + name + "'");
}

InversionChoice RunConfig::inversion() const {
  const auto& inv = section("inversion");
  InversionChoice out{{-1.0, -2.0}, -1.0 / (16.0 * kPi * kPi), "calibrated"};
  if (inv.contains("calibration_report")) {
    const std::string path = get<std::string>(inv, "calibration_report", "inversion");
    std::istringstream lines(read_file(path));
    std::string line, last;
    while (std::getline(lines, line))
      if (!line.empty()) last = line;
    try {
      const auto summary = nlohmann::json::parse(last);
      const auto& rep = summary.at("report");
      out.coeffs = {rep.at("coefficients").at("a").get<double>(), rep.at("coefficients").at("b").get<double>()};
      out.constant = complex_from_json(rep.at("overall_constant"));
      out.source = path;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("calibration report " + path + " is malformed: " + e.what());
    }
  } else {
    const std::string preset = inv.value("preset", std::string("calibrated"));
    if (preset == "nominal") {
      out = {LpCoefficients::nominal(n), nominal_constant(n), "nominal"};
    } else if (preset == "kernel") {
      out = {LpCoefficients::kernel(n), kernel_prefactor(n), "kernel"};
    } else if (preset != "calibrated") {
      throw ConfigError("inversion.preset must be calibrated, nominal or kernel");
    }
  }
  if (inv.contains("a")) out.coeffs.a = get<double>(inv, "a", "inversion");
  if (inv.contains("b")) out.coeffs.b = get<double>(inv, "b", "inversion");
  if (inv.contains("constant")) out.constant = complex_from_json(inv["constant"]);
  return out;
}

}  // namespace horo::cli
