// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance <id>...    run the named criteria (1..11, 9a, 9b)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "horo/geometry.hpp"
#include "horo/harmonics.hpp"
#include "horo/inversion.hpp"
#include "horo/quadrature.hpp"
#include "horo/transform.hpp"

using namespace horo;
using std::numbers::pi;

namespace {

constexpr int kClassifyCases = 1000;
constexpr double kClassifyBand = 1e-3;
constexpr double kClassifySeconds = 60;
constexpr double kGramTol = 1e-10;
constexpr int kGramDegree = 12;
constexpr double kGramSeconds = 60;
constexpr double kForwardTol = 1e-8;
constexpr double kForwardSeconds = 120;
constexpr double kHomogeneityTol = 1e-10;
constexpr double kSideModeTol = 1e-8;
constexpr double kKernelTol = 1e-3;
constexpr double kKernelEps = 1e-3;
constexpr double kCalibrationTol = 1e-5;
constexpr double kRoundtripTol = 1e-3;
constexpr double kCalibrationSeconds = 600;
constexpr double kHomotopyTol = 1e-2;
constexpr double kHomotopyEps = 1e-3;
constexpr double kHomotopySeconds = 900;
constexpr double kConsistencyTol = 1e-2;
constexpr double kConsistencyEps = 1e-3;

struct Result {
  bool pass;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

std::string fmt(Complex z) { return "(" + fmt(z.real()) + ", " + fmt(z.imag()) + ")"; }

RVec unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RVec v(3);
  for (auto& c : v) c = g(rng);
  const double len = norm(v);
  for (auto& c : v) c /= len;
  return v;
}

ConePoint cone_point(std::mt19937_64& rng, double t) {
  RVec a = unit(rng), b = unit(rng);
  const double c = dot(a, b);
  for (int k = 0; k < 3; ++k) b[k] -= c * a[k];
  const double nb = norm(b);
  for (int k = 0; k < 3; ++k) {
    a[k] *= t;
    b[k] *= t / nb;
  }
  return ConePoint(a, b);
}

ConePoint boundary_at(const RealSpherePoint& x) {
  const Frame f = build_frame(x);
  return ConePoint(RVec(x.coords().begin(), x.coords().end()), f.tangent_basis[0]);
}

SphereFunction ylm(int l, int m) {
  return [l, m](std::span<const double> u) { return eval_ylm(l, m, u); };
}

Result xi_plus_classification() {
  Stopwatch sw;
  const SphereGrid seeds = product_grid(3, 12, 24);
  std::mt19937_64 rng(1);
  int mismatches = 0, excluded = 0;
  for (int i = 0; i < kClassifyCases; ++i) {
    const double t = 0.1 * (1 + i % 15);
    const ConePoint z = cone_point(rng, t);
    if (std::abs(t - 1.0) < kClassifyBand) {
      ++excluded;
      continue;
    }
    const bool misses = horosphere_real_distance(Horosphere(z, 1.0), 50, seeds) > 1e-6;
    if (misses != is_in_xi_plus(z)) ++mismatches;
  }
  const double s = sw.seconds();
  return {mismatches == 0 && s <= kClassifySeconds,
          "xi_plus classification: " + std::to_string(kClassifyCases) + " cases, " + std::to_string(excluded) +
              " in the boundary band, " + std::to_string(mismatches) + " mismatches, " + fmt(s) + " s"};
}

Result gram_matrix() {
  Stopwatch sw;
  const SphereGrid g = product_grid_for_degree(3, 2 * kGramDegree + 1);
  std::vector<RVec> basis;
  for (int l = 0; l <= kGramDegree; ++l)
    for (int m = -l; m <= l; ++m) basis.push_back(sample(g, ylm(l, m)));
  double worst = 0.0;
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = a; b < basis.size(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * basis[a][i] * basis[b][i];
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  }
  const double s = sw.seconds();
  return {worst <= kGramTol && g.exact_degree() >= 25 && s <= kGramSeconds,
          "quadrature exactness: exact_degree " + std::to_string(g.exact_degree()) + ", " +
              std::to_string(basis.size()) + " harmonics, max |G - I| = " + fmt(worst) + ", " + fmt(s) + " s"};
}

Result forward_vs_oracle() {
  Stopwatch sw;
  const SphereGrid g = product_grid(3, 61, 121);
  const SphereGrid oracle_grid = product_grid_for_degree(3, 20);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int L = 0; L <= 10; ++L) {
    const HarmonicCoeffs c = HarmonicCoeffs::random(L, 100 + L);
    const RVec f = sample(g, [&](std::span<const double> u) { return c.evaluate(u); });
    const TransformOracle oracle(c, oracle_grid);
    for (int k = 0; k < 20; ++k) {
      const ConePoint z = cone_point(rng, 0.8 * (1.0 - unif(rng)));
      const Complex p = std::polar(1.0, 2.0 * pi * unif(rng));
      const Complex o = oracle.value(z, p).value;
      worst = std::max(worst, std::abs(forward(f, g, z.zeta(), p) - o) / std::abs(o));
    }
  }
  const double s = sw.seconds();
  return {worst <= kForwardTol && s <= kForwardSeconds,
          "forward vs oracle: band limits 0..10, 20 points each, t <= 0.8, |p| = 1, max rel error " + fmt(worst) +
              ", " + fmt(s) + " s"};
}

Result homogeneity() {
  const SphereGrid g = product_grid(3, 61, 121);
  const HarmonicCoeffs c = HarmonicCoeffs::random(5, 4);
  const RVec f = sample(g, [&](std::span<const double> u) { return c.evaluate(u); });
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ConePoint z = cone_point(rng, 0.1 + 0.7 * unif(rng));
    const Complex p = std::polar(1.0, 2.0 * pi * unif(rng));
    const Complex lambda = std::polar(0.5 + 1.5 * unif(rng), 2.0 * pi * unif(rng));
    const Complex base = forward(f, g, z.zeta(), p);
    const Complex scaled = forward(f, g, z.scaled(lambda).zeta(), lambda * p);
    worst = std::max(worst, std::abs(scaled - base / lambda) / std::abs(base / lambda));
  }
  return {worst <= kHomogeneityTol, "homogeneity: 50 triples, max rel error " + fmt(worst)};
}

Result fourier_modes() {
  const SphereGrid g = product_grid_for_degree(3, 60);
  std::mt19937_64 rng(5);
  const ConePoint z = cone_point(rng, 0.6);
  const std::size_t N = 32;
  double worst = 0.0;
  bool dominant_ok = true;
  int functions = 0;
  for (int l = 0; l <= 8; ++l) {
    for (int m = -l; m <= l; ++m) {
      const RVec f = sample(g, ylm(l, m));
      CVec samples(N);
      for (std::size_t j = 0; j < N; ++j)
        samples[j] = forward(f, g, z.scaled(std::polar(1.0, 2.0 * pi * j / N)).zeta(), 1.0);
      const CVec c = discrete_fourier(samples);
      const auto main = static_cast<std::size_t>(l);
      double side = 0.0;
      for (std::size_t k = 0; k < N; ++k) {
        if (k != main) side += std::abs(c[k]);
        if (std::abs(c[k]) > std::abs(c[main])) dominant_ok = false;
      }
      worst = std::max(worst, side / std::abs(c[main]));
      ++functions;
    }
  }
  return {dominant_ok && worst <= kSideModeTol,
          "Fourier-mode concentration: " + std::to_string(functions) + " harmonics Y_lm, l <= 8, dominant mode l " +
              (dominant_ok ? "everywhere" : "NOT everywhere") + ", max relative side mass " + fmt(worst)};
}

Result kernel_identity_check() {
  const RealSpherePoint x(RVec{0.3, 0.4, -0.6});
  const ConePoint z = boundary_at(x);
  const LpCoefficients kc = LpCoefficients::kernel(3);
  const double pre = kernel_prefactor(3);
  const std::vector<std::pair<std::string, SphereFunction>> functions{
      {"even Y20 + 0.3 Y00", [](auto u) { return eval_ylm(2, 0, u) + 0.3 * eval_ylm(0, 0, u); }},
      {"even Y21", ylm(2, 1)},
      {"odd Y10", ylm(1, 0)},
      {"odd Y3-2", ylm(3, -2)},
  };
  bool pass = true;
  std::string detail = "kernel identity at eps 1e-1, 1e-2, 1e-3:";
  for (const auto& [name, fn] : functions) {
    RVec r;
    for (double eps : {1e-1, 1e-2, kKernelEps}) {
      const SphereGrid g = kernel_identity_grid(z, x, eps).materialize();
      r.push_back(kernel_identity_residual(sample(g, fn), g, z, x, eps, kc, pre));
    }
    pass = pass && r[2] <= kKernelTol && r[1] < r[0] && r[2] < r[1];
    detail += " " + name + " [" + fmt(r[0]) + ", " + fmt(r[1]) + ", " + fmt(r[2]) + "];";
  }
  return {pass, detail};
}

struct CalibrationRun {
  CalibrationReport report;
  double seconds;
};

const CalibrationRun& calibration() {
  static const CalibrationRun run = [] {
    Stopwatch sw;
    CalibrationSetup setup;
    setup.l_max = 8;
    setup.tolerance = kCalibrationTol;
    CalibrationReport rep = calibrate(setup);
    return CalibrationRun{std::move(rep), sw.seconds()};
  }();
  return run;
}

Result calibration_and_roundtrip() {
  const CalibrationRun& cal = calibration();
  const CalibrationReport& rep = cal.report;
  Stopwatch sw;
  const HarmonicCoeffs c = HarmonicCoeffs::random(5, 7);
  const SphereFunction f = [&](std::span<const double> u) { return c.evaluate(u); };
  std::mt19937_64 rng(7);
  double worst = 0.0;
  bool converged = rep.converged;
  for (int k = 0; k < 20; ++k) {
    const RealSpherePoint x(unit(rng));
    const InversionResult r = invert_function(f, x, rep.coefficients, rep.overall_constant);
    worst = std::max(worst, std::abs(r.value - f(x.coords())));
    converged = converged && r.converged;
  }
  const double s = sw.seconds() + cal.seconds;
  return {rep.success && rep.spread_after <= kCalibrationTol && worst <= kRoundtripTol && converged &&
              s <= kCalibrationSeconds,
          "calibration: a = " + fmt(rep.coefficients.a) + ", b = " + fmt(rep.coefficients.b) + ", constant " +
              fmt(rep.overall_constant) + ", ratio spread l <= 8 " + fmt(rep.spread_after) +
              ", random L = 5 inversion at 20 points max error " + fmt(worst) + ", " + fmt(s) + " s"};
}

Result nominal_constant_report() {
  const CalibrationReport& rep = calibration().report;
  std::cout << rep.to_json() << '\n';
  const bool l_dependent = rep.spread_before > kCalibrationTol;
  const bool matches = rep.nominal_prediction_max_rel_error <= kCalibrationTol;
  const LpCoefficients nominal = LpCoefficients::nominal(3);
  return {l_dependent && matches,
          "nominal-constant report: nominal (a, b, c) = (" + fmt(nominal.a) + ", " + fmt(nominal.b) + ", " +
              fmt(rep.nominal_constant) + "), measured (" + fmt(rep.coefficients.a) + ", " +
              fmt(rep.coefficients.b) + ", " + fmt(rep.overall_constant) + "), orientation " +
              std::to_string(rep.orientation) + ", discrepancy factor " + fmt(rep.constant_discrepancy) +
              ", nominal-preset ratio spread " + fmt(rep.spread_before) + ", max deviation from the predicted ratios " +
              fmt(rep.nominal_prediction_max_rel_error)};
}

struct HomotopyRun {
  std::vector<std::pair<std::string, CVec>> kappas;  // per function, per delta
  std::vector<double> f_at_x;
  double seconds;
};

const RVec kDeltas{0.0, 0.25, 0.5, 0.75, 1.0};

const HomotopyRun& homotopy() {
  static const HomotopyRun run = [] {
    Stopwatch sw;
    const RealSpherePoint x(RVec{0.3, -0.2, 0.9});
    const std::size_t m = 40000;
    const PolarGrid grid(x, {600, m, Grading::both_poles, kHomotopyEps / 4});
    std::vector<CycleSpec> cycles;
    for (double d : kDeltas) cycles.push_back(gamma_delta_cycle(x, d, m));
    HomotopyRun out;
    const std::vector<std::pair<std::string, SphereFunction>> functions{
        {"even Y00", ylm(0, 0)}, {"even Y20", ylm(2, 0)}, {"odd Y10", ylm(1, 0)}, {"odd Y31", ylm(3, 1)}};
    for (const auto& [name, fn] : functions) {
      const RingSums sums = ring_sums(fn, grid);
      CVec k;
      for (const auto& c : cycles) k.push_back(kappa_cycle_integral(sums, grid, x, c, kHomotopyEps));
      out.kappas.emplace_back(name, std::move(k));
      out.f_at_x.push_back(fn(x.coords()));
    }
    out.seconds = sw.seconds();
    return out;
  }();
  return run;
}

Result homotopy_invariance() {
  const HomotopyRun& h = homotopy();
  double worst = 0.0;
  std::string detail;
  for (const auto& [name, k] : h.kappas) {
    double v = 0.0;
    for (const auto& z : k) v = std::max(v, std::abs(z - k[0]) / std::abs(k[0]));
    worst = std::max(worst, v);
    detail += " " + name + " " + fmt(v) + ";";
  }
  return {worst <= kHomotopyTol && h.seconds <= kHomotopySeconds,
          "homotopy invariance over delta in {0, 0.25, 0.5, 0.75, 1} at eps 1e-3, max rel variation:" + detail + " " +
              fmt(h.seconds) + " s"};
}

Result radon_constant() {
  const HomotopyRun& h = homotopy();
  const Complex claimed = 2.0 * ipow(Complex(0.0, 2.0 * pi), 2) / 2.0;
  double worst = 0.0;
  std::string detail;
  for (std::size_t i = 0; i < h.kappas.size(); ++i) {
    const Complex k0 = h.kappas[i].second[0];
    const Complex expected = claimed * h.f_at_x[i];
    worst = std::max(worst, std::abs(k0 - expected) / std::abs(expected));
    detail += " " + h.kappas[i].first + " kappa/f = " + fmt(k0 / h.f_at_x[i]) + ";";
  }
  return {worst <= kHomotopyTol, "Radon-cycle value at delta = 0 against 2(2 pi i)^2/2! f(x) = " + fmt(claimed) +
                                     " f(x):" + detail + " max rel error " + fmt(worst)};
}

Result gamma1_consistency() {
  const RealSpherePoint x(RVec{0.5, 0.5, -0.2});
  const std::vector<std::pair<std::string, SphereFunction>> functions{{"even Y00", ylm(0, 0)},
                                                                       {"odd Y21 + Y10", [](auto u) {
                                                                          return eval_ylm(2, 1, u) + eval_ylm(1, 0, u);
                                                                        }}};
  bool pass = true;
  std::string detail = "gamma_1 consistency under eps refinement 4e-3, 2e-3, 1e-3:";
  for (const auto& [name, fn] : functions) {
    RVec res;
    CVec kap, fac;
    for (double eps : {4 * kConsistencyEps, 2 * kConsistencyEps, kConsistencyEps}) {
      ConsistencySetup s;
      s.eps = eps;
      s.kappa_grid.scale = eps / 4;
      s.factored_grid.scale = eps / 4;
      const ConsistencyResult r = consistency_gamma1(fn, x, s);
      res.push_back(r.residual);
      kap.push_back(r.kappa);
      fac.push_back(r.factored);
    }
    const double dk = std::abs(kap[2] - kap[1]) / std::abs(kap[2]);
    const double df = std::abs(fac[2] - fac[1]) / std::abs(fac[2]);
    const bool together = res[2] <= res[1] + 1e-12 && res[1] <= res[0] + 1e-12;
    pass = pass && res[2] <= kConsistencyTol && together;
    detail += " " + name + " residuals [" + fmt(res[0]) + ", " + fmt(res[1]) + ", " + fmt(res[2]) +
              "], last-step change kappa " + fmt(dk) + " factored " + fmt(df) + ";";
  }
  return {pass, detail};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Result cli_determinism() {
  const std::string dir = std::string(HORO_ACCEPTANCE_WORKDIR);
  const std::vector<std::pair<std::string, std::string>> commands{
      {"lemma-check", ""},
      {"forward", "--override forward.random_points=20 --override function.kind=random --override band_limit=6"},
      {"invert", "--override invert.random_points=2 --override function.kind=random --override band_limit=3"},
      {"roundtrip", "--override band_limit=2 --override roundtrip.points=2"},
      {"calibrate", "--override calibrate.l_max=2"},
      {"homotopy", "--override homotopy.rings=200 --override homotopy.cycle_nodes=8000 --override homotopy.eps=0.004"},
      {"radon", "--override radon.rings=200 --override radon.cycle_nodes=8000 --override radon.eps=0.004"},
      {"fourier-modes", "--override fourier.l=6"},
  };
  bool pass = true;
  std::string detail = "CLI determinism across --threads 1 and 4:";
  for (const auto& [cmd, args] : commands) {
    std::string outputs[2];
    int codes[2];
    for (int t = 0; t < 2; ++t) {
      const std::string out = dir + "/determinism-" + cmd + "-" + std::to_string(t) + ".jsonl";
      std::remove(out.c_str());
      const std::string line = std::string(HORO_CLI) + " " + cmd + " --threads " + (t == 0 ? "1" : "4") + " --out " +
                               out + " " + args + " 2>/dev/null";
      codes[t] = std::system(line.c_str());
      outputs[t] = slurp(out);
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && codes[0] == codes[1];
    pass = pass && same;
    detail += " " + cmd + (same ? " identical;" : " DIFFERENT;");
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Result()>> criteria{
      {"1", xi_plus_classification}, {"2", gram_matrix},        {"3", forward_vs_oracle},
      {"4", homogeneity},       {"5", fourier_modes},      {"6", kernel_identity_check},
      {"7", calibration_and_roundtrip}, {"8", nominal_constant_report}, {"9a", homotopy_invariance},
      {"9b", radon_constant},   {"10", gamma1_consistency}, {"11", cli_determinism},
  };
  const std::vector<std::string> order{"1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11"};
  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.empty()) selected = order;

  bool all_pass = true;
  for (const auto& id : selected) {
    Result r;
    if (id == "9") {
      const Result a = homotopy_invariance(), b = radon_constant();
      r = {a.pass && b.pass, "(a) " + std::string(a.pass ? "pass " : "FAIL ") + a.detail + " | (b) " +
                                 (b.pass ? "pass " : "FAIL ") + b.detail};
    } else if (auto it = criteria.find(id); it != criteria.end()) {
      r = it->second();
    } else {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << r.detail << std::endl;
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}
