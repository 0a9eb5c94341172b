#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "horo/errors.hpp"
#include "horo/inversion.hpp"
#include "json.hpp"

using namespace horo;
using std::numbers::pi;

namespace {

const LpCoefficients kCalibrated{-1.0, -2.0};
const Complex kCalibratedConstant = -1.0 / (16.0 * pi * pi);

double rel(Complex a, Complex b) { return std::abs(a - b) / std::abs(b); }

// Rotation taking e_3 to a and rotating by angle c about it.
std::vector<RVec> rotation(double a, double b, double c) {
  auto rz = [](double t) {
    return std::vector<RVec>{{std::cos(t), -std::sin(t), 0}, {std::sin(t), std::cos(t), 0}, {0, 0, 1}};
  };
  auto ry = [](double t) {
    return std::vector<RVec>{{std::cos(t), 0, std::sin(t)}, {0, 1, 0}, {-std::sin(t), 0, std::cos(t)}};
  };
  auto mul = [](const std::vector<RVec>& p, const std::vector<RVec>& q) {
    std::vector<RVec> r(3, RVec(3, 0.0));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) r[i][j] += p[i][k] * q[k][j];
    return r;
  };
  return mul(rz(a), mul(ry(b), rz(c)));
}

RVec apply(const std::vector<RVec>& r, std::span<const double> u) {
  RVec out(3, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out[i] += r[i][k] * u[k];
  return out;
}

}  // namespace

TEST_CASE("L_p presets and constants") {
  CHECK(LpCoefficients::nominal(3).a == 1.0);
  CHECK(LpCoefficients::nominal(3).b == -2.0);
  CHECK(LpCoefficients::kernel(5).a == 3.0);
  CHECK(LpCoefficients::kernel(5).b == 2.0);
  CHECK(nominal_constant(3) == doctest::Approx(1.0 / (4 * pi * pi)));
  CHECK(kernel_prefactor(4) == doctest::Approx(0.5));
  CHECK(std::abs(radon_cycle_constant(3) - (-4 * pi * pi)) < 1e-12);
}

TEST_CASE("apply_Lp") {
  const SphereGrid g = product_grid_for_degree(3, 40);
  const RVec one(g.size(), 1.0);
  const ConePoint z(RVec{0.5, 0, 0}, RVec{0, 0.5, 0});
  CHECK(std::abs(apply_Lp(one, g, z.zeta(), 1.0, LpCoefficients::nominal(3)) - (-24 * pi)) <= 1e-9);
  HarmonicCoeffs c1(0);
  c1.set(0, 0, std::sqrt(4 * pi));
  const TransformOracle o1(c1, g);
  CHECK(std::abs(apply_Lp(o1, 3, z.zeta(), 1.0, LpCoefficients::nominal(3)) - (-24 * pi)) <= 1e-12);

  const HarmonicCoeffs a = HarmonicCoeffs::random(4, 1), b = HarmonicCoeffs::random(4, 2);
  const RVec fa = sample(g, [&](auto u) { return a.evaluate(u); });
  const RVec fb = sample(g, [&](auto u) { return b.evaluate(u); });
  RVec mix(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) mix[i] = 2.0 * fa[i] - 0.5 * fb[i];
  const Complex p(0.9, 0.4);
  const auto coeffs = LpCoefficients::nominal(3);
  const Complex lhs = apply_Lp(mix, g, z.zeta(), p, coeffs);
  const Complex rhs = 2.0 * apply_Lp(fa, g, z.zeta(), p, coeffs) - 0.5 * apply_Lp(fb, g, z.zeta(), p, coeffs);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));
  CHECK(rel(apply_Lp(fa, g, z.zeta(), p, coeffs), apply_Lp(TransformOracle(a, g), 3, z.zeta(), p, coeffs)) <= 1e-10);
  CHECK(rel(apply_Lp(fa, g, z.zeta(), p, {0.0, 3.0}), 3.0 * forward_derivative(fa, g, z.zeta(), p, 1)) <= 1e-14);
}

TEST_CASE("apply_Lp on S^3") {
  const SphereGrid g = product_grid_for_degree(4, 40);
  const RVec axis{0.6, 0.0, 0.0, 0.8};
  const RVec f = sample(g, [&](auto u) { return eval_zonal(2, axis, u) + 0.5; });
  const TransformOracle o(4, {MaxwellPolynomial(0, g, RVec(g.size(), 0.5)), MaxwellPolynomial(2, g, sample(g, [&](auto u) { return eval_zonal(2, axis, u); }))});
  const ConePoint z(RVec{0.3, 0, 0, 0}, RVec{0, 0, 0.3, 0});
  const Complex p(1.0, 0.1);
  CHECK(rel(apply_Lp(f, g, z.zeta(), p, LpCoefficients::kernel(4)), apply_Lp(o, 4, z.zeta(), p, LpCoefficients::kernel(4))) <= 1e-10);
}

TEST_CASE("nominal preset on the constant function gives -12 f(x)") {
  const RealSpherePoint x(RVec{0.2, -0.3, 0.9});
  const auto f = [](std::span<const double> u) { return eval_ylm(0, 0, u); };
  const InversionResult r = invert_function(f, x, LpCoefficients::nominal(3), nominal_constant(3));
  CHECK(r.converged);
  CHECK(rel(r.value, -12.0 * eval_ylm(0, 0, x)) <= 1e-6);
  CHECK(std::abs(r.value.imag()) <= 1e-8);
}

TEST_CASE("calibrated inversion of Y_{0,0}") {
  const RealSpherePoint x(RVec{-0.5, 0.1, 0.3});
  const auto f = [](std::span<const double> u) { return eval_ylm(0, 0, u); };
  const InversionResult r = invert_function(f, x, kCalibrated, kCalibratedConstant);
  CHECK(std::abs(r.value - eval_ylm(0, 0, x)) <= 1e-4);
  CHECK(r.error_estimate < 1e-4);
}

TEST_CASE("invert_at_point checks its cycle and writes diagnostics") {
  const RealSpherePoint x(RVec{0, 0, 1});
  PipelineSetup setup;
  setup.grid = {120, 512, Grading::pole, 0.0};
  setup.cycle_nodes = 8;
  const SphereGrid g = boundary_polar_grid(x, setup).materialize();
  const RVec f(g.size(), 1.0);
  std::vector<NodeDiagnostic> diag;
  invert_at_point(f, g, x, gamma1_cycle(x, 8), kCalibrated, kCalibratedConstant, setup.boundary, &diag);
  CHECK(diag.size() == 8);
  std::ostringstream csv;
  write_diagnostics_csv(csv, diag);
  const std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 9);
  CHECK(text.rfind("node,weight,value_re,value_im", 0) == 0);
  CHECK_THROWS_AS(invert_at_point(f, g, x, gamma1_cycle(RealSpherePoint(RVec{1, 0, 0}), 8), kCalibrated, 1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(invert_at_point(f, g, x, gamma_delta_cycle(x, 0.5, 8), kCalibrated, 1.0), InvalidArgument);
}

TEST_CASE("round-trip ratios") {
  const RealSpherePoint x1(RVec{0.1, 0.05, 1.0});
  const RealSpherePoint x2(RVec{-0.2, 0.1, 0.9});
  CHECK_THROWS_AS(roundtrip_ratio(1, RealSpherePoint(RVec{1, 0, 0}), kCalibrated), InvalidArgument);
  for (int l = 0; l <= 4; ++l) {
    const RoundtripComponents c = roundtrip_components(l, x1);
    const auto nominal = LpCoefficients::nominal(3);
    const Complex measured = nominal_constant(3) * (nominal.a * c.first + nominal.b * c.second);
    CHECK(rel(measured, predicted_ratio(l, nominal, nominal_constant(3))) <= 1e-6);
    CHECK(rel(kCalibratedConstant * (kCalibrated.a * c.first + kCalibrated.b * c.second), 1.0) <= 1e-6);
    if (l == 2) CHECK(rel(roundtrip_ratio(l, x2, kCalibrated), roundtrip_ratio(l, x1, kCalibrated)) <= 1e-5);
  }
  CHECK(predicted_ratio(0, LpCoefficients::nominal(3), nominal_constant(3)).real() == doctest::Approx(-12.0));
  CHECK(predicted_ratio(3, kCalibrated, kCalibratedConstant).real() == doctest::Approx(1.0));
}

TEST_CASE("calibrate") {
  CalibrationSetup setup;
  setup.l_max = 3;
  const CalibrationReport rep = calibrate(setup);
  CHECK(rep.success);
  CHECK(rep.converged);
  CHECK(rep.coefficients.a == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(rep.coefficients.b == -2.0);
  CHECK(rep.overall_constant.real() == doctest::Approx(-1.0 / (16 * pi * pi)).epsilon(1e-6));
  CHECK(rep.constant_discrepancy.real() == doctest::Approx(-0.25).epsilon(1e-6));
  CHECK(rep.spread_after < rep.spread_before);
  CHECK(rep.spread_after <= 1e-5);
  CHECK(rep.nominal_prediction_max_rel_error <= 1e-6);
  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["schema_version"] == 1);
  CHECK(j["per_degree_ratios"].size() == 4);
  CHECK(j["nominal"]["constant"][0].get<double>() == doctest::Approx(1.0 / (4 * pi * pi)));
}

TEST_CASE("calibrated inversion of band-limited functions") {
  const HarmonicCoeffs c = HarmonicCoeffs::random(5, 99);
  const auto f = [&](std::span<const double> u) { return c.evaluate(u); };
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 3; ++i) {
    const RealSpherePoint x(RVec{g(rng), g(rng), g(rng)});
    const InversionResult r = invert_function(f, x, kCalibrated, kCalibratedConstant);
    CHECK(std::abs(r.value - f(x.coords())) <= 1e-3);
  }
}

TEST_CASE("rotation equivariance") {
  const HarmonicCoeffs c = HarmonicCoeffs::random(3, 5);
  const auto R = rotation(0.7, 1.1, -0.4);
  const RealSpherePoint x(RVec{0.3, -0.6, 0.5});
  const RealSpherePoint rx(apply(R, x.coords()));
  const auto f = [&](std::span<const double> u) { return c.evaluate(u); };
  const auto f_rot = [&](std::span<const double> u) { return c.evaluate(apply(R, u)); };
  const Complex a = invert_function(f_rot, x, kCalibrated, kCalibratedConstant).value;
  const Complex b = invert_function(f, rx, kCalibrated, kCalibratedConstant).value;
  CHECK(std::abs(a - b) <= 1e-6);
}

TEST_CASE("funk_forward") {
  const RVec e3{0, 0, 1}, e1{1, 0, 0};
  CHECK(funk_forward([](auto) { return 1.0; }, e3, 16) == doctest::Approx(2 * pi));
  CHECK(std::abs(funk_forward([](auto u) { return eval_ylm(1, 0, u); }, RVec{0.3, 0.4, 0.5}, 16)) < 1e-14);
  CHECK(std::abs(funk_forward([](auto u) { return u[2] * u[2]; }, e3, 16)) < 1e-14);
  CHECK(funk_forward([](auto u) { return u[2] * u[2]; }, e1, 16) == doctest::Approx(pi));
  CHECK_THROWS_AS(funk_forward([](auto) { return 1.0; }, e3, 3), InvalidArgument);
}

TEST_CASE("kappa: sampled and ring-factorized sums agree") {
  const RealSpherePoint x(RVec{0.3, -0.2, 0.9});
  const PolarGrid pg(x, {40, 64, Grading::both_poles, 0.01});
  const SphereGrid g = pg.materialize();
  const auto fn = [](std::span<const double> u) { return eval_ylm(2, 1, u) + 0.4 * eval_ylm(1, -1, u); };
  const RVec f = sample(g, fn);
  const RingSums rings = ring_sums(fn, pg);
  for (double delta : {0.0, 0.5, 1.0}) {
    const CycleSpec cycle = gamma_delta_cycle(x, delta, 64);
    REQUIRE(ring_factorizable(pg, x, cycle));
    const Complex a = kappa_cycle_integral(f, g, x, cycle, 0.05);
    const Complex b = kappa_cycle_integral(rings, pg, x, cycle, 0.05);
    CHECK(rel(b, a) <= 1e-11);
    std::vector<NodeDiagnostic> diag;
    const Complex c = kappa_cycle_integral(f, g, x, cycle, 0.05, &diag);
    CHECK(diag.size() == 64);
    CHECK(rel(c, a) <= 1e-11);
  }
  CHECK_FALSE(ring_factorizable(pg, x, gamma_delta_cycle(x, 0.5, 32)));
  CHECK_THROWS_AS(kappa_cycle_integral(rings, pg, x, gamma_delta_cycle(x, 0.5, 32), 0.05), InvalidArgument);
  CHECK_THROWS_AS(kappa_cycle_integral(f, g, x, gamma_delta_cycle(x, 0.5, 64), 0.0), InvalidArgument);
}

TEST_CASE("Radon cycle reproduces f(x) for both parities") {
  // Measured value of the regularized double integral: -16 pi^2 f(x).
  const RealSpherePoint x(RVec{-0.4, 0.2, 0.8});
  const double eps = 2e-3;
  const PolarGrid pg(x, {400, 20000, Grading::both_poles, eps / 4});
  const CycleSpec cycle = gamma_delta_cycle(x, 0.0, pg.m_phi());
  for (auto [l, m] : {std::pair{0, 0}, {1, 0}, {2, -1}, {3, 2}, {4, 1}}) {
    const auto fn = [l = l, m = m](std::span<const double> u) { return eval_ylm(l, m, u); };
    const Complex k = kappa_cycle_integral(ring_sums(fn, pg), pg, x, cycle, eps);
    CHECK(rel(k, -16.0 * pi * pi * fn(x.coords())) <= 1e-2);
  }
}

TEST_CASE("consistency on gamma_1") {
  const RealSpherePoint x(RVec{0.5, 0.5, -0.2});
  for (auto [l, m] : {std::pair{0, 0}, {2, 1}}) {
    const auto fn = [l = l, m = m](std::span<const double> u) { return eval_ylm(l, m, u); };
    const ConsistencyResult r = consistency_gamma1(fn, x);
    CHECK(r.residual <= 1e-2);
    CHECK(rel(r.kappa, -16.0 * pi * pi * fn(x.coords())) <= 1e-2);
  }
}
