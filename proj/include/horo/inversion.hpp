#pragma once

// Inversion of the horospherical transform: the operator L_p, cycle integrals
// over gamma_1(x), the kappa double form over the homotopy gamma_delta, the
// Radon-cycle identity and calibration of the normalization.

#include <complex>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "horo/geometry.hpp"
#include "horo/harmonics.hpp"
#include "horo/linalg.hpp"
#include "horo/quadrature.hpp"
#include "horo/transform.hpp"

namespace horo {

/// L_p = (a / p) d^{n-3}/dp^{n-3} + b d^{n-2}/dp^{n-2}.
struct LpCoefficients {
  double a;
  double b;

  /// The stated form of the inversion operator: (n - 2, -2).
  static LpCoefficients nominal(std::size_t n) { return {static_cast<double>(n) - 2.0, -2.0}; }
  /// The combination produced by expanding zeta.(u + x) = zeta.(u - x) + 2 zeta.x
  /// under the kernel integral: (n - 2, +2), with prefactor 1/(n-2)!.
  static LpCoefficients kernel(std::size_t n) { return {static_cast<double>(n) - 2.0, 2.0}; }
};

/// 1/(n-2)!, the factor relating the kernel integral to L_p with kernel
/// coefficients.
double kernel_prefactor(std::size_t n);

/// (n - 1) / (2 (-2 pi)^{n-1}).
double nominal_constant(std::size_t n);

Complex apply_Lp(std::span<const double> f_values, const SphereGrid& grid, std::span<const Complex> zeta, Complex p,
                 const LpCoefficients& coeffs);
/// Same operator applied to the closed-form transform.
Complex apply_Lp(const TransformOracle& oracle, std::size_t n, std::span<const Complex> zeta, Complex p,
                 const LpCoefficients& coeffs);

struct NodeDiagnostic {
  std::size_t node;
  CVec zeta;
  double weight;
  Complex value;
  double error_estimate;
  bool converged;
};

void write_diagnostics_csv(std::ostream& out, const std::vector<NodeDiagnostic>& diagnostics);

struct InversionResult {
  Complex value;
  double error_estimate;
  bool converged;
};

/// constant * sum_j w_j L_p hat f(zeta_j, p)|_{p -> 1}, boundary values by
/// extrapolation. grid should resolve the kernel near x (see
/// boundary_polar_grid).
InversionResult invert_at_point(std::span<const double> f_values, const SphereGrid& grid, const RealSpherePoint& x,
                                const CycleSpec& cycle, const LpCoefficients& coeffs, Complex constant,
                                const BoundarySettings& settings = {},
                                std::vector<NodeDiagnostic>* diagnostics = nullptr);

struct PipelineSetup {
  PolarResolution grid{240, 1024, Grading::pole, 0.0};  // scale 0: derived from the eps schedule
  std::size_t cycle_nodes = 32;
  BoundarySettings boundary{};
};

/// Polar grid about x graded toward x on the scale of the smallest eps.
PolarGrid boundary_polar_grid(const RealSpherePoint& x, const PipelineSetup& setup);

/// Full pipeline for f at x: grid about x, gamma_1(x), L_p boundary values.
InversionResult invert_function(const SphereFunction& f, const RealSpherePoint& x, const LpCoefficients& coeffs,
                                Complex constant, const PipelineSetup& setup = {});

/// Contributions of the two L_p terms to the round trip of Y_{l,0} with
/// constant 1: ratio(a, b) = a * first + b * second.
struct RoundtripComponents {
  Complex first;
  Complex second;
  bool converged;
  double error_estimate;
};

RoundtripComponents roundtrip_components(int l, const RealSpherePoint& x, const PipelineSetup& setup = {});

/// invert(Y_{l,0})(x) / Y_{l,0}(x) with constant 1. Requires |Y_{l,0}(x)| >= 0.1.
Complex roundtrip_ratio(int l, const RealSpherePoint& x, const LpCoefficients& coeffs,
                        const PipelineSetup& setup = {});

/// Per-degree ratio predicted by the closed-form chain (Laplace integral of
/// (zeta.u)^l over gamma_1, then Funk-Hecke) for n = 3:
///   constant * orientation * 16 pi^2 (b (l + 1) - a) / (2l + 1).
Complex predicted_ratio(int l, const LpCoefficients& coeffs, Complex constant, int orientation = 1);

struct CalibrationReport {
  std::size_t n = 3;
  LpCoefficients coefficients{};
  Complex overall_constant{};
  int orientation = 1;
  /// After calibration (constant applied): ideally all 1.
  std::map<int, Complex> per_degree_ratios;
  /// Nominal coefficients and constant: measured and predicted.
  std::map<int, Complex> nominal_ratios;
  std::map<int, Complex> nominal_ratios_predicted;
  double nominal_prediction_max_rel_error = 0.0;
  double spread_before = 0.0;  // nominal preset, max |r_l / r_0 - 1|
  double spread_after = 0.0;
  Complex nominal_constant{};
  /// overall_constant / nominal_constant.
  Complex constant_discrepancy{};
  bool success = false;
  bool converged = true;
  std::string deviation_notes;

  std::string to_json() const;
};

struct CalibrationSetup {
  RealSpherePoint x{RVec{0.1, 0.05, 1.0}};
  PipelineSetup pipeline{};
  int l_max = 8;
  double b_fixed = -2.0;
  double tolerance = 1e-5;
};

/// Holds b fixed, solves for a from degrees 0 and 1, verifies the rest.
CalibrationReport calibrate(const CalibrationSetup& setup = {});

/// Regularized integral of kappa_x[f] over S x cycle: the u-integral with
/// measure (n-1)! dsigma, denominator (zeta.(u - x) - i eps)^{n-1}, and
/// [u + x, zeta, d zeta^{n-2}] on the cycle tangents.
Complex kappa_cycle_integral(std::span<const double> f_values, const SphereGrid& grid, const RealSpherePoint& x,
                             const CycleSpec& cycle, double eps,
                             std::vector<NodeDiagnostic>* diagnostics = nullptr);

/// f summed over each ring of a polar grid (weights included).
struct RingSums {
  RVec values;
};
RingSums ring_sums(const SphereFunction& f, const PolarGrid& grid);

/// Same double sum on a polar grid about x. When the cycle's azimuthal
/// lattice coincides with the grid's, the cycle sum is the same on every
/// node of a ring and is evaluated once per ring.
Complex kappa_cycle_integral(const RingSums& f_rings, const PolarGrid& grid, const RealSpherePoint& x,
                             const CycleSpec& cycle, double eps);
bool ring_factorizable(const PolarGrid& grid, const RealSpherePoint& x, const CycleSpec& cycle);

/// 2 (2 pi i)^{n-1} / (n-1)!, the value claimed for the Radon cycle.
Complex radon_cycle_constant(std::size_t n);

/// Integral of f over the great circle xi . u = 0 (arc length, total 2 pi).
double funk_forward(const SphereFunction& f, std::span<const double> xi, std::size_t m);

struct ConsistencyResult {
  Complex kappa;     // double integral over gamma_1 (as gamma_delta at delta = 1)
  Complex factored;  // i^{n-1} sum_j w_j prefactor L_p hat f(x + i eta_j, 1 + eps)
  double residual;
};

struct ConsistencySetup {
  double eps = 1e-3;
  PolarResolution kappa_grid{400, 4096, Grading::both_poles, 2.5e-4};
  PolarResolution factored_grid{240, 1024, Grading::pole, 2.5e-4};
  std::size_t factored_cycle_nodes = 32;
  LpCoefficients coeffs = LpCoefficients::kernel(3);
};

ConsistencyResult consistency_gamma1(const SphereFunction& f, const RealSpherePoint& x,
                                     const ConsistencySetup& setup = {});

}  // namespace horo
