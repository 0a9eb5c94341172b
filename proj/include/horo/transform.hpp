#pragma once

// Numeric horospherical transform
//   hat f(zeta, p) = int_S f(x) / (zeta . x - p) (n-1)! dsigma(x)
// with p-derivatives taken under the integral sign.

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "horo/geometry.hpp"
#include "horo/harmonics.hpp"
#include "horo/linalg.hpp"
#include "horo/quadrature.hpp"

namespace horo {

struct LpCoefficients;

/// Quadrature refuses when some node has |zeta . u - p| below this.
inline constexpr double kSingularThreshold = 1e-8;

using SphereFunction = std::function<double(std::span<const double>)>;

struct TransformSample {
  CVec zeta;
  Complex p;
  int k;
  double epsilon;
  Complex value;
  double error_estimate;
  std::string grid_id;
};

/// f_values are f sampled on grid. zeta may be any vector in C^n; the cone
/// is not required here (off-cone points occur along the cycle homotopy).
Complex forward(std::span<const double> f_values, const SphereGrid& grid, std::span<const Complex> zeta, Complex p);
Complex forward(const HarmonicCoeffs& f, const SphereGrid& grid, std::span<const Complex> zeta, Complex p);

/// k! int f(x) / (zeta . x - p)^{k+1} (n-1)! dsigma.
Complex forward_derivative(std::span<const double> f_values, const SphereGrid& grid, std::span<const Complex> zeta,
                           Complex p, int k);

/// All derivative orders 0..k_max from one pass over the grid.
CVec forward_derivatives(std::span<const double> f_values, const SphereGrid& grid, std::span<const Complex> zeta,
                         Complex p, int k_max);

enum class Shift { real, imaginary };

/// 0.02 * 2^{-j}, j = 0..5.
RVec default_eps_schedule();

struct RichardsonResult {
  Complex value;
  double error_estimate;
  bool converged;
};

/// Polynomial extrapolation to eps -> 0 (Neville) through the last order + 1
/// samples; order < 0 uses every sample. error_estimate is the change from
/// dropping the largest-eps sample; converged requires the successive sample
/// differences to shrink monotonically.
RichardsonResult richardson_to_zero(std::span<const double> eps, std::span<const Complex> values, int order = -1);

struct BoundaryValue {
  Complex value;
  double error_estimate;
  bool converged;
  CVec samples;  // one per eps
};

struct BoundarySettings {
  RVec eps_schedule = default_eps_schedule();
  /// real: p = 1 + eps; imaginary: p = 1 + i eps.
  Shift shift = Shift::real;
  int richardson_order = -1;
};

/// Limit of d^k/dp^k hat f(zeta, p) as p -> 1 from the regular side, for
/// zeta = x + i eta on the boundary of Xi_+ (|xi| = |eta| = 1).
BoundaryValue boundary_value(std::span<const double> f_values, const SphereGrid& grid, const ConePoint& zeta, int k,
                             const BoundarySettings& settings = {});

/// Same extrapolation for every order 0..k_max at once.
std::vector<BoundaryValue> boundary_values(std::span<const double> f_values, const SphereGrid& grid,
                                           const ConePoint& zeta, int k_max, const BoundarySettings& settings = {});

struct KernelIdentity {
  Complex lhs;
  Complex rhs;
  double residual;  // |lhs - rhs| / |rhs|
};

/// Compares
///   (1 / zeta.x) int f(u) zeta.(u + x) / (zeta.(u - x) - s)^{n-1} (n-1)! dsigma
/// with prefactor * L_p hat f(zeta, zeta.x + s), where s = i eps (imaginary
/// shift) or eps (real shift).
KernelIdentity kernel_identity(std::span<const double> f_values, const SphereGrid& grid, const ConePoint& zeta,
                               const RealSpherePoint& x, double eps, const LpCoefficients& coeffs, double prefactor,
                               Shift shift = Shift::imaginary);

/// Polar grid for the kernel identity at a boundary zeta = x + i eta: graded
/// about sqrt(1 - eps^2) x + eps eta, where |zeta . u - 1 - i eps| is
/// smallest (about eps^2 / 2), with about 40 / eps azimuthal nodes.
PolarGrid kernel_identity_grid(const ConePoint& zeta, const RealSpherePoint& x, double eps, std::size_t rings = 200);

double kernel_identity_residual(std::span<const double> f_values, const SphereGrid& grid, const ConePoint& zeta,
                                const RealSpherePoint& x, double eps, const LpCoefficients& coeffs,
                                double prefactor, Shift shift = Shift::imaginary);

}  // namespace horo
