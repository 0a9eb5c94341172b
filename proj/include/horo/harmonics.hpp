#pragma once

// Real spherical harmonics on S^2, zonal Gegenbauer harmonics on S^{n-1},
// Maxwell polynomials and the closed-form horospherical transform of
// band-limited functions.
//
// Basis convention: Y_{l,0} = N_l^0 P_l(cos theta),
// Y_{l,m} = sqrt(2) N_l^m P_l^m(cos theta) cos(m phi) for m > 0 and
// sqrt(2) N_l^{|m|} P_l^{|m|}(cos theta) sin(|m| phi) for m < 0, orthonormal
// under dsigma. No Condon-Shortley phase: P_l^m >= 0 near the north pole.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "horo/geometry.hpp"
#include "horo/linalg.hpp"
#include "horo/quadrature.hpp"

namespace horo {

double legendre_P(int l, double t);

/// C_l^{(alpha)}(t), alpha > 0.
double gegenbauer(int l, double alpha, double t);

/// u must be a unit vector in R^3.
double eval_ylm(int l, int m, std::span<const double> u);
inline double eval_ylm(int l, int m, const RealSpherePoint& x) { return eval_ylm(l, m, x.coords()); }

/// Zonal harmonic C_l^{((n-2)/2)}(axis . u) on S^{n-1}.
double eval_zonal(int l, std::span<const double> axis, std::span<const double> u);

/// |(1/2pi) sum_t (cos theta + i sin theta cos t)^l dt - P_l(cos theta)| with
/// an m-point trapezoid rule.
double laplace_integral_residual(int l, double theta, int m);

/// f = sum c_{lm} Y_{lm} on S^2, l <= band_limit.
class HarmonicCoeffs {
 public:
  explicit HarmonicCoeffs(int band_limit);

  int band_limit() const { return band_limit_; }
  double get(int l, int m) const;
  void set(int l, int m, double c);

  double evaluate(std::span<const double> u) const;
  /// Only the degree-l terms.
  HarmonicCoeffs degree_slice(int l) const;
  bool degree_is_zero(int l) const;

  static HarmonicCoeffs single(int l, int m, double c = 1.0);
  /// Coefficients uniform in [-1, 1], reproducible from the seed.
  static HarmonicCoeffs random(int band_limit, std::uint64_t seed);

  std::string to_json() const;
  /// JSON array of {"l", "m", "c"} records; rejects |m| > l, l < 0 and
  /// duplicate (l, m).
  static HarmonicCoeffs from_json(const std::string& text);

 private:
  static std::size_t index(int l, int m) { return static_cast<std::size_t>(l * l + l + m); }
  int band_limit_;
  RVec c_;
};

/// H_l(zeta) = int (zeta . u)^l f_l(u) dsigma(u) for a degree-l harmonic f_l,
/// evaluated by a quadrature that is exact for this degree-2l integrand.
class MaxwellPolynomial {
 public:
  /// f_values: f_l sampled on grid. Throws InvalidArgument when the grid is
  /// not exact through degree 2l.
  MaxwellPolynomial(int degree, const SphereGrid& grid, std::span<const double> f_values);

  int degree() const { return degree_; }
  Complex operator()(std::span<const Complex> zeta) const;

 private:
  int degree_;
  std::size_t n_;
  RVec nodes_;
  RVec weighted_f_;
};

MaxwellPolynomial maxwell_polynomial(const HarmonicCoeffs& degree_slice, int l, const SphereGrid& grid);

struct OracleValue {
  Complex value;
  /// |p| <= sup_u |zeta . u|: the geometric series does not converge there
  /// and the value rests on analytic continuation.
  bool series_warning;
};

/// Closed form  hat f(zeta, p) = -(n-1)! sum_l p^{-l-1} H_l(zeta)  and its
/// p-derivatives.
class TransformOracle {
 public:
  TransformOracle(const HarmonicCoeffs& coeffs, const SphereGrid& grid);
  /// One Maxwell polynomial per nonzero degree component (any n).
  TransformOracle(std::size_t n, std::vector<MaxwellPolynomial> components);

  OracleValue value(const ConePoint& zeta, Complex p) const { return derivative(zeta, p, 0); }
  OracleValue derivative(const ConePoint& zeta, Complex p, int k) const;

  /// Same formula without the cone check (for points where it is only used
  /// as a polynomial identity).
  Complex derivative_unchecked(std::span<const Complex> zeta, Complex p, int k) const;

 private:
  std::size_t n_;
  std::vector<MaxwellPolynomial> components_;
};

OracleValue oracle_transform(const HarmonicCoeffs& coeffs, const ConePoint& zeta, Complex p,
                             const SphereGrid& grid);

/// Plain DFT: c_k = (1/N) sum_j v_j exp(-2 pi i j k / N).
CVec discrete_fourier(std::span<const Complex> samples);

}  // namespace horo
