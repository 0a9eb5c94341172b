#pragma once

// Real sphere S^{n-1}, its complexification, the isotropic cone and the
// horospheres zeta . z = p cut out of it.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "horo/linalg.hpp"

namespace horo {

class SphereGrid;

inline constexpr double kUnitTol = 1e-12;
inline constexpr double kConeTol = 1e-10;

/// Unit vector in R^n, n >= 3. The constructor normalizes its input.
class RealSpherePoint {
 public:
  explicit RealSpherePoint(RVec coords);

  std::size_t dim() const { return coords_.size(); }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t k) const { return coords_[k]; }

 private:
  RVec coords_;
};

/// zeta = xi + i eta with Delta(zeta) = 0, i.e. |xi| = |eta| and xi . eta = 0.
class ConePoint {
 public:
  /// Throws InvalidArgument when the cone constraints fail at kConeTol.
  ConePoint(RVec xi, RVec eta);
  static ConePoint from_complex(std::span<const Complex> zeta);

  std::size_t dim() const { return xi_.size(); }
  std::span<const double> xi() const { return xi_; }
  std::span<const double> eta() const { return eta_; }
  CVec zeta() const { return complexify(xi_, eta_); }
  /// Delta(xi) = Delta(eta).
  double delta_xi() const { return dot(xi_, xi_); }

  ConePoint scaled(Complex lambda) const;

 private:
  RVec xi_;
  RVec eta_;
};

/// Section zeta . z = p of the complex sphere; (lambda zeta, lambda p) names
/// the same horosphere.
class Horosphere {
 public:
  Horosphere(ConePoint zeta, Complex p);

  const ConePoint& zeta() const { return zeta_; }
  Complex p() const { return p_; }
  /// Representative with p = 1.
  Horosphere canonical() const;
  Horosphere rescaled(Complex lambda) const;

 private:
  ConePoint zeta_;
  Complex p_;
};

/// Orthonormal completion of x. orientation is det[x, e_1, ..., e_{n-1}].
struct Frame {
  RealSpherePoint base;
  std::vector<RVec> tangent_basis;
  int orientation;
};

enum class CycleKind { radon, delta, horospherical };

struct CycleNode {
  CVec zeta;
  Complex p;
  /// d zeta along each cycle parameter (n - 2 vectors).
  std::vector<CVec> dzeta;
  /// Parameter-space quadrature weight.
  double param_weight;
  /// param_weight times the bracket density of the cycle measure.
  double weight;
};

struct CycleSpec {
  CycleKind kind;
  double delta;
  RealSpherePoint base;
  std::vector<CycleNode> nodes;
  int orientation;
  /// Number of uniform azimuthal samples per S^{n-2} slice (the cycle
  /// resolution m); for n = 3 this equals nodes.size().
  std::size_t azimuthal_count;
};

/// Sum of v_k^2 (bilinear form).
Complex quadratic_form(std::span<const Complex> v);

bool is_in_xi_plus(const ConePoint& zeta);

/// Upper bound on min_{u in S} |zeta . u - p|: grid scan followed by
/// Levenberg-Marquardt refinement of the best seeds. refine_iters = 0 returns
/// the coarse grid minimum.
double horosphere_real_distance(const Horosphere& h, int refine_iters, const SphereGrid& seed_grid);

Frame build_frame(const RealSpherePoint& x);

/// Boundary fibre {x + i eta : |eta| = 1, x . eta = 0}, orientation +1 or -1.
CycleSpec gamma1_cycle(const RealSpherePoint& x, std::size_t m, int orientation = 1);

/// Homotopy from the Radon cycle (delta = 0) to the horospherical one
/// (delta = 1, up to the rescale by i). Nodes leave the cone for 0 < delta < 1.
CycleSpec gamma_delta_cycle(const RealSpherePoint& x, double delta, std::size_t m);

Complex det_bracket(const std::vector<CVec>& columns);

/// (n-2)! det[a, zeta, v_1, ..., v_{n-2}].
Complex bracket_form_value(std::span<const Complex> a, std::span<const Complex> zeta,
                           const std::vector<CVec>& tangents);

/// [lambda, zeta, d zeta^{n-2}] / (lambda . zeta); independent of lambda on
/// the cone.
Complex residue_form_ratio(const ConePoint& zeta, const std::vector<CVec>& tangents,
                           std::span<const Complex> lambda);

double factorial(int k);

}  // namespace horo
