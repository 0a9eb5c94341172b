#include "horo/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "horo/errors.hpp"
#include "horo/inversion.hpp"
#include "horo/parallel.hpp"

namespace horo {

namespace {

void check_inputs(std::span<const double> f_values, const SphereGrid& grid, std::span<const Complex> zeta) {
  if (f_values.size() != grid.size()) throw InvalidArgument("f sample count does not match the grid");
  if (zeta.size() != grid.dim()) throw InvalidArgument("zeta dimension does not match the grid");
}

// Smallest |zeta . u - p| over the grid, lowest index on ties.
void refuse_if_singular(const SphereGrid& grid, std::span<const Complex> zeta, Complex p) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = std::abs(dot(zeta, grid.node(i)) - p);
    if (d < best) {
      best = d;
      arg = i;
    }
  }
  if (best < kSingularThreshold) {
    std::ostringstream msg;
    msg << "Cauchy kernel is near-singular at grid node " << arg << " (|zeta.u - p| = " << best
        << "); use boundary_value with an eps schedule";
    throw NearSingularError(msg.str(), arg, best);
  }
}

}  // namespace

CVec forward_derivatives(std::span<const double> f_values, const SphereGrid& grid, std::span<const Complex> zeta,
                         Complex p, int k_max) {
  check_inputs(f_values, grid, zeta);
  if (k_max < 0) throw InvalidArgument("derivative order must be >= 0");
  refuse_if_singular(grid, zeta, p);
  const double bracket = factorial(static_cast<int>(grid.dim()) - 1);
  CVec out(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    const Complex s = chunked_sum(grid.size(), [&](std::size_t i) {
      const Complex inv = 1.0 / (dot(zeta, grid.node(i)) - p);
      return grid.weight(i) * f_values[i] * ipow(inv, k + 1);
    });
    out[static_cast<std::size_t>(k)] = factorial(k) * bracket * s;
  }
  return out;
}

Complex forward_derivative(std::span<const double> f_values, const SphereGrid& grid, std::span<const Complex> zeta,
                           Complex p, int k) {
  check_inputs(f_values, grid, zeta);
  if (k < 0) throw InvalidArgument("derivative order must be >= 0");
  refuse_if_singular(grid, zeta, p);
  const double bracket = factorial(static_cast<int>(grid.dim()) - 1);
  const Complex s = chunked_sum(grid.size(), [&](std::size_t i) {
    const Complex inv = 1.0 / (dot(zeta, grid.node(i)) - p);
    return grid.weight(i) * f_values[i] * ipow(inv, k + 1);
  });
  return factorial(k) * bracket * s;
}

Complex forward(std::span<const double> f_values, const SphereGrid& grid, std::span<const Complex> zeta, Complex p) {
  return forward_derivative(f_values, grid, zeta, p, 0);
}

Complex forward(const HarmonicCoeffs& f, const SphereGrid& grid, std::span<const Complex> zeta, Complex p) {
  const RVec values = sample(grid, [&](std::span<const double> u) { return f.evaluate(u); });
  return forward(values, grid, zeta, p);
}

RVec default_eps_schedule() {
  RVec eps;
  for (int j = 0; j <= 5; ++j) eps.push_back(0.02 * std::ldexp(1.0, -j));
  return eps;
}

RichardsonResult richardson_to_zero(std::span<const double> eps, std::span<const Complex> values, int order) {
  const std::size_t count = eps.size();
  if (count == 0 || values.size() != count) throw InvalidArgument("richardson needs matching non-empty samples");
  for (std::size_t j = 0; j < count; ++j) {
    if (!(eps[j] > 0.0)) throw InvalidArgument("eps schedule must be positive");
    if (j > 0 && !(eps[j] < eps[j - 1])) throw InvalidArgument("eps schedule must be strictly decreasing");
  }
  const std::size_t used = order < 0 ? count : std::min<std::size_t>(count, static_cast<std::size_t>(order) + 1);
  const std::size_t first = count - used;

  auto neville_at_zero = [&](std::size_t from) {
    CVec t(values.begin() + static_cast<std::ptrdiff_t>(from), values.end());
    const std::size_t m = t.size();
    for (std::size_t level = 1; level < m; ++level) {
      for (std::size_t i = m - 1; i >= level; --i) {
        const double e_hi = eps[from + i - level], e_lo = eps[from + i];
        t[i] = (e_hi * t[i] - e_lo * t[i - 1]) / (e_hi - e_lo);
        if (i == level) break;
      }
    }
    return t[m - 1];
  };

  RichardsonResult r;
  r.value = neville_at_zero(first);
  if (used >= 2) {
    const Complex coarser = used >= 3 ? neville_at_zero(first + 1) : values[count - 1];
    r.error_estimate = std::abs(r.value - coarser);
  } else {
    r.error_estimate = count >= 2 ? std::abs(values[count - 1] - values[count - 2]) : 0.0;
  }
  r.converged = true;
  for (std::size_t j = 2; j < count; ++j) {
    if (std::abs(values[j] - values[j - 1]) > std::abs(values[j - 1] - values[j - 2])) r.converged = false;
  }
  return r;
}

std::vector<BoundaryValue> boundary_values(std::span<const double> f_values, const SphereGrid& grid,
                                           const ConePoint& zeta, int k_max, const BoundarySettings& settings) {
  const double dx = zeta.delta_xi();
  if (std::abs(dx - 1.0) > kConeTol)
    throw InvalidArgument("boundary values need zeta = x + i eta with Delta(xi) = Delta(eta) = 1");
  if (settings.eps_schedule.empty()) throw InvalidArgument("eps schedule is empty");
  const CVec z = zeta.zeta();
  const std::size_t orders = static_cast<std::size_t>(k_max) + 1;
  std::vector<CVec> per_order(orders, CVec(settings.eps_schedule.size()));
  for (std::size_t j = 0; j < settings.eps_schedule.size(); ++j) {
    const double e = settings.eps_schedule[j];
    const Complex p = settings.shift == Shift::real ? Complex(1.0 + e, 0.0) : Complex(1.0, e);
    const CVec d = forward_derivatives(f_values, grid, z, p, k_max);
    for (std::size_t k = 0; k < orders; ++k) per_order[k][j] = d[k];
  }
  std::vector<BoundaryValue> out;
  for (std::size_t k = 0; k < orders; ++k) {
    const auto r = richardson_to_zero(settings.eps_schedule, per_order[k], settings.richardson_order);
    out.push_back({r.value, r.error_estimate, r.converged, std::move(per_order[k])});
  }
  return out;
}

BoundaryValue boundary_value(std::span<const double> f_values, const SphereGrid& grid, const ConePoint& zeta, int k,
                             const BoundarySettings& settings) {
  if (k < 0) throw InvalidArgument("derivative order must be >= 0");
  return boundary_values(f_values, grid, zeta, k, settings).back();
}

KernelIdentity kernel_identity(std::span<const double> f_values, const SphereGrid& grid, const ConePoint& zeta,
                               const RealSpherePoint& x, double eps, const LpCoefficients& coeffs, double prefactor,
                               Shift shift) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  const CVec z = zeta.zeta();
  check_inputs(f_values, grid, z);
  const std::size_t n = grid.dim();
  const Complex q = dot(z, x.coords());
  if (std::abs(q) <= 1e-12) throw PoleError("zeta . x vanishes");
  const Complex s = shift == Shift::imaginary ? Complex(0.0, eps) : Complex(eps, 0.0);
  const Complex p = q + s;
  refuse_if_singular(grid, z, p);

  const double bracket = factorial(static_cast<int>(n) - 1);
  const int power = static_cast<int>(n) - 1;
  const Complex integral = chunked_sum(grid.size(), [&](std::size_t i) {
    const Complex zu = dot(z, grid.node(i));
    return grid.weight(i) * f_values[i] * (zu + q) * ipow(1.0 / (zu - p), power);
  });
  KernelIdentity out;
  out.lhs = bracket * integral / q;
  out.rhs = prefactor * apply_Lp(f_values, grid, z, p, coeffs);
  out.residual = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
  return out;
}

PolarGrid kernel_identity_grid(const ConePoint& zeta, const RealSpherePoint& x, double eps, std::size_t rings) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("eps must lie in (0, 1)");
  if (x.dim() != 3 || zeta.dim() != 3) throw InvalidArgument("kernel_identity_grid is defined on S^2");
  for (std::size_t k = 0; k < 3; ++k) {
    if (std::abs(zeta.xi()[k] - x[k]) > kConeTol) throw InvalidArgument("zeta must have real part x");
  }
  RVec pole(3);
  for (std::size_t k = 0; k < 3; ++k) pole[k] = std::sqrt(1.0 - eps * eps) * x[k] + eps * zeta.eta()[k];
  const auto m_phi = static_cast<std::size_t>(std::ceil(40.0 / eps));
  return PolarGrid(RealSpherePoint(pole), {rings, m_phi, Grading::pole, 0.25 * eps * eps});
}

double kernel_identity_residual(std::span<const double> f_values, const SphereGrid& grid, const ConePoint& zeta,
                                const RealSpherePoint& x, double eps, const LpCoefficients& coeffs,
                                double prefactor, Shift shift) {
  return kernel_identity(f_values, grid, zeta, x, eps, coeffs, prefactor, shift).residual;
}

}  // namespace horo
