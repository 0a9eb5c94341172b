#include "horo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "horo/errors.hpp"
#include "horo/quadrature.hpp"

namespace horo {

namespace {

double max1(double v) { return std::max(1.0, v); }

void require_dim(std::size_t n) {
  if (n < 3) throw InvalidArgument("sphere dimension n must be >= 3, got " + std::to_string(n));
}

// Points of S^{n-2} in x-perp: angles (theta_1..theta_{n-3}, phi) with
// Gauss-Legendre nodes in each theta on [0, pi] and m uniform phi.
struct PerpSample {
  RVec omega;
  std::vector<RVec> domega;  // one per angle
  double param_weight;
};

std::vector<PerpSample> perp_sphere_samples(const Frame& frame, std::size_t m, int orientation) {
  const std::size_t n = frame.base.dim();
  const std::size_t k = n - 1;       // ambient dim of x-perp
  const std::size_t polar = n - 3;   // number of theta angles
  const std::size_t m_polar = std::max<std::size_t>(2, (m + 1) / 2);
  const GaussRule gl = gauss_legendre(m_polar);

  std::vector<std::size_t> counts(polar, m_polar);
  counts.push_back(m);
  std::size_t total = 1;
  for (auto c : counts) total *= c;

  std::vector<PerpSample> out;
  out.reserve(total);
  std::vector<std::size_t> idx(counts.size(), 0);
  RVec angle(counts.size());
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t a = counts.size(); a-- > 0;) {
      idx[a] = rem % counts[a];
      rem /= counts[a];
    }
    double w = 1.0;
    for (std::size_t a = 0; a < polar; ++a) {
      angle[a] = 0.5 * std::numbers::pi * (gl.nodes[idx[a]] + 1.0);
      w *= 0.5 * std::numbers::pi * gl.weights[idx[a]];
    }
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(idx[polar]) / static_cast<double>(m);
    angle[polar] = orientation >= 0 ? phi : -phi;
    w *= 2.0 * std::numbers::pi / static_cast<double>(m);

    // c_i = prod_{j<i} sin a_j * cos a_i (i < k-1), c_{k-1} = prod_{j<k-1} sin a_j.
    const std::size_t na = counts.size();  // == k - 1
    auto coord = [&](std::size_t i, std::size_t diff) {
      double v = 1.0;
      const std::size_t upto = std::min(i, na);
      for (std::size_t j = 0; j < upto; ++j) v *= (j == diff) ? std::cos(angle[j]) : std::sin(angle[j]);
      if (i < na) {
        if (diff == i) v *= -std::sin(angle[i]);
        else if (diff != na + 1 && diff > i) v = 0.0;
        else v *= std::cos(angle[i]);
      }
      return v;
    };
    PerpSample s;
    s.omega.assign(n, 0.0);
    s.domega.assign(na, RVec(n, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
      const double ci = coord(i, na + 1);
      for (std::size_t d = 0; d < n; ++d) s.omega[d] += ci * frame.tangent_basis[i][d];
      for (std::size_t a = 0; a < na; ++a) {
        const double dci = coord(i, a);
        for (std::size_t d = 0; d < n; ++d) s.domega[a][d] += dci * frame.tangent_basis[i][d];
      }
    }
    // phi runs backwards for the reversed orientation.
    if (orientation < 0) {
      for (auto& v : s.domega.back()) v = -v;
    }
    s.param_weight = w;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

RealSpherePoint::RealSpherePoint(RVec coords) : coords_(std::move(coords)) {
  require_dim(coords_.size());
  const double r = norm(coords_);
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("cannot normalize a zero or non-finite vector");
  for (auto& c : coords_) c /= r;
}

ConePoint::ConePoint(RVec xi, RVec eta) : xi_(std::move(xi)), eta_(std::move(eta)) {
  require_dim(xi_.size());
  if (eta_.size() != xi_.size()) throw InvalidArgument("xi and eta must have the same dimension");
  const double dx = dot(xi_, xi_);
  const double de = dot(eta_, eta_);
  if (dx == 0.0 && de == 0.0) throw InvalidArgument("zeta must be nonzero");
  const double scale = max1(dx);
  if (std::abs(dx - de) > kConeTol * scale)
    throw InvalidArgument("cone point requires Delta(xi) = Delta(eta)");
  if (std::abs(dot(xi_, eta_)) > kConeTol * scale)
    throw InvalidArgument("cone point requires xi . eta = 0");
}

ConePoint ConePoint::from_complex(std::span<const Complex> zeta) {
  RVec xi(zeta.size()), eta(zeta.size());
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    xi[k] = zeta[k].real();
    eta[k] = zeta[k].imag();
  }
  return ConePoint(std::move(xi), std::move(eta));
}

ConePoint ConePoint::scaled(Complex lambda) const {
  const CVec z = horo::scaled(zeta(), lambda);
  return from_complex(z);
}

Horosphere::Horosphere(ConePoint zeta, Complex p) : zeta_(std::move(zeta)), p_(p) {
  if (p_ == Complex(0.0)) throw InvalidArgument("degenerate horosphere p = 0 is not modeled");
}

Horosphere Horosphere::canonical() const { return rescaled(1.0 / p_); }

Horosphere Horosphere::rescaled(Complex lambda) const {
  if (lambda == Complex(0.0)) throw InvalidArgument("rescale factor must be nonzero");
  return Horosphere(zeta_.scaled(lambda), lambda * p_);
}

Complex quadratic_form(std::span<const Complex> v) {
  if (v.empty()) throw InvalidArgument("quadratic_form needs at least one entry");
  return dot(v, v);
}

bool is_in_xi_plus(const ConePoint& zeta) {
  const double d = zeta.delta_xi();
  return d > 0.0 && d < 1.0;
}

double horosphere_real_distance(const Horosphere& h, int refine_iters, const SphereGrid& seed_grid) {
  const std::size_t n = h.zeta().dim();
  if (seed_grid.dim() != n) throw InvalidArgument("seed grid dimension does not match the horosphere");
  const auto xi = h.zeta().xi();
  const auto eta = h.zeta().eta();
  const double pr = h.p().real();
  const double pi = h.p().imag();

  auto residual2 = [&](std::span<const double> u) {
    const double a = dot(xi, u) - pr;
    const double b = dot(eta, u) - pi;
    return a * a + b * b;
  };

  std::vector<std::pair<double, std::size_t>> scored(seed_grid.size());
  for (std::size_t i = 0; i < seed_grid.size(); ++i) scored[i] = {residual2(seed_grid.node(i)), i};
  const std::size_t seeds = std::min<std::size_t>(8, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(seeds), scored.end());
  double best = scored.front().first;
  if (refine_iters <= 0) return std::sqrt(best);

  const double scale = std::max({1.0, norm(xi), std::abs(h.p())});
  RVec u(n), pxi(n), peta(n), trial(n);
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto start = seed_grid.node(scored[s].second);
    std::copy(start.begin(), start.end(), u.begin());
    double g = residual2(u);
    double mu = 1e-3;
    for (int it = 0; it < refine_iters && g > 1e-32; ++it) {
      // Rows of the tangent-projected Jacobian of (xi.u - Re p, eta.u - Im p).
      const double ux = dot(xi, u);
      const double ue = dot(eta, u);
      for (std::size_t k = 0; k < n; ++k) {
        pxi[k] = xi[k] - ux * u[k];
        peta[k] = eta[k] - ue * u[k];
      }
      const double r0 = ux - pr;
      const double r1 = ue - pi;
      const double a00 = dot(pxi, pxi), a01 = dot(pxi, peta), a11 = dot(peta, peta);
      double grad2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double gk = r0 * pxi[k] + r1 * peta[k];
        grad2 += gk * gk;
      }
      if (std::sqrt(grad2) <= 1e-8 * scale * 1e-8 || a00 + a11 == 0.0) break;
      bool accepted = false;
      for (int tries = 0; tries < 40 && !accepted; ++tries) {
        const double damp = mu * (a00 + a11);
        const double m00 = a00 + damp, m11 = a11 + damp, m01 = a01;
        const double det = m00 * m11 - m01 * m01;
        if (det == 0.0) {
          mu *= 4.0;
          continue;
        }
        const double y0 = (m11 * r0 - m01 * r1) / det;
        const double y1 = (m00 * r1 - m01 * r0) / det;
        for (std::size_t k = 0; k < n; ++k) trial[k] = u[k] - (y0 * pxi[k] + y1 * peta[k]);
        const double len = norm(trial);
        for (auto& t : trial) t /= len;
        const double gt = residual2(trial);
        if (gt < g) {
          u.swap(trial);
          g = gt;
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
        } else {
          mu *= 4.0;
        }
      }
      if (!accepted) break;
    }
    best = std::min(best, g);
  }
  return std::sqrt(best);
}

Frame build_frame(const RealSpherePoint& x) {
  const std::size_t n = x.dim();
  std::vector<std::size_t> axes(n);
  std::iota(axes.begin(), axes.end(), 0);
  std::stable_sort(axes.begin(), axes.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(x[a]) < std::abs(x[b]); });

  std::vector<RVec> basis{RVec(x.coords().begin(), x.coords().end())};
  for (std::size_t axis : axes) {
    if (basis.size() == n) break;
    RVec v(n, 0.0);
    v[axis] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double c = dot(b, v);
        for (std::size_t k = 0; k < n; ++k) v[k] -= c * b[k];
      }
    }
    const double len = norm(v);
    if (len < 1e-8) continue;
    for (auto& c : v) c /= len;
    basis.push_back(std::move(v));
  }

  std::vector<CVec> cols;
  for (const auto& b : basis) cols.push_back(complexify(b));
  if (det_bracket(cols).real() < 0.0) {
    for (auto& c : basis.back()) c = -c;
  }
  basis.erase(basis.begin());
  return Frame{x, std::move(basis), 1};
}

CycleSpec gamma1_cycle(const RealSpherePoint& x, std::size_t m, int orientation) {
  if (m < 4) throw InvalidArgument("cycle resolution m must be >= 4");
  if (orientation != 1 && orientation != -1) throw InvalidArgument("orientation must be +1 or -1");
  const Frame frame = build_frame(x);
  const std::size_t n = x.dim();
  const Complex I(0.0, 1.0);
  const CVec xc = complexify(x.coords());

  CycleSpec spec{CycleKind::horospherical, 1.0, x, {}, orientation, m};
  for (auto& s : perp_sphere_samples(frame, m, orientation)) {
    CycleNode node;
    node.zeta.resize(n);
    for (std::size_t k = 0; k < n; ++k) node.zeta[k] = Complex(x[k], s.omega[k]);
    node.p = 1.0;
    std::vector<CVec> deta;
    for (const auto& d : s.domega) {
      deta.push_back(complexify(d));
      node.dzeta.push_back(scaled(deta.back(), I));
    }
    node.param_weight = s.param_weight;
    node.weight = bracket_form_value(xc, complexify(s.omega), deta).real() * s.param_weight;
    spec.nodes.push_back(std::move(node));
  }
  return spec;
}

CycleSpec gamma_delta_cycle(const RealSpherePoint& x, double delta, std::size_t m) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw InvalidArgument("delta must lie in [0, 1]");
  if (m < 4) throw InvalidArgument("cycle resolution m must be >= 4");
  const Frame frame = build_frame(x);
  const std::size_t n = x.dim();
  const CVec xc = complexify(x.coords());

  CycleSpec spec{delta == 0.0 ? CycleKind::radon : CycleKind::delta, delta, x, {}, 1, m};
  for (auto& s : perp_sphere_samples(frame, m, 1)) {
    CycleNode node;
    node.zeta.resize(n);
    // |omega| = 1, so the i delta sqrt(Delta(omega)) component is i delta x.
    for (std::size_t k = 0; k < n; ++k) node.zeta[k] = Complex(s.omega[k], delta * x[k]);
    node.p = Complex(0.0, delta);
    for (const auto& d : s.domega) node.dzeta.push_back(complexify(d));
    node.param_weight = s.param_weight;
    node.weight = bracket_form_value(xc, node.zeta, node.dzeta).real() * s.param_weight;
    spec.nodes.push_back(std::move(node));
  }
  return spec;
}

Complex det_bracket(const std::vector<CVec>& columns) {
  const std::size_t n = columns.size();
  for (const auto& c : columns) {
    if (c.size() != n) throw InvalidArgument("det_bracket needs n columns of length n");
  }
  if (n == 0) throw InvalidArgument("det_bracket needs at least one column");
  // a[r][c] = columns[c][r]
  std::vector<CVec> a(n, CVec(n));
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t r = 0; r < n; ++r) a[r][c] = columns[c][r];
  Complex det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    if (a[piv][k] == Complex(0.0)) return 0.0;
    if (piv != k) {
      std::swap(a[piv], a[k]);
      det = -det;
    }
    det *= a[k][k];
    for (std::size_t r = k + 1; r < n; ++r) {
      const Complex f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
    }
  }
  return det;
}

Complex bracket_form_value(std::span<const Complex> a, std::span<const Complex> zeta,
                           const std::vector<CVec>& tangents) {
  const std::size_t n = a.size();
  if (zeta.size() != n || tangents.size() + 2 != n)
    throw InvalidArgument("bracket_form_value needs a, zeta and n-2 tangents in C^n");
  std::vector<CVec> cols{CVec(a.begin(), a.end()), CVec(zeta.begin(), zeta.end())};
  for (const auto& t : tangents) cols.push_back(t);
  return factorial(static_cast<int>(n) - 2) * det_bracket(cols);
}

Complex residue_form_ratio(const ConePoint& zeta, const std::vector<CVec>& tangents,
                           std::span<const Complex> lambda) {
  const CVec z = zeta.zeta();
  const double zn = std::sqrt(2.0 * zeta.delta_xi());
  for (const auto& t : tangents) {
    double tn = 0.0;
    for (const auto& c : t) tn += std::norm(c);
    if (std::abs(dot(z, t)) > kConeTol * max1(zn * std::sqrt(tn)))
      throw InvalidArgument("tangent vectors must satisfy zeta . v = 0");
  }
  const Complex lz = dot(lambda, z);
  if (std::abs(lz) <= 1e-12) throw PoleError("lambda . zeta vanishes");
  return bracket_form_value(lambda, z, tangents) / lz;
}

}  // namespace horo
