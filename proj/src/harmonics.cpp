#include "horo/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "horo/errors.hpp"
#include "horo/parallel.hpp"
#include "json.hpp"

namespace horo {

namespace {
constexpr double kPi = std::numbers::pi;

// Orthonormal associated Legendre function without the Condon-Shortley phase:
// int_{-1}^{1} (Pbar_l^m)^2 dt * 2 pi = 1.
double normalized_assoc_legendre(int l, int m, double t) {
  const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int k = 1; k <= m; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  if (l == m) return pmm;
  double pm1 = std::sqrt(2.0 * m + 3.0) * t * pmm;
  if (l == m + 1) return pm1;
  double prev = pmm, cur = pm1;
  for (int k = m + 2; k <= l; ++k) {
    const double kk = k, mm = m;
    const double a = std::sqrt((4.0 * kk * kk - 1.0) / (kk * kk - mm * mm));
    const double b = std::sqrt(((kk - 1.0) * (kk - 1.0) - mm * mm) / (4.0 * (kk - 1.0) * (kk - 1.0) - 1.0));
    const double next = a * (t * cur - b * prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

void check_lm(int l, int m) {
  if (l < 0) throw InvalidArgument("harmonic degree must be >= 0");
  if (std::abs(m) > l) throw InvalidArgument("harmonic order must satisfy |m| <= l");
}
}  // namespace

double legendre_P(int l, double t) {
  if (l < 0) throw InvalidArgument("legendre_P needs l >= 0");
  if (std::abs(t) > 1.0) throw InvalidArgument("legendre_P needs |t| <= 1");
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int k = 2; k <= l; ++k) {
    const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return p1;
}

double gegenbauer(int l, double alpha, double t) {
  if (l < 0) throw InvalidArgument("gegenbauer needs l >= 0");
  if (!(alpha > 0.0)) throw InvalidArgument("gegenbauer needs alpha > 0");
  if (l == 0) return 1.0;
  double c0 = 1.0, c1 = 2.0 * alpha * t;
  for (int k = 2; k <= l; ++k) {
    const double ck = (2.0 * (k + alpha - 1.0) * t * c1 - (k + 2.0 * alpha - 2.0) * c0) / k;
    c0 = c1;
    c1 = ck;
  }
  return c1;
}

double eval_ylm(int l, int m, std::span<const double> u) {
  check_lm(l, m);
  if (u.size() != 3) throw InvalidArgument("eval_ylm is defined on S^2");
  const double t = std::clamp(u[2], -1.0, 1.0);
  const int am = std::abs(m);
  const double p = normalized_assoc_legendre(l, am, t);
  if (m == 0) return p;
  const double phi = std::atan2(u[1], u[0]);
  return std::sqrt(2.0) * p * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

double eval_zonal(int l, std::span<const double> axis, std::span<const double> u) {
  const double alpha = 0.5 * static_cast<double>(u.size()) - 1.0;
  return gegenbauer(l, alpha, std::clamp(dot(axis, u), -1.0, 1.0));
}

double laplace_integral_residual(int l, double theta, int m) {
  if (m < 1) throw InvalidArgument("laplace_integral_residual needs m >= 1");
  const double c = std::cos(theta), s = std::sin(theta);
  Complex acc = 0.0;
  for (int j = 0; j < m; ++j) {
    const double t = 2.0 * kPi * j / m;
    acc += ipow(Complex(c, s * std::cos(t)), l);
  }
  acc /= static_cast<double>(m);
  return std::abs(acc - legendre_P(l, c));
}

HarmonicCoeffs::HarmonicCoeffs(int band_limit) : band_limit_(band_limit) {
  if (band_limit < 0) throw InvalidArgument("band limit must be >= 0");
  c_.assign(static_cast<std::size_t>((band_limit + 1) * (band_limit + 1)), 0.0);
}

double HarmonicCoeffs::get(int l, int m) const {
  check_lm(l, m);
  if (l > band_limit_) return 0.0;
  return c_[index(l, m)];
}

void HarmonicCoeffs::set(int l, int m, double c) {
  check_lm(l, m);
  if (l > band_limit_) throw InvalidArgument("degree exceeds the band limit");
  c_[index(l, m)] = c;
}

double HarmonicCoeffs::evaluate(std::span<const double> u) const {
  double acc = 0.0;
  for (int l = 0; l <= band_limit_; ++l)
    for (int m = -l; m <= l; ++m) {
      const double c = c_[index(l, m)];
      if (c != 0.0) acc += c * eval_ylm(l, m, u);
    }
  return acc;
}

HarmonicCoeffs HarmonicCoeffs::degree_slice(int l) const {
  HarmonicCoeffs out(l);
  if (l <= band_limit_)
    for (int m = -l; m <= l; ++m) out.set(l, m, get(l, m));
  return out;
}

bool HarmonicCoeffs::degree_is_zero(int l) const {
  if (l > band_limit_) return true;
  for (int m = -l; m <= l; ++m)
    if (c_[index(l, m)] != 0.0) return false;
  return true;
}

HarmonicCoeffs HarmonicCoeffs::single(int l, int m, double c) {
  HarmonicCoeffs out(l);
  out.set(l, m, c);
  return out;
}

HarmonicCoeffs HarmonicCoeffs::random(int band_limit, std::uint64_t seed) {
  HarmonicCoeffs out(band_limit);
  std::mt19937_64 rng(seed);
  for (auto& c : out.c_) c = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  return out;
}

std::string HarmonicCoeffs::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (int l = 0; l <= band_limit_; ++l)
    for (int m = -l; m <= l; ++m) arr.push_back({{"l", l}, {"m", m}, {"c", c_[index(l, m)]}});
  return arr.dump();
}

HarmonicCoeffs HarmonicCoeffs::from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("coefficient JSON does not parse: ") + e.what());
  }
  if (!arr.is_array()) throw InvalidArgument("coefficient file must be a JSON array of {l, m, c}");
  struct Rec {
    int l, m;
    double c;
  };
  std::vector<Rec> recs;
  std::set<std::pair<int, int>> seen;
  int band = 0;
  for (const auto& r : arr) {
    if (!r.is_object() || !r.contains("l") || !r.contains("m") || !r.contains("c") ||
        !r["l"].is_number_integer() || !r["m"].is_number_integer() || !r["c"].is_number())
      throw InvalidArgument("coefficient record must be {\"l\": int, \"m\": int, \"c\": number}");
    const int l = r["l"].get<int>(), m = r["m"].get<int>();
    if (l < 0 || std::abs(m) > l)
      throw InvalidArgument("unknown harmonic (l=" + std::to_string(l) + ", m=" + std::to_string(m) + ")");
    if (!seen.insert({l, m}).second)
      throw InvalidArgument("duplicate harmonic (l=" + std::to_string(l) + ", m=" + std::to_string(m) + ")");
    recs.push_back({l, m, r["c"].get<double>()});
    band = std::max(band, l);
  }
  HarmonicCoeffs out(band);
  for (const auto& r : recs) out.set(r.l, r.m, r.c);
  return out;
}

MaxwellPolynomial::MaxwellPolynomial(int degree, const SphereGrid& grid, std::span<const double> f_values)
    : degree_(degree), n_(grid.dim()) {
  if (degree < 0) throw InvalidArgument("Maxwell polynomial degree must be >= 0");
  if (grid.exact_degree() < 2 * degree)
    throw InvalidArgument("grid exact through degree " + std::to_string(grid.exact_degree()) +
                          " cannot integrate the degree-" + std::to_string(2 * degree) + " Maxwell integrand");
  if (f_values.size() != grid.size()) throw InvalidArgument("f sample count does not match the grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (f_values[i] == 0.0) continue;
    const auto u = grid.node(i);
    nodes_.insert(nodes_.end(), u.begin(), u.end());
    weighted_f_.push_back(grid.weight(i) * f_values[i]);
  }
}

Complex MaxwellPolynomial::operator()(std::span<const Complex> zeta) const {
  if (zeta.size() != n_) throw InvalidArgument("zeta has the wrong dimension");
  CVec terms(weighted_f_.size());
  for (std::size_t i = 0; i < weighted_f_.size(); ++i) {
    const Complex s = dot(zeta, std::span<const double>(nodes_).subspan(i * n_, n_));
    terms[i] = weighted_f_[i] * ipow(s, degree_);
  }
  return pairwise_sum(terms);
}

MaxwellPolynomial maxwell_polynomial(const HarmonicCoeffs& degree_slice, int l, const SphereGrid& grid) {
  if (grid.dim() != 3) throw InvalidArgument("harmonic coefficients live on S^2");
  const HarmonicCoeffs slice = degree_slice.degree_slice(l);
  const RVec f = sample(grid, [&](std::span<const double> u) { return slice.evaluate(u); });
  return MaxwellPolynomial(l, grid, f);
}

TransformOracle::TransformOracle(const HarmonicCoeffs& coeffs, const SphereGrid& grid) : n_(grid.dim()) {
  if (grid.exact_degree() < 2 * coeffs.band_limit())
    throw InvalidArgument("oracle grid must be exact through twice the band limit");
  for (int l = 0; l <= coeffs.band_limit(); ++l) {
    if (coeffs.degree_is_zero(l)) continue;
    components_.push_back(maxwell_polynomial(coeffs, l, grid));
  }
}

TransformOracle::TransformOracle(std::size_t n, std::vector<MaxwellPolynomial> components)
    : n_(n), components_(std::move(components)) {}

Complex TransformOracle::derivative_unchecked(std::span<const Complex> zeta, Complex p, int k) const {
  if (k < 0) throw InvalidArgument("derivative order must be >= 0");
  if (p == Complex(0.0)) throw InvalidArgument("p = 0 is not a horosphere level");
  const double bracket = factorial(static_cast<int>(n_) - 1);
  Complex acc = 0.0;
  for (const auto& h : components_) {
    const int l = h.degree();
    double rising = 1.0;
    for (int j = 1; j <= k; ++j) rising *= (l + j);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    acc += sign * rising * ipow(1.0 / p, l + 1 + k) * h(zeta);
  }
  return -bracket * acc;
}

OracleValue TransformOracle::derivative(const ConePoint& zeta, Complex p, int k) const {
  const CVec z = zeta.zeta();
  return {derivative_unchecked(z, p, k), std::abs(p) <= std::sqrt(zeta.delta_xi())};
}

OracleValue oracle_transform(const HarmonicCoeffs& coeffs, const ConePoint& zeta, Complex p,
                             const SphereGrid& grid) {
  return TransformOracle(coeffs, grid).value(zeta, p);
}

CVec discrete_fourier(std::span<const Complex> samples) {
  const std::size_t N = samples.size();
  CVec out(N);
  for (std::size_t k = 0; k < N; ++k) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      const double a = -2.0 * kPi * static_cast<double>((j * k) % N) / static_cast<double>(N);
      acc += samples[j] * Complex(std::cos(a), std::sin(a));
    }
    out[k] = acc / static_cast<double>(N);
  }
  return out;
}

}  // namespace horo
