#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace horo {

using Complex = std::complex<double>;
using RVec = std::vector<double>;
using CVec = std::vector<Complex>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

/// Bilinear (not Hermitian) pairing zeta . u.
inline Complex dot(std::span<const Complex> a, std::span<const double> b) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    re += a[k].real() * b[k];
    im += a[k].imag() * b[k];
  }
  return {re, im};
}

inline Complex dot(std::span<const Complex> a, std::span<const Complex> b) {
  Complex s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

/// z^k, k >= 0, by binary powering.
inline Complex ipow(Complex z, int k) {
  Complex r = 1.0;
  while (k > 0) {
    if (k & 1) r *= z;
    z *= z;
    k >>= 1;
  }
  return r;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline CVec complexify(std::span<const double> re, std::span<const double> im) {
  CVec z(re.size());
  for (std::size_t k = 0; k < re.size(); ++k) z[k] = {re[k], im[k]};
  return z;
}

inline CVec complexify(std::span<const double> re) {
  return CVec(re.begin(), re.end());
}

inline CVec scaled(std::span<const Complex> v, Complex c) {
  CVec out(v.begin(), v.end());
  for (auto& z : out) z *= c;
  return out;
}

}  // namespace horo
