#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "horo/geometry.hpp"
#include "horo/linalg.hpp"

namespace horo {

struct GaussRule {
  RVec nodes;    // ascending in [-1, 1]
  RVec weights;
};

/// m-point Gauss-Legendre rule, exact through degree 2m - 1.
GaussRule gauss_legendre(std::size_t m);

/// m-point rule for the weight (1 - t^2)^a on [-1, 1] (Golub-Welsch).
GaussRule gauss_gegenbauer(std::size_t m, double a);

/// Surface area of S^{n-1}.
double sphere_area(std::size_t n);

/// Quadrature on S^{n-1}. Weights are in units of the surface measure dsigma.
/// exact_degree is the total polynomial degree integrated exactly; 0 marks a
/// grid without a polynomial certificate (graded grids).
class SphereGrid {
 public:
  SphereGrid(std::size_t n, RVec coords, RVec weights, int exact_degree, std::string id);

  std::size_t dim() const { return n_; }
  std::size_t size() const { return weights_.size(); }
  int exact_degree() const { return exact_degree_; }
  const std::string& id() const { return id_; }

  std::span<const double> node(std::size_t i) const {
    return std::span<const double>(coords_).subspan(i * n_, n_);
  }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> coords() const { return coords_; }

 private:
  std::size_t n_;
  RVec coords_;
  RVec weights_;
  int exact_degree_;
  std::string id_;
};

/// Gauss rules in the polar coordinates (Gauss-Gegenbauer for n > 3) times a
/// uniform azimuth. Exact through min(2 m_theta - 1, m_phi - 1).
SphereGrid product_grid(std::size_t n, std::size_t m_theta, std::size_t m_phi,
                        int required_degree = 0);

/// Smallest product grid certified for the given degree.
SphereGrid product_grid_for_degree(std::size_t n, int degree);

enum class Grading { none, pole, both_poles };

struct PolarResolution {
  std::size_t m_theta = 32;
  std::size_t m_phi = 64;
  Grading grading = Grading::none;
  /// Length scale of the sinh clustering in theta (used when graded).
  double scale = 0.0;
};

/// Rings of constant colatitude about a pole on S^2, azimuth measured in the
/// pole's build_frame. Nodes are generated on demand; materialize() gives the
/// explicit grid (ring-major, azimuth index fastest).
class PolarGrid {
 public:
  PolarGrid(const RealSpherePoint& pole, const PolarResolution& res);

  const Frame& frame() const { return frame_; }
  const RealSpherePoint& pole() const { return frame_.base; }
  std::size_t rings() const { return cos_theta_.size(); }
  std::size_t m_phi() const { return m_phi_; }
  std::size_t size() const { return rings() * m_phi_; }
  int exact_degree() const { return exact_degree_; }
  double cos_theta(std::size_t ring) const { return cos_theta_[ring]; }
  double sin_theta(std::size_t ring) const { return sin_theta_[ring]; }
  /// dsigma weight of every node on the ring.
  double node_weight(std::size_t ring) const { return node_weight_[ring]; }
  double azimuth(std::size_t k) const;

  /// Writes the n = 3 coordinates of node (ring, k) into out.
  void node(std::size_t ring, std::size_t k, std::span<double> out) const;

  SphereGrid materialize() const;

 private:
  Frame frame_;
  RVec cos_theta_;
  RVec sin_theta_;
  RVec node_weight_;
  std::size_t m_phi_;
  int exact_degree_;
};

enum class Measure { sigma, bracket };

using NodeFunction = std::function<Complex(std::span<const double>)>;

/// sum_j w_j f(u_j), times (n-1)! for the bracket measure. Throws
/// IntegrationError naming the first node with a non-finite value.
Complex integrate(const SphereGrid& grid, const NodeFunction& f, Measure measure = Measure::sigma);

/// f sampled on the grid nodes.
RVec sample(const SphereGrid& grid, const std::function<double(std::span<const double>)>& f);

std::string grid_to_json(const SphereGrid& grid);
SphereGrid grid_from_json(const std::string& text);

}  // namespace horo
