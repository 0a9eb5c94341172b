#include "horo/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "horo/errors.hpp"
#include "horo/parallel.hpp"
#include "json.hpp"

namespace horo {

namespace {

constexpr double kPi = std::numbers::pi;

// Legendre P_m(t) and P_m'(t) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(std::size_t m, double t) {
  double p0 = 1.0, p1 = t;
  if (m == 0) return {1.0, 0.0};
  for (std::size_t k = 2; k <= m; ++k) {
    const double pk = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = pk;
  }
  const double dp = static_cast<double>(m) * (t * p1 - p0) / (t * t - 1.0);
  return {p1, dp};
}

// Graded nodes on [0, length]: theta = c sinh(s), Gauss-Legendre in s.
void sinh_graded(double c, double length, std::size_t m, RVec& theta, RVec& dtheta_weight) {
  const GaussRule gl = gauss_legendre(m);
  const double smax = std::asinh(length / c);
  theta.resize(m);
  dtheta_weight.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = 0.5 * smax * (gl.nodes[i] + 1.0);
    theta[i] = c * std::sinh(s);
    dtheta_weight[i] = 0.5 * smax * gl.weights[i] * c * std::cosh(s);
  }
}

}  // namespace

GaussRule gauss_legendre(std::size_t m) {
  if (m == 0) throw InvalidArgument("gauss_legendre needs m >= 1");
  GaussRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
    // Tricomi initial guess for the i-th largest root.
    double t = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(m) + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(m, t);
      const double step = p / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const auto [p, dp] = legendre_with_derivative(m, t);
    (void)p;
    const double w = 2.0 / ((1.0 - t * t) * dp * dp);
    rule.nodes[m - 1 - i] = t;
    rule.nodes[i] = -t;
    rule.weights[m - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
  return rule;
}

GaussRule gauss_gegenbauer(std::size_t m, double a) {
  if (m == 0) throw InvalidArgument("gauss_gegenbauer needs m >= 1");
  if (!(a > -1.0)) throw InvalidArgument("Gegenbauer weight exponent must exceed -1");
  if (a == 0.0) return gauss_legendre(m);
  // Symmetric Jacobi matrix of the monic recurrence for (1 - t^2)^a.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t k = 1; k < m; ++k) {
    const double kk = static_cast<double>(k);
    // k = 1 in cancelled form (the general expression is 0/0 at a = -1/2).
    const double beta = k == 1 ? 1.0 / (2.0 * a + 3.0)
                               : kk * (kk + 2.0 * a) / ((2.0 * kk + 2.0 * a - 1.0) * (2.0 * kk + 2.0 * a + 1.0));
    const auto ik = static_cast<Eigen::Index>(k);
    J(ik, ik - 1) = J(ik - 1, ik) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::sqrt(kPi) * std::tgamma(a + 1.0) / std::tgamma(a + 1.5);
  GaussRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    rule.nodes[i] = es.eigenvalues()(ii);
    const double v0 = es.eigenvectors()(0, ii);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

double sphere_area(std::size_t n) {
  return 2.0 * std::pow(kPi, 0.5 * static_cast<double>(n)) / std::tgamma(0.5 * static_cast<double>(n));
}

SphereGrid::SphereGrid(std::size_t n, RVec coords, RVec weights, int exact_degree, std::string id)
    : n_(n), coords_(std::move(coords)), weights_(std::move(weights)), exact_degree_(exact_degree),
      id_(std::move(id)) {
  if (n_ < 3) throw InvalidArgument("sphere grids need n >= 3");
  if (coords_.size() != n_ * weights_.size()) throw InvalidArgument("grid coordinates and weights disagree in size");
  for (double w : weights_) {
    if (!(w > 0.0)) throw InvalidArgument("grid weights must be positive");
  }
}

SphereGrid product_grid(std::size_t n, std::size_t m_theta, std::size_t m_phi, int required_degree) {
  if (n < 3) throw InvalidArgument("product_grid needs n >= 3");
  if (m_theta < 1 || m_phi < 1) throw InvalidArgument("product_grid resolution must be positive");
  const int exact = static_cast<int>(std::min(2 * m_theta - 1, m_phi - 1));
  if (exact < required_degree)
    throw InvalidArgument("resolution (" + std::to_string(m_theta) + ", " + std::to_string(m_phi) +
                          ") is exact only through degree " + std::to_string(exact));

  // S^{k}: u = (t, sqrt(1 - t^2) u'), dsigma_k = (1 - t^2)^{(k-2)/2} dt dsigma_{k-1}.
  // S^1 (the azimuth) is the base of the recursion.
  std::vector<RVec> pts;
  RVec wts;
  for (std::size_t j = 0; j < m_phi; ++j) {
    const double phi = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(m_phi);
    pts.push_back({std::cos(phi), std::sin(phi)});
    wts.push_back(2.0 * kPi / static_cast<double>(m_phi));
  }
  for (std::size_t dim = 3; dim <= n; ++dim) {
    const GaussRule rule = gauss_gegenbauer(m_theta, 0.5 * static_cast<double>(dim) - 1.5);
    std::vector<RVec> next;
    RVec next_w;
    next.reserve(rule.nodes.size() * pts.size());
    // Descending t so the first ring sits at the pole (last coordinate).
    for (std::size_t i = rule.nodes.size(); i-- > 0;) {
      const double t = rule.nodes[i];
      const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
      for (std::size_t j = 0; j < pts.size(); ++j) {
        RVec p(dim);
        for (std::size_t d = 0; d + 1 < dim; ++d) p[d] = s * pts[j][d];
        p[dim - 1] = t;
        next.push_back(std::move(p));
        next_w.push_back(rule.weights[i] * wts[j]);
      }
    }
    pts = std::move(next);
    wts = std::move(next_w);
  }
  RVec coords;
  coords.reserve(n * pts.size());
  for (const auto& p : pts) coords.insert(coords.end(), p.begin(), p.end());
  std::ostringstream id;
  id << "product:n=" << n << ":" << m_theta << "x" << m_phi;
  return SphereGrid(n, std::move(coords), std::move(wts), exact, id.str());
}

SphereGrid product_grid_for_degree(std::size_t n, int degree) {
  const std::size_t d = static_cast<std::size_t>(std::max(degree, 0));
  return product_grid(n, d / 2 + 1, d + 1, degree);
}

PolarGrid::PolarGrid(const RealSpherePoint& pole, const PolarResolution& res)
    : frame_(build_frame(pole)), m_phi_(res.m_phi) {
  if (pole.dim() != 3) throw InvalidArgument("polar grids are defined on S^2 only");
  if (res.m_theta < 1 || res.m_phi < 1) throw InvalidArgument("polar grid resolution must be positive");
  const double dphi = 2.0 * kPi / static_cast<double>(m_phi_);
  auto push = [&](double c, double s, double w) {
    cos_theta_.push_back(c);
    sin_theta_.push_back(s);
    node_weight_.push_back(w * dphi);
  };
  switch (res.grading) {
    case Grading::none: {
      const GaussRule rule = gauss_legendre(res.m_theta);
      for (std::size_t i = rule.nodes.size(); i-- > 0;) {
        const double t = rule.nodes[i];
        push(t, std::sqrt(std::max(0.0, 1.0 - t * t)), rule.weights[i]);
      }
      exact_degree_ = static_cast<int>(std::min(2 * res.m_theta - 1, m_phi_ - 1));
      break;
    }
    case Grading::pole: {
      if (!(res.scale > 0.0)) throw InvalidArgument("graded polar grid needs a positive scale");
      RVec th, wt;
      sinh_graded(res.scale, kPi, res.m_theta, th, wt);
      for (std::size_t i = 0; i < th.size(); ++i) push(std::cos(th[i]), std::sin(th[i]), wt[i] * std::sin(th[i]));
      exact_degree_ = 0;
      break;
    }
    case Grading::both_poles: {
      if (!(res.scale > 0.0)) throw InvalidArgument("graded polar grid needs a positive scale");
      RVec th, wt;
      const std::size_t half = std::max<std::size_t>(1, res.m_theta / 2);
      sinh_graded(res.scale, 0.5 * kPi, half, th, wt);
      for (std::size_t i = 0; i < th.size(); ++i) push(std::cos(th[i]), std::sin(th[i]), wt[i] * std::sin(th[i]));
      for (std::size_t i = th.size(); i-- > 0;) push(-std::cos(th[i]), std::sin(th[i]), wt[i] * std::sin(th[i]));
      exact_degree_ = 0;
      break;
    }
  }
}

double PolarGrid::azimuth(std::size_t k) const {
  return 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m_phi_);
}

void PolarGrid::node(std::size_t ring, std::size_t k, std::span<double> out) const {
  const double phi = azimuth(k);
  const double c = std::cos(phi), s = std::sin(phi);
  const auto x = frame_.base.coords();
  const auto& e1 = frame_.tangent_basis[0];
  const auto& e2 = frame_.tangent_basis[1];
  for (std::size_t d = 0; d < 3; ++d)
    out[d] = cos_theta_[ring] * x[d] + sin_theta_[ring] * (c * e1[d] + s * e2[d]);
}

SphereGrid PolarGrid::materialize() const {
  RVec coords(3 * size());
  RVec weights(size());
  for (std::size_t r = 0; r < rings(); ++r) {
    for (std::size_t k = 0; k < m_phi_; ++k) {
      const std::size_t i = r * m_phi_ + k;
      node(r, k, std::span<double>(coords).subspan(3 * i, 3));
      weights[i] = node_weight_[r];
    }
  }
  std::ostringstream id;
  id << "polar:" << rings() << "x" << m_phi_ << ":pole=(" << pole()[0] << "," << pole()[1] << "," << pole()[2]
     << ")";
  return SphereGrid(3, std::move(coords), std::move(weights), exact_degree_, id.str());
}

Complex integrate(const SphereGrid& grid, const NodeFunction& f, Measure measure) {
  CVec values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex v = f(grid.node(i));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw IntegrationError("non-finite integrand at grid node " + std::to_string(i), i);
    values[i] = grid.weight(i) * v;
  }
  const Complex total = chunked_sum(values.size(), [&](std::size_t i) { return values[i]; });
  return measure == Measure::bracket ? factorial(static_cast<int>(grid.dim()) - 1) * total : total;
}

RVec sample(const SphereGrid& grid, const std::function<double(std::span<const double>)>& f) {
  RVec out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { out[i] = f(grid.node(i)); });
  return out;
}

std::string grid_to_json(const SphereGrid& grid) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["n"] = grid.dim();
  j["exact_degree"] = grid.exact_degree();
  j["id"] = grid.id();
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto u = grid.node(i);
    nodes.push_back(RVec(u.begin(), u.end()));
  }
  j["nodes"] = std::move(nodes);
  j["weights"] = RVec(grid.weights().begin(), grid.weights().end());
  return j.dump();
}

SphereGrid grid_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("grid JSON does not parse: ") + e.what());
  }
  try {
    const auto n = j.at("n").get<std::size_t>();
    RVec coords;
    for (const auto& node : j.at("nodes")) {
      const auto u = node.get<RVec>();
      if (u.size() != n) throw InvalidArgument("grid node has the wrong dimension");
      coords.insert(coords.end(), u.begin(), u.end());
    }
    return SphereGrid(n, std::move(coords), j.at("weights").get<RVec>(), j.at("exact_degree").get<int>(),
                      j.value("id", std::string("imported")));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed grid JSON: ") + e.what());
  }
}

}  // namespace horo
