#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace horo {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A linear functional that must not vanish did vanish (e.g. lambda . zeta).
struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

/// The Cauchy kernel is too close to singular on some quadrature node.
/// Callers that need values on the singular set go through boundary_value.
struct NearSingularError : std::runtime_error {
  NearSingularError(const std::string& what, std::size_t node, double distance)
      : std::runtime_error(what), node(node), distance(distance) {}
  std::size_t node;
  double distance;
};

struct IntegrationError : std::runtime_error {
  IntegrationError(const std::string& what, std::size_t node)
      : std::runtime_error(what), node(node) {}
  std::size_t node;
};

}  // namespace horo
