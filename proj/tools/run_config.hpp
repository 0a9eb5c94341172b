#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "horo/harmonics.hpp"
#include "horo/inversion.hpp"
#include "horo/quadrature.hpp"
#include "horo/transform.hpp"
#include "json.hpp"

namespace horo::cli {

/// Anything wrong with the configuration: exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

/// Built-in defaults; --config is merged over them, then each --override.
nlohmann::json default_config();

/// Sets the value at a dotted path ("grid.m_theta=64"). The value is parsed
/// as JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

nlohmann::json load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides);

struct FunctionSpec {
  SphereFunction f;
  /// Expansion in Y_{lm} when one exists (n = 3).
  std::optional<HarmonicCoeffs> coeffs;
  /// Oracle on S^{n-1} for n != 3 (constant and zonal functions).
  std::optional<TransformOracle> general_oracle;
  std::string description;
};

struct InversionChoice {
  LpCoefficients coeffs;
  Complex constant;
  std::string source;
};

/// Typed view of the configuration, validated on construction.
struct RunConfig {
  std::size_t n = 3;
  std::size_t grid_m_theta = 61;
  std::size_t grid_m_phi = 121;
  PipelineSetup pipeline;
  int band_limit = 5;
  std::uint64_t seed = 1;
  nlohmann::json function;
  nlohmann::json raw;

  explicit RunConfig(const nlohmann::json& j);

  SphereGrid product_grid() const;
  FunctionSpec resolve_function() const;
  InversionChoice inversion() const;
  /// raw["tolerances"][key] as a number.
  double tolerance(const std::string& key) const;
  /// raw[section], which must be an object.
  const nlohmann::json& section(const std::string& key) const;
};

nlohmann::json complex_json(Complex z);
Complex complex_from_json(const nlohmann::json& j);
RVec rvec_from_json(const nlohmann::json& j, std::size_t n, const std::string& what);

}  // namespace horo::cli
