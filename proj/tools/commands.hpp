#pragma once

#include <fstream>
#include <iosfwd>
#include <memory>
#include <string>

#include "json.hpp"
#include "run_config.hpp"

namespace horo::cli {

enum ExitCode : int { kOk = 0, kToleranceFailure = 1, kConfigError = 2, kNotConverged = 3, kIoError = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// JSON-lines sink: one line per record, the summary last. Every line carries
/// the schema version and the command name.
class Output {
 public:
  Output(const std::string& path, std::string command);
  void record(nlohmann::json j);
  void summary(nlohmann::json j);

 private:
  void write(nlohmann::json& j, const char* type);
  std::ofstream file_;
  std::ostream* os_;
  std::string command_;
};

int cmd_lemma_check(const RunConfig& cfg, Output& out);
int cmd_forward(const RunConfig& cfg, Output& out);
int cmd_invert(const RunConfig& cfg, Output& out);
int cmd_roundtrip(const RunConfig& cfg, Output& out);
int cmd_calibrate(const RunConfig& cfg, Output& out);
int cmd_homotopy(const RunConfig& cfg, Output& out);
int cmd_radon(const RunConfig& cfg, Output& out);
int cmd_fourier_modes(const RunConfig& cfg, Output& out);

}  // namespace horo::cli
