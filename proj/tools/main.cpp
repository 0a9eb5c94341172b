#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "horo/errors.hpp"
#include "horo/parallel.hpp"

using namespace horo::cli;

int main(int argc, char** argv) {
  CLI::App app{"Complex horospherical transform on the sphere"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  int threads = 1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--override", overrides, "key.path=value (value parsed as JSON when possible)");
  app.add_option("--out", out_path, "output file (JSON lines); default: config output or stdout");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  using Command = std::function<int(const RunConfig&, Output&)>;
  const std::vector<std::tuple<std::string, std::string, Command>> table{
      {"lemma-check", "classify cone points against the real sphere", cmd_lemma_check},
      {"forward", "forward transform at cone points", cmd_forward},
      {"invert", "inversion formula at points of the sphere", cmd_invert},
      {"roundtrip", "per-degree ratios and random band-limited round trips", cmd_roundtrip},
      {"calibrate", "calibrate L_p coefficients and the overall constant", cmd_calibrate},
      {"homotopy", "kappa cycle integral along the cycle homotopy", cmd_homotopy},
      {"radon", "reconstruction from the Radon cycle", cmd_radon},
      {"fourier-modes", "Fourier modes of the transform along the circle action", cmd_fourier_modes},
  };
  std::map<CLI::App*, Command> dispatch;
  for (const auto& [name, help, fn] : table) dispatch[app.add_subcommand(name, help)] = fn;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    const auto raw = load_config(config_path.empty() ? std::nullopt : std::optional(config_path), overrides);
    const RunConfig cfg(raw);
    horo::set_thread_count(threads);
    std::string path = out_path;
    if (path.empty() && raw.contains("output") && raw["output"].is_string()) path = raw["output"].get<std::string>();
    Output out(path, chosen->get_name());
    return dispatch.at(chosen)(cfg, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const horo::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNotConverged;
  }
}
