#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sta::cli {

enum class Subcommand { IonTrap, Floquet, GaugeCheck, Appendix, RescaleInfo };

enum class ExitCode : int { Ok = 0, Config = 2, Tolerance = 3, Io = 4 };

struct IonTrapConfig {
  int times = 21;
  int p_points = 129;
  double p0 = 0.0;
  double sigma_p = 0.05;
  std::string mode = "incoherent";
  unsigned threads = 0;
};

struct FloquetConfig {
  std::string task = "equivalence";  // equivalence | scan | pump
  double J = 1.0;
  double lambda = 1.0;
  double V1 = 6.283185307179586;
  double V2 = 3.141592653589793;
  double Omega = 6.283185307179586;
  double k = 1.5707963267948966;
  double phi_y = 1.5707963267948966;
  double phi_z = 1.0471975511965976;
  int ell = 1;
  double T0 = 50.0;
  double r = 0.1;
  double phi_y0 = 1.5707963267948966;
  double phi_z0 = 1.0471975511965976;
  double hbar = 1.0;
  std::string scan_axis = "phi_z";
  double scan_half_width = 0.5;
  int scan_points = 65;
  unsigned threads = 0;
};

struct GaugeConfig {
  std::vector<double> p{-1.0, 0.0, 1.0};
  std::string model = "constant-mass";
  double hbar = 1.0;
};

struct AppendixConfig {
  std::string mode = "classical";
  std::string potential = "harmonic";
  double mass = 1.0;
  double x0 = 1.0;
  double p0 = 0.0;
  int samples = 101;
};

struct RescaleInfoConfig {
  int samples = 101;
};

/// Fully resolved run configuration. Every field has a documented default.
struct RunConfig {
  Subcommand subcommand = Subcommand::IonTrap;
  std::vector<double> a;
  double tau = 1.0;
  long steps = 4000;
  std::string out;  // empty: stdout
  std::string format = "csv";
  std::string config_file;

  IonTrapConfig iontrap;
  FloquetConfig floquet;
  GaugeConfig gauge;
  AppendixConfig appendix;
  RescaleInfoConfig rescale;
};

/// Validation or parse failure; `key` names the offending option.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

/// Thrown for --help; carries the rendered help text.
struct HelpRequested {
  std::string text;
};

std::string subcommand_name(Subcommand s);

/// Parses `args` (without the program name). Keys in the JSON file named by
/// --config fill in options not given as flags; flags always win.
RunConfig parse_config(const std::vector<std::string>& args);

/// The resolved configuration as a JSON object (reproducibility record).
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

}  // namespace sta::cli
