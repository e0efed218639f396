#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>

namespace sta::cli {

namespace {

struct Registry {
  CLI::App app{"Time-rescaling shortcuts to adiabaticity: simulations and checks", "sta"};
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, Subcommand> kinds;
};

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

// Keys that act as one choice; setting any of them on the command line
// discards all of them from the config file.
std::string key_group(const std::string& key) {
  if (key == "scan" || key == "equivalence" || key == "pump") return "floquet-task";
  return key;
}

CLI::App* add_sub(Registry& r, const std::string& name, Subcommand kind, const std::string& desc,
                  RunConfig& cfg) {
  CLI::App* s = r.app.add_subcommand(name, desc);
  s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  s->add_option("--a", cfg.a, "Contraction factor a >= 1 (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s->add_option("--tau", cfg.tau, "Protocol duration tau")->capture_default_str();
  s->add_option("--steps", cfg.steps, "Integration steps")->capture_default_str();
  s->add_option("--out", cfg.out, "Output path prefix (default: stdout)");
  s->add_option("--config", cfg.config_file, "JSON file with option values");
  s->add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  r.subs[name] = s;
  r.kinds[name] = kind;
  return s;
}

void build(Registry& r, RunConfig& cfg, bool& f_scan, bool& f_eq, bool& f_pump) {
  r.app.require_subcommand(1);

  auto* it = add_sub(r, "iontrap", Subcommand::IonTrap, "Fidelity curves of the trapped-ion protocol", cfg);
  auto& ic = cfg.iontrap;
  it->add_option("--times", ic.times, "Sample times on [0, tau/a]")->capture_default_str();
  it->add_option("--p-points", ic.p_points, "Momentum grid points")->capture_default_str();
  it->add_option("--p0", ic.p0, "Wavepacket centre")->capture_default_str();
  it->add_option("--sigma-p", ic.sigma_p, "Wavepacket width")->capture_default_str();
  it->add_option("--mode", ic.mode, "Fidelity integral")
      ->check(CLI::IsMember({"incoherent", "coherent"}))
      ->capture_default_str();
  it->add_option("--threads", ic.threads, "Worker threads (0 = all cores)");

  auto* fl = add_sub(r, "floquet", Subcommand::Floquet, "Floquet operators and quasienergies", cfg);
  auto& fc = cfg.floquet;
  fl->add_flag("--equivalence", f_eq, "Rescaled vs original Floquet operator over T0 (default)");
  fl->add_flag("--scan", f_scan, "Quasienergies along one parameter axis");
  fl->add_flag("--pump", f_pump, "Quasienergies along the pumping loop");
  fl->add_option("--J", fc.J, "Hopping")->capture_default_str();
  fl->add_option("--lambda", fc.lambda, "Hopping modulation")->capture_default_str();
  fl->add_option("--V1", fc.V1, "Onsite energy")->capture_default_str();
  fl->add_option("--V2", fc.V2, "Drive amplitude")->capture_default_str();
  fl->add_option("--Omega", fc.Omega, "Drive angular frequency")->capture_default_str();
  fl->add_option("--k", fc.k, "Quasimomentum k")->capture_default_str();
  fl->add_option("--phi-y", fc.phi_y, "Quasimomentum phi_y")->capture_default_str();
  fl->add_option("--phi-z", fc.phi_z, "Quasimomentum phi_z")->capture_default_str();
  fl->add_option("--ell", fc.ell, "Quasienergy quantum number")->capture_default_str();
  fl->add_option("--T0", fc.T0, "Pumping period")->capture_default_str();
  fl->add_option("--r", fc.r, "Pumping loop radius")->capture_default_str();
  fl->add_option("--phi-y0", fc.phi_y0, "Loop centre phi_y")->capture_default_str();
  fl->add_option("--phi-z0", fc.phi_z0, "Loop centre phi_z")->capture_default_str();
  fl->add_option("--hbar", fc.hbar, "Reduced Planck constant")->capture_default_str();
  fl->add_option("--scan-axis", fc.scan_axis, "Scan axis")
      ->check(CLI::IsMember({"k", "phi_y", "phi_z"}))
      ->capture_default_str();
  fl->add_option("--scan-half-width", fc.scan_half_width, "Scan half width")->capture_default_str();
  fl->add_option("--scan-points", fc.scan_points, "Scan or loop points")->capture_default_str();
  fl->add_option("--threads", fc.threads, "Worker threads (0 = all cores)");

  auto* gc = add_sub(r, "gauge-check", Subcommand::GaugeCheck, "Gauge-frame equivalence check", cfg);
  gc->add_option("--p", cfg.gauge.p, "Momentum modes (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  gc->add_option("--model", cfg.gauge.model, "Dirac model")
      ->check(CLI::IsMember({"constant-mass", "iontrap"}))
      ->capture_default_str();
  gc->add_option("--hbar", cfg.gauge.hbar, "Reduced Planck constant")->capture_default_str();

  auto* ap = add_sub(r, "appendix", Subcommand::Appendix, "Classical canonical-map check and coefficients", cfg);
  auto& ac = cfg.appendix;
  ap->add_option("--mode", ac.mode, "classical trajectories or coefficient table")
      ->check(CLI::IsMember({"classical", "coeffs"}))
      ->capture_default_str();
  ap->add_option("--potential", ac.potential, "Scale-invariant potential")
      ->check(CLI::IsMember({"harmonic", "quartic"}))
      ->capture_default_str();
  ap->add_option("--mass", ac.mass, "Particle mass")->capture_default_str();
  ap->add_option("--x0", ac.x0, "Initial position")->capture_default_str();
  ap->add_option("--p0", ac.p0, "Initial momentum")->capture_default_str();
  ap->add_option("--samples", ac.samples, "Samples for --mode coeffs")->capture_default_str();

  auto* ri = add_sub(r, "rescale-info", Subcommand::RescaleInfo, "Tabulate the rescaling function", cfg);
  ri->add_option("--samples", cfg.rescale.samples, "Samples on [0, tau/a]")->capture_default_str();
}

std::string json_scalar(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, res.ptr);
  }
  throw ConfigError(key, "config: unsupported value type for key '" + key + "'");
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "config: cannot read '" + path + "'");
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object()) throw ConfigError("config", "config: top level must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("config: invalid JSON: ") + e.what());
  }
}

std::vector<std::string> file_tokens(const nlohmann::json& j, CLI::App* sub,
                                     const std::set<std::string>& cli_groups) {
  std::vector<std::string> out;
  for (const auto& [raw, v] : j.items()) {
    const std::string key = normalize_key(raw);
    if (key == "config") throw ConfigError(raw, "config: key 'config' is not allowed in a config file");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw ConfigError(raw, "config: unknown key '" + raw + "' for subcommand " + sub->get_name());
    }
    if (cli_groups.count(key_group(key))) continue;
    if (v.is_boolean()) {
      if (opt->get_expected_max() != 0) {
        throw ConfigError(raw, "config: key '" + raw + "' expects a value, not a boolean");
      }
      if (v.get<bool>()) out.push_back("--" + key);
      continue;
    }
    if (opt->get_expected_max() == 0) {
      throw ConfigError(raw, "config: key '" + raw + "' is a switch and needs true/false");
    }
    if (v.is_array()) {
      for (const auto& e : v) {
        out.push_back("--" + key);
        out.push_back(json_scalar(e, raw));
      }
    } else {
      out.push_back("--" + key);
      out.push_back(json_scalar(v, raw));
    }
  }
  return out;
}

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(key, "invalid value for '" + key + "': " + msg);
}

void validate(RunConfig& c) {
  for (double a : c.a) require(std::isfinite(a) && a >= 1.0, "a", "contraction factor must satisfy a >= 1");
  require(std::isfinite(c.tau) && c.tau > 0.0, "tau", "must be positive");
  require(c.steps >= 1, "steps", "must be at least 1");
  switch (c.subcommand) {
    case Subcommand::IonTrap:
      require(c.iontrap.times >= 2, "times", "need at least 2 sample times");
      require(c.iontrap.p_points >= 3, "p-points", "need at least 3 grid points");
      require(std::isfinite(c.iontrap.sigma_p) && c.iontrap.sigma_p > 0.0, "sigma-p", "must be positive");
      require(std::isfinite(c.iontrap.p0), "p0", "must be finite");
      break;
    case Subcommand::Floquet: {
      const auto& f = c.floquet;
      require(std::isfinite(f.Omega) && f.Omega > 0.0, "Omega", "must be positive");
      require(std::isfinite(f.V1) && f.V1 != 0.0, "V1", "must be nonzero");
      require(std::abs(f.ell * std::numbers::pi / f.V1) <= 1.0, "ell",
              "|ell*pi/V1| must not exceed 1");
      require(std::isfinite(f.T0) && f.T0 > 0.0, "T0", "must be positive");
      require(std::isfinite(f.hbar) && f.hbar > 0.0, "hbar", "must be positive");
      require(f.scan_points >= 1, "scan-points", "must be at least 1");
      require(std::isfinite(f.scan_half_width) && f.scan_half_width >= 0.0, "scan-half-width",
              "must be non-negative");
      for (auto [k, v] : {std::pair{"J", f.J}, {"lambda", f.lambda}, {"V2", f.V2}, {"k", f.k},
                          {"phi-y", f.phi_y}, {"phi-z", f.phi_z}, {"r", f.r},
                          {"phi-y0", f.phi_y0}, {"phi-z0", f.phi_z0}}) {
        require(std::isfinite(v), k, "must be finite");
      }
      break;
    }
    case Subcommand::GaugeCheck:
      require(!c.gauge.p.empty(), "p", "need at least one momentum");
      for (double p : c.gauge.p) require(std::isfinite(p), "p", "must be finite");
      require(std::isfinite(c.gauge.hbar) && c.gauge.hbar > 0.0, "hbar", "must be positive");
      break;
    case Subcommand::Appendix:
      require(std::isfinite(c.appendix.mass) && c.appendix.mass > 0.0, "mass", "must be positive");
      require(std::isfinite(c.appendix.x0), "x0", "must be finite");
      require(std::isfinite(c.appendix.p0), "p0", "must be finite");
      require(c.appendix.samples >= 2, "samples", "need at least 2 samples");
      break;
    case Subcommand::RescaleInfo:
      require(c.rescale.samples >= 2, "samples", "need at least 2 samples");
      break;
  }
}

void fill_defaults(RunConfig& c) {
  if (!c.a.empty()) return;
  switch (c.subcommand) {
    case Subcommand::IonTrap: c.a = {1.0, 2.0, 4.0}; break;
    case Subcommand::Floquet:
    case Subcommand::GaugeCheck: c.a = {2.0, 4.0}; break;
    case Subcommand::Appendix:
    case Subcommand::RescaleInfo: c.a = {2.0}; break;
  }
}

}  // namespace

std::string subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::IonTrap: return "iontrap";
    case Subcommand::Floquet: return "floquet";
    case Subcommand::GaugeCheck: return "gauge-check";
    case Subcommand::Appendix: return "appendix";
    case Subcommand::RescaleInfo: return "rescale-info";
  }
  return "";
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  bool f_scan = false;
  bool f_eq = false;
  bool f_pump = false;
  Registry reg;
  build(reg, cfg, f_scan, f_eq, f_pump);

  std::vector<std::string> merged = args;
  if (!args.empty() && reg.subs.count(args[0])) {
    CLI::App* sub = reg.subs[args[0]];
    std::string config_path;
    std::set<std::string> cli_groups;
    for (std::size_t i = 1; i < args.size(); ++i) {
      const std::string& tok = args[i];
      if (tok.rfind("--", 0) != 0 || tok.size() == 2) continue;
      const auto eq = tok.find('=');
      const std::string key = normalize_key(tok.substr(2, eq == std::string::npos ? std::string::npos : eq - 2));
      cli_groups.insert(key_group(key));
      if (key == "config") {
        if (eq != std::string::npos) config_path = tok.substr(eq + 1);
        else if (i + 1 < args.size()) config_path = args[i + 1];
      }
    }
    if (!config_path.empty()) {
      const auto extra = file_tokens(load_json(config_path), sub, cli_groups);
      merged.assign(args.begin(), args.begin() + 1);
      merged.insert(merged.end(), extra.begin(), extra.end());
      merged.insert(merged.end(), args.begin() + 1, args.end());
    }
  }

  std::vector<std::string> rev(merged.rbegin(), merged.rend());
  try {
    reg.app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const auto chosen = reg.app.get_subcommands();
    throw HelpRequested{chosen.empty() ? reg.app.help() : chosen.front()->help()};
  } catch (const CLI::ParseError& e) {
    throw ConfigError("", e.what());
  }

  cfg.subcommand = reg.kinds.at(reg.app.get_subcommands().front()->get_name());
  if (cfg.subcommand == Subcommand::Floquet) {
    const int n = int(f_scan) + int(f_eq) + int(f_pump);
    if (n > 1) throw ConfigError("scan", "invalid value for 'scan': choose one of --equivalence, --scan, --pump");
    cfg.floquet.task = f_scan ? "scan" : f_pump ? "pump" : "equivalence";
  }
  fill_defaults(cfg);
  validate(cfg);
  return cfg;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand_name(c.subcommand);
  j["a"] = c.a;
  j["tau"] = c.tau;
  j["steps"] = c.steps;
  j["out"] = c.out;
  j["format"] = c.format;
  switch (c.subcommand) {
    case Subcommand::IonTrap: {
      const auto& i = c.iontrap;
      j["times"] = i.times;
      j["p-points"] = i.p_points;
      j["p0"] = i.p0;
      j["sigma-p"] = i.sigma_p;
      j["mode"] = i.mode;
      break;
    }
    case Subcommand::Floquet: {
      const auto& f = c.floquet;
      j["task"] = f.task;
      j["J"] = f.J;
      j["lambda"] = f.lambda;
      j["V1"] = f.V1;
      j["V2"] = f.V2;
      j["Omega"] = f.Omega;
      j["k"] = f.k;
      j["phi-y"] = f.phi_y;
      j["phi-z"] = f.phi_z;
      j["ell"] = f.ell;
      j["T0"] = f.T0;
      j["r"] = f.r;
      j["phi-y0"] = f.phi_y0;
      j["phi-z0"] = f.phi_z0;
      j["hbar"] = f.hbar;
      j["scan-axis"] = f.scan_axis;
      j["scan-half-width"] = f.scan_half_width;
      j["scan-points"] = f.scan_points;
      break;
    }
    case Subcommand::GaugeCheck:
      j["p"] = c.gauge.p;
      j["model"] = c.gauge.model;
      j["hbar"] = c.gauge.hbar;
      break;
    case Subcommand::Appendix:
      j["mode"] = c.appendix.mode;
      j["potential"] = c.appendix.potential;
      j["mass"] = c.appendix.mass;
      j["x0"] = c.appendix.x0;
      j["p0"] = c.appendix.p0;
      j["samples"] = c.appendix.samples;
      break;
    case Subcommand::RescaleInfo:
      j["samples"] = c.rescale.samples;
      break;
  }
  return j;
}

}  // namespace sta::cli
