#include "run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sta/sta.hpp"

namespace sta::cli {

namespace {

using ojson = nlohmann::ordered_json;

Table with_a_column(Table t, double a, bool add) {
  if (!add) return t;
  t.columns.insert(t.columns.begin(), "a");
  for (auto& row : t.rows) row.insert(row.begin(), a);
  return t;
}

void append(Table& into, Table part) {
  if (into.columns.empty()) into.columns = part.columns;
  for (auto& row : part.rows) into.rows.push_back(std::move(row));
}

RunResult run_iontrap(const RunConfig& c) {
  using namespace sta::iontrap;
  RunResult r;
  const IonTrapModel model{c.tau};
  const auto grid = gaussian_grid(c.iontrap.p0, c.iontrap.sigma_p, c.iontrap.p_points);
  FidelityOptions opt;
  opt.mode = c.iontrap.mode == "coherent" ? FidelityMode::Coherent : FidelityMode::Incoherent;
  opt.threads = c.iontrap.threads;
  const bool multi = c.a.size() > 1;
  r.results["curves"] = ojson::array();
  for (double a : c.a) {
    const auto rf = RescalingFunction::sinusoidal(a, c.tau);
    const auto tab = fidelity_curves(model, rf, grid, c.iontrap.times, c.steps, opt);
    Table t{{"t", "F_i", "F_f"}, {}};
    for (const auto& row : tab.rows) t.rows.push_back({row.t, row.F_i, row.F_f});
    append(r.table, with_a_column(std::move(t), a, multi));
    for (const auto& w : tab.warnings) r.warnings.push_back(w);
    r.results["curves"].push_back({{"a", a},
                                   {"t_end", tab.rows.back().t},
                                   {"F_i_initial", tab.rows.front().F_i},
                                   {"F_f_terminal", tab.rows.back().F_f},
                                   {"max_norm_defect", tab.max_norm_defect}});
  }
  return r;
}

floquet::WeylModelParams weyl_params(const FloquetConfig& f) {
  floquet::WeylModelParams q;
  q.J = f.J;
  q.lambda = f.lambda;
  q.V1 = f.V1;
  q.V2 = f.V2;
  q.Omega = f.Omega;
  q.k = floquet::wrap_quasimomentum(f.k);
  q.phi_y = floquet::wrap_quasimomentum(f.phi_y);
  q.phi_z = floquet::wrap_quasimomentum(f.phi_z);
  q.ell = f.ell;
  q.T0 = f.T0;
  q.r = f.r;
  q.phi_y0 = f.phi_y0;
  q.phi_z0 = f.phi_z0;
  q.hbar = f.hbar;
  q.validate();
  (void)q.phi_l();
  return q;
}

void scan_summary(RunResult& r, const std::vector<floquet::ScanRow>& rows, double period,
                  double hbar) {
  Table t{{"k", "phi_y", "phi_z", "E1", "E2"}, {}};
  double best = INFINITY;
  const floquet::ScanRow* at = nullptr;
  for (const auto& row : rows) {
    t.rows.push_back({row.k, row.phi_y, row.phi_z, row.E1, row.E2});
    const double g = floquet::quasienergy_gap({row.E1, row.E2}, period, hbar);
    if (g < best) {
      best = g;
      at = &row;
    }
  }
  r.table = std::move(t);
  r.results["min_gap"] = best;
  if (at) r.results["min_gap_at"] = {{"k", at->k}, {"phi_y", at->phi_y}, {"phi_z", at->phi_z}};
}

RunResult run_floquet(const RunConfig& c) {
  using namespace sta::floquet;
  RunResult r;
  const auto& f = c.floquet;
  const WeylModelParams q = weyl_params(f);
  const double T = q.period();
  r.results["period"] = T;
  if (f.task == "equivalence") {
    r.is_check = true;
    const long n = static_cast<long>(std::ceil(static_cast<double>(c.steps) * q.T0 / T - 1e-9));
    r.results["steps_total"] = n;
    r.results["reports"] = ojson::array();
    r.table.columns = {"a", "deviation"};
    for (double a : c.a) {
      const auto rf = RescalingFunction::sinusoidal(a, q.T0);
      const auto rep = rescaled_floquet_equivalence(SingleModeHamiltonian{q}, rf, n, q.hbar);
      r.table.rows.push_back({a, rep.deviation});
      r.results["reports"].push_back(
          {{"a", a}, {"deviation", rep.deviation}, {"tolerance", rep.tolerance}, {"pass", rep.pass}});
      r.pass = r.pass && rep.pass;
    }
    return r;
  }
  std::vector<std::array<double, 3>> pts;
  if (f.task == "pump") {
    pts = pumping_loop_points(q, f.scan_points);
    for (const auto& w : pumping_warnings(q)) r.warnings.push_back(w);
  } else {
    const int axis = f.scan_axis == "k" ? 0 : f.scan_axis == "phi_y" ? 1 : 2;
    const std::array<double, 3> centre{q.k, q.phi_y, q.phi_z};
    for (int i = 0; i < f.scan_points; ++i) {
      auto p = centre;
      if (f.scan_points > 1) {
        p[axis] += f.scan_half_width * (2.0 * i / (f.scan_points - 1) - 1.0);
      }
      pts.push_back(p);
    }
  }
  scan_summary(r, quasienergy_scan(q, pts, c.steps, f.threads), T, q.hbar);
  return r;
}

DiracModel gauge_model(const RunConfig& c) {
  if (c.gauge.model == "iontrap") return iontrap::as_dirac_model(iontrap::IonTrapModel{c.tau});
  DiracModel m;
  const double tau = c.tau;
  m.rest_energy = [](double) { return 1.0; };
  m.vector_potential = [tau](double t) {
    const double s = std::sin(pi * t / (2.0 * tau));
    return -s * s;
  };
  return m;
}

RunResult run_gauge(const RunConfig& c) {
  RunResult r;
  r.is_check = true;
  const DiracModel model = gauge_model(c);
  r.table.columns = {"a", "p", "max_deviation", "max_norm_defect"};
  r.results["reports"] = ojson::array();
  for (double a : c.a) {
    const auto rf = RescalingFunction::sinusoidal(a, c.tau);
    const auto rep = gauge_equivalence_check(model, rf, c.gauge.p, c.steps, c.gauge.hbar);
    const GaugeFrame frame{rf, c.gauge.hbar};
    double sz_drift = 0.0;
    for (long k = 0; k <= c.steps; ++k) {
      const double t = rf.window() * static_cast<double>(k) / static_cast<double>(c.steps);
      const double dz = transformed_hamiltonian(frame, model, t, 0.0).dz;
      sz_drift = std::max(sz_drift, std::abs(dz - model.rest_energy(rf.eval(t))));
    }
    for (const auto& m : rep.modes) r.table.rows.push_back({a, m.p, m.max_deviation, m.max_norm_defect});
    r.results["reports"].push_back({{"a", a},
                                    {"max_deviation", rep.max_deviation},
                                    {"sigma_z_drift", sz_drift},
                                    {"tolerance", rep.tolerance},
                                    {"pass", rep.pass}});
    r.pass = r.pass && rep.pass;
  }
  return r;
}

RunResult run_appendix(const RunConfig& c) {
  using namespace sta::classical;
  RunResult r;
  const auto& ac = c.appendix;
  const bool multi = c.a.size() > 1;
  if (ac.mode == "coeffs") {
    for (double a : c.a) {
      const auto rf = RescalingFunction::sinusoidal(a, c.tau);
      Table t{{"t", "h1", "h2", "kappa", "cross_term", "alpha", "beta", "kappa_q"}, {}};
      for (int i = 0; i < ac.samples; ++i) {
        const double s = i + 1 == ac.samples ? rf.window() : rf.window() * i / (ac.samples - 1);
        const auto h = h1h2(rf, s, ac.mass);
        const auto q = quantum_coeffs(rf, s);
        t.rows.push_back({s, h.h1, h.h2, kappa(rf, s, ac.mass),
                          cross_term_coefficient(rf, s, ac.mass), q.alpha, q.beta, q.kappa_q});
      }
      append(r.table, with_a_column(std::move(t), a, multi));
    }
    return r;
  }
  r.is_check = true;
  const auto pot = ac.potential == "quartic" ? quartic() : harmonic();
  const auto model = default_model(pot, c.tau, ac.mass);
  r.results["reports"] = ojson::array();
  for (double a : c.a) {
    const auto rf = RescalingFunction::sinusoidal(a, c.tau);
    const auto rep = appendix_equivalence_check(model, rf, {ac.x0, ac.p0}, c.steps);
    Table t{{"t", "x", "p", "xbar", "pbar", "deviation"}, {}};
    for (const auto& row : rep.rows) t.rows.push_back({row.t, row.x, row.p, row.xbar, row.pbar, row.deviation});
    append(r.table, with_a_column(std::move(t), a, multi));
    r.results["reports"].push_back({{"a", a},
                                    {"max_deviation", rep.max_deviation},
                                    {"tolerance", rep.tolerance},
                                    {"pass", rep.pass}});
    r.pass = r.pass && rep.pass;
  }
  return r;
}

RunResult run_rescale_info(const RunConfig& c) {
  RunResult r;
  const bool multi = c.a.size() > 1;
  r.results["functions"] = ojson::array();
  for (double a : c.a) {
    const auto rf = RescalingFunction::sinusoidal(a, c.tau);
    Table t{{"t", "f", "fdot", "fddot", "fdddot"}, {}};
    const int n = c.rescale.samples;
    for (int i = 0; i < n; ++i) {
      const double s = i + 1 == n ? rf.window() : rf.window() * i / (n - 1);
      const auto d = rf.derivs(s);
      t.rows.push_back({s, rf.eval(s), d.fdot, d.fddot, d.fdddot});
    }
    append(r.table, with_a_column(std::move(t), a, multi));
    const auto rep = check_boundary(rf);
    ojson res = ojson::object();
    for (const auto& b : rep.residuals) res[b.condition] = b.residual;
    r.results["functions"].push_back({{"a", a},
                                      {"window", rf.window()},
                                      {"fdot_max", rf.derivs(0.5 * rf.window()).fdot},
                                      {"boundary_residuals", res},
                                      {"boundary_pass", rep.pass}});
  }
  return r;
}

// Writes every (path, content) pair through a temporary file and renames
// them into place only when all writes succeeded.
bool write_all(const std::vector<std::pair<std::string, std::string>>& files, std::ostream& err) {
  std::vector<std::string> temps;
  std::vector<std::string> done;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) std::filesystem::remove(t, ec);
    for (const auto& d : done) std::filesystem::remove(d, ec);
  };
  for (const auto& [path, content] : files) {
    const std::string tmp = path + ".tmp";
    temps.push_back(tmp);
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    o << content;
    o.close();
    if (!o) {
      err << "error: cannot write '" << path << "'\n";
      cleanup();
      return false;
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], files[i].first, ec);
    if (ec) {
      err << "error: cannot move output into '" << files[i].first << "': " << ec.message() << "\n";
      cleanup();
      return false;
    }
    done.push_back(files[i].first);
  }
  return true;
}

int exit_for(ErrorKind k) {
  return k == ErrorKind::Domain ? static_cast<int>(ExitCode::Config)
                                : static_cast<int>(ExitCode::Tolerance);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) s += ',';
    s += t.columns[i];
  }
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) s += ',';
      s += format_double(row[i]);
    }
    s += '\n';
  }
  return s;
}

RunResult compute(const RunConfig& cfg) {
  switch (cfg.subcommand) {
    case Subcommand::IonTrap: return run_iontrap(cfg);
    case Subcommand::Floquet: return run_floquet(cfg);
    case Subcommand::GaugeCheck: return run_gauge(cfg);
    case Subcommand::Appendix: return run_appendix(cfg);
    case Subcommand::RescaleInfo: return run_rescale_info(cfg);
  }
  return {};
}

ojson summary_json(const RunConfig& cfg, const RunResult& r, bool with_table) {
  ojson j;
  j["schema"] = 1;
  j["subcommand"] = subcommand_name(cfg.subcommand);
  j["config"] = config_to_json(cfg);
  j["results"] = r.results;
  j["warnings"] = r.warnings;
  if (r.is_check) j["pass"] = r.pass;
  if (with_table) {
    j["table"]["columns"] = r.table.columns;
    j["table"]["rows"] = r.table.rows;
  }
  return j;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunResult r;
  try {
    r = compute(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e.kind());
  }
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";

  const bool json = cfg.format == "json";
  if (cfg.out.empty()) {
    if (json) {
      out << summary_json(cfg, r, true).dump(2) << "\n";
    } else {
      out << to_csv(r.table);
    }
  } else {
    std::vector<std::pair<std::string, std::string>> files;
    if (json) {
      files.emplace_back(cfg.out + ".json", summary_json(cfg, r, true).dump(2) + "\n");
    } else {
      files.emplace_back(cfg.out + ".csv", to_csv(r.table));
      files.emplace_back(cfg.out + ".json", summary_json(cfg, r, false).dump(2) + "\n");
    }
    if (!write_all(files, err)) return static_cast<int>(ExitCode::Io);
  }
  if (r.is_check && !r.pass) {
    err << "check failed: tolerance exceeded\n";
    return static_cast<int>(ExitCode::Tolerance);
  }
  return static_cast<int>(ExitCode::Ok);
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Config);
  }
  return run(cfg, out, err);
}

}  // namespace sta::cli
