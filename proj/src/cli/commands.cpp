#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/algorithm/string.hpp>

#include "cavpump/spectra.hpp"

namespace cavpump::cli {

namespace {

using constants::two_pi;
using nlohmann::json;

constexpr double kMaxSweepPoints = 1e6;

std::string signed_label(double v) {
  const std::string s = format_number(v);
  return v > 0.0 ? "+" + s : s;
}

std::vector<std::string> sublevel_columns(const std::string& prefix, const CouplingSet& c) {
  std::vector<std::string> out;
  for (int two_m : c.two_m_ground) out.push_back(prefix + format_two_m(two_m));
  return out;
}

void stamp(CsvTable& table, const std::string& command) {
  table.meta("tool", std::string("cavpump ") + kVersion);
  table.meta("command", command);
}

// Spectrum -----------------------------------------------------------------

struct SpectrumOutcome {
  SpectrumScan scan;
  double g_eff = 0.0;
  double N = 0.0;
  double eta = 0.0;
  double closed_form_splitting = 0.0;  // rad/s
  ExperimentConfig config;
};

SpectrumOutcome compute_spectrum(const Settings& s) {
  SpectrumOutcome o;
  o.config = experiment_config(s);
  const CouplingSet couplings = coupling_set(o.config.scheme);
  const double lo = s.number("spectrum.min_MHz");
  const double hi = s.number("spectrum.max_MHz");
  if (!(hi > lo)) throw ConfigError("spectrum.max_MHz: must exceed spectrum.min_MHz");
  const std::size_t points = s.count("spectrum.points", 3);
  const auto mhz = linear_grid(lo, hi, points);
  Eigen::VectorXd grid(static_cast<Eigen::Index>(points));
  for (std::size_t i = 0; i < points; ++i) grid[static_cast<Eigen::Index>(i)] = two_pi * 1e6 * mhz[i];

  o.N = o.config.n0;
  o.eta = o.config.pump_rate();
  o.g_eff = effective_coupling(couplings, o.config.initial_populations);
  o.closed_form_splitting = normal_mode_splitting(o.g_eff, o.N);
  const DriveParams drive{o.eta, 0.0, 0.0, o.config.kappa};
  o.scan = transmission_spectrum(drive, o.config.scheme.gamma, o.N, couplings, o.config.initial_populations, grid);
  return o;
}

std::map<std::string, double> spectrum_scalars(const SpectrumOutcome& o) {
  return {
      {"splitting_MHz", o.closed_form_splitting / two_pi / 1e6},
      {"peak_separation_MHz", o.scan.separation / two_pi / 1e6},
      {"g_eff_over_g0", o.g_eff / o.config.scheme.g0},
      {"peak_intensity", o.scan.intensities.maxCoeff()},
  };
}

void spectrum_command(const Settings& s, CommandResult& r) {
  const SpectrumOutcome o = compute_spectrum(s);
  CsvTable table({"delta_p_MHz", "intensity", "power_W"});
  stamp(table, "spectrum");
  table.meta("N", o.N);
  table.meta("g_eff_over_g0", o.g_eff / o.config.scheme.g0);
  table.meta("splitting_MHz", o.closed_form_splitting / two_pi / 1e6);
  table.meta("peak_separation_MHz", o.scan.separation / two_pi / 1e6);
  for (Eigen::Index i = 0; i < o.scan.detunings.size(); ++i) {
    const double a_sq = o.scan.intensities[i];
    table.add_row({o.scan.detunings[i] / two_pi / 1e6, a_sq,
                   transmitted_power(a_sq, o.config.cavity.omega, o.config.cavity.round_trip,
                                     o.config.cavity.mirror_transmission)});
  }
  r.outputs.add("spectrum.csv", table);

  std::ostringstream summary;
  summary << "splitting_MHz " << format_number(o.closed_form_splitting / two_pi / 1e6) << "\n";
  summary << "peak_separation_MHz " << format_number(o.scan.separation / two_pi / 1e6) << "\n";
  for (const auto& p : o.scan.peaks)
    summary << "peak_MHz " << format_number(p.position / two_pi / 1e6) << " intensity " << format_number(p.value)
            << "\n";
  r.summary = summary.str();
}

// Dynamics -----------------------------------------------------------------

void record_run(const DynamicsTrace& t, CommandResult& r) {
  auto& d = r.diagnostics;
  d["conservation_drift"] = std::max(d.value("conservation_drift", 0.0), t.run.conservation_drift);
  d["peak_rho_ee"] = std::max(d.value("peak_rho_ee", 0.0), t.run.peak_rho_ee);
  d["accepted_steps"] = d.value("accepted_steps", std::size_t{0}) + t.run.stats.accepted;
  if (!t.weak_field_ok)
    r.warnings.push_back("peak excited population " + format_number(t.run.peak_rho_ee) + " at delta_p " +
                         signed_label(t.delta_p_mhz) + " MHz exceeds the weak-field limit " +
                         format_number(kWeakFieldLimit));
}

CsvTable full_dynamics_table(const DynamicsTrace& t, const CouplingSet& c, const std::string& command) {
  std::vector<std::string> header{"t_s", "re_a", "im_a", "photon_number"};
  for (auto& h : sublevel_columns("P_", c)) header.push_back(h);
  for (auto& h : sublevel_columns("rho_ee_", c)) header.push_back(h);
  for (const char* h : {"g_eff_sqrtN_MHz", "N_eff", "transmission", "power_W"}) header.push_back(h);
  CsvTable table(header);
  stamp(table, command);
  table.meta("delta_p_MHz", t.delta_p_mhz);
  table.meta("N0", t.n0);
  table.meta("empty_cavity_transmission", t.empty_cavity_transmission);
  const auto& series = t.run.series;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& st = series.states[i];
    std::vector<double> row{series.times[i], st.a.real(), st.a.imag(), st.photon_number()};
    for (Eigen::Index m = 0; m < st.P.size(); ++m) row.push_back(st.P[m]);
    for (Eigen::Index m = 0; m < st.rho_ee.size(); ++m) row.push_back(st.rho_ee[m]);
    row.push_back(t.collective_mhz[i]);
    row.push_back(series.n_eff[i]);
    row.push_back(t.transmission[i]);
    row.push_back(t.power_w[i]);
    table.add_row(row);
  }
  return table;
}

std::map<std::string, double> dynamics_scalars(const DynamicsTrace& t) {
  const auto& photons = t.run.series.states;
  double max_photons = 0.0;
  for (const auto& s : photons) max_photons = std::max(max_photons, s.photon_number());
  const auto& coll = t.collective_mhz;
  return {
      {"peak_rho_ee", t.run.peak_rho_ee},
      {"max_photon_number", max_photons},
      {"final_photon_number", photons.back().photon_number()},
      {"final_transmission", t.transmission.back()},
      {"conservation_drift", t.run.conservation_drift},
      {"collective_rise_MHz", *std::max_element(coll.begin(), coll.end()) - coll.front()},
  };
}

void plain_dynamics(const Settings& s, CommandResult& r) {
  const ExperimentConfig config = experiment_config(s);
  const CouplingSet c = coupling_set(config.scheme);
  const DynamicsTrace t = run_dynamics(config, config.delta_p_mhz.front(), config.atoms_for(0));
  record_run(t, r);
  r.outputs.add("dynamics.csv", full_dynamics_table(t, c, "dynamics"));
  std::ostringstream summary;
  for (const auto& [k, v] : dynamics_scalars(t)) summary << k << " " << format_number(v) << "\n";
  r.summary = summary.str();
}

void fig2_dynamics(const Settings& s, CommandResult& r) {
  const LevelScheme scheme = level_scheme(s);
  const Fig2Result f = scenario_fig2(scheme, cavity_kappa(s), fig2_options(s), mean_field_control(s));
  const CouplingSet c = coupling_set(scheme);

  CsvTable coupling({"label", "geff2_over_g02"});
  stamp(coupling, "dynamics fig2");
  coupling.meta("settle_time_s", f.settle_time);
  coupling.meta("relative_residual", f.residual);
  for (const auto& row : f.rows) coupling.add_text_row({row.label, format_number(row.geff2_over_g02)});
  r.outputs.add("fig2_coupling.csv", coupling);

  CsvTable pops({"two_m", "c_squared", "equal", "steady_state"});
  stamp(pops, "dynamics fig2");
  const Eigen::VectorXd c2 = c.cg_squared();
  for (Eigen::Index i = 0; i < c.ground_count(); ++i)
    pops.add_row({static_cast<double>(c.two_m_ground[static_cast<std::size_t>(i)]), c2[i],
                  1.0 / static_cast<double>(c.ground_count()), f.steady_state[i]});
  r.outputs.add("fig2_populations.csv", pops);

  r.diagnostics["peak_rho_ee"] = f.peak_rho_ee;
  r.diagnostics["settle_time_s"] = f.settle_time;
  r.diagnostics["relative_residual"] = f.residual;
  std::ostringstream summary;
  for (const auto& row : f.rows) summary << row.label << " " << format_number(row.geff2_over_g02) << "\n";
  r.summary = summary.str();
}

void fig3_dynamics(const Settings& s, CommandResult& r) {
  const ExperimentConfig config = experiment_config(s);
  const CouplingSet c = coupling_set(config.scheme);
  const DynamicsTrace t = scenario_fig3(config);
  record_run(t, r);
  const auto& series = t.run.series;
  const double g02 = config.scheme.g0 * config.scheme.g0;

  CsvTable power({"t_s", "transmission", "power_W"});
  CsvTable coupling({"t_s", "g_eff_sqrtN_MHz", "geff2_over_g02", "N_eff"});
  std::vector<std::string> pop_header{"t_s"};
  for (auto& h : sublevel_columns("P_", c)) pop_header.push_back(h);
  CsvTable pops(pop_header);
  for (CsvTable* table : {&power, &coupling, &pops}) {
    stamp(*table, "dynamics fig3");
    table->meta("delta_p_MHz", t.delta_p_mhz);
    table->meta("N0", t.n0);
  }
  power.meta("empty_cavity_transmission", t.empty_cavity_transmission);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double time = series.times[i];
    power.add_row({time, t.transmission[i], t.power_w[i]});
    coupling.add_row({time, t.collective_mhz[i], series.g_eff[i] * series.g_eff[i] / g02, series.n_eff[i]});
    std::vector<double> row{time};
    for (Eigen::Index m = 0; m < series.states[i].P.size(); ++m) row.push_back(series.states[i].P[m]);
    pops.add_row(row);
  }
  r.outputs.add("fig3_transmission.csv", power);
  r.outputs.add("fig3_coupling.csv", coupling);
  r.outputs.add("fig3_populations.csv", pops);

  std::ostringstream summary;
  for (const auto& [k, v] : dynamics_scalars(t)) summary << k << " " << format_number(v) << "\n";
  r.summary = summary.str();
}

void fig4_dynamics(const Settings& s, unsigned jobs, CommandResult& r) {
  const ExperimentConfig config = experiment_config(s);
  const auto traces = scenario_fig4(config, jobs);
  std::ostringstream summary;
  for (const auto& t : traces) {
    record_run(t, r);
    CsvTable table({"t_s", "transmission", "power_W", "g_eff_sqrtN_MHz", "N_eff"});
    stamp(table, "dynamics fig4");
    table.meta("delta_p_MHz", t.delta_p_mhz);
    table.meta("N0", t.n0);
    table.meta("empty_cavity_transmission", t.empty_cavity_transmission);
    const auto& series = t.run.series;
    for (std::size_t i = 0; i < series.size(); ++i)
      table.add_row({series.times[i], t.transmission[i], t.power_w[i], t.collective_mhz[i], series.n_eff[i]});
    const std::string name = "fig4_delta_p_" + signed_label(t.delta_p_mhz) + "MHz.csv";
    r.outputs.add(name, table);
    summary << name << " final_transmission " << format_number(t.transmission.back()) << " empty_cavity "
            << format_number(t.empty_cavity_transmission) << "\n";
  }
  r.summary = summary.str();
}

void dynamics_command(const Settings& s, unsigned jobs, CommandResult& r) {
  const std::string kind = s.text("dynamics.kind");
  if (kind == "dynamics") return plain_dynamics(s, r);
  if (kind == "fig2") return fig2_dynamics(s, r);
  if (kind == "fig3") return fig3_dynamics(s, r);
  if (kind == "fig4") return fig4_dynamics(s, jobs, r);
  throw ConfigError("dynamics.kind: expected dynamics, fig2, fig3 or fig4, got '" + kind + "'");
}

// Rates --------------------------------------------------------------------

// Largest |t(P(t_i)) - t_i| Gamma_eff over the samples, i.e. the disagreement
// between the integrated trace and the implicit solution in units of the
// initial decay time.
double implicit_residual(const RateTrace& trace, const RateCoefficients& c) {
  if (!(c.gamma_eff > 0.0)) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double p = trace.p_minus[i];
    if (!(p > 0.0 && p <= 1.0)) continue;
    worst = std::max(worst, std::abs(implicit_time(p, c) - (trace.times[i] - trace.times.front())) * c.gamma_eff);
  }
  return worst;
}

struct RateOutcome {
  TwoTransitionParams params;
  RateCoefficients coeffs;
  Regime regime;
  RateTrace trace;
  double residual = 0.0;
};

RateOutcome compute_rates(const Settings& s) {
  RateOutcome o;
  o.params = rate_params(s);
  o.coeffs = rate_coefficients(o.params);
  o.regime = classify_regime(o.coeffs);
  const double t_end = 1e-3 * s.positive("rates.end_ms");
  const auto grid = linear_grid(0.0, t_end, s.count("rates.samples", 2));
  o.trace = integrate_rate(o.params, {0.0, t_end}, grid, rate_ode(s));
  o.residual = implicit_residual(o.trace, o.coeffs);
  return o;
}

std::map<std::string, double> rate_scalars(const RateOutcome& o) {
  return {
      {"alpha", o.coeffs.alpha},
      {"beta", o.coeffs.beta},
      {"alpha_plus_beta", o.coeffs.alpha + o.coeffs.beta},
      {"u", o.coeffs.u},
      {"w", o.coeffs.w},
      {"gamma_eff_per_s", o.coeffs.gamma_eff},
      {"final_P_minus", o.trace.p_minus.back()},
      {"implicit_residual", o.residual},
  };
}

void single_rates(const Settings& s, CommandResult& r) {
  const RateOutcome o = compute_rates(s);
  CsvTable trace({"t_s", "P_minus", "t_implicit_s"});
  stamp(trace, "rates");
  trace.meta("regime", to_string(o.regime));
  for (std::size_t i = 0; i < o.trace.times.size(); ++i) {
    const double p = o.trace.p_minus[i];
    const double implicit =
        (o.coeffs.gamma_eff > 0.0 && p > 0.0 && p <= 1.0) ? implicit_time(p, o.coeffs) : std::nan("");
    trace.add_row({o.trace.times[i], p, implicit});
  }
  r.outputs.add("rates_trace.csv", trace);

  CsvTable summary_table({"quantity", "value"});
  stamp(summary_table, "rates");
  std::ostringstream summary;
  for (const auto& [k, v] : rate_scalars(o)) {
    summary_table.add_text_row({k, format_number(v)});
    summary << k << " " << format_number(v) << "\n";
  }
  summary_table.add_text_row({"regime", to_string(o.regime)});
  summary << "regime " << to_string(o.regime) << "\n";
  r.outputs.add("rates_summary.csv", summary_table);
  r.diagnostics["implicit_residual"] = o.residual;
  r.summary = summary.str();
}

void fig5_rates(const Settings& s, CommandResult& r) {
  const Fig5Config config = fig5_config(s);
  const Fig5Result f = scenario_fig5(config);

  CsvTable coeffs({"delta_a_over_gamma", "alpha_strong", "beta_strong", "alpha_plus_beta_strong", "alpha_weak",
                   "beta_weak"});
  stamp(coeffs, "rates fig5");
  coeffs.meta("strong_coupling", config.strong_coupling);
  coeffs.meta("weak_coupling", config.weak_coupling);
  for (Eigen::Index i = 0; i < f.delta_a_over_gamma.size(); ++i)
    coeffs.add_row({f.delta_a_over_gamma[i], f.alpha_strong[i], f.beta_strong[i], f.alpha_strong[i] + f.beta_strong[i],
                    f.alpha_weak[i], f.beta_weak[i]});
  r.outputs.add("fig5_coefficients.csv", coeffs);

  CsvTable traces_summary({"label", "delta_a_over_gamma", "coupling", "eta_per_s", "alpha", "beta",
                           "gamma_eff_per_s", "regime", "implicit_residual"});
  stamp(traces_summary, "rates fig5");
  std::ostringstream summary;
  double worst_residual = 0.0;
  for (const auto& t : f.traces) {
    CsvTable table({"t_s", "P_minus"});
    stamp(table, "rates fig5");
    table.meta("label", t.label);
    table.meta("regime", to_string(t.regime));
    for (std::size_t i = 0; i < t.trace.times.size(); ++i) table.add_row({t.trace.times[i], t.trace.p_minus[i]});
    r.outputs.add("fig5_trace_" + t.label + ".csv", table);
    const double residual = implicit_residual(t.trace, t.coeffs);
    worst_residual = std::max(worst_residual, residual);
    traces_summary.add_text_row({t.label, format_number(t.params.delta_a / t.params.gamma),
                                 format_number(t.params.g0 * std::sqrt(t.params.N) / t.params.gamma),
                                 format_number(t.params.eta), format_number(t.coeffs.alpha),
                                 format_number(t.coeffs.beta), format_number(t.coeffs.gamma_eff),
                                 to_string(t.regime), format_number(residual)});
    summary << t.label << " alpha " << format_number(t.coeffs.alpha) << " beta " << format_number(t.coeffs.beta)
            << " regime " << to_string(t.regime) << "\n";
  }
  r.outputs.add("fig5_summary.csv", traces_summary);
  r.diagnostics["implicit_residual"] = worst_residual;
  r.summary = summary.str();
}

void rates_command(const Settings& s, CommandResult& r) {
  const std::string kind = s.text("rates.kind");
  if (kind == "single") return single_rates(s, r);
  if (kind == "fig5") return fig5_rates(s, r);
  throw ConfigError("rates.kind: expected single or fig5, got '" + kind + "'");
}

// Sweep --------------------------------------------------------------------

void sweep_command(const Settings& s, unsigned jobs, CommandResult& r) {
  const std::string base = s.text("sweep.command");
  const auto& known = sweep_observables(base);
  std::vector<std::string> observables;
  boost::algorithm::split(observables, s.text("sweep.observables"), boost::algorithm::is_any_of(","));
  for (auto& o : observables) {
    boost::algorithm::trim(o);
    if (std::find(known.begin(), known.end(), o) == known.end())
      throw ConfigError("sweep.observables: '" + o + "' is not an observable of " + base + " (available: " +
                        boost::algorithm::join(known, ", ") + ")");
  }

  const std::string x_key = s.text("sweep.x");
  const std::string y_key = s.text("sweep.y");
  const auto xs = parse_axis("sweep.x_values", s.text("sweep.x_values"));
  const auto ys = y_key.empty() ? std::vector<double>{} : parse_axis("sweep.y_values", s.text("sweep.y_values"));
  const double total = static_cast<double>(xs.size()) * static_cast<double>(std::max<std::size_t>(ys.size(), 1));
  if (total > kMaxSweepPoints)
    throw ConfigError("sweep grid has " + format_number(total) + " points, more than the limit of " +
                      format_number(kMaxSweepPoints) + "; reduce the counts in sweep.x_values or sweep.y_values");
  for (const auto& key : {x_key, y_key}) {
    if (key.empty()) continue;
    if (boost::algorithm::starts_with(key, "sweep."))
      throw ConfigError("sweep keys cannot target the [sweep] section");
    Settings probe = s;
    probe.set(key, "0");
  }

  const std::size_t ny = std::max<std::size_t>(ys.size(), 1);
  const std::size_t n = xs.size() * ny;
  std::vector<std::map<std::string, double>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        Settings point = s;
        point.set(x_key, format_number(xs[i / ny]));
        if (!y_key.empty()) point.set(y_key, format_number(ys[i % ny]));
        results[i] = evaluate_scalars(base, point);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<std::size_t>(n, 1024))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (const auto& obs : observables) {
    std::vector<std::string> header{x_key};
    if (!y_key.empty()) header.push_back(y_key);
    header.push_back(obs);
    CsvTable table(header);
    stamp(table, "sweep " + base);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row{xs[i / ny]};
      if (!y_key.empty()) row.push_back(ys[i % ny]);
      row.push_back(results[i].at(obs));
      table.add_row(row);
    }
    r.outputs.add("sweep_" + obs + ".csv", table);
  }
  r.summary = "sweep points " + std::to_string(n) + "\n";
}

std::string manifest_stem(const Invocation& inv) {
  if (inv.command == "dynamics") {
    const std::string kind = inv.settings.text("dynamics.kind");
    return kind == "dynamics" ? "dynamics" : kind;
  }
  if (inv.command == "rates" && inv.settings.text("rates.kind") == "fig5") return "fig5";
  return inv.command;
}

json config_json(const Tree& tree) {
  json out = json::object();
  for (const auto& [section, keys] : tree)
    for (const auto& [key, value] : keys) out[section][key] = value.data();
  return out;
}

}  // namespace

const std::vector<std::string>& sweep_observables(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> table{
      {"spectrum", {"splitting_MHz", "peak_separation_MHz", "g_eff_over_g0", "peak_intensity"}},
      {"dynamics",
       {"peak_rho_ee", "max_photon_number", "final_photon_number", "final_transmission", "conservation_drift",
        "collective_rise_MHz"}},
      {"rates", {"alpha", "beta", "alpha_plus_beta", "u", "w", "gamma_eff_per_s", "final_P_minus", "implicit_residual"}},
  };
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("sweep.command: expected spectrum, dynamics or rates, got '" + command + "'");
  return it->second;
}

std::map<std::string, double> evaluate_scalars(const std::string& command, const Settings& s) {
  if (command == "spectrum") return spectrum_scalars(compute_spectrum(s));
  if (command == "dynamics") {
    const ExperimentConfig config = experiment_config(s);
    return dynamics_scalars(run_dynamics(config, config.delta_p_mhz.front(), config.atoms_for(0)));
  }
  if (command == "rates") return rate_scalars(compute_rates(s));
  throw ConfigError("sweep.command: expected spectrum, dynamics or rates, got '" + command + "'");
}

std::vector<double> parse_axis(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  if (t.empty()) throw ConfigError(key + ": no values given");
  std::vector<std::string> parts;
  if (t.find(':') != std::string::npos) {
    boost::algorithm::split(parts, t, boost::algorithm::is_any_of(":"));
    const auto a = parts.size() == 3 ? parse_number(parts[0]) : std::nullopt;
    const auto b = parts.size() == 3 ? parse_number(parts[1]) : std::nullopt;
    const auto c = parts.size() == 3 ? parse_number(parts[2]) : std::nullopt;
    if (!a || !b || !c || *c < 1 || *c != std::floor(*c) || *c > 1e12)
      throw ConfigError(key + ": expected start:stop:count, got '" + t + "'");
    if (*c == 1) return {*a};
    return linear_grid(*a, *b, static_cast<std::size_t>(*c));
  }
  std::vector<double> out;
  boost::algorithm::split(parts, t, boost::algorithm::is_any_of(","));
  for (const auto& p : parts) {
    const auto v = parse_number(p);
    if (!v) throw ConfigError(key + ": expected a comma-separated list or start:stop:count, got '" + t + "'");
    out.push_back(*v);
  }
  return out;
}

CommandResult run_command(const Invocation& inv) {
  const auto start = std::chrono::steady_clock::now();
  CommandResult r;
  if (inv.command == "spectrum") spectrum_command(inv.settings, r);
  else if (inv.command == "dynamics") dynamics_command(inv.settings, inv.jobs, r);
  else if (inv.command == "rates") rates_command(inv.settings, r);
  else if (inv.command == "sweep") sweep_command(inv.settings, inv.jobs, r);
  else throw ConfigError("unknown command '" + inv.command + "'");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["tool"] = "cavpump";
  manifest["version"] = kVersion;
  manifest["command"] = inv.command;
  manifest["config"] = config_json(inv.settings.tree());
  manifest["tolerances"] = {
      {"integrator_rel_tol", inv.settings.number("integrator.rel_tol")},
      {"integrator_abs_tol", inv.settings.number("integrator.abs_tol")},
      {"rates_rel_tol", inv.settings.number("rates.rel_tol")},
      {"rates_abs_tol", inv.settings.number("rates.abs_tol")},
  };
  manifest["conservation_drift"] = r.diagnostics.value("conservation_drift", 0.0);
  manifest["peak_rho_ee"] = r.diagnostics.value("peak_rho_ee", 0.0);
  manifest["diagnostics"] = r.diagnostics;
  manifest["warnings"] = r.warnings;
  manifest["wall_time_s"] = wall;
  std::vector<std::string> names;
  for (const auto& [name, content] : r.outputs.files()) names.push_back(name);
  manifest["outputs"] = names;
  r.outputs.add(manifest_stem(inv) + ".manifest.json", manifest.dump(2) + "\n");
  return r;
}

Invocation invocation_from_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest '" + path.string() + "'");
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ConfigError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!m.contains("command") || !m.contains("config") || !m["config"].is_object())
    throw ConfigError("manifest '" + path.string() + "' lacks command or config");
  Tree tree;
  for (const auto& [section, keys] : m["config"].items()) {
    if (!keys.is_object()) throw ConfigError("manifest config section '" + section + "' is not an object");
    for (const auto& [key, value] : keys.items()) {
      if (!value.is_string()) throw ConfigError("manifest value " + section + "." + key + " is not a string");
      tree.put(section + "." + key, value.get<std::string>());
    }
  }
  Invocation inv{m["command"].get<std::string>(), Settings(tree), 1};
  return inv;
}

int report_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const StiffnessError& e) {
    err << "integration failed at t = " << format_number(e.time_reached()) << " s: " << e.what() << "\n";
    return integration_failure;
  } catch (const DegenerateParameters& e) {
    err << "degenerate parameters: " << e.what() << "\n";
    return degenerate_parameters;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const std::domain_error& e) {
    err << "degenerate parameters: " << e.what() << "\n";
    return degenerate_parameters;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "output error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "integration failed: " << e.what() << "\n";
    return integration_failure;
  }
}

int execute(const Invocation& inv, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    const CommandResult r = run_command(inv);
    r.outputs.commit(out_dir);
    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    out << r.summary;
    return ok;
  } catch (...) {
    return report_exception(err);
  }
}

}  // namespace cavpump::cli
