#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

namespace cavpump::cli {

namespace {

using constants::two_pi;

struct Entry {
  const char* key;
  const char* value;
};

constexpr Entry kDefaults[] = {
    {"scheme.Fg", "2"},
    {"scheme.Fe", "3"},
    {"scheme.polarization", "pi"},
    {"scheme.g0_kHz", "210"},
    {"scheme.gamma_MHz", "6.065"},

    {"cavity.kappa_MHz", "6.7"},
    {"cavity.round_trip_m", "0.1"},
    {"cavity.mirror_transmission", "0.015"},
    {"cavity.frequency_THz", "384.2304844685"},

    {"drive.power_nW", "2.4"},
    {"drive.eta_MHz", ""},
    {"drive.delta_p_MHz", "24"},

    {"atoms.N", "11200"},
    {"atoms.N_per_detuning", ""},
    {"atoms.populations", ""},
    {"atoms.ballistic", "true"},
    {"atoms.temperature_uK", "75"},
    {"atoms.sigma0_mm", "2.5"},
    {"atoms.waist_um", "80"},
    {"atoms.mass_kg", "1.443e-25"},

    {"time.start_ms", "0"},
    {"time.end_ms", "20"},
    {"time.samples", "2001"},

    {"integrator.rel_tol", "1e-8"},
    {"integrator.abs_tol", "1e-10"},
    {"integrator.max_step_factor", "0"},
    {"integrator.max_steps", "200000000"},

    {"spectrum.min_MHz", "-40"},
    {"spectrum.max_MHz", "40"},
    {"spectrum.points", "8001"},

    {"dynamics.kind", "dynamics"},

    {"fig2.atoms", "1"},
    {"fig2.delta_p_MHz", "0"},
    {"fig2.photon_number", "0.1"},
    {"fig2.relative_tolerance", "1e-6"},
    {"fig2.chunk_ms", "1"},
    {"fig2.max_time_s", "1"},

    {"rates.kind", "single"},
    {"rates.c_minus_sq", "1/3"},
    {"rates.c_plus_sq", "1"},
    {"rates.gamma_MHz", "6.065"},
    {"rates.kappa_MHz", ""},
    {"rates.g0_kHz", "210"},
    {"rates.coupling", "10"},
    {"rates.N", ""},
    {"rates.delta_a_over_gamma", "10"},
    {"rates.delta_c_over_gamma", ""},
    {"rates.initial_rate", "1e4"},
    {"rates.eta_MHz", ""},
    {"rates.end_ms", "1"},
    {"rates.samples", "501"},
    {"rates.rel_tol", "1e-10"},
    {"rates.abs_tol", "1e-12"},

    {"fig5.weak_coupling", "0.01"},
    {"fig5.sweep_min", "-30"},
    {"fig5.sweep_max", "30"},
    {"fig5.sweep_points", "601"},

    {"sweep.command", "spectrum"},
    {"sweep.x", "atoms.N"},
    {"sweep.x_values", "11200"},
    {"sweep.y", ""},
    {"sweep.y_values", ""},
    {"sweep.observables", "splitting_MHz"},
};

Tree build_defaults() {
  Tree t;
  for (const auto& e : kDefaults) t.put(e.key, e.value);
  return t;
}

}  // namespace

const Tree& default_tree() {
  static const Tree tree = build_defaults();
  return tree;
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string text = boost::algorithm::trim_copy(raw);
  auto parse = [](std::string_view s) -> std::optional<double> {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse(text);
  const auto num = parse(std::string_view(text).substr(0, slash));
  const auto den = parse(std::string_view(text).substr(slash + 1));
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

Settings::Settings() : tree_(default_tree()) {}

Settings::Settings(Tree resolved) : tree_(default_tree()) { overlay(resolved, "manifest"); }

void Settings::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  Tree t;
  try {
    boost::property_tree::ini_parser::read_ini(in, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  overlay(t, path.string());
}

void Settings::overlay(const Tree& tree, const std::string& origin) {
  for (const auto& [section, keys] : tree) {
    if (!keys.data().empty() && keys.empty())
      throw ConfigError(origin + ": key '" + section + "' must belong to a section");
    const auto known = default_tree().get_child_optional(section);
    if (!known) throw ConfigError(origin + ": unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      if (!known->get_child_optional(key))
        throw ConfigError(origin + ": unknown key '" + section + "." + key + "'");
      tree_.put(section + "." + key, value.data());
    }
  }
}

void Settings::assign(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  set(boost::algorithm::trim_copy(assignment.substr(0, eq)), boost::algorithm::trim_copy(assignment.substr(eq + 1)));
}

void Settings::set(const std::string& key, const std::string& value) {
  if (key.find('.') == std::string::npos || !default_tree().get_child_optional(key))
    throw ConfigError("unknown key '" + key + "'");
  tree_.put(key, value);
}

std::string Settings::text(const std::string& key) const {
  return boost::algorithm::trim_copy(tree_.get<std::string>(key));
}

bool Settings::empty(const std::string& key) const { return text(key).empty(); }

double Settings::number(const std::string& key) const {
  const std::string t = text(key);
  const auto v = parse_number(t);
  if (!v || !std::isfinite(*v)) throw ConfigError(key + ": expected a number, got '" + t + "'");
  return *v;
}

double Settings::positive(const std::string& key) const {
  const double v = number(key);
  if (!(v > 0.0)) throw ConfigError(key + ": must be positive, got " + text(key));
  return v;
}

double Settings::nonnegative(const std::string& key) const {
  const double v = number(key);
  if (!(v >= 0.0)) throw ConfigError(key + ": must be nonnegative, got " + text(key));
  return v;
}

std::optional<double> Settings::optional_number(const std::string& key) const {
  if (empty(key)) return std::nullopt;
  return number(key);
}

std::size_t Settings::count(const std::string& key, std::size_t minimum) const {
  const double v = number(key);
  if (v != std::floor(v) || v < static_cast<double>(minimum) || v > 1e12)
    throw ConfigError(key + ": expected an integer >= " + std::to_string(minimum) + ", got " + text(key));
  return static_cast<std::size_t>(v);
}

bool Settings::flag(const std::string& key) const {
  const std::string t = boost::algorithm::to_lower_copy(text(key));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text(key) + "'");
}

std::vector<double> Settings::numbers(const std::string& key) const {
  std::vector<double> out;
  const std::string t = text(key);
  if (t.empty()) return out;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, t, boost::algorithm::is_any_of(","));
  for (const auto& p : parts) {
    const auto v = parse_number(p);
    if (!v || !std::isfinite(*v)) throw ConfigError(key + ": expected a comma-separated list of numbers, got '" + t + "'");
    out.push_back(*v);
  }
  return out;
}

int Settings::doubled(const std::string& key) const {
  const double v = number(key);
  const double twice = 2.0 * v;
  if (twice != std::round(twice) || twice < 0.0 || twice > 200.0)
    throw ConfigError(key + ": expected an integer or half-integer angular momentum, got " + text(key));
  return static_cast<int>(twice);
}

std::filesystem::path preset_directory() {
  if (const char* env = std::getenv("CAVPUMP_PRESETS")) return env;
  return CAVPUMP_PRESET_DIR;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(preset_directory(), ec))
    if (entry.path().extension() == ".ini") names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::filesystem::path preset_path(const std::string& name) {
  const auto path = preset_directory() / (name + ".ini");
  if (!std::filesystem::exists(path)) throw ConfigError("unknown preset '" + name + "'");
  return path;
}

LevelScheme level_scheme(const Settings& s) {
  LevelScheme scheme;
  scheme.two_fg = s.doubled("scheme.Fg");
  scheme.two_fe = s.doubled("scheme.Fe");
  try {
    scheme.polarization = parse_polarization(s.text("scheme.polarization"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scheme.polarization: ") + e.what());
  }
  scheme.g0 = two_pi * 1e3 * s.positive("scheme.g0_kHz");
  scheme.gamma = two_pi * 1e6 * s.positive("scheme.gamma_MHz");
  try {
    scheme.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scheme: ") + e.what());
  }
  return scheme;
}

double cavity_kappa(const Settings& s) { return two_pi * 1e6 * s.positive("cavity.kappa_MHz"); }

CavityGeometry cavity_geometry(const Settings& s) {
  CavityGeometry c;
  c.round_trip = s.positive("cavity.round_trip_m");
  c.mirror_transmission = s.positive("cavity.mirror_transmission");
  if (c.mirror_transmission > 1.0) throw ConfigError("cavity.mirror_transmission: must not exceed 1");
  c.omega = two_pi * 1e12 * s.positive("cavity.frequency_THz");
  return c;
}

MeanFieldControl mean_field_control(const Settings& s) {
  MeanFieldControl c;
  c.ode.rel_tol = s.positive("integrator.rel_tol");
  c.ode.abs_tol = s.positive("integrator.abs_tol");
  c.ode.max_steps = s.count("integrator.max_steps", 1);
  c.max_step_factor = s.nonnegative("integrator.max_step_factor");
  return c;
}

Eigen::VectorXd initial_populations(const Settings& s, Eigen::Index ground_count) {
  const auto values = s.numbers("atoms.populations");
  if (values.empty()) return Eigen::VectorXd::Constant(ground_count, 1.0 / static_cast<double>(ground_count));
  if (static_cast<Eigen::Index>(values.size()) != ground_count)
    throw ConfigError("atoms.populations: expected " + std::to_string(ground_count) + " values, got " +
                      std::to_string(values.size()));
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(values.data(), ground_count);
  if ((p.array() < 0.0).any() || !(p.sum() > 0.0))
    throw ConfigError("atoms.populations: values must be nonnegative with a positive sum");
  return p / p.sum();
}

ExperimentConfig experiment_config(const Settings& s) {
  ExperimentConfig c;
  c.scheme = level_scheme(s);
  c.kappa = cavity_kappa(s);
  c.n0 = s.nonnegative("atoms.N");
  c.cloud.temperature = 1e-6 * s.nonnegative("atoms.temperature_uK");
  c.cloud.sigma0 = 1e-3 * s.nonnegative("atoms.sigma0_mm");
  c.cloud.waist = 1e-6 * s.positive("atoms.waist_um");
  c.cloud.mass = s.positive("atoms.mass_kg");
  c.cavity = cavity_geometry(s);
  c.delta_p_mhz = s.numbers("drive.delta_p_MHz");
  if (c.delta_p_mhz.empty()) throw ConfigError("drive.delta_p_MHz: at least one detuning is required");
  c.n0_per_detuning = s.numbers("atoms.N_per_detuning");
  if (!c.n0_per_detuning.empty() && c.n0_per_detuning.size() != c.delta_p_mhz.size())
    throw ConfigError("atoms.N_per_detuning: expected one atom number per entry of drive.delta_p_MHz");
  if (std::any_of(c.n0_per_detuning.begin(), c.n0_per_detuning.end(), [](double n) { return n < 0.0; }))
    throw ConfigError("atoms.N_per_detuning: atom numbers must be nonnegative");
  c.p_cav = 1e-9 * s.nonnegative("drive.power_nW");
  if (auto eta = s.optional_number("drive.eta_MHz")) {
    if (*eta < 0.0) throw ConfigError("drive.eta_MHz: must be nonnegative");
    c.eta = two_pi * 1e6 * *eta;
  }
  c.ballistic = s.flag("atoms.ballistic");
  c.t_start = 1e-3 * s.nonnegative("time.start_ms");
  c.t_end = 1e-3 * s.number("time.end_ms");
  if (!(c.t_end > c.t_start)) throw ConfigError("time.end_ms: must exceed time.start_ms");
  c.samples = s.count("time.samples", 2);
  const CouplingSet couplings = coupling_set(c.scheme);
  c.initial_populations = initial_populations(s, couplings.ground_count());
  c.control = mean_field_control(s);
  return c;
}

Fig2Options fig2_options(const Settings& s) {
  Fig2Options o;
  o.atoms = s.positive("fig2.atoms");
  o.delta_p_mhz = s.number("fig2.delta_p_MHz");
  o.photon_number = s.positive("fig2.photon_number");
  o.relative_tolerance = s.positive("fig2.relative_tolerance");
  o.chunk = 1e-3 * s.positive("fig2.chunk_ms");
  o.max_time = s.positive("fig2.max_time_s");
  return o;
}

TwoTransitionParams rate_params(const Settings& s) {
  TwoTransitionParams p;
  p.c_minus_sq = s.positive("rates.c_minus_sq");
  p.c_plus_sq = s.positive("rates.c_plus_sq");
  if (p.c_minus_sq > 1.0) throw ConfigError("rates.c_minus_sq: must lie in (0, 1]");
  if (p.c_plus_sq > 1.0) throw ConfigError("rates.c_plus_sq: must lie in (0, 1]");
  p.gamma = two_pi * 1e6 * s.positive("rates.gamma_MHz");
  p.kappa = s.empty("rates.kappa_MHz") ? p.gamma : two_pi * 1e6 * s.positive("rates.kappa_MHz");
  p.g0 = two_pi * 1e3 * s.positive("rates.g0_kHz");
  if (auto n = s.optional_number("rates.N")) {
    if (!(*n > 0.0)) throw ConfigError("rates.N: must be positive");
    p.N = *n;
  } else {
    const double root_n = s.positive("rates.coupling") * p.gamma / p.g0;
    p.N = root_n * root_n;
  }
  p.delta_a = s.number("rates.delta_a_over_gamma") * p.gamma;
  p.delta_c = s.empty("rates.delta_c_over_gamma") ? p.delta_a : s.number("rates.delta_c_over_gamma") * p.gamma;
  if (auto eta = s.optional_number("rates.eta_MHz")) {
    if (*eta < 0.0) throw ConfigError("rates.eta_MHz: must be nonnegative");
    p.eta = two_pi * 1e6 * *eta;
  } else {
    p.eta = 1.0;
    const double unit_rate = -rate_derivative(1.0, rate_coefficients(p));
    p.eta = std::sqrt(s.positive("rates.initial_rate") / unit_rate);
  }
  return p;
}

OdeSettings rate_ode(const Settings& s) {
  OdeSettings o;
  o.rel_tol = s.positive("rates.rel_tol");
  o.abs_tol = s.positive("rates.abs_tol");
  return o;
}

Fig5Config fig5_config(const Settings& s) {
  const TwoTransitionParams p = rate_params(s);
  Fig5Config c;
  c.gamma = p.gamma;
  c.g0 = p.g0;
  c.c_minus_sq = p.c_minus_sq;
  c.c_plus_sq = p.c_plus_sq;
  c.strong_coupling = s.positive("rates.coupling");
  c.weak_coupling = s.positive("fig5.weak_coupling");
  c.sweep_min = s.number("fig5.sweep_min");
  c.sweep_max = s.number("fig5.sweep_max");
  if (!(c.sweep_max > c.sweep_min)) throw ConfigError("fig5.sweep_max: must exceed fig5.sweep_min");
  c.sweep_points = s.count("fig5.sweep_points", 2);
  c.initial_rate = s.positive("rates.initial_rate");
  c.t_end = 1e-3 * s.positive("rates.end_ms");
  c.samples = s.count("rates.samples", 2);
  c.ode = rate_ode(s);
  return c;
}

}  // namespace cavpump::cli
