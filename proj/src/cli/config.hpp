// Declarative run configuration: INI sections whose keys carry their units.
// Frequencies are entered as ordinary frequencies and converted to rad/s here.

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "cavpump/pumping.hpp"
#include "cavpump/scenarios.hpp"

namespace cavpump::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Tree = boost::property_tree::ptree;

/// Every recognised key with its default value, as text.
const Tree& default_tree();

/// Resolved configuration. All keys of default_tree() are present.
class Settings {
 public:
  Settings();
  explicit Settings(Tree resolved);

  /// Reads an INI file and overlays it. Unknown sections or keys are errors.
  void load_file(const std::filesystem::path& path);
  /// Overlays a tree of the same shape (used for INI files and manifests).
  void overlay(const Tree& tree, const std::string& origin);
  /// Applies one `section.key=value` assignment.
  void assign(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  const Tree& tree() const { return tree_; }

  std::string text(const std::string& key) const;
  bool empty(const std::string& key) const;
  double number(const std::string& key) const;
  double positive(const std::string& key) const;
  double nonnegative(const std::string& key) const;
  std::optional<double> optional_number(const std::string& key) const;
  std::size_t count(const std::string& key, std::size_t minimum = 0) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  /// Angular momentum such as "2" or "3/2", returned doubled.
  int doubled(const std::string& key) const;

 private:
  Tree tree_;
};

/// Parses "1.5", "1e-3" or "1/3"; nullopt when the text is not a number.
std::optional<double> parse_number(const std::string& text);

std::filesystem::path preset_directory();
std::vector<std::string> preset_names();
std::filesystem::path preset_path(const std::string& name);

// Typed views of the resolved settings.
LevelScheme level_scheme(const Settings& s);
double cavity_kappa(const Settings& s);
CavityGeometry cavity_geometry(const Settings& s);
MeanFieldControl mean_field_control(const Settings& s);
Eigen::VectorXd initial_populations(const Settings& s, Eigen::Index ground_count);
ExperimentConfig experiment_config(const Settings& s);
Fig2Options fig2_options(const Settings& s);
TwoTransitionParams rate_params(const Settings& s);
OdeSettings rate_ode(const Settings& s);
Fig5Config fig5_config(const Settings& s);

}  // namespace cavpump::cli
