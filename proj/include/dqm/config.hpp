#pragma once

#include <map>
#include <string>
#include <vector>

#include "dqm/scenario.hpp"

namespace dqm {

/// Minimal TOML-style reader: [sections], key = value with numbers, quoted
/// strings, booleans, and flat arrays of numbers. Enough for the shipped
/// configs; unknown keys are rejected so typos surface early.
class ConfigFile {
 public:
  explicit ConfigFile(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  double num(const std::string& section, const std::string& key, double dflt) const;
  int integer(const std::string& section, const std::string& key, int dflt) const;
  std::string str(const std::string& section, const std::string& key,
                  const std::string& dflt) const;
  bool boolean(const std::string& section, const std::string& key, bool dflt) const;
  std::vector<double> array(const std::string& section, const std::string& key,
                            const std::vector<double>& dflt) const;

  /// Keys actually present, as "section.key" (for validation diagnostics).
  std::vector<std::string> keys() const;

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> raw text
  std::string path_;
};

/// Everything a run needs, resolved from one config file.
struct RunConfig {
  std::string config_path;
  ScenarioConfig scenario;
  std::string output_dir = "out";
  std::string sweep_axis = "pf";  // "pf" | "penetration"
  std::vector<double> pf_values{1.0, 0.95, 0.9, 0.8, 0.7, 0.6};
  std::vector<double> penetration_values{0.05, 0.4, 0.8, 1.2, 1.6};
  bool export_qp_json = false;
};

/// Parses and validates a run config; referenced paths must exist.
RunConfig load_run_config(const std::string& path);

/// FNV-1a 64-bit content hash, hex-encoded (used by output manifests).
std::string fnv1a64_file(const std::string& path);
std::string fnv1a64(const std::string& data);

}  // namespace dqm
