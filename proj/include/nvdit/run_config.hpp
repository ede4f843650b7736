#pragma once

#include <map>
#include <string>

#include "nvdit/lindblad.hpp"
#include "nvdit/pulse_shape.hpp"

namespace nvdit {

// Exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;
inline constexpr int kExitAnchorFailure = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full run configuration: physical constants plus per-mode settings.  Loaded
// from an INI-style key = value file; every field validated on load.
struct RunConfig {
  GsmParams gsm;
  EsmParams esm;
  FieldConfig field;
  MetastableModel msm;
  double kappa = ghz(0.05);
  double cooperativity = 10.0;
  double elastic_retained = 1.0;
  double quantum_efficiency = 0.04;        // window 0.03-0.05
  double gamma_rad = ghz(13.2e-3);
  double low_ms_branch_0mt = 0.01;         // the 0-1% band inputs
  ProtocolConfig protocol;
  GaussianPulse pulse;
  CoherentConfig coherent;
  int threads = 0;                         // 0: hardware default

  void validate() const;

  static RunConfig load(const std::string& path);
  static RunConfig from_map(const std::map<std::string, std::string>& kv);
  std::map<std::string, std::string> to_map() const;
  void save(const std::string& path) const;
};

// INI-ish parser: "key = value" lines, '#' comments, section headers folded
// into dotted key prefixes.
std::map<std::string, std::string> parse_config_text(const std::string& text);

} // namespace nvdit
