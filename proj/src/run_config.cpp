#include "nvdit/run_config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace nvdit {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double get_num(const std::map<std::string, std::string>& kv, const std::string& key, double dflt) {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: invalid number for '" + key + "': " + it->second);
  }
}

int get_int(const std::map<std::string, std::string>& kv, const std::string& key, int dflt) {
  double v = get_num(kv, key, dflt);
  if (v != std::floor(v)) throw ConfigError("config: '" + key + "' must be an integer");
  return static_cast<int>(v);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

} // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(lineno));
    kv[section.empty() ? key : section + "." + key] = val;
  }
  return kv;
}

void RunConfig::validate() const {
  try {
    gsm.validate();
    esm.validate();
    field.validate();
    msm.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(kappa > 0)) throw ConfigError("config: cavity.kappa_ghz must be positive");
  if (!(cooperativity > 0)) throw ConfigError("config: cavity.cooperativity must be positive");
  if (!(elastic_retained > 0) || elastic_retained > 1)
    throw ConfigError("config: cavity.elastic_retained must lie in (0,1]");
  if (!(quantum_efficiency >= 0.0) || quantum_efficiency > 1.0)
    throw ConfigError("config: cavity.quantum_efficiency must lie in [0,1]");
  if (low_ms_branch_0mt < 0 || low_ms_branch_0mt > 0.05)
    throw ConfigError("config: levels.low_ms_branch exceeds the published 0-1% band scale");
  try {
    protocol.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(pulse.sigma_t_ns > 0)) throw ConfigError("config: pulse.sigma_t_ns must be positive");
  try {
    coherent.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (threads < 0) throw ConfigError("config: threads must be >= 0");
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  c.gsm.d_gsm = ghz(get_num(kv, "gsm.d_ghz", to_ghz(c.gsm.d_gsm)));
  c.gsm.g_par = get_num(kv, "gsm.g_par", c.gsm.g_par);
  c.gsm.g_par_n = get_num(kv, "gsm.g_par_n", c.gsm.g_par_n);
  c.gsm.mu_b = ghz(get_num(kv, "gsm.mu_b_ghz_per_t", to_ghz(c.gsm.mu_b)));
  c.gsm.mu_n = ghz(get_num(kv, "gsm.mu_n_ghz_per_t", to_ghz(c.gsm.mu_n)));

  c.esm.d_par = ghz(get_num(kv, "esm.d_par_ghz", to_ghz(c.esm.d_par)));
  c.esm.d_perp = ghz(get_num(kv, "esm.d_perp_ghz", to_ghz(c.esm.d_perp)));
  c.esm.lambda_par = ghz(get_num(kv, "esm.lambda_par_ghz", to_ghz(c.esm.lambda_par)));
  c.esm.lambda_perp = ghz(get_num(kv, "esm.lambda_perp_ghz", to_ghz(c.esm.lambda_perp)));
  c.esm.l_par = get_num(kv, "esm.l_par", c.esm.l_par);
  c.esm.g_par = get_num(kv, "esm.g_par", c.esm.g_par);

  c.field.bz_tesla = get_num(kv, "field.bz_mt", c.field.bz_tesla * 1e3) * 1e-3;

  c.msm.lifetime_long_ns = get_num(kv, "metastable.lifetime_ns", c.msm.lifetime_long_ns);
  c.msm.flip_from_plus1 = get_num(kv, "metastable.flip_from_plus1", c.msm.flip_from_plus1);
  c.msm.flip_from_0 = get_num(kv, "metastable.flip_from_0", c.msm.flip_from_0);

  c.kappa = ghz(get_num(kv, "cavity.kappa_ghz", to_ghz(c.kappa)));
  c.cooperativity = get_num(kv, "cavity.cooperativity", c.cooperativity);
  c.elastic_retained = get_num(kv, "cavity.elastic_retained", c.elastic_retained);
  c.quantum_efficiency = get_num(kv, "cavity.quantum_efficiency", c.quantum_efficiency);
  c.gamma_rad = ghz(get_num(kv, "cavity.gamma_rad_ghz", to_ghz(c.gamma_rad)));
  c.low_ms_branch_0mt = get_num(kv, "levels.low_ms_branch", c.low_ms_branch_0mt);

  c.protocol.eta_source = get_num(kv, "protocol.eta_source", c.protocol.eta_source);
  c.protocol.eta_detect = get_num(kv, "protocol.eta_detect", c.protocol.eta_detect);
  c.protocol.max_pulses = get_int(kv, "protocol.max_pulses", c.protocol.max_pulses);
  c.protocol.p_s_target = get_num(kv, "protocol.p_s_target", c.protocol.p_s_target);
  c.protocol.pulse_spacing_ns = get_num(kv, "protocol.pulse_spacing_ns", c.protocol.pulse_spacing_ns);
  c.protocol.ms0_branch = get_num(kv, "protocol.ms0_branch", c.protocol.ms0_branch);
  c.protocol.dark_count_prob = get_num(kv, "protocol.dark_count_prob", c.protocol.dark_count_prob);
  c.protocol.metastable_reentry = get_int(kv, "protocol.metastable_reentry", 1) != 0;
  c.protocol.settle_metastable = get_int(kv, "protocol.settle_metastable", 1) != 0;
  c.protocol.target = get_int(kv, "protocol.fidelity_target_classified", 1) != 0
                          ? FidelityTarget::Classified
                          : FidelityTarget::InitialOverlap;
  c.protocol.msm = c.msm;

  c.pulse.sigma_t_ns = get_num(kv, "pulse.sigma_t_ns", c.pulse.sigma_t_ns);
  c.pulse.center_ns = get_num(kv, "pulse.center_ns", c.pulse.center_ns);

  c.coherent.mean_photons = get_num(kv, "coherent.mean_photons", c.coherent.mean_photons);
  c.coherent.tau_p_ns = get_num(kv, "coherent.tau_p_ns", c.coherent.tau_p_ns);
  c.coherent.fock_max = get_int(kv, "coherent.fock_max", c.coherent.fock_max);
  c.coherent.envelope = get_int(kv, "coherent.gaussian_envelope", 0) != 0 ? DriveEnvelope::Gaussian
                                                                          : DriveEnvelope::Flat;
  c.threads = get_int(kv, "run.threads", c.threads);

  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_map(parse_config_text(ss.str()));
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> kv;
  kv["gsm.d_ghz"] = fmt(to_ghz(gsm.d_gsm));
  kv["gsm.g_par"] = fmt(gsm.g_par);
  kv["gsm.g_par_n"] = fmt(gsm.g_par_n);
  kv["gsm.mu_b_ghz_per_t"] = fmt(to_ghz(gsm.mu_b));
  kv["gsm.mu_n_ghz_per_t"] = fmt(to_ghz(gsm.mu_n));
  kv["esm.d_par_ghz"] = fmt(to_ghz(esm.d_par));
  kv["esm.d_perp_ghz"] = fmt(to_ghz(esm.d_perp));
  kv["esm.lambda_par_ghz"] = fmt(to_ghz(esm.lambda_par));
  kv["esm.lambda_perp_ghz"] = fmt(to_ghz(esm.lambda_perp));
  kv["esm.l_par"] = fmt(esm.l_par);
  kv["esm.g_par"] = fmt(esm.g_par);
  kv["field.bz_mt"] = fmt(field.bz_tesla * 1e3);
  kv["metastable.lifetime_ns"] = fmt(msm.lifetime_long_ns);
  kv["metastable.flip_from_plus1"] = fmt(msm.flip_from_plus1);
  kv["metastable.flip_from_0"] = fmt(msm.flip_from_0);
  kv["cavity.kappa_ghz"] = fmt(to_ghz(kappa));
  kv["cavity.cooperativity"] = fmt(cooperativity);
  kv["cavity.elastic_retained"] = fmt(elastic_retained);
  kv["cavity.quantum_efficiency"] = fmt(quantum_efficiency);
  kv["cavity.gamma_rad_ghz"] = fmt(to_ghz(gamma_rad));
  kv["levels.low_ms_branch"] = fmt(low_ms_branch_0mt);
  kv["protocol.eta_source"] = fmt(protocol.eta_source);
  kv["protocol.eta_detect"] = fmt(protocol.eta_detect);
  kv["protocol.max_pulses"] = std::to_string(protocol.max_pulses);
  kv["protocol.p_s_target"] = fmt(protocol.p_s_target);
  kv["protocol.pulse_spacing_ns"] = fmt(protocol.pulse_spacing_ns);
  kv["protocol.ms0_branch"] = fmt(protocol.ms0_branch);
  kv["protocol.dark_count_prob"] = fmt(protocol.dark_count_prob);
  kv["protocol.metastable_reentry"] = protocol.metastable_reentry ? "1" : "0";
  kv["protocol.settle_metastable"] = protocol.settle_metastable ? "1" : "0";
  kv["protocol.fidelity_target_classified"] =
      protocol.target == FidelityTarget::Classified ? "1" : "0";
  kv["pulse.sigma_t_ns"] = fmt(pulse.sigma_t_ns);
  kv["pulse.center_ns"] = fmt(pulse.center_ns);
  kv["coherent.mean_photons"] = fmt(coherent.mean_photons);
  kv["coherent.tau_p_ns"] = fmt(coherent.tau_p_ns);
  kv["coherent.fock_max"] = std::to_string(coherent.fock_max);
  kv["coherent.gaussian_envelope"] = coherent.envelope == DriveEnvelope::Gaussian ? "1" : "0";
  kv["run.threads"] = std::to_string(threads);
  return kv;
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write " + path);
  out << "# effective configuration (all frequencies in GHz, times in ns)\n";
  for (const auto& [k, v] : to_map()) out << k << " = " << v << "\n";
}

} // namespace nvdit
