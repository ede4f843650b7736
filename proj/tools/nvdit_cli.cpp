// Command-line front end: level tables, scattering spectra, measurement
// protocol statistics, pulse-bandwidth analysis, coherent-drive runs, sweeps,
// and scripted reproduction of the published tables/figures.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <future>
#include <iostream>

#include "nvdit/anchors.hpp"
#include "nvdit/pulse_shape.hpp"
#include "nvdit/table_io.hpp"

using namespace nvdit;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;
  // physical overrides
  double cooperativity = -1;
  double eta_source = -1;
  double eta_detect = -1;
  double ms0_branch = -1;
  double bz_mt = -1;
  double sigma_t_ns = -1;
  double mean_photons = -1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "configuration file (key = value)");
  app->add_option("--out", c.out_dir, "output directory");
  app->add_option("--threads", c.threads, "worker threads for sweeps")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--cooperativity", c.cooperativity, "cavity cooperativity C")
      ->check(CLI::PositiveNumber);
  app->add_option("--eta-source", c.eta_source, "single-photon source efficiency")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--eta-detect", c.eta_detect, "detection efficiency")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--ms0-branch", c.ms0_branch, "readout-level singlet branching")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--bz-mT", c.bz_mt, "axial magnetic field in mT")
      ->check(CLI::Range(0.0, 100.0));
  app->add_option("--sigma-t-ns", c.sigma_t_ns, "Gaussian pulse time std-dev")
      ->check(CLI::PositiveNumber);
  app->add_option("--mean-photons", c.mean_photons, "coherent pulse |alpha|^2")
      ->check(CLI::NonNegativeNumber);
}

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : RunConfig::load(c.config_path);
  if (c.cooperativity > 0) cfg.cooperativity = c.cooperativity;
  if (c.eta_source >= 0) cfg.protocol.eta_source = c.eta_source;
  if (c.eta_detect >= 0) cfg.protocol.eta_detect = c.eta_detect;
  if (c.ms0_branch >= 0) cfg.protocol.ms0_branch = c.ms0_branch;
  if (c.bz_mt >= 0) cfg.field.bz_tesla = c.bz_mt * 1e-3;
  if (c.sigma_t_ns > 0) cfg.pulse.sigma_t_ns = c.sigma_t_ns;
  if (c.mean_photons >= 0) cfg.coherent.mean_photons = c.mean_photons;
  if (c.threads > 0) cfg.threads = c.threads;
  cfg.validate();
  std::filesystem::create_directories(c.out_dir);
  cfg.save(c.out_dir + "/effective_config.ini");
  return cfg;
}

LevelTable table_of(const RunConfig& cfg) {
  return diagonalize_esm(cfg.esm, cfg.gsm, cfg.field, default_lifetimes_0mt(),
                         default_ms_branch_0mt(cfg.low_ms_branch_0mt));
}

int cmd_levels(const Common& com) {
  RunConfig cfg = load_config(com);
  LevelTable t = table_of(cfg);

  json out;
  out["bz_mT"] = cfg.field.bz_tesla * 1e3;
  out["readout_level"] = t.readout_level() + 1;
  const char* spins[3] = {"+1", "0", "-1"};
  for (int k = 0; k < 6; ++k) {
    const EsmLevel& lv = t.levels[k];
    json jl;
    jl["label"] = "M" + std::to_string(k + 1);
    jl["energy_GHz"] = lv.energy_ghz();
    jl["lifetime_ns"] = lv.lifetime_ns;
    jl["ms_branch"] = lv.ms_branch;
    // degenerate doublets are flagged at zero field
    bool degenerate = false;
    for (int j = 0; j < 6; ++j)
      if (j != k && std::abs(t.levels[j].energy - lv.energy) < ghz(1e-3)) degenerate = true;
    jl["degenerate_doublet"] = degenerate;
    for (int s = 0; s < 3; ++s) {
      jl["sigma_plus"][spins[s]] = std::abs(lv.sigma_plus[s]);
      jl["sigma_minus"][spins[s]] = std::abs(lv.sigma_minus[s]);
    }
    out["levels"].push_back(jl);
  }
  for (int k = 0; k < 6; ++k) out["ground_energy_GHz"].push_back(to_ghz(t.ground.energy[k]));
  write_text_file(com.out_dir + "/levels.json", out.dump(2) + "\n");

  CsvWriter csv(com.out_dir + "/levels.csv",
                {"level", "energy_GHz", "lifetime_ns", "ms_branch", "sigma_plus_-1",
                 "sigma_plus_0", "sigma_plus_+1", "sigma_minus_-1", "sigma_minus_0",
                 "sigma_minus_+1"});
  for (int k = 0; k < 6; ++k) {
    const EsmLevel& lv = t.levels[k];
    csv.row({double(k + 1), lv.energy_ghz(), lv.lifetime_ns, lv.ms_branch,
             std::abs(lv.sigma_plus[kSpinMinus1]), std::abs(lv.sigma_plus[kSpinZero]),
             std::abs(lv.sigma_plus[kSpinPlus1]), std::abs(lv.sigma_minus[kSpinMinus1]),
             std::abs(lv.sigma_minus[kSpinZero]), std::abs(lv.sigma_minus[kSpinPlus1])});
  }
  std::cout << "wrote " << com.out_dir << "/levels.{json,csv}\n";
  return kExitOk;
}

int cmd_spectrum(const Common& com) {
  RunConfig cfg = load_config(com);
  LevelTable t = table_of(cfg);
  CavityParams cav = CavityParams::from_cooperativity(cfg.cooperativity, t, cfg.kappa);
  cav.elastic_retained = cfg.elastic_retained;
  CouplingSystem sys = build_coupling(cav, t);
  std::vector<double> grid = default_grid(cfg.kappa);
  ScatteringSpectrum spec = reflection_spectrum(sys, grid, {0, +1, -1});

  CsvWriter csv(com.out_dir + "/spectrum.csv", {"detuning_GHz", "spin", "R", "T", "S_loss",
                                                "M_loss", "Re_r", "Im_r", "Re_t", "Im_t"});
  for (size_t i = 0; i < grid.size(); ++i)
    for (int ms : {+1, 0, -1}) {
      const ScatterPoint& p = spec.by_spin[spin_index(ms)][i];
      csv.row({to_ghz(grid[i]), double(ms), p.R, p.T, p.S_loss, p.M_loss, p.r.real(), p.r.imag(),
               p.t.real(), p.t.imag()});
    }
  std::cout << "wrote " << com.out_dir << "/spectrum.csv (" << grid.size() << " points)\n";
  return kExitOk;
}

int cmd_protocol(const Common& com, int max_pulses, double p_s) {
  RunConfig cfg = load_config(com);
  if (max_pulses > 0) cfg.protocol.max_pulses = max_pulses;
  if (p_s > 0) cfg.protocol.p_s_target = p_s;
  cfg.validate();
  LevelTable t = table_of(cfg);
  CavityParams cav = CavityParams::from_cooperativity(cfg.cooperativity, t, cfg.kappa);
  cav.elastic_retained = cfg.elastic_retained;
  PulseChannels ch = derive_pulse_channels(build_coupling(cav, t), cfg.protocol);

  ProtocolResult res =
      run_protocol(ProtocolState::standard_superposition(), cfg.protocol, ch, nullptr);
  FidelityCurve curve = fidelity_curve(cfg.protocol, ch, cfg.protocol.max_pulses);

  json out;
  out["cooperativity"] = cfg.cooperativity;
  out["eta_source"] = cfg.protocol.eta_source;
  out["eta_detect"] = cfg.protocol.eta_detect;
  out["ms0_branch"] = cfg.protocol.ms0_branch;
  out["F"] = res.f;
  out["F0"] = res.f0;
  out["F_plus1"] = res.f_plus1;
  out["n_ave"] = res.n_ave;
  out["n_ave_std"] = res.n_ave_std;
  out["n_ft"] = res.n_ft;
  out["pulses"] = res.pulses;
  out["duration_ns"] = res.duration_ns;
  out["n_opt"] = curve.argmax();
  out["F_opt"] = curve.max();
  write_text_file(com.out_dir + "/protocol.json", out.dump(2) + "\n");

  CsvWriter csv(com.out_dir + "/protocol_curve.csv", {"n", "F", "F0", "F1"});
  for (size_t i = 0; i < curve.f.size(); ++i)
    csv.row({double(i + 1), curve.f[i], curve.f0[i], curve.f1[i]});
  std::cout << "wrote " << com.out_dir << "/protocol.{json,_curve.csv}\n";
  return kExitOk;
}

int cmd_bandwidth(const Common& com, double kappa_mhz, double target) {
  RunConfig cfg = load_config(com);
  double kappa = kappa_mhz > 0 ? ghz(kappa_mhz * 1e-3) : cfg.kappa;
  double sigma_t = cfg.pulse.sigma_t_ns;

  json out;
  out["sigma_t_ns"] = sigma_t;
  out["kappa_MHz"] = to_ghz(kappa) * 1e3;
  out["false_reflection"] = average_false_reflection(sigma_t, kappa);
  out["peak_retention"] = peak_retention(sigma_t, kappa);
  out["target"] = target;
  out["kappa_threshold_MHz"] = to_ghz(solve_threshold(target, ThresholdVariable::Kappa, sigma_t)) * 1e3;
  out["sigma_t_threshold_ns"] = solve_threshold(target, ThresholdVariable::SigmaT, kappa);
  write_text_file(com.out_dir + "/bandwidth.json", out.dump(2) + "\n");

  // fidelity vs pulse number for the strong-coupling classifier
  BayesClassifier clf;
  clf.p1 = 0.552 * average_false_reflection(sigma_t, kappa);
  CsvWriter csv(com.out_dir + "/bandwidth_fidelity.csv",
                {"n", "threshold_clicks", "F", "F_no_decay"});
  for (int n = 1; n <= 40; ++n) {
    ClassifyResult r = classify(clf, n);
    csv.row({double(n), double(r.threshold), r.fidelity, r.fidelity_no_decay});
  }
  std::cout << "wrote " << com.out_dir << "/bandwidth.{json,_fidelity.csv}\n";
  return kExitOk;
}

int cmd_coherent(const Common& com, int fock_max, double tau_p_ns) {
  RunConfig cfg = load_config(com);
  if (fock_max > 0) cfg.coherent.fock_max = fock_max;
  if (tau_p_ns > 0) cfg.coherent.tau_p_ns = tau_p_ns;
  cfg.validate();
  LevelTable t = table_of(cfg);
  CavityParams cav = CavityParams::from_cooperativity(cfg.cooperativity, t, cfg.kappa);
  cav.elastic_retained = cfg.elastic_retained;

  LindbladSystem sys = build_lindblad(cfg.coherent, cav, t, 0, cfg.protocol.ms0_branch);
  Trajectory traj = lindblad_evolve(cfg.coherent, sys);

  CsvWriter csv(com.out_dir + "/coherent_trajectory.csv",
                {"t_ns", "cavity_n", "excited", "shelf", "g_plus1", "g_0", "g_minus1",
                 "joint_excited_photon", "reflected_flux"});
  for (const auto& p : traj.points)
    csv.row({p.t, p.cavity_n, p.excited_pop, p.shelf_pop, p.ground_pop[kSpinPlus1],
             p.ground_pop[kSpinZero], p.ground_pop[kSpinMinus1], p.joint_excited_photon,
             p.reflected_flux});

  double p_r = solve_scattering(build_coupling(cav, t), 0, 0.0).R;
  json out;
  out["mean_photons"] = cfg.coherent.mean_photons;
  out["cooperativity"] = cfg.cooperativity;
  out["fock_max"] = sys.fock_dim - 1;
  out["trace_drift"] = traj.trace_drift;
  out["reflected_photons"] = traj.reflected_photons;
  out["capture_prob"] = traj.capture_prob;
  out["joint_excited_photon_probability"] =
      joint_excited_photon_probability(traj, cfg.coherent.tau_p_ns);
  out["p2plus_formula"] = p2plus_estimate(cfg.coherent, p_r, cfg.kappa);
  write_text_file(com.out_dir + "/coherent.json", out.dump(2) + "\n");
  std::cout << "wrote " << com.out_dir << "/coherent.{json,_trajectory.csv}\n";
  return kExitOk;
}

int cmd_sweep(const Common& com, const std::string& variable, double lo, double hi, int points,
              int n_max) {
  RunConfig cfg = load_config(com);
  LevelTable t = table_of(cfg);
  if (points < 2 || !(hi > lo)) throw ConfigError("sweep: need points >= 2 and hi > lo");

  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) xs[i] = lo + (hi - lo) * i / (points - 1);

  int workers = cfg.threads > 0 ? cfg.threads
                                : std::max(1u, std::thread::hardware_concurrency());
  std::vector<SweepPoint> results(points);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= points) return;
      RunConfig local = cfg;
      double x = xs[i];
      if (variable == "cooperativity") local.cooperativity = x;
      else if (variable == "eta_source") local.protocol.eta_source = x;
      else if (variable == "eta_detect") local.protocol.eta_detect = x;
      else if (variable == "ms0_branch") local.protocol.ms0_branch = x;
      else throw ConfigError("sweep: unknown variable " + variable);
      local.validate();
      CavityParams cav = CavityParams::from_cooperativity(local.cooperativity, t, local.kappa);
      PulseChannels ch = derive_pulse_channels(build_coupling(cav, t), local.protocol);
      FidelityCurve curve = fidelity_curve(local.protocol, ch, n_max);
      double p_r = local.protocol.eta_source * local.protocol.eta_detect * ch.reflect[kSpinZero];
      SweepPoint pt;
      pt.cooperativity = local.cooperativity;
      pt.eta_source = local.protocol.eta_source;
      pt.eta_detect = local.protocol.eta_detect;
      pt.ms0_branch = local.protocol.ms0_branch;
      pt.n_opt = curve.argmax();
      pt.f_opt = curve.max();
      pt.n_ave = p_r > 0 ? 1.0 / p_r : 0.0;
      pt.n_ft = (p_r > 1e-9 && p_r < 1.0) ? n_ft(local.protocol.p_s_target, p_r) : 0;
      results[i] = pt;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  CsvWriter csv(com.out_dir + "/sweep.csv",
                {"cooperativity", "eta_source", "eta_detect", "ms0_branch", "n_opt", "F_opt",
                 "n_ave", "n_ft"});
  for (const SweepPoint& p : results)
    csv.row({p.cooperativity, p.eta_source, p.eta_detect, p.ms0_branch, double(p.n_opt), p.f_opt,
             p.n_ave, double(p.n_ft)});
  std::cout << "wrote " << com.out_dir << "/sweep.csv (" << points << " points, " << workers
            << " workers)\n";
  return kExitOk;
}

int cmd_reproduce(const Common& com, const std::string& target) {
  RunConfig cfg = load_config(com);
  auto rep = reproduce_target(target, cfg, com.out_dir);
  if (!rep) {
    std::cerr << "unknown reproduce target: " << target << "\n";
    return kExitConfigError;
  }
  std::string text = rep->to_text();
  std::cout << text;
  write_text_file(com.out_dir + "/" + target + "_report.txt", text);
  return rep->all_pass() ? kExitOk : kExitAnchorFailure;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"nvdit: dipole-induced-transparency spin readout simulator"};
  app.require_subcommand(1);

  Common com;
  int max_pulses = -1, sweep_points = 21, n_max = 300;
  double p_s = -1, kappa_mhz = -1, bw_target = 0.001, lo = 0.5, hi = 20.0;
  std::string reproduce_name, sweep_var = "cooperativity";

  auto* levels = app.add_subcommand("levels", "level table at the configured field");
  add_common(levels, com);
  auto* spectrum = app.add_subcommand("spectrum", "reflection/transmission spectra");
  add_common(spectrum, com);
  auto* protocol = app.add_subcommand("protocol", "single-photon readout statistics");
  add_common(protocol, com);
  protocol->add_option("--max-pulses", max_pulses, "pulse cap");
  protocol->add_option("--p-s-target", p_s, "stop-limit confidence");
  auto* bandwidth = app.add_subcommand("bandwidth", "finite-bandwidth analysis");
  add_common(bandwidth, com);
  bandwidth->add_option("--kappa-MHz", kappa_mhz, "cavity linewidth in MHz");
  bandwidth->add_option("--target", bw_target, "false-reflection target");
  int fock_max = 0;
  double tau_p_ns = -1;
  auto* coherent = app.add_subcommand("coherent", "weak-coherent-pulse master equation");
  add_common(coherent, com);
  coherent->add_option("--fock-max", fock_max, "Fock truncation (0: automatic)")
      ->check(CLI::NonNegativeNumber);
  coherent->add_option("--tau-p-ns", tau_p_ns, "pulse duration")->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep", "sweep a protocol parameter");
  add_common(sweep, com);
  sweep->add_option("--variable", sweep_var, "cooperativity|eta_source|eta_detect|ms0_branch");
  sweep->add_option("--lo", lo, "range start");
  sweep->add_option("--hi", hi, "range end");
  sweep->add_option("--points", sweep_points, "grid points");
  sweep->add_option("--n-max", n_max, "pulse horizon");
  auto* reproduce = app.add_subcommand("reproduce", "rerun a published table/figure");
  add_common(reproduce, com);
  reproduce
      ->add_option("target", reproduce_name,
                   "table1|table2|fig3|fig4|fig5|fig6|fig7|fig8|sec4a")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (levels->parsed()) return cmd_levels(com);
    if (spectrum->parsed()) return cmd_spectrum(com);
    if (protocol->parsed()) return cmd_protocol(com, max_pulses, p_s);
    if (bandwidth->parsed()) return cmd_bandwidth(com, kappa_mhz, bw_target);
    if (coherent->parsed()) return cmd_coherent(com, fock_max, tau_p_ns);
    if (sweep->parsed()) return cmd_sweep(com, sweep_var, lo, hi, sweep_points, n_max);
    if (reproduce->parsed()) return cmd_reproduce(com, reproduce_name);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalError;
  }
  return kExitConfigError;
}
