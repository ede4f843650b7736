#include "nvdit/protocol.hpp"

#include <cmath>

namespace nvdit {

void ProtocolConfig::validate() const {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(eta_source) || !in01(eta_detect) || !in01(ms0_branch) || !in01(dark_count_prob) ||
      !in01(p_s_target))
    throw std::invalid_argument("ProtocolConfig: probabilities must lie in [0,1]");
  if (!(pulse_spacing_ns > 0)) throw std::invalid_argument("ProtocolConfig: spacing must be positive");
  if (max_pulses < 1 || max_pulses > 10000)
    throw std::invalid_argument("ProtocolConfig: max_pulses must lie in [1, 1e4]");
  msm.validate();
}

PulseChannels derive_pulse_channels(const CouplingSystem& sys, const ProtocolConfig& cfg) {
  cfg.validate();
  PulseChannels ch;
  for (int ms : {+1, 0, -1}) {
    int si = spin_index(ms);
    ScatterPoint pt = solve_scattering(sys, ms, 0.0);
    ch.reflect[si] = (ms == 0) ? pt.R : 0.0; // dark-state reflection minimum ~1e-9, truncated
    ch.click[si] = cfg.eta_source * cfg.eta_detect * ch.reflect[si];

    double cap = 0.0;
    std::array<double, 3> flip{};
    for (const CoupledLevel& cl : sys.levels[si]) {
      double flux = pt.level_flux[cl.level];
      // the readout-class levels (dominantly m_s = 0) take the protocol's own branching knob
      double branch = (cl.dest[kSpinZero] > 0.5) ? cfg.ms0_branch : cl.ms_branch;
      cap += flux * branch;
      for (int k = 0; k < 3; ++k)
        if (k != si) flip[k] += flux * (1.0 - branch) * cl.dest[k];
    }
    ch.capture[si] = cfg.eta_source * cap;
    for (int k = 0; k < 3; ++k) ch.flip[si][k] = cfg.eta_source * flip[k];
  }
  return ch;
}

double ProtocolState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<complex<double>, 6, 6>> es(rho_g);
  return es.eigenvalues().minCoeff();
}

void ProtocolState::check_invariants(double tol) const {
  if (std::abs(trace() - 1.0) > tol)
    throw std::runtime_error("ProtocolState: trace + shelf population deviates from one");
  if (min_eigenvalue() < -1e-12) throw std::runtime_error("ProtocolState: density matrix not PSD");
  if (p_ms.minCoeff() < -1e-12) throw std::runtime_error("ProtocolState: negative shelf population");
}

namespace {
int gsm_index(int ms, int mn2) { return spin_index(ms) * 2 + (mn2 > 0 ? 0 : 1); }
} // namespace

ProtocolState ProtocolState::pure(int ms, int mn2) {
  ProtocolState st;
  st.rho_g.setZero();
  st.rho_g(gsm_index(ms, mn2), gsm_index(ms, mn2)) = 1.0;
  return st;
}

ProtocolState ProtocolState::standard_superposition() {
  ProtocolState st;
  st.rho_g.setZero();
  int a = gsm_index(0, -1), b = gsm_index(+1, +1);
  st.rho_g(a, a) = st.rho_g(b, b) = 0.5;
  st.rho_g(a, b) = st.rho_g(b, a) = 0.5;
  return st;
}

PulseOutcome pulse_update(const ProtocolState& st, const PulseChannels& ch,
                          const ProtocolConfig& cfg) {
  const double dark = cfg.dark_count_prob;

  // branch weights
  double p_reflect_click = 0.0;
  for (int si = 0; si < 3; ++si)
    for (int nu = 0; nu < 2; ++nu)
      p_reflect_click += ch.click[si] * st.rho_g(si * 2 + nu, si * 2 + nu).real();
  // dark counts fire on the remaining weight (shelved population included)
  double p_click = p_reflect_click + dark * (st.trace() - p_reflect_click);
  p_click = std::min(1.0, std::max(0.0, p_click));

  PulseOutcome out;
  out.click_prob = p_click;

  // click branch: reflection projects onto the clicking spin components and
  // empties the shelf; dark clicks leave the no-click-updated state behind
  ProtocolState click;
  click.rho_g.setZero();
  click.p_ms.setZero();
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      click.rho_g(a, b) = std::sqrt(ch.click[a / 2] * ch.click[b / 2]) * st.rho_g(a, b);

  // no-click branch: Kraus factors sqrt(q_i) on the coherences, incoherent
  // spin transitions and shelving on the diagonal
  ProtocolState nc;
  nc.rho_g.setZero();
  nc.p_ms = st.p_ms;
  std::array<double, 3> q{};
  for (int si = 0; si < 3; ++si) q[si] = ch.survive(si);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      if (a == b) continue;
      nc.rho_g(a, b) = std::sqrt(q[a / 2] * q[b / 2]) * st.rho_g(a, b);
    }
  for (int si = 0; si < 3; ++si)
    for (int nu = 0; nu < 2; ++nu) {
      int d = si * 2 + nu;
      double pop = st.rho_g(d, d).real();
      nc.rho_g(d, d) += q[si] * pop;
      nc.p_ms(nu) += ch.capture[si] * pop;
      for (int k = 0; k < 3; ++k)
        if (k != si) nc.rho_g(k * 2 + nu, k * 2 + nu) += ch.flip[si][k] * pop;
    }

  if (dark > 0.0) {
    // a dark count fires on the unreflected weight and drags the no-click
    // state into the click branch; coincident real clicks stay projected
    click.rho_g += nc.rho_g * dark;
    click.p_ms += nc.p_ms * dark;
    nc.rho_g *= (1.0 - dark);
    nc.p_ms *= (1.0 - dark);
  }

  double wc = click.trace();
  double wn = nc.trace();
  if (wc < -1e-12 || wn < -1e-12 || std::abs(wc + wn - st.trace()) > 1e-10)
    throw std::runtime_error("pulse_update: branch weights violate probability conservation");
  if (wc > 0) {
    click.rho_g /= wc;
    click.p_ms /= wc;
  }
  if (wn > 0) {
    nc.rho_g /= wn;
    nc.p_ms /= wn;
  }
  click.path_prob = st.path_prob * p_click;
  nc.path_prob = st.path_prob * (1.0 - p_click);
  out.click = click;
  out.no_click = nc;
  return out;
}

void apply_spacing(ProtocolState& st, const ProtocolConfig& cfg) {
  if (!cfg.metastable_reentry) return;
  double q_ret = 1.0 - std::exp(-cfg.pulse_spacing_ns / cfg.msm.lifetime_long_ns);
  auto exits = cfg.msm.exit_distribution();
  for (int nu = 0; nu < 2; ++nu) {
    double back = q_ret * st.p_ms(nu);
    for (int si = 0; si < 3; ++si) st.rho_g(si * 2 + nu, si * 2 + nu) += back * exits[si];
    st.p_ms(nu) -= back;
  }
}

namespace {

void settle(ProtocolState& st, const ProtocolConfig& cfg) {
  if (!cfg.settle_metastable) return;
  auto exits = cfg.msm.exit_distribution();
  for (int nu = 0; nu < 2; ++nu) {
    for (int si = 0; si < 3; ++si) st.rho_g(si * 2 + nu, si * 2 + nu) += st.p_ms(nu) * exits[si];
    st.p_ms(nu) = 0.0;
  }
}

// overlap of a normalized terminal state with the classification target
double branch_fidelity(const ProtocolState& terminal, int classified, const ProtocolConfig& cfg,
                       const ProtocolState& initial) {
  ProtocolState st = terminal;
  settle(st, cfg);
  if (cfg.target == FidelityTarget::InitialOverlap) {
    return (initial.rho_g * st.rho_g).trace().real();
  }
  // classification target: the m_s projector of the classified label
  int si = spin_index(classified);
  return st.rho_g(si * 2 + 0, si * 2 + 0).real() + st.rho_g(si * 2 + 1, si * 2 + 1).real();
}

} // namespace

int n_ft(double p_s, double p_r) {
  if (!(p_r > 1e-9) || !(p_r < 1.0))
    throw std::domain_error("n_ft: undefined at the P_R endpoints (and below 1e-9)");
  if (!(p_s > 0) || !(p_s < 1)) throw std::domain_error("n_ft: p_s must lie in (0,1)");
  double n = std::log(1.0 - p_s) / std::log(1.0 - p_r);
  return static_cast<int>(std::ceil(n - 1e-12));
}

TrialStats n_ave(double p_r) {
  if (!(p_r > 0) || p_r > 1.0) throw std::domain_error("n_ave: P_R must lie in (0,1]");
  return {1.0 / p_r, std::sqrt(1.0 - p_r) / p_r};
}

double OutcomeTree::prob_sum() const {
  double s = 0;
  for (const auto& b : branches) s += b.prob;
  return s;
}

namespace {

struct CurveAccumulator {
  // running no-click branch (normalized) and its weight
  ProtocolState nc;
  double weight = 1.0;
  double clicked_fidelity = 0.0; // sum over click branches of prob * overlap
  double clicked_prob = 0.0;
};

// advance one pulse; returns the click-branch (prob, state)
std::pair<double, ProtocolState> step(CurveAccumulator& acc, const PulseChannels& ch,
                                      const ProtocolConfig& cfg) {
  PulseOutcome o = pulse_update(acc.nc, ch, cfg);
  double p_click_abs = acc.weight * o.click_prob;
  apply_spacing(o.click, cfg);
  apply_spacing(o.no_click, cfg);
  acc.nc = o.no_click;
  acc.weight *= (1.0 - o.click_prob);
  return {p_click_abs, o.click};
}

} // namespace

ProtocolResult run_protocol(const ProtocolState& initial, const ProtocolConfig& cfg,
                            const PulseChannels& ch, OutcomeTree* tree, int tree_budget) {
  cfg.validate();
  initial.check_invariants();
  int n = cfg.max_pulses;

  auto run_component = [&](const ProtocolState& init, bool record) {
    CurveAccumulator acc;
    acc.nc = init;
    double fid = 0.0;
    std::string hist;
    for (int k = 1; k <= n; ++k) {
      auto [p_click, click_state] = step(acc, ch, cfg);
      fid += p_click * branch_fidelity(click_state, 0, cfg, init);
      if (record && tree) {
        if (static_cast<int>(tree->branches.size()) >= tree_budget)
          throw std::runtime_error("run_protocol: outcome-tree budget exceeded");
        Branch b;
        b.history = hist + "c";
        b.classified = 0;
        b.prob = p_click;
        b.truncated = (k < n);
        b.state = click_state;
        tree->branches.push_back(std::move(b));
      }
      hist += "n";
    }
    fid += acc.weight * branch_fidelity(acc.nc, +1, cfg, init);
    if (record && tree) {
      Branch b;
      b.history = hist;
      b.classified = +1;
      b.prob = acc.weight;
      b.truncated = false;
      b.state = acc.nc;
      tree->branches.push_back(std::move(b));
    }
    return fid;
  };

  ProtocolResult res;
  res.pulses = n;
  res.duration_ns = n * cfg.pulse_spacing_ns;
  res.f0 = run_component(ProtocolState::pure(0, -1), false);
  res.f_plus1 = run_component(ProtocolState::pure(+1, +1), false);
  res.f = run_component(initial, true);

  // trial statistics from the bare readout reflection of a pure |0> input
  double p_r = cfg.eta_source * cfg.eta_detect * ch.reflect[kSpinZero];
  if (p_r > 1e-9 && p_r < 1.0) {
    res.n_ft = n_ft(cfg.p_s_target, p_r);
    auto stats = n_ave(p_r);
    res.n_ave = stats.mean;
    res.n_ave_std = stats.stddev;
  } else if (p_r >= 1.0) {
    res.n_ft = 1;
    res.n_ave = 1.0;
  }
  return res;
}

int FidelityCurve::argmax() const {
  int best = 0;
  for (int i = 1; i < static_cast<int>(f.size()); ++i)
    if (f[i] > f[best]) best = i;
  return best + 1;
}

double FidelityCurve::max() const { return f[argmax() - 1]; }

int FidelityCurve::plateau_n(double eps) const {
  double fm = max();
  for (int i = 0; i < static_cast<int>(f.size()); ++i)
    if (f[i] >= fm - eps) return i + 1;
  return static_cast<int>(f.size());
}

FidelityCurve fidelity_curve(const ProtocolConfig& cfg, const PulseChannels& ch, int n_max) {
  FidelityCurve curve;
  curve.f.reserve(n_max);
  curve.f0.reserve(n_max);
  curve.f1.reserve(n_max);

  std::array<CurveAccumulator, 2> acc;
  std::array<ProtocolState, 2> init = {ProtocolState::pure(0, -1), ProtocolState::pure(+1, +1)};
  acc[0].nc = init[0];
  acc[1].nc = init[1];
  for (int k = 1; k <= n_max; ++k) {
    std::array<double, 2> fn{};
    for (int c = 0; c < 2; ++c) {
      auto [p_click, click_state] = step(acc[c], ch, cfg);
      acc[c].clicked_prob += p_click;
      acc[c].clicked_fidelity += p_click * branch_fidelity(click_state, 0, cfg, init[c]);
      fn[c] = acc[c].clicked_fidelity + acc[c].weight * branch_fidelity(acc[c].nc, +1, cfg, init[c]);
    }
    curve.f0.push_back(fn[0]);
    curve.f1.push_back(fn[1]);
    curve.f.push_back(0.5 * (fn[0] + fn[1]));
  }
  return curve;
}

std::vector<SweepPoint> fidelity_sweep(const LevelTable& table, const std::vector<double>& c_values,
                                       const std::vector<double>& eta_source,
                                       const std::vector<double>& eta_detect,
                                       const ProtocolConfig& base, int n_max) {
  std::vector<SweepPoint> out;
  for (double c : c_values) {
    CavityParams cav = CavityParams::from_cooperativity(c, table);
    CouplingSystem sys = build_coupling(cav, table);
    for (double es : eta_source)
      for (double ed : eta_detect) {
        ProtocolConfig cfg = base;
        cfg.eta_source = es;
        cfg.eta_detect = ed;
        PulseChannels ch = derive_pulse_channels(sys, cfg);
        FidelityCurve curve = fidelity_curve(cfg, ch, n_max);
        SweepPoint pt;
        pt.cooperativity = c;
        pt.eta_source = es;
        pt.eta_detect = ed;
        pt.ms0_branch = cfg.ms0_branch;
        pt.n_opt = curve.argmax();
        pt.f_opt = curve.max();
        double p_r = es * ed * ch.reflect[kSpinZero];
        pt.n_ave = (p_r > 0) ? 1.0 / p_r : 0.0;
        pt.n_ft = (p_r > 1e-9 && p_r < 1.0) ? n_ft(base.p_s_target, p_r) : (p_r >= 1.0 ? 1 : 0);
        out.push_back(pt);
      }
  }
  return out;
}

} // namespace nvdit
