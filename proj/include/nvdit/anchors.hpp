#pragma once

#include <optional>
#include <string>

#include "nvdit/run_config.hpp"

namespace nvdit {

struct AnchorCheck {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

struct AnchorReport {
  std::string target;
  std::vector<AnchorCheck> checks;

  bool all_pass() const;
  std::string to_text() const;
  AnchorCheck& add(const std::string& name, double value, double expected, double tol,
                   const std::string& note = "");
  AnchorCheck& add_flag(const std::string& name, bool ok, const std::string& note = "");
};

struct Table2Row {
  double c, eta_source, eta_detect;
  double f_published;
  int n_published;
  double f_model = 0.0;
  int n_model = 0;
  double f_at_published_n = 0.0;
  double f_max = 0.0;
};

// The published fidelity/pulse-number grid over cooperativity and efficiencies.
std::vector<Table2Row> table2_rows();

// Each reproduce_* runs the published parameter set and compares against the
// stored anchors; artifacts are written under `out_dir` when given.
AnchorReport reproduce_table1(const RunConfig& cfg, const std::string& out_dir = "");
AnchorReport reproduce_table2(const RunConfig& cfg, const std::string& out_dir = "",
                              std::vector<Table2Row>* rows_out = nullptr);
AnchorReport reproduce_fig3(const RunConfig& cfg, const std::string& out_dir = "");
AnchorReport reproduce_fig4(const RunConfig& cfg, const std::string& out_dir = "");
AnchorReport reproduce_fig5(const RunConfig& cfg, const std::string& out_dir = "");
AnchorReport reproduce_fig6(const RunConfig& cfg, const std::string& out_dir = "");
AnchorReport reproduce_fig7(const RunConfig& cfg, const std::string& out_dir = "");
AnchorReport reproduce_fig8(const RunConfig& cfg, const std::string& out_dir = "");
AnchorReport reproduce_sec4a(const RunConfig& cfg, const std::string& out_dir = "");

std::optional<AnchorReport> reproduce_target(const std::string& name, const RunConfig& cfg,
                                             const std::string& out_dir = "");

} // namespace nvdit
