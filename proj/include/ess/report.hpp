#pragma once

#include <map>
#include <optional>
#include <string>

#include "ess/inference.hpp"
#include "ess/loss.hpp"

namespace ess {

/// Resolved configuration echoed verbatim into every artifact.
struct RunInfo {
  std::string command;
  std::string data_path;
  std::string schema_text;
  std::string learner;
  std::string learner_display;
  std::string loss;
  double alpha = 0.05;
  std::string variance_mode;
  Index regime_threshold = 400;
  std::uint64_t seed = 0;
  std::string grid_text;
  std::string outcome_name;
  Index n_rows = 0;
  std::optional<int> arm;
};

struct RunArtifacts {
  std::string result_json;
  std::string table_tsv;
  std::string summary_text;
};

/// Renders the three artifacts for one sequential run: a nested result
/// record, a flat per-size table, and the human summary block. Squared-loss
/// runs additionally carry RMSE-scale values via the delta method. Output is
/// a pure function of the inputs; no timestamps, so reruns are byte-stable.
RunArtifacts render_run(const RunInfo& info, const SequentialResult& seq,
                        const RiskEstimate& fixed_rule, const LossFunction& loss);

std::string render_experiment_json(const std::string& name, const std::string& config_digest,
                                   Index replications, double estimate, double mc_se,
                                   double tolerance, bool pass,
                                   const std::map<std::string, double>& details);

/// Fixed-width significand formatting shared by the table writers.
std::string format_number(double v);

}  // namespace ess
