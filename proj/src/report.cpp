#include "ess/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "ess/stats.hpp"

namespace ess {

namespace {

using nlohmann::json;

json number_or_tag(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string format_percent(double level) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", level * 100.0);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  std::string out = s;
  while (out.size() < width) out.push_back(' ');
  return out;
}

json step_to_json(const StepResult& s, bool squared, double z) {
  json j;
  j["train_size"] = s.train_size;
  j["blocks"] = s.blocks;
  j["n_effective"] = s.n_effective;
  j["risk"] = s.e_cv;
  j["risk_se"] = s.risk_se;
  j["ci_half_width"] = z * s.risk_se;
  if (squared) {
    const RiskEstimate rmse = mse_to_rmse({s.e_cv, s.risk_se, s.n_effective});
    j["rmse"] = rmse.value;
    j["rmse_se"] = rmse.se;
  }
  j["rule_risk"] = s.e_rule;
  j["diff"] = s.diff;
  j["sigma_hat"] = s.sigma_hat;
  j["se"] = s.se;
  j["t_stat"] = number_or_tag(s.t_stat);
  j["lb"] = s.lb;
  j["rejected"] = s.rejected;
  j["regime"] = regime_name(s.regime);
  j["degenerate_variance"] = s.degenerate_variance;
  j["variance_clipped"] = s.variance_clipped;
  j["hyperparams"] = s.hyperparams;
  json comp;
  comp["train"] = s.variance.train_component;
  comp["test"] = s.variance.test_component;
  comp["cross"] = s.variance.cross_component;
  j["variance_components"] = comp;
  return j;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

RunArtifacts render_run(const RunInfo& info, const SequentialResult& seq,
                        const RiskEstimate& fixed_rule, const LossFunction& loss) {
  if (seq.steps.empty() && !seq.error) throw InvalidInputError("no executed steps to report");
  const bool squared = loss.kind == LossKind::Squared;
  const double z = normal_quantile(1.0 - seq.alpha);
  const MonotonicityReport mono = check_monotonicity(seq.steps);
  const Index plugin = plugin_ess(seq.steps);

  json root;
  root["meta"] = {{"tool", "ess"}, {"version", version()}};
  json cfg;
  cfg["command"] = info.command;
  cfg["data"] = info.data_path;
  cfg["schema"] = info.schema_text;
  cfg["learner"] = info.learner;
  cfg["loss"] = info.loss;
  cfg["alpha"] = seq.alpha;
  cfg["variance_mode"] = info.variance_mode;
  cfg["regime_threshold"] = info.regime_threshold;
  cfg["seed"] = info.seed;
  cfg["grid"] = info.grid_text;
  if (info.arm) cfg["arm"] = *info.arm;
  root["config"] = cfg;

  json rule;
  rule["risk"] = fixed_rule.value;
  rule["se"] = fixed_rule.se;
  rule["n_eval"] = fixed_rule.n;
  if (squared) {
    const RiskEstimate rmse = mse_to_rmse(fixed_rule);
    rule["rmse"] = rmse.value;
    rule["rmse_se"] = rmse.se;
  }
  root["fixed_rule"] = rule;

  json steps = json::array();
  for (const StepResult& s : seq.steps) steps.push_back(step_to_json(s, squared, z));
  root["steps"] = steps;

  json sq;
  sq["alpha"] = seq.alpha;
  sq["n_hat"] = seq.n_hat;
  sq["stop_index"] = seq.stop_index;
  sq["exhausted"] = seq.exhausted;
  sq["ci"] = seq.n_hat >= 0 ? "[" + std::to_string(seq.n_hat) + ", inf)" : "";
  root["sequential"] = sq;

  root["plugin_ess"] = plugin >= 0 ? json(plugin) : json("beyond grid");

  json mj;
  mj["monotone_within_noise"] = mono.monotone_within_noise;
  json incs = json::array();
  for (const RiskIncrease& inc : mono.increases)
    incs.push_back({{"from", inc.from},
                    {"to", inc.to},
                    {"delta", inc.delta},
                    {"combined_se", inc.combined_se},
                    {"within_noise", inc.within_noise}});
  mj["increases"] = incs;
  root["monotonicity"] = mj;

  if (seq.error) root["error"] = *seq.error;

  RunArtifacts art;
  art.result_json = root.dump(2);
  art.result_json.push_back('\n');

  std::ostringstream tsv;
  tsv << "train_size\tblocks\tn_effective\trisk\trisk_se\tci_half_width";
  if (squared) tsv << "\trmse\trmse_se";
  tsv << "\trule_risk\tdiff\tse\tt_stat\tlb\trejected\tregime\thyperparams\n";
  for (const StepResult& s : seq.steps) {
    tsv << s.train_size << '\t' << s.blocks << '\t' << s.n_effective << '\t'
        << format_number(s.e_cv) << '\t' << format_number(s.risk_se) << '\t'
        << format_number(z * s.risk_se);
    if (squared) {
      const RiskEstimate rmse = mse_to_rmse({s.e_cv, s.risk_se, s.n_effective});
      tsv << '\t' << format_number(rmse.value) << '\t' << format_number(rmse.se);
    }
    tsv << '\t' << format_number(s.e_rule) << '\t' << format_number(s.diff) << '\t'
        << format_number(s.se) << '\t' << format_number(s.t_stat) << '\t' << format_number(s.lb)
        << '\t' << (s.rejected ? 1 : 0) << '\t' << regime_name(s.regime) << '\t' << s.hyperparams
        << '\n';
  }
  art.table_tsv = tsv.str();

  const double display_risk = squared ? std::sqrt(fixed_rule.value) : fixed_rule.value;
  const std::string ci_text =
      seq.n_hat >= 0 ? "[" + std::to_string(seq.n_hat) + ", ∞)" : "(run failed)";
  std::ostringstream out;
  out << "Equivalent sample size (" << info.command << ")\n";
  out << "  data: " << info.data_path << " (n=" << info.n_rows << ")\n";
  out << "  loss: " << info.loss << "  alpha: " << format_number(seq.alpha)
      << "  variance: " << info.variance_mode << "  seed: " << info.seed << "\n";
  out << "  grid: " << info.grid_text << "\n";
  if (info.arm) out << "  arm: T=" << *info.arm << "\n";
  out << "\n";

  const std::string h1 = "Outcome", h2 = "LLM Error", h3 = "Algorithm", h4 = "N*";
  const std::string c1 = info.outcome_name;
  const std::string c2 = fixed2(display_risk);
  const std::string c3 = info.learner_display;
  const std::size_t w1 = std::max(h1.size(), c1.size()) + 4;
  const std::size_t w2 = std::max(h2.size(), c2.size()) + 4;
  const std::size_t w3 = std::max(h3.size(), c3.size()) + 4;
  out << pad(h1, w1) << pad(h2, w2) << pad(h3, w3) << h4 << "\n";
  out << pad(c1, w1) << pad(c2, w2) << pad(c3, w3) << ci_text << "\n";
  out << "\n";
  if (seq.error) {
    out << "run failed after " << seq.steps.size() << " step(s): " << *seq.error << "\n";
  } else {
    if (seq.exhausted)
      out << "grid exhausted: N* > " << seq.steps.back().train_size << "\n";
    out << "N* ≥ " << seq.n_hat << " with " << format_percent(1.0 - seq.alpha)
        << "% confidence\n";
  }
  art.summary_text = out.str();
  return art;
}

std::string render_experiment_json(const std::string& name, const std::string& config_digest,
                                   Index replications, double estimate, double mc_se,
                                   double tolerance, bool pass,
                                   const std::map<std::string, double>& details) {
  json root;
  root["meta"] = {{"tool", "ess"}, {"version", version()}};
  root["experiment"] = name;
  root["config"] = config_digest;
  root["replications"] = replications;
  root["estimate"] = estimate;
  root["mc_se"] = mc_se;
  root["tolerance"] = tolerance;
  root["pass"] = pass;
  json det;
  for (const auto& [k, v] : details) det[k] = number_or_tag(v);
  root["details"] = det;
  std::string text = root.dump(2);
  text.push_back('\n');
  return text;
}

}  // namespace ess
