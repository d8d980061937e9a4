#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ess/cate.hpp"
#include "ess/inference.hpp"
#include "ess/io.hpp"
#include "ess/report.hpp"
#include "ess/simulate.hpp"

namespace fs = std::filesystem;
using namespace ess;

namespace {

struct Options {
  std::string data;
  std::string schema;
  std::string learner = "lasso";
  std::string grid;
  std::string loss = "squared";
  double alpha = 0.05;
  std::string variance_mode = "diff";
  Index regime_threshold = 400;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string delimiter = ",";
  bool no_winsorize = false;
  bool log_outcome = false;
  int arm = 0;
  std::string template_path;
  std::string predictions_path;
  std::string experiment = "clt";
  Index reps = 0;
};

void emit_error(const char* type, const std::string& message) {
  nlohmann::json record;
  record["error"]["type"] = type;
  record["error"]["message"] = message;
  std::cerr << record.dump() << '\n';
}

char resolve_delimiter(const std::string& text) {
  if (text == "tab" || text == "\\t") return '\t';
  if (text.size() != 1) throw InvalidInputError("delimiter must be one character or 'tab'");
  return text[0];
}

LossFunction resolve_loss(const std::string& text) {
  if (text == "squared") return LossFunction::squared();
  if (text == "zero_one") return LossFunction::zero_one();
  throw InvalidInputError("unknown loss '" + text + "' (expected squared or zero_one)");
}

VarianceMode resolve_variance_mode(const std::string& text) {
  if (text == "diff") return VarianceMode::ExactDifference;
  if (text == "conservative") return VarianceMode::Conservative;
  throw InvalidInputError("unknown variance mode '" + text + "'");
}

TrainingGrid resolve_grid(const std::string& text, Index n_rows) {
  if (text.empty()) return TrainingGrid::geometric(1, std::max<Index>(n_rows / 2, 1), 12);
  if (text.rfind("geom:", 0) == 0) {
    long long lo = 0, hi = 0, points = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(text.substr(5));
    if (!(is >> lo >> c1 >> hi >> c2 >> points) || c1 != ':' || c2 != ':' || !is.eof())
      throw InvalidInputError("geometric grid must look like geom:lo:hi:points");
    return TrainingGrid::geometric(lo, hi, points);
  }
  return TrainingGrid::parse(text);
}

std::string grid_to_text(const TrainingGrid& grid) {
  std::string out;
  for (const Index s : grid.sizes) {
    if (!out.empty()) out += ',';
    out += std::to_string(s);
  }
  return out;
}

LearnerSpec resolve_learner(const Options& o) {
  LearnerSpec spec;
  spec.family = parse_family(o.learner);
  if (o.no_winsorize) spec.preprocess.winsorize_quantiles.reset();
  spec.preprocess.log_outcome = o.log_outcome;
  return spec;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << content;
}

std::string quote_cell(const std::string& value, char delimiter) {
  if (value.find_first_of(std::string("\"\n\r") + delimiter) == std::string::npos) return value;
  std::string quoted = "\"";
  for (const char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

enum class RunKind { Plain, Cate, Arm };

int run_estimate(const Options& o, const std::string& command, RunKind kind, bool curve_mode) {
  const char delim = resolve_delimiter(o.delimiter);
  const Table table = read_delimited(o.data, delim);
  const SchemaMap schema = SchemaMap::parse(o.schema);
  const Dataset data = build_dataset(table, schema);

  const LearnerSpec spec = resolve_learner(o);
  const auto learner = make_learner(spec);
  const LossFunction loss = resolve_loss(o.loss);

  StepOptions opts;
  opts.alpha = o.alpha;
  opts.variance_mode = resolve_variance_mode(o.variance_mode);
  opts.regime_threshold = o.regime_threshold;
  opts.seed = o.seed;
  const OverlapOptions overlap;

  // the dataset the run actually scores against, for the rule risk line
  Dataset risk_data;
  switch (kind) {
    case RunKind::Plain: risk_data = data; break;
    case RunKind::Cate: risk_data = cate_dataset(data, overlap); break;
    case RunKind::Arm: risk_data = arm_dataset(data, o.arm); break;
  }
  const TrainingGrid grid = resolve_grid(o.grid, risk_data.n_rows());

  SequentialResult seq;
  switch (kind) {
    case RunKind::Plain:
      seq = sequential_ess(data, *learner, grid, loss, opts, curve_mode);
      break;
    case RunKind::Cate:
      seq = cate_ess(data, *learner, grid, loss, opts, overlap, curve_mode);
      break;
    case RunKind::Arm:
      seq = arm_specific_ess(data, *learner, grid, loss, opts, o.arm, curve_mode);
      break;
  }
  const RiskEstimate rule = fixed_rule_risk(risk_data, loss);

  RunInfo info;
  info.command = command;
  info.data_path = o.data;
  info.schema_text = schema.to_text();
  info.learner = family_name(spec.family);
  info.learner_display = family_display_name(spec.family);
  info.loss = o.loss;
  info.alpha = o.alpha;
  info.variance_mode = o.variance_mode;
  info.regime_threshold = o.regime_threshold;
  info.seed = o.seed;
  info.grid_text = grid_to_text(grid);
  info.outcome_name = risk_data.outcome().name;
  info.n_rows = risk_data.n_rows();
  if (kind == RunKind::Arm) info.arm = o.arm;

  const RunArtifacts artifacts = render_run(info, seq, rule, loss);
  fs::create_directories(o.out);
  write_file(fs::path(o.out) / "result.json", artifacts.result_json);
  write_file(fs::path(o.out) / "table.tsv", artifacts.table_tsv);
  std::cout << artifacts.summary_text;

  if (seq.error) {
    emit_error("numeric", *seq.error);
    return 3;
  }
  return 0;
}

int run_prompts(const Options& o) {
  const char delim = resolve_delimiter(o.delimiter);
  const Table table = read_delimited(o.data, delim);
  const SchemaMap schema = SchemaMap::parse(o.schema);
  const std::string template_text = read_text_file(o.template_path);
  const PromptRender render = render_prompts(table, schema, template_text);
  for (const std::string& w : render.warnings) std::cerr << "warning: " << w << '\n';
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / "prompts.txt";
  write_file(path, prompts_to_text(render));
  std::cout << "wrote " << render.prompts.size() << " prompt(s) to " << path.string() << '\n';
  return 0;
}

int run_join(const Options& o) {
  const char delim = resolve_delimiter(o.delimiter);
  const Table table = read_delimited(o.data, delim);
  const SchemaMap schema = SchemaMap::parse(o.schema);
  const Dataset data = build_dataset(table, schema);
  const auto predictions =
      parse_predictions(read_text_file(o.predictions_path), delim, o.predictions_path);
  const Dataset joined = join_predictions(data, predictions);
  joined.validate();

  // re-emit the original cells untouched, predictions appended by row id
  std::vector<std::string> by_row(static_cast<std::size_t>(data.n_rows()));
  for (const auto& [id, value] : predictions) by_row[static_cast<std::size_t>(id - 1)] = value;
  std::string out_text;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j > 0) out_text += delim;
    out_text += quote_cell(table.header[j], delim);
  }
  out_text += delim;
  out_text += "rule\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t j = 0; j < table.rows[r].size(); ++j) {
      if (j > 0) out_text += delim;
      out_text += quote_cell(table.rows[r][j], delim);
    }
    out_text += delim;
    out_text += quote_cell(by_row[r], delim);
    out_text += '\n';
  }
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / "joined.csv";
  write_file(path, out_text);
  std::cout << "joined " << predictions.size() << " prediction(s) onto " << o.data << " -> "
            << path.string() << '\n';
  return 0;
}

int run_simulate(const Options& o) {
  const std::uint64_t seed = o.seed == 0 ? 1 : o.seed;
  ExperimentReport report;
  if (o.experiment == "clt") {
    CltConfig cfg;
    cfg.dgp.kind = DgpKind::LinearGaussian;
    cfg.dgp.beta = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
    cfg.reps = o.reps > 0 ? o.reps : 200;
    cfg.seed = seed;
    report = clt_experiment(cfg);
  } else if (o.experiment == "variance") {
    VarianceConsistencyConfig cfg;
    cfg.dgp.kind = DgpKind::PureNoise;
    cfg.ns = {1000, 2000, 4000};
    cfg.reps = {2000, 1000, 500};
    cfg.seed = seed;
    report = variance_consistency_experiment(cfg);
  } else if (o.experiment == "coverage") {
    CoverageConfig cfg;
    cfg.dgp.kind = DgpKind::LinearGaussian;
    cfg.dgp.beta = (Eigen::VectorXd(2) << 1.0, 0.5).finished();
    cfg.dgp.rule_bias = std::sqrt(1.9);
    cfg.grid = TrainingGrid::explicit_sizes({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12});
    cfg.reps = o.reps > 0 ? o.reps : 100;
    cfg.seed = seed;
    cfg.oracle_n_star = crossing_size(
        [&](Index N) { return mean_learner_risk(cfg.dgp, N); }, dgp_rule_risk(cfg.dgp), 64);
    report = coverage_experiment(cfg);
  } else if (o.experiment == "fwer") {
    FwerConfig cfg;
    cfg.dgp.kind = DgpKind::PureNoise;
    cfg.dgp.rule_bias = std::sqrt(1.0 / 3.0);
    cfg.grid = TrainingGrid::explicit_sizes({1, 2, 3, 4, 5, 6, 8, 10, 12, 16});
    cfg.reps = o.reps > 0 ? o.reps : 100;
    cfg.seed = seed;
    cfg.true_n_star = crossing_size(
        [&](Index N) { return mean_learner_risk(cfg.dgp, N); }, dgp_rule_risk(cfg.dgp), 64);
    report = fwer_experiment(cfg);
  } else if (o.experiment == "cate") {
    CateCoverageConfig cfg;
    cfg.dgp.kind = DgpKind::Rct;
    cfg.dgp.noise_sd = 0.5;
    cfg.dgp.cate_rule_bias = 2.7;
    cfg.grid = TrainingGrid::explicit_sizes({1, 2, 4, 8, 16, 32});
    cfg.reps = o.reps > 0 ? o.reps : 50;
    cfg.seed = seed;
    cfg.oracle_n_star = crossing_size(
        [&](Index N) { return rct_mean_learner_risk(cfg.dgp, N); }, rct_rule_risk(cfg.dgp), 64);
    report = cate_coverage_experiment(cfg);
  } else {
    throw InvalidInputError("unknown experiment '" + o.experiment +
                            "' (expected clt, variance, coverage, fwer, or cate)");
  }

  const std::string json =
      render_experiment_json(report.name, report.config, report.replications, report.estimate,
                             report.mc_se, report.tolerance, report.pass, report.details);
  fs::create_directories(o.out);
  const fs::path path = fs::path(o.out) / ("experiment_" + report.name + ".json");
  write_file(path, json);
  std::printf("%s: %s  estimate=%.6g  mc_se=%.3g  tolerance=%.3g  (%s)\n", report.name.c_str(),
              report.pass ? "pass" : "FAIL", report.estimate, report.mc_se, report.tolerance,
              path.string().c_str());
  return 0;
}

void add_data_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--data", o.data, "delimited data file with a header row")->required();
  cmd->add_option("--schema", o.schema, "column=role pairs, or @file")->required();
  cmd->add_option("--delimiter", o.delimiter, "cell delimiter (default ,; use 'tab')");
}

void add_run_options(CLI::App* cmd, Options& o) {
  add_data_options(cmd, o);
  cmd->add_option("--learner", o.learner, "mean, majority, lasso, logit_l1, forest, or knn");
  cmd->add_option("--grid", o.grid, "training sizes: comma list or geom:lo:hi:points");
  cmd->add_option("--loss", o.loss, "squared or zero_one");
  cmd->add_option("--alpha", o.alpha, "one-sided test level (default 0.05)");
  cmd->add_option("--variance-mode", o.variance_mode, "diff or conservative")
      ->check(CLI::IsMember({"diff", "conservative"}));
  cmd->add_option("--regime-threshold", o.regime_threshold,
                  "largest N handled by the fixed-N variance (default 400)");
  cmd->add_option("--seed", o.seed, "seed for permutations and tuning");
  cmd->add_option("--out", o.out, "output directory (default .)");
  cmd->add_flag("--no-winsorize", o.no_winsorize, "skip outcome winsorizing");
  cmd->add_flag("--log-outcome", o.log_outcome, "model log1p of the outcome");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equivalent sample size of a fixed prediction rule"};
  app.require_subcommand(1);
  Options o;

  auto* curve = app.add_subcommand("curve", "risk and test at every grid size");
  add_run_options(curve, o);
  auto* ess_cmd = app.add_subcommand("ess", "sequential stop with one-sided confidence bound");
  add_run_options(ess_cmd, o);
  auto* cate = app.add_subcommand("cate", "ESS for a CATE rule via the transformed outcome");
  add_run_options(cate, o);
  auto* arm = app.add_subcommand("arm", "ESS within one treatment arm");
  add_run_options(arm, o);
  arm->add_option("--arm", o.arm, "treatment arm, 0 or 1")->required();

  auto* prompts = app.add_subcommand("prompts", "render per-row prompt texts from a template");
  add_data_options(prompts, o);
  prompts->add_option("--template", o.template_path, "template file with {column} placeholders")
      ->required();
  prompts->add_option("--out", o.out, "output directory (default .)");

  auto* join = app.add_subcommand("join", "attach id-keyed predictions as the fixed rule");
  add_data_options(join, o);
  join->add_option("--predictions", o.predictions_path, "id-delimiter-value lines")->required();
  join->add_option("--out", o.out, "output directory (default .)");

  auto* simulate = app.add_subcommand("simulate", "run a validation experiment");
  simulate->add_option("--experiment", o.experiment, "clt, variance, coverage, fwer, or cate");
  simulate->add_option("--reps", o.reps, "replication override");
  simulate->add_option("--seed", o.seed, "experiment seed (default 1)");
  simulate->add_option("--out", o.out, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    emit_error("usage", e.what());
    return 1;
  }

  try {
    if (curve->parsed()) return run_estimate(o, "curve", RunKind::Plain, true);
    if (ess_cmd->parsed()) return run_estimate(o, "ess", RunKind::Plain, false);
    if (cate->parsed()) return run_estimate(o, "cate", RunKind::Cate, false);
    if (arm->parsed()) return run_estimate(o, "arm", RunKind::Arm, false);
    if (prompts->parsed()) return run_prompts(o);
    if (join->parsed()) return run_join(o);
    if (simulate->parsed()) return run_simulate(o);
  } catch (const InvalidInputError& e) {
    emit_error("usage", e.what());
    return 1;
  } catch (const DataError& e) {
    emit_error("data", e.what());
    return 2;
  } catch (const NumericError& e) {
    emit_error("numeric", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error("numeric", e.what());
    return 3;
  }
  return 0;
}
