#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ess/dataset.hpp"

namespace ess {

/// Raw delimited text: a header row plus string cells, rectangular.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Index n_rows() const { return static_cast<Index>(rows.size()); }
  std::optional<Index> find_column(const std::string& column) const;
};

/// RFC-style parsing: cells may be double-quoted, quotes double inside, and
/// quoted cells may span lines. Every row must match the header width.
Table parse_delimited(const std::string& text, char delimiter, const std::string& name);
Table read_delimited(const std::string& path, char delimiter);

std::string read_text_file(const std::string& path);

/// Column-to-role mapping declared by the user, no type inference. Role
/// tokens: num, cat, y (numeric outcome), label (categorical outcome), rule,
/// treatment, propensity, ytilde, rule_t0, rule_t1.
struct SchemaMap {
  std::vector<std::pair<std::string, std::string>> entries;

  // inline "col=role,col=role" text, or "@path" with one pair per line
  static SchemaMap parse(const std::string& text);

  std::optional<std::string> role_of(const std::string& column) const;
  std::string to_text() const;
};

Dataset build_dataset(const Table& table, const SchemaMap& schema);

struct PromptRecord {
  Index id = 0;  // 1-based row id
  std::string text;
};

struct PromptRender {
  std::vector<PromptRecord> prompts;
  std::vector<std::string> warnings;
};

/// Fills {column} placeholders from the raw table, one record per row.
/// Placeholders must name schema columns and never the prediction target.
PromptRender render_prompts(const Table& table, const SchemaMap& schema,
                            const std::string& template_text);

std::string prompts_to_text(const PromptRender& render);

/// id-delimiter-value lines, no header; ids are the 1-based row ids that
/// render_prompts emitted.
std::vector<std::pair<Index, std::string>> parse_predictions(const std::string& text,
                                                             char delimiter,
                                                             const std::string& name);

/// Joins one prediction per row onto the dataset as the fixed rule, typed
/// against the outcome. Unseen labels become new classes.
Dataset join_predictions(const Dataset& data, const std::vector<std::pair<Index, std::string>>& predictions);

}  // namespace ess
