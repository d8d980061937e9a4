#include "ess/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ess {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_cell_number(const std::string& cell, const std::string& table,
                         const std::string& column, Index row) {
  const std::string t = trim(cell);
  const char* begin = t.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (t.empty() || end != begin + t.size()) {
    std::ostringstream os;
    os << table << ": column '" << column << "' row " << row << ": cannot parse '" << cell
       << "' as a number";
    throw DataError(os.str());
  }
  return v;
}

const std::vector<std::string>& role_tokens() {
  static const std::vector<std::string> tokens{"num",        "cat",    "y",      "label",
                                               "rule",       "treatment", "propensity",
                                               "ytilde",     "rule_t0", "rule_t1"};
  return tokens;
}

ColumnRole role_for_token(const std::string& token) {
  if (token == "num") return ColumnRole::CovariateNumeric;
  if (token == "cat") return ColumnRole::CovariateCategorical;
  if (token == "y" || token == "label") return ColumnRole::Outcome;
  if (token == "rule") return ColumnRole::FixedRulePrediction;
  if (token == "treatment") return ColumnRole::Treatment;
  if (token == "propensity") return ColumnRole::Propensity;
  if (token == "ytilde") return ColumnRole::TransformedOutcome;
  if (token == "rule_t0") return ColumnRole::ArmPrediction0;
  if (token == "rule_t1") return ColumnRole::ArmPrediction1;
  throw InvalidInputError("unknown schema role '" + token + "'");
}

}  // namespace

std::optional<Index> Table::find_column(const std::string& column) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) return static_cast<Index>(i);
  return std::nullopt;
}

Table parse_delimited(const std::string& text, char delimiter, const std::string& name) {
  if (delimiter == '"' || delimiter == '\n' || delimiter == '\r')
    throw InvalidInputError("delimiter cannot be a quote or line break");

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool cell_open = false;  // tracks "" as a deliberate empty cell

  auto end_cell = [&] {
    row.push_back(cell);
    cell.clear();
    cell_open = false;
  };
  auto end_row = [&] {
    end_cell();
    if (row.size() != 1 || !row[0].empty()) records.push_back(row);
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"' && cell.empty() && !cell_open) {
      quoted = true;
      cell_open = true;
    } else if (c == delimiter) {
      end_cell();
    } else if (c == '\r') {
      // swallowed; CRLF and LF files parse identically
    } else if (c == '\n') {
      end_row();
    } else {
      cell += c;
    }
  }
  if (quoted) throw DataError(name + ": unterminated quoted cell");
  if (!cell.empty() || cell_open || !row.empty()) end_row();

  if (records.empty()) throw DataError(name + ": empty file");
  Table table;
  table.name = name;
  table.header.reserve(records[0].size());
  for (const auto& h : records[0]) {
    const std::string t = trim(h);
    if (t.empty()) throw DataError(name + ": blank column name in header");
    table.header.push_back(t);
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      std::ostringstream os;
      os << name << ": row " << r << " has " << records[r].size() << " cells, expected "
         << table.header.size();
      throw DataError(os.str());
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Table read_delimited(const std::string& path, char delimiter) {
  return parse_delimited(read_text_file(path), delimiter, path);
}

SchemaMap SchemaMap::parse(const std::string& text) {
  std::vector<std::string> tokens;
  const std::string t = trim(text);
  if (t.empty()) throw InvalidInputError("schema is empty");
  if (t[0] == '@') {
    std::istringstream lines(read_text_file(t.substr(1)));
    std::string line;
    while (std::getline(lines, line)) {
      const std::string entry = trim(line);
      if (entry.empty() || entry[0] == '#') continue;
      tokens.push_back(entry);
    }
  } else {
    std::istringstream parts(t);
    std::string part;
    while (std::getline(parts, part, ',')) tokens.push_back(trim(part));
  }

  SchemaMap schema;
  for (const std::string& token : tokens) {
    const std::size_t eq = token.find('=');
    if (eq == std::string::npos)
      throw InvalidInputError("schema entry '" + token + "' is not column=role");
    const std::string column = trim(token.substr(0, eq));
    const std::string role = trim(token.substr(eq + 1));
    if (column.empty() || role.empty())
      throw InvalidInputError("schema entry '" + token + "' is not column=role");
    if (std::find(role_tokens().begin(), role_tokens().end(), role) == role_tokens().end()) {
      std::ostringstream os;
      os << "unknown schema role '" << role << "' for column '" << column << "' (expected one of";
      for (const auto& r : role_tokens()) os << ' ' << r;
      os << ')';
      throw InvalidInputError(os.str());
    }
    if (schema.role_of(column))
      throw InvalidInputError("column '" + column + "' mapped twice in schema");
    schema.entries.emplace_back(column, role);
  }
  return schema;
}

std::optional<std::string> SchemaMap::role_of(const std::string& column) const {
  for (const auto& [col, role] : entries)
    if (col == column) return role;
  return std::nullopt;
}

std::string SchemaMap::to_text() const {
  std::string out;
  for (const auto& [col, role] : entries) {
    if (!out.empty()) out += ',';
    out += col + '=' + role;
  }
  return out;
}

Dataset build_dataset(const Table& table, const SchemaMap& schema) {
  const Index n = table.n_rows();
  if (n == 0) throw DataError(table.name + ": no data rows");

  // resolve and sanity-check every mapped column before building anything
  std::vector<std::pair<Index, std::string>> plan;  // table column, role token
  Index outcomes = 0;
  bool outcome_categorical = false;
  for (const auto& [column, role] : schema.entries) {
    const auto idx = table.find_column(column);
    if (!idx) throw DataError(table.name + ": schema column '" + column + "' not found");
    if (std::count(table.header.begin(), table.header.end(), column) > 1)
      throw DataError(table.name + ": column '" + column + "' appears more than once");
    if (role == "y" || role == "label") {
      ++outcomes;
      outcome_categorical = role == "label";
    }
    plan.emplace_back(*idx, role);
  }
  if (outcomes != 1)
    throw InvalidInputError("schema needs exactly one outcome column (role y or label)");

  // covariates first, outcome before any prediction column so the label
  // vocabulary starts from observed classes
  auto order = [](const std::string& role) {
    if (role == "num" || role == "cat") return 0;
    if (role == "y" || role == "label") return 1;
    return 2;
  };
  std::stable_sort(plan.begin(), plan.end(), [&](const auto& a, const auto& b) {
    return order(a.second) < order(b.second);
  });

  Dataset data;
  for (const auto& [col, role] : plan) {
    const std::string& name = table.header[static_cast<std::size_t>(col)];
    const bool categorical =
        role == "cat" || role == "label" ||
        (role == "rule" && outcome_categorical);
    if (categorical) {
      std::vector<std::string> values;
      values.reserve(static_cast<std::size_t>(n));
      for (const auto& r : table.rows) values.push_back(r[static_cast<std::size_t>(col)]);
      data.add_categorical(name, role_for_token(role), values);
    } else {
      Eigen::VectorXd values(n);
      for (Index i = 0; i < n; ++i)
        values(i) = parse_cell_number(table.rows[static_cast<std::size_t>(i)]
                                                [static_cast<std::size_t>(col)],
                                      table.name, name, i + 1);
      data.add_numeric(name, role_for_token(role), values);
    }
  }
  data.validate();
  return data;
}

PromptRender render_prompts(const Table& table, const SchemaMap& schema,
                            const std::string& template_text) {
  struct Segment {
    std::string literal;
    Index column = -1;  // -1 for plain text
  };
  std::vector<Segment> segments;
  std::string literal;
  for (std::size_t i = 0; i < template_text.size(); ++i) {
    if (template_text[i] != '{') {
      literal += template_text[i];
      continue;
    }
    const std::size_t close = template_text.find('}', i + 1);
    if (close == std::string::npos)
      throw InvalidInputError("unterminated '{' in prompt template");
    const std::string name = trim(template_text.substr(i + 1, close - i - 1));
    if (name.empty()) throw InvalidInputError("empty placeholder in prompt template");
    const auto role = schema.role_of(name);
    if (!role)
      throw InvalidInputError("placeholder '{" + name + "}' does not match a schema column");
    if (*role == "y" || *role == "label")
      throw InvalidInputError("placeholder '{" + name +
                              "}' is the prediction target and cannot appear in prompts");
    const auto col = table.find_column(name);
    if (!col) throw DataError(table.name + ": schema column '" + name + "' not found");
    segments.push_back({literal, -1});
    literal.clear();
    segments.push_back({"", *col});
    i = close;
  }
  if (!literal.empty()) segments.push_back({literal, -1});

  PromptRender out;
  if (template_text.empty()) out.warnings.push_back("prompt template is empty");
  Index flattened = 0;
  out.prompts.reserve(static_cast<std::size_t>(table.n_rows()));
  for (Index r = 0; r < table.n_rows(); ++r) {
    std::string text;
    for (const Segment& seg : segments) {
      if (seg.column < 0) {
        text += seg.literal;
        continue;
      }
      std::string value = table.rows[static_cast<std::size_t>(r)]
                                    [static_cast<std::size_t>(seg.column)];
      bool touched = false;
      for (char& c : value)
        if (c == '\n' || c == '\r' || c == '\t') {
          c = ' ';
          touched = true;
        }
      if (touched) ++flattened;
      text += value;
    }
    out.prompts.push_back({r + 1, std::move(text)});
  }
  if (flattened > 0) {
    std::ostringstream os;
    os << "flattened line breaks or tabs in " << flattened << " cell(s)";
    out.warnings.push_back(os.str());
  }
  return out;
}

std::string prompts_to_text(const PromptRender& render) {
  std::string out;
  for (const PromptRecord& p : render.prompts) {
    out += std::to_string(p.id);
    out += '\t';
    out += p.text;
    out += '\n';
  }
  return out;
}

std::vector<std::pair<Index, std::string>> parse_predictions(const std::string& text,
                                                             char delimiter,
                                                             const std::string& name) {
  std::vector<std::pair<Index, std::string>> out;
  std::istringstream lines(text);
  std::string line;
  Index lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::size_t cut = line.find(delimiter);
    if (cut == std::string::npos) {
      std::ostringstream os;
      os << name << " line " << lineno << ": expected id" << delimiter << "value";
      throw DataError(os.str());
    }
    const std::string id_text = trim(line.substr(0, cut));
    char* end = nullptr;
    const long long id = std::strtoll(id_text.c_str(), &end, 10);
    if (id_text.empty() || end != id_text.c_str() + id_text.size()) {
      std::ostringstream os;
      os << name << " line " << lineno << ": cannot parse id '" << id_text << "'";
      throw DataError(os.str());
    }
    out.emplace_back(static_cast<Index>(id), trim(line.substr(cut + 1)));
  }
  if (out.empty()) throw DataError(name + ": no predictions");
  return out;
}

Dataset join_predictions(const Dataset& data,
                         const std::vector<std::pair<Index, std::string>>& predictions) {
  if (data.has_role(ColumnRole::FixedRulePrediction))
    throw InvalidInputError("dataset already carries a fixed-rule column");
  const Index n = data.n_rows();
  std::vector<std::string> values(static_cast<std::size_t>(n));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto& [id, value] : predictions) {
    if (id < 1 || id > n) {
      std::ostringstream os;
      os << "prediction id " << id << " is outside 1.." << n;
      throw DataError(os.str());
    }
    if (seen[static_cast<std::size_t>(id - 1)]) {
      std::ostringstream os;
      os << "duplicate prediction for id " << id;
      throw DataError(os.str());
    }
    seen[static_cast<std::size_t>(id - 1)] = 1;
    values[static_cast<std::size_t>(id - 1)] = value;
  }
  std::vector<Index> missing;
  for (Index i = 0; i < n; ++i)
    if (!seen[static_cast<std::size_t>(i)]) missing.push_back(i + 1);
  if (!missing.empty()) {
    std::ostringstream os;
    os << "missing prediction for " << missing.size() << " id(s):";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) os << ' ' << missing[i];
    if (missing.size() > 20) os << " ...";
    throw DataError(os.str());
  }

  Dataset out = data;
  if (data.outcome_kind() == OutcomeKind::Categorical) {
    out.add_categorical("rule", ColumnRole::FixedRulePrediction, values);
  } else {
    Eigen::VectorXd numeric(n);
    for (Index i = 0; i < n; ++i) {
      const std::string& v = values[static_cast<std::size_t>(i)];
      const char* begin = v.c_str();
      char* end = nullptr;
      numeric(i) = std::strtod(begin, &end);
      if (v.empty() || end != begin + v.size()) {
        std::ostringstream os;
        os << "prediction for id " << i + 1 << ": cannot parse '" << v << "' as a number";
        throw DataError(os.str());
      }
    }
    out.add_numeric("rule", ColumnRole::FixedRulePrediction, numeric);
  }
  out.validate();
  return out;
}

}  // namespace ess
