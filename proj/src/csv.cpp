#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "safefirst/analysis.hpp"

namespace safefirst {

namespace {

std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote on line " + std::to_string(line_no));
  fields.push_back(std::move(current));
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) {
    throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
  }
  return static_cast<std::size_t>(it - table.header.begin());
}

// Data rows are numbered from 1; the header is line 1 of the file.
double numeric_cell(const CsvTable& table, std::size_t row, std::size_t col) {
  const auto& cell = table.rows[row][col];
  const auto value = parse_double(cell);
  const std::string where = "row " + std::to_string(row + 1) + ", column '" + table.header[col] + "'";
  if (!value) throw Error(ErrorCode::ParseError, where + ": cannot parse '" + cell + "'");
  if (!std::isfinite(*value)) throw Error(ErrorCode::NonFiniteValue, where + ": '" + cell + "'");
  return *value;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (line.empty()) continue;
    auto fields = split_line(line, line_no);
    if (table.header.empty()) {
      for (auto& f : fields) f = std::string(trim(f));
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields, header has " +
                                             std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw Error(ErrorCode::ParseError, path.string() + " has no header row");
  return table;
}

std::vector<Action> discretize_treatment(std::span<const double> values, int n_bins) {
  if (n_bins < 2) throw Error(ErrorCode::InvalidArgument, "n_bins must be at least 2");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NonFiniteValue, "treatment value at row " + std::to_string(i + 1));
    }
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct_count = sorted.empty() ? 0 : 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1]) ++distinct_count;
  }
  if (distinct_count < static_cast<std::size_t>(n_bins)) {
    throw Error(ErrorCode::DegenerateDistribution,
                std::to_string(distinct_count) + " distinct values cannot fill " +
                    std::to_string(n_bins) + " bins");
  }

  const std::size_t n = sorted.size();
  const auto bins = static_cast<std::size_t>(n_bins);
  std::vector<double> cuts;
  for (std::size_t b = 1; b < bins; ++b) {
    const std::size_t rank = (n * b + bins - 1) / bins;  // ceil(n b / B), 1-based
    cuts.push_back(sorted[rank - 1]);
  }
  std::vector<Action> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    labels[i] = static_cast<Action>(std::lower_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
  }
  return labels;
}

Dataset load_csv(const std::filesystem::path& path, const AnalysisConfig& config) {
  const auto table = read_csv(path);
  const std::size_t y_col = column_index(table, config.outcome_column);
  const std::size_t t_col = column_index(table, config.treatment_column);
  std::vector<std::size_t> x_cols;
  for (const auto& name : config.feature_columns) x_cols.push_back(column_index(table, name));
  const std::optional<std::size_t> id_col =
      config.id_column.empty() ? std::nullopt : std::optional(column_index(table, config.id_column));

  const std::size_t n = table.rows.size();
  if (n == 0) throw Error(ErrorCode::LengthMismatch, path.string() + " has no data rows");

  RawDataset raw;
  raw.num_features = x_cols.size();
  raw.feature_names = config.feature_columns;
  raw.outcomes.reserve(n);
  raw.features.reserve(n * x_cols.size());
  for (std::size_t r = 0; r < n; ++r) {
    raw.outcomes.push_back(numeric_cell(table, r, y_col));
    for (std::size_t c : x_cols) raw.features.push_back(numeric_cell(table, r, c));
    raw.unit_ids.push_back(id_col ? table.rows[r][*id_col] : std::to_string(r + 1));
  }

  int num_actions = config.n_bins;
  if (config.discretize) {
    std::vector<double> treatment(n);
    for (std::size_t r = 0; r < n; ++r) treatment[r] = numeric_cell(table, r, t_col);
    const auto levels = discretize_treatment(treatment, config.n_bins);
    raw.actions.assign(levels.begin(), levels.end());
  } else {
    long long top = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const auto label = parse_integer(table.rows[r][t_col]);
      if (!label) {
        throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 1) + ", column '" +
                                               config.treatment_column + "': not an action label");
      }
      raw.actions.push_back(*label);
      top = std::max(top, *label);
    }
    num_actions = static_cast<int>(std::max<long long>(top + 1, 2));
  }
  return validate_dataset(raw, ActionSet(num_actions));
}

}  // namespace safefirst
