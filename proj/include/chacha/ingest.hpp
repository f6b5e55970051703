#pragma once

// Streaming input: VW-style text lines, CSV tables, and target transformation.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chacha {

struct Feature {
  std::string name;
  double value = 1.0;
};

struct Namespace {
  std::string id;
  std::vector<Feature> features;
};

/// One labeled instance. Namespace ids are distinct within an example.
struct Example {
  double label = 0.0;
  std::vector<Namespace> namespaces;

  const Namespace* find(std::string_view id) const {
    for (const auto& ns : namespaces)
      if (ns.id == id) return &ns;
    return nullptr;
  }

  Namespace& namespace_for(std::string_view id) {
    for (auto& ns : namespaces)
      if (ns.id == id) return ns;
    namespaces.push_back(Namespace{std::string(id), {}});
    return namespaces.back();
  }
};

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedLine : public IngestError {
 public:
  using IngestError::IngestError;
};

class MissingTarget : public IngestError {
 public:
  using IngestError::IngestError;
};

class NonNumericCell : public IngestError {
 public:
  using IngestError::IngestError;
};

struct IngestPolicy {
  std::size_t max_namespaces = 10;
  double log_transform_threshold = 100.0;
  double target_shift = 0.0;  // filled in by transform_target

  void validate() const {
    if (max_namespaces < 1) throw std::invalid_argument("max_namespaces must be >= 1");
  }
};

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

/// Splits on runs of whitespace.
inline std::vector<std::string_view> tokenize(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Shortest decimal text that parses back to exactly v.
inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parses `label [extra...] |ns name[:value] ... |ns2 ...`.
/// Tokens between the label and the first '|' (importance, tag) are ignored.
inline Example parse_vw_line(std::string_view line) {
  line = detail::trim(line);
  if (line.empty()) throw MalformedLine("empty line");

  const std::size_t bar = line.find('|');
  const auto head = detail::tokenize(line.substr(0, bar));
  if (head.empty()) throw MalformedLine("missing label: '" + std::string(line) + "'");

  Example ex;
  if (auto v = detail::parse_real(head.front())) {
    ex.label = *v;
  } else {
    throw MalformedLine("unparsable label '" + std::string(head.front()) + "'");
  }
  if (bar == std::string_view::npos) return ex;

  std::string_view rest = line.substr(bar);
  while (!rest.empty()) {
    // rest starts at '|'
    std::size_t next = rest.find('|', 1);
    std::string_view block = rest.substr(1, next == std::string_view::npos ? next : next - 1);
    rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next);

    if (block.empty() || detail::is_space(block.front()))
      throw MalformedLine("empty namespace key in '" + std::string(line) + "'");
    auto tokens = detail::tokenize(block);
    Namespace& ns = ex.namespace_for(tokens.front());
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      std::string_view tok = tokens[i];
      const std::size_t colon = tok.rfind(':');
      Feature f;
      if (colon == std::string_view::npos) {
        f.name = std::string(tok);
      } else {
        f.name = std::string(tok.substr(0, colon));
        auto v = detail::parse_real(tok.substr(colon + 1));
        if (!v) throw MalformedLine("unparsable feature value in '" + std::string(tok) + "'");
        f.value = *v;
      }
      if (f.name.empty()) throw MalformedLine("empty feature name in '" + std::string(tok) + "'");
      ns.features.push_back(std::move(f));
    }
  }
  return ex;
}

/// Inverse of parse_vw_line; always writes explicit values.
inline std::string format_vw_line(const Example& ex) {
  std::string out = detail::format_real(ex.label);
  for (const auto& ns : ex.namespaces) {
    out += " |";
    out += ns.id;
    for (const auto& f : ns.features) {
      out += ' ';
      out += f.name;
      out += ':';
      out += detail::format_real(f.value);
    }
  }
  return out;
}

/// Reads a VW text stream; blank lines are skipped. Stops after max_examples.
inline std::vector<Example> read_vw(std::istream& in,
                                    std::size_t max_examples = std::numeric_limits<std::size_t>::max()) {
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (out.size() < max_examples && std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      out.push_back(parse_vw_line(line));
    } catch (const MalformedLine& e) {
      throw MalformedLine("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in,
                         std::size_t max_rows = std::numeric_limits<std::size_t>::max()) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_record(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (table.rows.size() >= max_rows) break;
    if (cells.size() != table.header.size())
      throw IngestError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " cells, got " +
                        std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IngestError("csv input has no header row");
  return table;
}

/// Sizes of min(n, k) contiguous groups covering n items; the first n % groups
/// groups are one larger.
inline std::vector<std::size_t> partition_sizes(std::size_t n, std::size_t k) {
  if (n == 0) return {};
  const std::size_t groups = std::min(n, k);
  std::vector<std::size_t> sizes(groups, n / groups);
  for (std::size_t i = 0; i < n % groups; ++i) ++sizes[i];
  return sizes;
}

/// Converts a CSV table into examples. Feature columns are split into
/// contiguous namespaces "ns0", "ns1", ...; a column with any non-numeric
/// cell is categorical and expands into one-hot features "column=value".
inline std::vector<Example> csv_to_examples(const CsvTable& table, std::string_view target_column,
                                            const IngestPolicy& policy) {
  policy.validate();
  const auto target_it = std::find(table.header.begin(), table.header.end(), target_column);
  if (target_it == table.header.end())
    throw MissingTarget("target column '" + std::string(target_column) + "' not in header");
  const std::size_t target = static_cast<std::size_t>(target_it - table.header.begin());

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (c != target) feature_cols.push_back(c);

  std::vector<bool> categorical(table.header.size(), false);
  for (std::size_t c : feature_cols) {
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string_view cell = detail::trim(table.rows[r][c]);
      if (cell.empty())
        throw NonNumericCell("empty cell at row " + std::to_string(r + 1) + ", column '" +
                             table.header[c] + "'");
      if (!detail::parse_real(cell)) categorical[c] = true;
    }
  }

  std::vector<std::string> ns_of_col(table.header.size());
  {
    const auto sizes = partition_sizes(feature_cols.size(), policy.max_namespaces);
    std::size_t pos = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g)
      for (std::size_t i = 0; i < sizes[g]; ++i) ns_of_col[feature_cols[pos++]] = "ns" + std::to_string(g);
  }

  std::vector<Example> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Example ex;
    auto label = detail::parse_real(row[target]);
    if (!label)
      throw NonNumericCell("non-numeric target '" + row[target] + "' at row " + std::to_string(r + 1));
    ex.label = *label;
    for (std::size_t c : feature_cols) {
      Namespace& ns = ex.namespace_for(ns_of_col[c]);
      const std::string_view cell = detail::trim(row[c]);
      if (categorical[c]) {
        ns.features.push_back({table.header[c] + "=" + std::string(cell), 1.0});
      } else {
        ns.features.push_back({table.header[c], *detail::parse_real(cell)});
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Target transformation

/// Shift-then-log applied when the largest label exceeds the threshold.
struct TargetTransform {
  bool log_applied = false;
  double shift = 0.0;

  double apply(double y) const { return log_applied ? std::log(y + shift) : y; }
};

inline TargetTransform fit_target_transform(std::span<const double> raw, const IngestPolicy& policy) {
  TargetTransform tt;
  if (raw.empty()) return tt;
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  if (*hi <= policy.log_transform_threshold) return tt;
  tt.log_applied = true;
  tt.shift = *lo <= 0.0 ? 1.0 - *lo : 0.0;
  return tt;
}

/// Needs the whole label column; records the applied shift in policy.target_shift.
inline std::vector<double> transform_target(std::span<const double> raw, IngestPolicy& policy) {
  const TargetTransform tt = fit_target_transform(raw, policy);
  policy.target_shift = tt.shift;
  std::vector<double> out;
  out.reserve(raw.size());
  for (double y : raw) out.push_back(tt.apply(y));
  return out;
}

/// Applies transform_target to the labels of an example set in place.
inline TargetTransform transform_labels(std::vector<Example>& examples, IngestPolicy& policy) {
  std::vector<double> labels;
  labels.reserve(examples.size());
  for (const auto& ex : examples) labels.push_back(ex.label);
  const TargetTransform tt = fit_target_transform(labels, policy);
  policy.target_shift = tt.shift;
  for (auto& ex : examples) ex.label = tt.apply(ex.label);
  return tt;
}

}  // namespace chacha
