#include "wellness/analysis/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace wellness::analysis {

namespace {

using stats::Method;

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

template <typename XFn, typename YFn>
Series paired(std::span<const ScoredSubmission> rows, XFn x_of, YFn y_of) {
  Series out;
  for (const auto& row : rows) {
    const std::optional<double> x = x_of(row);
    const std::optional<double> y = y_of(row);
    if (!x || !y) continue;
    out.x.push_back(*x);
    out.y.push_back(*y);
  }
  return out;
}

CorrelationCell make_cell(std::string row, std::string column, Method method, Series series) {
  CorrelationCell cell;
  cell.row = std::move(row);
  cell.column = std::move(column);
  cell.method = method;
  cell.n = series.x.size();
  if (cell.n < 3) {
    cell.unavailable = "insufficient data";
    return cell;
  }
  try {
    cell.result = stats::correlate(method, stats::PairedSeries(std::move(series.x), std::move(series.y)));
    cell.highlighted = should_highlight(*cell.result);
  } catch (const stats::DegenerateVariance&) {
    cell.unavailable = "degenerate variance";
  }
  return cell;
}

std::string format_r(double r) { return fmt::format("{:.4f}", r); }
std::string format_p(double p) { return fmt::format("{:.4e}", p); }

std::string kind_name(TableKind kind) {
  switch (kind) {
    case TableKind::SurveyMatrix: return "survey_matrix";
    case TableKind::VariableSurvey: return "variable_survey";
    case TableKind::Histogram: return "histogram";
  }
  return "?";
}

std::string pad(const std::string& text, std::size_t width) {
  return text.size() >= width ? text : text + std::string(width - text.size(), ' ');
}

/// Left column plus fixed-width columns; rows are vectors of cell strings.
std::string aligned(const std::vector<std::vector<std::string>>& grid) {
  std::vector<std::size_t> widths;
  for (const auto& row : grid) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += pad(row[i], widths[i]);
      if (i + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

}  // namespace

const CorrelationCell* ReportTable::find(std::string_view row, std::string_view column, Method method) const {
  for (const auto& c : cells) {
    if (c.row == row && c.column == column && c.method == method) return &c;
  }
  return nullptr;
}

bool should_highlight(const stats::CorrelationResult& result) {
  return result.significant && result.strength != stats::Strength::Weak;
}

ReportTable build_survey_matrix(std::span<const ScoredSubmission> rows, Method method) {
  if (rows.size() < 3) throw InsufficientData("survey matrix needs at least 3 valid submissions");
  ReportTable table;
  table.kind = TableKind::SurveyMatrix;
  table.name = fmt::format("survey_matrix_{}", stats::to_string(method));
  table.title = fmt::format("Correlation between survey results ({})", stats::to_string(method));
  table.methods = {method};
  for (ScoreColumn c : kScoreColumns) {
    table.rows.emplace_back(label(c));
    table.columns.emplace_back(label(c));
  }
  for (ScoreColumn a : kScoreColumns) {
    for (ScoreColumn b : kScoreColumns) {
      if (a == b) continue;
      table.cells.push_back(make_cell(std::string(label(a)), std::string(label(b)), method,
                                      paired(rows, [a](const auto& r) { return r.value(a); },
                                             [b](const auto& r) { return r.value(b); })));
    }
  }
  table.footnotes.push_back(fmt::format("{} submissions; PSQI cells use first-of-day submissions only", rows.size()));
  return table;
}

ReportTable build_variable_survey_table(std::span<const ScoredSubmission> rows, std::span<const Method> methods) {
  if (rows.size() < 3) throw InsufficientData("variable/survey table needs at least 3 valid submissions");
  if (methods.empty()) throw InsufficientData("no correlation method selected");
  ReportTable table;
  table.kind = TableKind::VariableSurvey;
  table.name = methods.size() == 1 ? fmt::format("variable_survey_{}", stats::to_string(methods.front()))
                                   : std::string("variable_survey");
  table.title = "Correlation between variables and surveys";
  table.methods.assign(methods.begin(), methods.end());
  for (core::Variable v : kTableVariables) table.rows.emplace_back(row_label(v));
  for (ScoreColumn c : kScoreColumns) table.columns.emplace_back(label(c));
  for (Method method : methods) {
    for (core::Variable v : kTableVariables) {
      for (ScoreColumn c : kScoreColumns) {
        table.cells.push_back(
            make_cell(std::string(row_label(v)), std::string(label(c)), method,
                      paired(rows, [v](const ScoredSubmission& r) -> std::optional<double> {
                               return r.submission.aggregate.means.get(v);
                             },
                             [c](const auto& r) { return r.value(c); })));
      }
    }
  }
  table.footnotes.push_back(fmt::format("{} submissions; PSQI column uses first-of-day submissions only", rows.size()));
  return table;
}

ReportTable build_histogram(std::span<const ScoredSubmission> rows, core::Variable variable, std::size_t bins) {
  if (rows.empty()) throw InsufficientData("histogram needs at least one valid submission");
  if (bins == 0) throw InsufficientData("histogram needs at least one bin");
  std::vector<double> values;
  for (const auto& r : rows) values.push_back(r.submission.aggregate.means.get(variable));
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(bins);

  ReportTable table;
  table.kind = TableKind::Histogram;
  table.name = fmt::format("hist_{}", core::to_string(variable));
  table.title = fmt::format("Distribution of session means: {}", core::to_string(variable));
  for (std::size_t i = 0; i < bins; ++i) {
    const double lower = lo + width * static_cast<double>(i);
    table.bins.push_back({lower, i + 1 == bins ? hi : lo + width * static_cast<double>(i + 1), 0});
  }
  for (double v : values) {
    std::size_t index = 0;
    if (width > 0.0) index = std::min(bins - 1, static_cast<std::size_t>(std::floor((v - lo) / width)));
    ++table.bins[index].count;
  }
  table.footnotes.push_back(fmt::format("{} submissions", values.size()));
  return table;
}

void mark_confirmed(std::span<ReportTable> tables) {
  std::map<std::tuple<TableKind, std::string, std::string, Method>, bool> highlighted;
  for (const auto& t : tables) {
    for (const auto& c : t.cells) highlighted[{t.kind, c.row, c.column, c.method}] = c.highlighted;
  }
  const auto lit = [&](TableKind kind, const std::string& row, const std::string& column, Method method) {
    const auto it = highlighted.find({kind, row, column, method});
    return it != highlighted.end() && it->second;
  };
  for (auto& t : tables) {
    for (auto& c : t.cells) {
      c.confirmed = lit(t.kind, c.row, c.column, Method::Pearson) && lit(t.kind, c.row, c.column, Method::Spearman);
    }
  }
}

std::string render_csv(const ReportTable& table) {
  std::string out;
  if (table.kind == TableKind::Histogram) {
    out = "bin,lower,upper,count\n";
    for (std::size_t i = 0; i < table.bins.size(); ++i) {
      const auto& b = table.bins[i];
      out += fmt::format("{},{:.4f},{:.4f},{}\n", i, b.lower, b.upper, b.count);
    }
    return out;
  }
  out = "table,method,row,column,n,r,p_value,strength,significant,highlighted,confirmed,note\n";
  for (const auto& c : table.cells) {
    if (c.result) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},\n", kind_name(table.kind), stats::to_string(c.method), c.row,
                         c.column, c.n, format_r(c.result->r), format_p(c.result->p_value),
                         stats::to_string(c.result->strength), c.result->significant ? 1 : 0, c.highlighted ? 1 : 0,
                         c.confirmed ? 1 : 0);
    } else {
      out += fmt::format("{},{},{},{},{},-,-,-,0,0,0,{}\n", kind_name(table.kind), stats::to_string(c.method), c.row,
                         c.column, c.n, c.unavailable);
    }
  }
  return out;
}

std::string render_text(const ReportTable& table) {
  std::string out = table.title + "\n\n";
  if (table.kind == TableKind::Histogram) {
    std::size_t peak = 1;
    for (const auto& b : table.bins) peak = std::max(peak, b.count);
    std::vector<std::vector<std::string>> grid{{"bin", "lower", "upper", "count", ""}};
    for (std::size_t i = 0; i < table.bins.size(); ++i) {
      const auto& b = table.bins[i];
      grid.push_back({std::to_string(i), fmt::format("{:.4f}", b.lower), fmt::format("{:.4f}", b.upper),
                      std::to_string(b.count), std::string(b.count * 40 / peak, '#')});
    }
    out += aligned(grid);
  } else {
    for (Method method : table.methods) {
      if (table.methods.size() > 1) out += fmt::format("[{}]\n", stats::to_string(method));
      std::vector<std::vector<std::string>> grid;
      std::vector<std::string> header{""};
      std::vector<std::string> sub{""};
      for (const auto& column : table.columns) {
        header.insert(header.end(), {column, "", ""});
        sub.insert(sub.end(), {"r", "p", "n"});
      }
      grid.push_back(header);
      grid.push_back(sub);
      for (const auto& row : table.rows) {
        std::vector<std::string> line{row};
        for (const auto& column : table.columns) {
          const CorrelationCell* c = table.find(row, column, method);
          if (!c) {
            line.insert(line.end(), {"", "", ""});
          } else if (!c->result) {
            line.insert(line.end(), {"-", "-", std::to_string(c->n)});
          } else {
            const std::string marks = std::string(c->highlighted ? "*" : "") + (c->confirmed ? "+" : "");
            line.insert(line.end(), {format_r(c->result->r) + marks, format_p(c->result->p_value), std::to_string(c->n)});
          }
        }
        grid.push_back(std::move(line));
      }
      out += aligned(grid) + '\n';
    }
    out += "* p < 0.05 and |r| >= 0.36; + also highlighted under both Pearson and Spearman; - undefined\n";
  }
  for (const auto& f : table.footnotes) out += "note: " + f + '\n';
  return out;
}

}  // namespace wellness::analysis
