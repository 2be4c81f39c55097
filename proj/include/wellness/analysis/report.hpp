#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wellness/analysis/dataset.hpp"
#include "wellness/stats/correlation.hpp"

namespace wellness::analysis {

enum class TableKind { SurveyMatrix, VariableSurvey, Histogram };

struct CorrelationCell {
  std::string row;
  std::string column;
  stats::Method method{};
  std::size_t n = 0;  ///< paired observations after pairwise deletion
  std::optional<stats::CorrelationResult> result;
  std::string unavailable;  ///< why result is empty: "insufficient data" | "degenerate variance"
  bool highlighted = false;
  /// Highlighted under both Pearson and Spearman (set by mark_confirmed).
  bool confirmed = false;
};

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

struct ReportTable {
  TableKind kind{};
  std::string name;  ///< output file stem
  std::string title;
  std::vector<stats::Method> methods;
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  std::vector<CorrelationCell> cells;
  std::vector<HistogramBin> bins;
  std::vector<std::string> footnotes;

  const CorrelationCell* find(std::string_view row, std::string_view column, stats::Method method) const;
};

/// p < 0.05 and |r| >= 0.36 after rounding to two decimals.
bool should_highlight(const stats::CorrelationResult& result);

/// Symmetric 4x4 grid over people, psqi, pss, k10 with an empty diagonal.
/// PSQI cells only use first-of-day rows. Throws InsufficientData below 3 rows.
ReportTable build_survey_matrix(std::span<const ScoredSubmission> rows, stats::Method method);

/// Five sensor rows x four survey columns per method, computed from session
/// aggregates against scores. Undefined cells are kept with a reason.
ReportTable build_variable_survey_table(std::span<const ScoredSubmission> rows,
                                        std::span<const stats::Method> methods);

/// Equal-width bins over [min, max] of the session aggregates; the last bin
/// is closed. Throws InsufficientData on empty input.
ReportTable build_histogram(std::span<const ScoredSubmission> rows, core::Variable variable, std::size_t bins);

/// Flags cells highlighted under both Pearson and Spearman, across tables
/// of the same kind.
void mark_confirmed(std::span<ReportTable> tables);

std::string render_csv(const ReportTable& table);
std::string render_text(const ReportTable& table);

}  // namespace wellness::analysis
