#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wellness/analysis/report.hpp"

namespace wellness::analysis {

enum class OutputFormat { Csv, Text };

struct AnalysisConfig {
  std::vector<std::filesystem::path> inputs;
  std::optional<std::string> experiment;
  std::vector<stats::Method> methods{stats::Method::Pearson, stats::Method::Spearman};
  bool include_invalid = false;
  OutputFormat format = OutputFormat::Csv;
  std::size_t bins = 20;
  bool revalidate = false;
  std::filesystem::path out_dir = "report";
  survey::ScoringOptions scoring;
};

struct Report {
  PreparedDataset prepared;
  /// Survey matrices, then variable/survey tables (one per method), then
  /// one histogram per sensor variable.
  std::vector<ReportTable> tables;
  std::string summary;

  const ReportTable* table(std::string_view name) const;
};

/// Builds every table from an in-memory dataset. Throws InsufficientData
/// when fewer than 3 submissions remain.
Report analyze(const Dataset& dataset, const AnalysisConfig& config,
               const survey::QuestionBank& bank = survey::QuestionBank::builtin());

/// Loads inputs, analyzes, writes one file per table plus summary.txt into
/// out_dir. Returns a process exit code; diagnostics go to err.
int run(const AnalysisConfig& config, std::ostream& out, std::ostream& err);

}  // namespace wellness::analysis
