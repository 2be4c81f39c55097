#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wellness/core/session.hpp"
#include "wellness/survey/response.hpp"

namespace wellness::analysis {

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

/// Survey-side columns of every report, in table order.
enum class ScoreColumn { People, Psqi, Pss, K10 };
inline constexpr std::array<ScoreColumn, 4> kScoreColumns{ScoreColumn::People, ScoreColumn::Psqi, ScoreColumn::Pss,
                                                          ScoreColumn::K10};
std::string_view label(ScoreColumn column);

/// Row order of the variable-vs-survey table.
inline constexpr std::array<core::Variable, 5> kTableVariables{core::Variable::Temperature, core::Variable::Pressure,
                                                               core::Variable::Humidity, core::Variable::Luminosity,
                                                               core::Variable::Audio};
/// Report label of a sensor variable ("light" for luminosity).
std::string_view row_label(core::Variable variable);

struct Dataset {
  std::vector<core::Submission> submissions;
  /// Raw streams by submission id, when the input was a data directory.
  std::map<std::string, std::vector<core::SensorSample>, std::less<>> samples;
};

/// Line-delimited submission records (an export or a submissions journal).
Dataset parse_dataset(std::string_view records);
/// A record file, or a data directory holding submissions.jsonl and
/// (optionally) samples.jsonl. Throws InputError.
Dataset load_dataset(const std::filesystem::path& input);
void append_dataset(Dataset& into, Dataset more);

struct ScoredSubmission {
  core::Submission submission;
  survey::SurveyScores scores;

  /// PSQI is absent outside first-of-day sessions.
  std::optional<double> value(ScoreColumn column) const;
};

struct PrepareOptions {
  std::optional<std::string> experiment;
  bool include_invalid = false;
  /// Recompute verdicts instead of trusting the stored ones; uses the raw
  /// stream when available, else only the aggregate and survey checks.
  bool revalidate = false;
  survey::ScoringOptions scoring;
};

struct PreparedDataset {
  std::size_t total = 0;  ///< after the experiment filter
  std::vector<ScoredSubmission> rows;
  std::vector<core::RejectedSubmission> rejected;
  /// Invalid submissions kept by include_invalid that could not be scored.
  std::size_t unscorable = 0;
};

PreparedDataset prepare(const Dataset& dataset, const PrepareOptions& options,
                        const survey::QuestionBank& bank = survey::QuestionBank::builtin());

}  // namespace wellness::analysis
