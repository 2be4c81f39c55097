#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wellness/error.hpp"
#include "wellness/survey/question_bank.hpp"

namespace wellness::survey {

/// Wire-level answer value: strings carry YesNo and TimeSlot answers,
/// integers carry HourBin, Rating and NonNegativeInt answers.
using AnswerValue = std::variant<std::int64_t, std::string>;

inline constexpr std::string_view kYes = "Yes";
inline constexpr std::string_view kNo = "No";

struct SurveyResponse {
  using Map = std::map<std::string, AnswerValue, std::less<>>;

  SessionKind session_kind = SessionKind::Subsequent;
  Map answers;

  friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

/// True when value lies in the domain of the question's answer kind.
bool answer_in_domain(const QuestionDef& question, const AnswerValue& value);

/// Completeness verdict: empty `missing` means Complete. Otherwise lists
/// every unanswered or ill-typed id of the session's question set, in
/// question-set order.
struct Completeness {
  std::vector<std::string> missing;

  bool complete() const { return missing.empty(); }
};

class UnknownQuestionId : public Error {
 public:
  explicit UnknownQuestionId(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
};

class IncompleteResponse : public Error {
 public:
  using Error::Error;
};

/// Throws UnknownQuestionId if any answer key is outside the session's
/// question set.
Completeness validate_response(const SurveyResponse& response,
                               const QuestionBank& bank = QuestionBank::builtin());

struct ScoringOptions {
  /// Count "No" instead of "Yes" on the reverse-keyed PSS items. Off by
  /// default: every positive answer adds one.
  bool reverse_score_pss = false;
};

struct SurveyScores {
  std::optional<int> psqi;  ///< absent on Subsequent sessions
  int pss = 0;
  int k10 = 0;
  std::int64_t people = 0;

  friend bool operator==(const SurveyScores&, const SurveyScores&) = default;
};

/// Integer scores: one point per "Yes" among the YesNo items of each survey.
/// Non-YesNo PSQI items do not score. Throws IncompleteResponse unless
/// validate_response is Complete.
SurveyScores score(const SurveyResponse& response,
                   const QuestionBank& bank = QuestionBank::builtin(),
                   ScoringOptions options = {});

}  // namespace wellness::survey
