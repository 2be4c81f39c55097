#include "wellness/survey/response.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace wellness::survey {

bool answer_in_domain(const QuestionDef& question, const AnswerValue& value) {
  const auto* text = std::get_if<std::string>(&value);
  const auto* number = std::get_if<std::int64_t>(&value);
  switch (question.answer_kind) {
    case AnswerKind::YesNo:
      return text && (*text == kYes || *text == kNo);
    case AnswerKind::TimeSlot: {
      if (!text) return false;
      const auto& labels = time_slot_labels();
      return std::find(labels.begin(), labels.end(), *text) != labels.end();
    }
    case AnswerKind::HourBin:
      return number && *number >= 0 && *number <= kMaxHourBin;
    case AnswerKind::Rating:
      return number && *number >= 1 && *number <= 5;
    case AnswerKind::NonNegativeInt:
      return number && *number >= 0;
  }
  return false;
}

UnknownQuestionId::UnknownQuestionId(std::vector<std::string> ids)
    : Error(fmt::format("unknown question id(s): {}", fmt::join(ids, ", "))), ids_(std::move(ids)) {}

Completeness validate_response(const SurveyResponse& response, const QuestionBank& bank) {
  const auto questions = bank.question_set(response.session_kind);

  std::vector<std::string> unknown;
  for (const auto& [id, value] : response.answers) {
    const bool in_set = std::any_of(questions.begin(), questions.end(), [&](const QuestionDef* q) { return q->id == id; });
    if (!in_set) unknown.push_back(id);
  }
  if (!unknown.empty()) throw UnknownQuestionId(std::move(unknown));

  Completeness verdict;
  for (const QuestionDef* q : questions) {
    const auto it = response.answers.find(q->id);
    if (it == response.answers.end() || !answer_in_domain(*q, it->second)) verdict.missing.push_back(q->id);
  }
  return verdict;
}

SurveyScores score(const SurveyResponse& response, const QuestionBank& bank, ScoringOptions options) {
  const auto verdict = validate_response(response, bank);
  if (!verdict.complete()) {
    throw IncompleteResponse(fmt::format("cannot score incomplete response; missing: {}", fmt::join(verdict.missing, ", ")));
  }

  SurveyScores scores;
  int psqi = 0;
  for (const QuestionDef* q : bank.question_set(response.session_kind)) {
    const AnswerValue& value = response.answers.find(q->id)->second;
    if (q->answer_kind == AnswerKind::NonNegativeInt && q->survey == Survey::People) {
      scores.people = std::get<std::int64_t>(value);
      continue;
    }
    if (q->answer_kind != AnswerKind::YesNo) continue;

    const bool reversed = options.reverse_score_pss && q->survey == Survey::Pss && q->reverse_keyed;
    const bool positive = (std::get<std::string>(value) == kYes) != reversed;
    if (!positive) continue;
    switch (q->survey) {
      case Survey::Psqi: ++psqi; break;
      case Survey::Pss: ++scores.pss; break;
      case Survey::K10: ++scores.k10; break;
      case Survey::People: break;
    }
  }
  if (response.session_kind == SessionKind::FirstOfDay) scores.psqi = psqi;
  return scores;
}

}  // namespace wellness::survey
