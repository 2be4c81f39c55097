#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wellness/error.hpp"

namespace wellness::survey {

enum class Survey { Psqi, Pss, K10, People };

enum class AnswerKind {
  YesNo,           ///< "Yes" | "No"
  TimeSlot,        ///< 30-minute bed-time label, 20:00-20:30 through 07:30-08:00
  HourBin,         ///< integer k meaning [k, k+1) hours; 12 means "12+"
  Rating,          ///< integer 1..5
  NonNegativeInt,  ///< integer >= 0
};

enum class SessionKind { FirstOfDay, Subsequent };

struct QuestionDef {
  std::string id;
  Survey survey{};
  std::string text;
  AnswerKind answer_kind{};
  int display_order = 0;
  /// Positively phrased PSS item; only consulted when reverse scoring is on.
  bool reverse_keyed = false;
};

class BankFormatError : public Error {
 public:
  using Error::Error;
};

std::string_view to_string(Survey survey);
std::string_view to_string(AnswerKind kind);
std::string_view to_string(SessionKind kind);
std::optional<Survey> parse_survey(std::string_view text);
std::optional<AnswerKind> parse_answer_kind(std::string_view text);
std::optional<SessionKind> parse_session_kind(std::string_view text);

/// Bed-time slot labels in display order (24 half-hour bins).
const std::vector<std::string>& time_slot_labels();
inline constexpr std::int64_t kMaxHourBin = 12;

/// Immutable, versioned question bank. The content hash is the SHA-256 of the
/// exact bytes the bank was parsed from and is stamped on every submission.
class QuestionBank {
 public:
  /// Parses a bank file. Throws BankFormatError on schema violations
  /// (duplicate ids, unknown kinds, wrong per-survey item counts).
  static QuestionBank parse(std::string_view json_text);
  static QuestionBank load(const std::string& path);

  /// The bank compiled into the library from data/question_bank.v1.json.
  static const QuestionBank& builtin();

  int version() const { return version_; }
  const std::string& content_hash() const { return content_hash_; }
  /// The exact bytes the bank was parsed from; content_hash() is their digest.
  const std::string& source() const { return source_; }
  std::span<const QuestionDef> questions() const { return questions_; }

  const QuestionDef* find(std::string_view id) const;

  /// FirstOfDay: PSQI, PSS, K10, PEOPLE. Subsequent: PSS, K10, PEOPLE.
  /// Within a survey, display order.
  std::vector<const QuestionDef*> question_set(SessionKind kind) const;

 private:
  int version_ = 0;
  std::string content_hash_;
  std::string source_;
  std::vector<QuestionDef> questions_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace wellness::survey
