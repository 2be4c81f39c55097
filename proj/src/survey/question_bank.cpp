#include "wellness/survey/question_bank.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace wellness::survey {

namespace detail {
extern const std::string_view kBuiltinBankJson;
}

namespace {

constexpr std::array<std::pair<Survey, std::string_view>, 4> kSurveyNames{{
    {Survey::Psqi, "PSQI"},
    {Survey::Pss, "PSS"},
    {Survey::K10, "K10"},
    {Survey::People, "PEOPLE"},
}};

constexpr std::array<std::pair<AnswerKind, std::string_view>, 5> kKindNames{{
    {AnswerKind::YesNo, "yes_no"},
    {AnswerKind::TimeSlot, "time_slot"},
    {AnswerKind::HourBin, "hour_bin"},
    {AnswerKind::Rating, "rating"},
    {AnswerKind::NonNegativeInt, "non_negative_int"},
}};

template <typename Table, typename Enum>
std::string_view name_of(const Table& table, Enum value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename Enum, typename Table>
std::optional<Enum> value_of(const Table& table, std::string_view text) {
  for (const auto& [e, name] : table) {
    if (name == text) return e;
  }
  return std::nullopt;
}

int survey_rank(Survey s, SessionKind kind) {
  // PSQI precedes everything and only appears on the first session of a day.
  switch (s) {
    case Survey::Psqi: return kind == SessionKind::FirstOfDay ? 0 : -1;
    case Survey::Pss: return 1;
    case Survey::K10: return 2;
    case Survey::People: return 3;
  }
  return -1;
}

struct ExpectedShape {
  Survey survey;
  std::map<AnswerKind, int> kinds;
};

void check_shape(const std::vector<QuestionDef>& questions) {
  const std::array<ExpectedShape, 4> shapes{{
      {Survey::Psqi,
       {{AnswerKind::TimeSlot, 1}, {AnswerKind::HourBin, 2}, {AnswerKind::YesNo, 12}, {AnswerKind::Rating, 1}}},
      {Survey::Pss, {{AnswerKind::YesNo, 10}}},
      {Survey::K10, {{AnswerKind::YesNo, 10}}},
      {Survey::People, {{AnswerKind::NonNegativeInt, 1}}},
  }};
  for (const auto& shape : shapes) {
    std::map<AnswerKind, int> seen;
    for (const auto& q : questions) {
      if (q.survey == shape.survey) ++seen[q.answer_kind];
    }
    if (seen != shape.kinds) {
      throw BankFormatError(fmt::format("question bank: survey {} has an unexpected item layout",
                                        to_string(shape.survey)));
    }
  }
}

}  // namespace

std::string_view to_string(Survey survey) { return name_of(kSurveyNames, survey); }
std::string_view to_string(AnswerKind kind) { return name_of(kKindNames, kind); }

std::string_view to_string(SessionKind kind) {
  return kind == SessionKind::FirstOfDay ? "first_of_day" : "subsequent";
}

std::optional<Survey> parse_survey(std::string_view text) { return value_of<Survey>(kSurveyNames, text); }

std::optional<AnswerKind> parse_answer_kind(std::string_view text) {
  return value_of<AnswerKind>(kKindNames, text);
}

std::optional<SessionKind> parse_session_kind(std::string_view text) {
  if (text == "first_of_day") return SessionKind::FirstOfDay;
  if (text == "subsequent") return SessionKind::Subsequent;
  return std::nullopt;
}

const std::vector<std::string>& time_slot_labels() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> out;
    for (int half_hours = 0; half_hours < 24; ++half_hours) {
      const int begin = (20 * 60 + half_hours * 30) % (24 * 60);
      const int end = (begin + 30) % (24 * 60);
      out.push_back(fmt::format("{:02}:{:02}-{:02}:{:02}", begin / 60, begin % 60, end / 60, end % 60));
    }
    return out;
  }();
  return labels;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

QuestionBank QuestionBank::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw BankFormatError(std::string("question bank: ") + e.what());
  }

  QuestionBank bank;
  bank.content_hash_ = sha256_hex(json_text);
  bank.source_ = json_text;
  try {
    bank.version_ = doc.at("version").get<int>();
    std::set<std::string> ids;
    int position = 0;
    for (const auto& record : doc.at("questions")) {
      ++position;
      QuestionDef q;
      q.id = record.at("id").get<std::string>();
      const auto survey = parse_survey(record.at("survey").get<std::string>());
      const auto kind = parse_answer_kind(record.at("answer_kind").get<std::string>());
      if (!survey || !kind) throw BankFormatError("question bank: bad survey or answer_kind for " + q.id);
      q.survey = *survey;
      q.answer_kind = *kind;
      q.text = record.at("text").get<std::string>();
      q.display_order = record.value("order", position);
      q.reverse_keyed = record.value("reverse_keyed", false);
      if (q.id.empty() || !ids.insert(q.id).second) {
        throw BankFormatError("question bank: empty or duplicate id '" + q.id + "'");
      }
      bank.questions_.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BankFormatError(std::string("question bank: ") + e.what());
  }
  std::stable_sort(bank.questions_.begin(), bank.questions_.end(),
                   [](const QuestionDef& a, const QuestionDef& b) { return a.display_order < b.display_order; });
  check_shape(bank.questions_);
  return bank;
}

QuestionBank QuestionBank::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BankFormatError("cannot open question bank " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const QuestionBank& QuestionBank::builtin() {
  static const QuestionBank bank = parse(detail::kBuiltinBankJson);
  return bank;
}

const QuestionDef* QuestionBank::find(std::string_view id) const {
  const auto it = std::find_if(questions_.begin(), questions_.end(), [&](const QuestionDef& q) { return q.id == id; });
  return it == questions_.end() ? nullptr : &*it;
}

std::vector<const QuestionDef*> QuestionBank::question_set(SessionKind kind) const {
  std::vector<const QuestionDef*> out;
  for (const auto& q : questions_) {
    if (survey_rank(q.survey, kind) >= 0) out.push_back(&q);
  }
  std::stable_sort(out.begin(), out.end(), [kind](const QuestionDef* a, const QuestionDef* b) {
    return survey_rank(a->survey, kind) < survey_rank(b->survey, kind);
  });
  return out;
}

}  // namespace wellness::survey
