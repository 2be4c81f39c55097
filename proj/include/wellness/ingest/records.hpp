#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wellness/core/model.hpp"

namespace wellness::ingest {

using Json = nlohmann::ordered_json;

class RecordFormatError : public Error {
 public:
  using Error::Error;
};

/// Journal record, fields in fixed order: submission_id, participant_id,
/// experiment_id, session_start_ms, session_end_ms, is_first_of_day,
/// question_bank_hash, answers, aggregate, validity, reason, idempotency_key.
Json submission_to_json(const core::Submission& submission);
core::Submission submission_from_json(const Json& record);

/// One compact line without the trailing newline. Parsing a line and
/// re-serializing it reproduces the same bytes.
std::string submission_to_line(const core::Submission& submission);
core::Submission parse_submission_line(std::string_view line);

/// Raw-samples journal record: {"submission_id": ..., "samples": [[seq, ts,
/// temperature, humidity, pressure, luminosity, audio], ...]}.
std::string samples_to_line(std::string_view submission_id, std::span<const core::SensorSample> samples);
std::pair<std::string, std::vector<core::SensorSample>> parse_samples_line(std::string_view line);

Json answers_to_json(const survey::SurveyResponse& response);
/// Throws RecordFormatError for values that are neither integers nor strings.
survey::SurveyResponse::Map answers_from_json(const Json& answers);

Json sample_to_json(const core::SensorSample& sample);
core::SensorSample sample_from_json(const Json& record);

}  // namespace wellness::ingest
