#include "wellness/ingest/records.hpp"

namespace wellness::ingest {

namespace {

Json aggregate_to_json(const core::SensorAggregate& aggregate) {
  Json out = Json::object();
  for (core::Variable v : core::kVariables) out[std::string(core::to_string(v))] = aggregate.means.get(v);
  out["sample_count"] = aggregate.sample_count;
  return out;
}

core::SensorAggregate aggregate_from_json(const Json& record) {
  core::SensorAggregate aggregate;
  for (core::Variable v : core::kVariables) {
    aggregate.means.at(v) = record.at(std::string(core::to_string(v))).get<double>();
  }
  aggregate.sample_count = record.at("sample_count").get<std::uint64_t>();
  return aggregate;
}

Json parse_json(std::string_view line) {
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw RecordFormatError(std::string("malformed record: ") + e.what());
  }
}

}  // namespace

Json answers_to_json(const survey::SurveyResponse& response) {
  Json out = Json::object();
  for (const auto& [id, value] : response.answers) {
    std::visit([&out, &id = id](const auto& v) { out[id] = v; }, value);
  }
  return out;
}

survey::SurveyResponse::Map answers_from_json(const Json& answers) {
  if (!answers.is_object()) throw RecordFormatError("answers must be an object");
  survey::SurveyResponse::Map out;
  for (const auto& [id, value] : answers.items()) {
    if (value.is_number_integer()) {
      out.emplace(id, value.get<std::int64_t>());
    } else if (value.is_string()) {
      out.emplace(id, value.get<std::string>());
    } else {
      throw RecordFormatError("answer '" + id + "' must be an integer or a string");
    }
  }
  return out;
}

Json sample_to_json(const core::SensorSample& sample) {
  Json out = Json::object();
  out["seq"] = sample.seq;
  out["timestamp_ms"] = sample.timestamp_ms;
  for (core::Variable v : core::kVariables) out[std::string(core::to_string(v))] = sample.values.get(v);
  return out;
}

core::SensorSample sample_from_json(const Json& record) {
  try {
    core::SensorSample sample;
    sample.seq = record.at("seq").get<std::uint64_t>();
    sample.timestamp_ms = record.at("timestamp_ms").get<std::int64_t>();
    for (core::Variable v : core::kVariables) {
      sample.values.at(v) = record.at(std::string(core::to_string(v))).get<double>();
    }
    return sample;
  } catch (const Json::exception& e) {
    throw RecordFormatError(std::string("malformed sample: ") + e.what());
  }
}

Json submission_to_json(const core::Submission& s) {
  Json out = Json::object();
  out["submission_id"] = s.submission_id;
  out["participant_id"] = s.participant_id;
  out["experiment_id"] = s.experiment_id;
  out["session_start_ms"] = s.session_start_ms;
  out["session_end_ms"] = s.session_end_ms;
  out["is_first_of_day"] = s.is_first_of_day;
  out["question_bank_hash"] = s.question_bank_hash;
  out["answers"] = answers_to_json(s.response);
  out["aggregate"] = aggregate_to_json(s.aggregate);
  out["validity"] = s.validity.is_valid() ? "valid" : "invalid";
  out["reason"] = s.validity.is_valid() ? Json(nullptr) : Json(s.validity.reason->to_string());
  out["idempotency_key"] = s.idempotency_key;
  return out;
}

core::Submission submission_from_json(const Json& record) {
  try {
    core::Submission s;
    s.submission_id = record.at("submission_id").get<std::string>();
    s.participant_id = record.at("participant_id").get<std::string>();
    s.experiment_id = record.at("experiment_id").get<std::string>();
    s.session_start_ms = record.at("session_start_ms").get<std::int64_t>();
    s.session_end_ms = record.at("session_end_ms").get<std::int64_t>();
    s.is_first_of_day = record.at("is_first_of_day").get<bool>();
    s.question_bank_hash = record.at("question_bank_hash").get<std::string>();
    s.response.session_kind = s.is_first_of_day ? survey::SessionKind::FirstOfDay : survey::SessionKind::Subsequent;
    s.response.answers = answers_from_json(record.at("answers"));
    s.aggregate = aggregate_from_json(record.at("aggregate"));

    const auto validity = record.at("validity").get<std::string>();
    if (validity == "invalid") {
      const auto reason = core::ValidityReason::parse(record.at("reason").get<std::string>());
      if (!reason) throw RecordFormatError("unrecognised validity reason in " + s.submission_id);
      s.validity = core::Validity::invalid(*reason);
    } else if (validity != "valid") {
      throw RecordFormatError("validity must be 'valid' or 'invalid'");
    }
    s.idempotency_key = record.at("idempotency_key").get<std::string>();
    return s;
  } catch (const Json::exception& e) {
    throw RecordFormatError(std::string("malformed submission record: ") + e.what());
  }
}

std::string submission_to_line(const core::Submission& submission) { return submission_to_json(submission).dump(); }

core::Submission parse_submission_line(std::string_view line) { return submission_from_json(parse_json(line)); }

std::string samples_to_line(std::string_view submission_id, std::span<const core::SensorSample> samples) {
  Json rows = Json::array();
  for (const auto& s : samples) {
    rows.push_back(Json::array({s.seq, s.timestamp_ms, s.values.temperature, s.values.humidity, s.values.pressure,
                                s.values.luminosity, s.values.audio}));
  }
  Json out = Json::object();
  out["submission_id"] = submission_id;
  out["samples"] = std::move(rows);
  return out.dump();
}

std::pair<std::string, std::vector<core::SensorSample>> parse_samples_line(std::string_view line) {
  const Json record = parse_json(line);
  try {
    std::vector<core::SensorSample> samples;
    for (const auto& row : record.at("samples")) {
      if (row.size() != 7) throw RecordFormatError("sample row must have 7 fields");
      core::SensorSample s;
      s.seq = row[0].get<std::uint64_t>();
      s.timestamp_ms = row[1].get<std::int64_t>();
      s.values = {row[2].get<double>(), row[3].get<double>(), row[4].get<double>(), row[5].get<double>(),
                  row[6].get<double>()};
      samples.push_back(s);
    }
    return {record.at("submission_id").get<std::string>(), std::move(samples)};
  } catch (const Json::exception& e) {
    throw RecordFormatError(std::string("malformed samples record: ") + e.what());
  }
}

}  // namespace wellness::ingest
