#include "wellness/ingest/journal.hpp"

#include <fstream>

#include "wellness/ingest/records.hpp"

namespace wellness::ingest {

Journal::Journal(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StorageFailure("cannot create data directory " + dir_.string() + ": " + ec.message());
}

void Journal::append_line(const char* file, const std::string& line) {
  std::ofstream out(dir_ / file, std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw StorageFailure("append to " + (dir_ / file).string() + " failed");
}

std::vector<std::string> Journal::read_lines(const char* file) const {
  std::vector<std::string> lines;
  std::ifstream in(dir_ / file, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

void Journal::append_participant(const Participant& p) {
  Json record = Json::object();
  record["participant_id"] = p.participant_id;
  record["experiment_id"] = p.experiment_id;
  record["auth_token"] = p.auth_token;
  record["registered_at_ms"] = p.registered_at_ms;
  append_line(kParticipantsFile, record.dump());
}

void Journal::append_submission(const core::Submission& submission, std::span<const core::SensorSample> samples) {
  append_line(kSamplesFile, samples_to_line(submission.submission_id, samples));
  append_line(kSubmissionsFile, submission_to_line(submission));
}

std::vector<Participant> Journal::read_participants() const {
  std::vector<Participant> out;
  for (const auto& line : read_lines(kParticipantsFile)) {
    try {
      const auto record = Json::parse(line);
      out.push_back({record.at("participant_id").get<std::string>(), record.at("experiment_id").get<std::string>(),
                     record.at("auth_token").get<std::string>(), record.at("registered_at_ms").get<std::int64_t>()});
    } catch (const Json::exception& e) {
      throw RecordFormatError(std::string("malformed participant record: ") + e.what());
    }
  }
  return out;
}

std::vector<std::string> Journal::read_submission_lines() const { return read_lines(kSubmissionsFile); }

std::vector<std::string> Journal::read_samples_lines() const { return read_lines(kSamplesFile); }

bool Journal::writable() const {
  if (!std::filesystem::is_directory(dir_)) return false;
  for (const char* file : {kParticipantsFile, kSubmissionsFile, kSamplesFile}) {
    std::ofstream probe(dir_ / file, std::ios::app | std::ios::binary);
    if (!probe) return false;
  }
  return true;
}

}  // namespace wellness::ingest
