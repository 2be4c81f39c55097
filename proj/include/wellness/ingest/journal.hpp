#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wellness/core/model.hpp"

namespace wellness::ingest {

class StorageFailure : public Error {
 public:
  using Error::Error;
};

struct Participant {
  std::string participant_id;
  std::string experiment_id;
  std::string auth_token;  ///< 128-bit secret, lowercase hex
  std::int64_t registered_at_ms = 0;
};

/// Append-only line journals under one data directory:
///   participants.jsonl  one registration per line
///   samples.jsonl       raw sensor stream per submission
///   submissions.jsonl   one submission record per line (the commit point)
/// Every append opens, writes one full line and flushes. Not thread-safe;
/// callers serialize appends.
class Journal {
 public:
  explicit Journal(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  void append_participant(const Participant& participant);
  /// Writes the samples line before the submission line, so a crash between
  /// the two leaves only an orphaned samples record.
  void append_submission(const core::Submission& submission, std::span<const core::SensorSample> samples);

  std::vector<Participant> read_participants() const;
  /// Raw submission lines in append order.
  std::vector<std::string> read_submission_lines() const;
  std::vector<std::string> read_samples_lines() const;

  bool writable() const;

  static constexpr const char* kParticipantsFile = "participants.jsonl";
  static constexpr const char* kSubmissionsFile = "submissions.jsonl";
  static constexpr const char* kSamplesFile = "samples.jsonl";

 private:
  void append_line(const char* file, const std::string& line);
  std::vector<std::string> read_lines(const char* file) const;

  std::filesystem::path dir_;
};

}  // namespace wellness::ingest
