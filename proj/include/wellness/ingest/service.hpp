#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wellness/core/model.hpp"
#include "wellness/ingest/experiment.hpp"
#include "wellness/ingest/journal.hpp"

namespace wellness::ingest {

struct SubmissionEnvelope {
  std::string idempotency_key;
  survey::SurveyResponse response;
  std::vector<core::SensorSample> samples;
  std::int64_t client_session_start_ms = 0;
  std::int64_t client_session_end_ms = 0;
};

enum class RejectionCode {
  BadToken,             ///< 401
  Incomplete,           ///< 400, lists missing or ill-typed ids
  WrongSessionKind,     ///< 400, PSQI present off the first session or absent on it
  Malformed,            ///< 400, envelope unusable (no samples, bad window, unknown ids)
  TooManyToday,         ///< 409
  TooSoon,              ///< 409
  IdempotencyConflict,  ///< 409, key already used by another participant
};

std::string_view to_string(RejectionCode code);

struct Rejection {
  RejectionCode code{};
  std::string detail;
  std::vector<std::string> question_ids;  ///< Incomplete / unknown ids
};

struct Accepted {
  std::string submission_id;
  bool replayed = false;  ///< true when the idempotency key was seen before
};

using SubmitOutcome = std::variant<Accepted, Rejection>;

class UnknownExperiment : public Error {
 public:
  explicit UnknownExperiment(std::string_view id) : Error("unknown experiment '" + std::string(id) + "'") {}
};

struct Registration {
  std::string participant_id;
  std::string auth_token;
};

/// Study-protocol gatekeeper in front of the append-only journal.
///
/// Protocol checks for one participant (replay lookup, daily cap, minimum
/// gap, first-of-day rule) run under that participant's mutex, so different
/// participants proceed in parallel. Journal appends and the in-memory
/// indices are guarded by a single store mutex. State is rebuilt from the
/// journal on construction.
class IngestService {
 public:
  IngestService(std::vector<Experiment> experiments, std::filesystem::path data_dir,
                const survey::QuestionBank& bank = survey::QuestionBank::builtin());
  ~IngestService();

  IngestService(const IngestService&) = delete;
  IngestService& operator=(const IngestService&) = delete;

  /// Throws UnknownExperiment, StorageFailure.
  Registration register_participant(std::string_view experiment_id);

  /// Every protocol failure is a Rejection value; only I/O faults throw
  /// (StorageFailure), in which case nothing is recorded and the client may
  /// retry with the same idempotency key.
  SubmitOutcome submit(std::string_view token, const SubmissionEnvelope& envelope);

  /// Stored submissions of one experiment ordered by session end time
  /// (ties keep append order), so the order survives restarts. Throws
  /// UnknownExperiment.
  std::vector<core::Submission> export_dataset(std::string_view experiment_id, bool include_invalid) const;

  bool healthy() const;
  std::size_t stored_count() const;
  const Experiment* find_experiment(std::string_view experiment_id) const;
  const survey::QuestionBank& bank() const { return bank_; }
  const std::filesystem::path& data_dir() const { return journal_.dir(); }

 private:
  struct ParticipantState;
  struct StoredKey {
    std::string participant_id;
    std::string submission_id;
  };

  void restore();
  ParticipantState* participant_for_token(std::string_view token) const;
  std::string next_submission_id();

  std::vector<Experiment> experiments_;
  const survey::QuestionBank& bank_;

  mutable std::shared_mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<ParticipantState>, std::less<>> participants_;
  std::map<std::string, ParticipantState*, std::less<>> by_token_;

  mutable std::mutex store_mutex_;
  Journal journal_;
  std::vector<core::Submission> submissions_;
  std::map<std::string, StoredKey, std::less<>> by_key_;
  std::uint64_t submission_counter_ = 0;
};

}  // namespace wellness::ingest
