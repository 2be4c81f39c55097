#include "wellness/ingest/service.hpp"

#include <openssl/rand.h>

#include <algorithm>
#include <chrono>

#include <fmt/format.h>

#include "wellness/core/session.hpp"
#include "wellness/ingest/records.hpp"

namespace wellness::ingest {

struct IngestService::ParticipantState {
  Participant info;
  const Experiment* experiment = nullptr;
  std::mutex mutex;
  std::multiset<std::int64_t> accepted_times;
  std::map<std::int64_t, int> accepted_per_day;
};

namespace {

std::string random_hex(std::size_t bytes) {
  std::vector<unsigned char> buffer(bytes);
  if (RAND_bytes(buffer.data(), static_cast<int>(buffer.size())) != 1) throw Error("RAND_bytes failed");
  std::string out;
  out.reserve(bytes * 2);
  for (unsigned char b : buffer) out += fmt::format("{:02x}", b);
  return out;
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

Rejection reject(RejectionCode code, std::string detail, std::vector<std::string> ids = {}) {
  return Rejection{code, std::move(detail), std::move(ids)};
}

bool has_psqi_answers(const survey::SurveyResponse& response, const survey::QuestionBank& bank) {
  return std::any_of(response.answers.begin(), response.answers.end(), [&](const auto& entry) {
    const auto* q = bank.find(entry.first);
    return q && q->survey == survey::Survey::Psqi;
  });
}

}  // namespace

std::string_view to_string(RejectionCode code) {
  switch (code) {
    case RejectionCode::BadToken: return "BadToken";
    case RejectionCode::Incomplete: return "Incomplete";
    case RejectionCode::WrongSessionKind: return "WrongSessionKind";
    case RejectionCode::Malformed: return "Malformed";
    case RejectionCode::TooManyToday: return "TooManyToday";
    case RejectionCode::TooSoon: return "TooSoon";
    case RejectionCode::IdempotencyConflict: return "IdempotencyConflict";
  }
  return "?";
}

IngestService::IngestService(std::vector<Experiment> experiments, std::filesystem::path data_dir,
                             const survey::QuestionBank& bank)
    : experiments_(std::move(experiments)), bank_(bank), journal_(std::move(data_dir)) {
  restore();
}

IngestService::~IngestService() = default;

const Experiment* IngestService::find_experiment(std::string_view experiment_id) const {
  const auto it = std::find_if(experiments_.begin(), experiments_.end(),
                               [&](const Experiment& e) { return e.experiment_id == experiment_id; });
  return it == experiments_.end() ? nullptr : &*it;
}

void IngestService::restore() {
  for (auto& p : journal_.read_participants()) {
    auto state = std::make_unique<ParticipantState>();
    state->experiment = find_experiment(p.experiment_id);
    if (!state->experiment) throw UnknownExperiment(p.experiment_id);
    state->info = std::move(p);
    by_token_[state->info.auth_token] = state.get();
    participants_[state->info.participant_id] = std::move(state);
  }
  for (const auto& line : journal_.read_submission_lines()) {
    core::Submission s = parse_submission_line(line);
    const auto it = participants_.find(s.participant_id);
    if (it == participants_.end()) throw RecordFormatError("submission for unknown participant " + s.participant_id);
    ParticipantState& p = *it->second;
    p.accepted_times.insert(s.session_end_ms);
    ++p.accepted_per_day[p.experiment->local_day(s.session_end_ms)];
    by_key_[s.idempotency_key] = {s.participant_id, s.submission_id};
    submissions_.push_back(std::move(s));
  }
  submission_counter_ = submissions_.size();
}

Registration IngestService::register_participant(std::string_view experiment_id) {
  const Experiment* experiment = find_experiment(experiment_id);
  if (!experiment) throw UnknownExperiment(experiment_id);

  auto state = std::make_unique<ParticipantState>();
  state->experiment = experiment;
  state->info.experiment_id = experiment->experiment_id;
  state->info.registered_at_ms = now_ms();

  std::unique_lock registry(registry_mutex_);
  do {
    state->info.participant_id = "p-" + random_hex(8);
  } while (participants_.count(state->info.participant_id) > 0);
  do {
    state->info.auth_token = random_hex(16);
  } while (by_token_.count(state->info.auth_token) > 0);
  {
    std::lock_guard store(store_mutex_);
    journal_.append_participant(state->info);
  }
  Registration out{state->info.participant_id, state->info.auth_token};
  by_token_[state->info.auth_token] = state.get();
  participants_[state->info.participant_id] = std::move(state);
  return out;
}

IngestService::ParticipantState* IngestService::participant_for_token(std::string_view token) const {
  std::shared_lock registry(registry_mutex_);
  const auto it = by_token_.find(token);
  return it == by_token_.end() ? nullptr : it->second;
}

std::string IngestService::next_submission_id() { return fmt::format("sub-{:06}", submission_counter_ + 1); }

SubmitOutcome IngestService::submit(std::string_view token, const SubmissionEnvelope& envelope) {
  ParticipantState* participant = participant_for_token(token);
  if (!participant) return reject(RejectionCode::BadToken, "unknown bearer token");
  if (envelope.idempotency_key.empty()) return reject(RejectionCode::Malformed, "missing idempotency key");

  std::lock_guard participant_lock(participant->mutex);

  {
    std::lock_guard store(store_mutex_);
    if (const auto it = by_key_.find(envelope.idempotency_key); it != by_key_.end()) {
      if (it->second.participant_id != participant->info.participant_id) {
        return reject(RejectionCode::IdempotencyConflict, "idempotency key already used by another participant");
      }
      return Accepted{it->second.submission_id, true};
    }
  }

  if (envelope.client_session_start_ms >= envelope.client_session_end_ms) {
    return reject(RejectionCode::Malformed, "session start must precede session end");
  }
  core::SensorAggregate aggregate;
  try {
    aggregate = core::aggregate_session(envelope.samples);
  } catch (const Error& e) {
    return reject(RejectionCode::Malformed, e.what());
  }

  const Experiment& experiment = *participant->experiment;
  const std::int64_t at = envelope.client_session_end_ms;
  const std::int64_t day = experiment.local_day(at);
  const int today = participant->accepted_per_day.count(day) ? participant->accepted_per_day.at(day) : 0;
  if (today >= experiment.max_submissions_per_day) {
    return reject(RejectionCode::TooManyToday,
                  fmt::format("already {} submissions on this day", experiment.max_submissions_per_day));
  }

  const std::int64_t gap_ms = static_cast<std::int64_t>(experiment.min_gap_hours) * 3600 * 1000;
  // Any accepted submission strictly within the gap on either side blocks this one.
  const auto neighbour = participant->accepted_times.lower_bound(at - gap_ms + 1);
  if (neighbour != participant->accepted_times.end() && *neighbour < at + gap_ms) {
    return reject(RejectionCode::TooSoon, fmt::format("submissions must be at least {} hours apart",
                                                      experiment.min_gap_hours));
  }

  const bool first_of_day = today == 0;
  const bool claims_first = envelope.response.session_kind == survey::SessionKind::FirstOfDay;
  const bool has_psqi = has_psqi_answers(envelope.response, bank_);
  if (first_of_day && (!claims_first || !has_psqi)) {
    return reject(RejectionCode::WrongSessionKind, "first submission of the day must include the PSQI items");
  }
  if (!first_of_day && (claims_first || has_psqi)) {
    return reject(RejectionCode::WrongSessionKind, "PSQI items are only answered on the first submission of the day");
  }

  try {
    const auto completeness = survey::validate_response(envelope.response, bank_);
    if (!completeness.complete()) {
      return reject(RejectionCode::Incomplete, "survey incomplete", completeness.missing);
    }
  } catch (const survey::UnknownQuestionId& e) {
    return reject(RejectionCode::Malformed, e.what(), e.ids());
  }

  core::Submission submission;
  submission.participant_id = participant->info.participant_id;
  submission.experiment_id = experiment.experiment_id;
  submission.session_start_ms = envelope.client_session_start_ms;
  submission.session_end_ms = envelope.client_session_end_ms;
  submission.is_first_of_day = first_of_day;
  submission.question_bank_hash = bank_.content_hash();
  submission.response = envelope.response;
  submission.aggregate = aggregate;
  submission.idempotency_key = envelope.idempotency_key;
  submission.validity = core::check_validity(submission, envelope.samples, bank_);

  {
    std::lock_guard store(store_mutex_);
    // Another participant may have claimed the key since the first lookup.
    if (by_key_.count(envelope.idempotency_key) > 0) {
      return reject(RejectionCode::IdempotencyConflict, "idempotency key already used by another participant");
    }
    submission.submission_id = next_submission_id();
    journal_.append_submission(submission, envelope.samples);
    ++submission_counter_;
    by_key_[submission.idempotency_key] = {submission.participant_id, submission.submission_id};
    submissions_.push_back(submission);
  }
  participant->accepted_times.insert(at);
  ++participant->accepted_per_day[day];
  return Accepted{submission.submission_id, false};
}

std::vector<core::Submission> IngestService::export_dataset(std::string_view experiment_id,
                                                            bool include_invalid) const {
  if (!find_experiment(experiment_id)) throw UnknownExperiment(experiment_id);
  std::lock_guard store(store_mutex_);
  std::vector<core::Submission> out;
  for (const auto& s : submissions_) {
    if (s.experiment_id == experiment_id && (include_invalid || s.validity.is_valid())) out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.session_end_ms < b.session_end_ms; });
  return out;
}

bool IngestService::healthy() const {
  std::lock_guard store(store_mutex_);
  return journal_.writable();
}

std::size_t IngestService::stored_count() const {
  std::lock_guard store(store_mutex_);
  return submissions_.size();
}

}  // namespace wellness::ingest
