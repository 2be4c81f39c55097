#pragma once

#include <span>
#include <vector>

#include "wellness/core/model.hpp"

namespace wellness::core {

class EmptySession : public Error {
 public:
  EmptySession() : Error("session has no sensor samples") {}
};

class NonMonotoneSequence : public Error {
 public:
  using Error::Error;
};

/// Per-variable arithmetic means over one session's samples.
/// Throws EmptySession or NonMonotoneSequence (seq must strictly increase).
SensorAggregate aggregate_session(std::span<const SensorSample> samples);

/// Validity verdict for a stored submission, checks in priority order:
///   1. a variable other than luminosity reads exactly 0 in every sample
///   2. an aggregate mean outside physical_range()
///   3. the survey response is incomplete for its session kind
/// Unknown answer ids count as an incomplete survey.
Validity check_validity(const Submission& submission, std::span<const SensorSample> samples,
                        const survey::QuestionBank& bank = survey::QuestionBank::builtin());

/// Same as check_validity but without the raw stream: only the range and
/// completeness checks can fire.
Validity check_validity_aggregate(const Submission& submission,
                                  const survey::QuestionBank& bank = survey::QuestionBank::builtin());

struct RejectedSubmission {
  Submission submission;
  ValidityReason reason;
};

struct FilteredDataset {
  std::vector<Submission> valid;
  std::vector<RejectedSubmission> rejected;
};

/// Splits submissions by their stored verdict, preserving input order. A
/// repeat of an earlier submission_id or idempotency_key is rejected as
/// DuplicateSubmission.
FilteredDataset filter_dataset(std::span<const Submission> submissions);

}  // namespace wellness::core
