#include "wellness/core/session.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace wellness::core {

SensorAggregate aggregate_session(std::span<const SensorSample> samples) {
  if (samples.empty()) throw EmptySession();

  Environment sums;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && samples[i].seq <= samples[i - 1].seq) {
      throw NonMonotoneSequence("sample seq " + std::to_string(samples[i].seq) + " does not follow " +
                                std::to_string(samples[i - 1].seq));
    }
    for (Variable v : kVariables) sums.at(v) += samples[i].values.get(v);
  }

  SensorAggregate aggregate;
  aggregate.sample_count = samples.size();
  const auto n = static_cast<double>(samples.size());
  for (Variable v : kVariables) aggregate.means.at(v) = sums.get(v) / n;
  return aggregate;
}

namespace {

std::optional<ValidityReason> range_failure(const SensorAggregate& aggregate) {
  for (Variable v : kVariables) {
    if (!physical_range(v).contains(aggregate.means.get(v))) {
      return ValidityReason{ValidityCode::OutOfPhysicalRange, v};
    }
  }
  return std::nullopt;
}

bool survey_complete(const Submission& submission, const survey::QuestionBank& bank) {
  try {
    return survey::validate_response(submission.response, bank).complete();
  } catch (const survey::UnknownQuestionId&) {
    return false;
  }
}

}  // namespace

Validity check_validity(const Submission& submission, std::span<const SensorSample> samples,
                        const survey::QuestionBank& bank) {
  if (!samples.empty()) {
    for (Variable v : kVariables) {
      // Darkness is a legitimate luminosity reading.
      if (v == Variable::Luminosity) continue;
      const bool all_zero =
          std::all_of(samples.begin(), samples.end(), [v](const SensorSample& s) { return s.values.get(v) == 0.0; });
      if (all_zero) return Validity::invalid({ValidityCode::ZeroReadingSensor, v});
    }
  }
  return check_validity_aggregate(submission, bank);
}

Validity check_validity_aggregate(const Submission& submission, const survey::QuestionBank& bank) {
  if (auto reason = range_failure(submission.aggregate)) return Validity::invalid(*reason);
  if (!survey_complete(submission, bank)) return Validity::invalid({ValidityCode::IncompleteSurvey, std::nullopt});
  return Validity::valid();
}

FilteredDataset filter_dataset(std::span<const Submission> submissions) {
  FilteredDataset out;
  std::set<std::string, std::less<>> seen_ids;
  std::set<std::string, std::less<>> seen_keys;
  for (const Submission& s : submissions) {
    const bool duplicate_id = !seen_ids.insert(s.submission_id).second;
    const bool duplicate_key = !s.idempotency_key.empty() && !seen_keys.insert(s.idempotency_key).second;
    if (!s.validity.is_valid()) {
      out.rejected.push_back({s, *s.validity.reason});
    } else if (duplicate_id || duplicate_key) {
      out.rejected.push_back({s, {ValidityCode::DuplicateSubmission, std::nullopt}});
    } else {
      out.valid.push_back(s);
    }
  }
  return out;
}

}  // namespace wellness::core
