#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "wellness/error.hpp"
#include "wellness/survey/response.hpp"

namespace wellness::core {

enum class Variable { Temperature, Humidity, Pressure, Luminosity, Audio };

inline constexpr std::array<Variable, 5> kVariables{
    Variable::Temperature, Variable::Humidity, Variable::Pressure, Variable::Luminosity, Variable::Audio};

std::string_view to_string(Variable v);
std::optional<Variable> parse_variable(std::string_view name);

/// One value per environmental variable: degC, %RH, hPa, lux, dB.
struct Environment {
  double temperature = 0.0;
  double humidity = 0.0;
  double pressure = 0.0;
  double luminosity = 0.0;
  double audio = 0.0;

  double get(Variable v) const;
  double& at(Variable v);

  friend bool operator==(const Environment&, const Environment&) = default;
};

struct SensorSample {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  Environment values;

  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

struct SensorAggregate {
  Environment means;
  std::uint64_t sample_count = 0;

  friend bool operator==(const SensorAggregate&, const SensorAggregate&) = default;
};

struct PhysicalRange {
  double min;
  double max;

  constexpr bool contains(double value) const { return value >= min && value <= max; }
};

/// Plausibility bounds applied to session aggregates (inclusive).
constexpr PhysicalRange physical_range(Variable v) {
  switch (v) {
    case Variable::Temperature: return {-40.0, 85.0};
    case Variable::Humidity: return {0.0, 100.0};
    case Variable::Pressure: return {300.0, 1100.0};
    case Variable::Luminosity: return {0.0, 200000.0};
    case Variable::Audio: return {0.0, 140.0};
  }
  return {0.0, 0.0};
}

/// Ordered by detection priority: the first failing check wins.
enum class ValidityCode { ZeroReadingSensor, OutOfPhysicalRange, IncompleteSurvey, DuplicateSubmission };

struct ValidityReason {
  ValidityCode code{};
  std::optional<Variable> variable;  ///< set for the two sensor codes

  /// Canonical text form, e.g. "ZeroReadingSensor(humidity)".
  std::string to_string() const;
  static std::optional<ValidityReason> parse(std::string_view text);

  friend bool operator==(const ValidityReason&, const ValidityReason&) = default;
};

std::string_view to_string(ValidityCode code);

/// Valid when `reason` is empty.
struct Validity {
  std::optional<ValidityReason> reason;

  static Validity valid() { return {}; }
  static Validity invalid(ValidityReason r) { return {r}; }
  bool is_valid() const { return !reason.has_value(); }

  friend bool operator==(const Validity&, const Validity&) = default;
};

struct Submission {
  std::string submission_id;
  std::string participant_id;
  std::string experiment_id;
  std::int64_t session_start_ms = 0;
  std::int64_t session_end_ms = 0;
  bool is_first_of_day = false;
  std::string question_bank_hash;
  survey::SurveyResponse response;
  SensorAggregate aggregate;
  Validity validity;
  std::string idempotency_key;

  friend bool operator==(const Submission&, const Submission&) = default;
};

}  // namespace wellness::core
