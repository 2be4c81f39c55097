#include "wellness/core/model.hpp"

namespace wellness::core {

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::Temperature: return "temperature";
    case Variable::Humidity: return "humidity";
    case Variable::Pressure: return "pressure";
    case Variable::Luminosity: return "luminosity";
    case Variable::Audio: return "audio";
  }
  return "?";
}

std::optional<Variable> parse_variable(std::string_view name) {
  for (Variable v : kVariables) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

double Environment::get(Variable v) const {
  switch (v) {
    case Variable::Temperature: return temperature;
    case Variable::Humidity: return humidity;
    case Variable::Pressure: return pressure;
    case Variable::Luminosity: return luminosity;
    case Variable::Audio: return audio;
  }
  return 0.0;
}

double& Environment::at(Variable v) {
  switch (v) {
    case Variable::Temperature: return temperature;
    case Variable::Humidity: return humidity;
    case Variable::Pressure: return pressure;
    case Variable::Luminosity: return luminosity;
    case Variable::Audio: break;
  }
  return audio;
}

std::string_view to_string(ValidityCode code) {
  switch (code) {
    case ValidityCode::ZeroReadingSensor: return "ZeroReadingSensor";
    case ValidityCode::OutOfPhysicalRange: return "OutOfPhysicalRange";
    case ValidityCode::IncompleteSurvey: return "IncompleteSurvey";
    case ValidityCode::DuplicateSubmission: return "DuplicateSubmission";
  }
  return "?";
}

std::string ValidityReason::to_string() const {
  std::string out(core::to_string(code));
  if (variable) {
    out += '(';
    out += core::to_string(*variable);
    out += ')';
  }
  return out;
}

std::optional<ValidityReason> ValidityReason::parse(std::string_view text) {
  std::string_view head = text;
  std::optional<Variable> variable;
  if (const auto open = text.find('('); open != std::string_view::npos) {
    if (text.back() != ')') return std::nullopt;
    variable = parse_variable(text.substr(open + 1, text.size() - open - 2));
    if (!variable) return std::nullopt;
    head = text.substr(0, open);
  }
  for (auto code : {ValidityCode::ZeroReadingSensor, ValidityCode::OutOfPhysicalRange, ValidityCode::IncompleteSurvey,
                    ValidityCode::DuplicateSubmission}) {
    if (core::to_string(code) != head) continue;
    const bool sensor_code = code == ValidityCode::ZeroReadingSensor || code == ValidityCode::OutOfPhysicalRange;
    if (sensor_code != variable.has_value()) return std::nullopt;
    return ValidityReason{code, variable};
  }
  return std::nullopt;
}

}  // namespace wellness::core
