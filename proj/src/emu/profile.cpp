#include "wellness/emu/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace wellness::emu {

namespace {

using core::Variable;

EnvironmentProfile make_profile(std::string name, VariableSpec temperature, VariableSpec humidity,
                                VariableSpec pressure, VariableSpec luminosity, VariableSpec audio) {
  EnvironmentProfile p;
  p.name = std::move(name);
  p.spec(Variable::Temperature) = temperature;
  p.spec(Variable::Humidity) = humidity;
  p.spec(Variable::Pressure) = pressure;
  p.spec(Variable::Luminosity) = luminosity;
  p.spec(Variable::Audio) = audio;
  return p;
}

// Qualitative placements inside typical indoor/outdoor readings, not fits.
const std::vector<EnvironmentProfile>& builtins() {
  static const std::vector<EnvironmentProfile> profiles{
      make_profile("indoor_office", {22.5, 1.0, Shape::Normal}, {40.0, 5.0, Shape::Normal},
                   {1013.0, 4.0, Shape::Normal}, {350.0, 150.0, Shape::LogNormal}, {48.0, 6.0, Shape::Normal}),
      make_profile("outdoor_daylight", {18.0, 4.0, Shape::Normal}, {60.0, 10.0, Shape::Normal},
                   {1010.0, 5.0, Shape::Normal}, {20000.0, 10000.0, Shape::LogNormal}, {60.0, 8.0, Shape::Normal}),
      make_profile("late_night_dorm", {21.0, 1.5, Shape::Normal}, {45.0, 6.0, Shape::Normal},
                   {1013.0, 4.0, Shape::Normal}, {40.0, 25.0, Shape::LogNormal}, {38.0, 5.0, Shape::Normal}),
  };
  return profiles;
}

double draw_value(const VariableSpec& spec, std::mt19937_64& rng, double elapsed_minutes) {
  const double centre = spec.mean + spec.drift_per_minute * elapsed_minutes;
  if (spec.shape == Shape::Constant || spec.stddev == 0.0) return centre;
  if (spec.shape == Shape::Normal) return std::normal_distribution<double>(centre, spec.stddev)(rng);
  // Log-normal parameterised by the mean and stddev of the emitted values.
  const double ratio = spec.stddev / centre;
  const double sigma2 = std::log1p(ratio * ratio);
  const double mu = std::log(centre) - 0.5 * sigma2;
  return std::lognormal_distribution<double>(mu, std::sqrt(sigma2))(rng);
}

}  // namespace

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Normal: return "normal";
    case Shape::LogNormal: return "lognormal";
    case Shape::Constant: return "constant";
  }
  return "?";
}

std::optional<Shape> parse_shape(std::string_view text) {
  for (auto s : {Shape::Normal, Shape::LogNormal, Shape::Constant}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

void EnvironmentProfile::validate() const {
  for (Variable v : core::kVariables) {
    const VariableSpec& s = spec(v);
    if (!std::isfinite(s.mean) || !std::isfinite(s.stddev) || !std::isfinite(s.drift_per_minute)) {
      throw ProfileError(fmt::format("profile {}: non-finite parameter for {}", name, core::to_string(v)));
    }
    if (s.stddev < 0.0) throw ProfileError(fmt::format("profile {}: negative stddev for {}", name, core::to_string(v)));
    if (s.shape == Shape::LogNormal && s.mean <= 0.0) {
      throw ProfileError(fmt::format("profile {}: log-normal {} needs a positive mean", name, core::to_string(v)));
    }
  }
}

std::vector<std::string> builtin_profile_names() {
  std::vector<std::string> names;
  for (const auto& p : builtins()) names.push_back(p.name);
  return names;
}

std::optional<EnvironmentProfile> builtin_profile(std::string_view name) {
  for (const auto& p : builtins()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

EnvironmentProfile parse_profile(std::string_view json_text) {
  EnvironmentProfile profile = *builtin_profile("indoor_office");
  try {
    const auto doc = nlohmann::json::parse(json_text);
    profile.name = doc.value("name", std::string("custom"));
    profile.seed = doc.value("seed", profile.seed);
    if (doc.contains("variables")) {
      for (const auto& [key, value] : doc.at("variables").items()) {
        const auto variable = core::parse_variable(key);
        if (!variable) throw ProfileError("profile: unknown variable '" + key + "'");
        VariableSpec& spec = profile.spec(*variable);
        spec.mean = value.at("mean").get<double>();
        spec.stddev = value.value("stddev", 0.0);
        spec.drift_per_minute = value.value("drift_per_minute", 0.0);
        const auto shape = parse_shape(value.value("shape", std::string("normal")));
        if (!shape) throw ProfileError("profile: unknown shape for '" + key + "'");
        spec.shape = *shape;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError(std::string("profile: ") + e.what());
  }
  profile.validate();
  return profile;
}

EnvironmentProfile resolve_profile(const std::string& name_or_path) {
  if (auto p = builtin_profile(name_or_path)) return *p;
  std::ifstream in(name_or_path);
  if (!in) throw ProfileError("no built-in profile or file named '" + name_or_path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_profile(buffer.str());
}

FaultMode FaultMode::dropout(double probability) {
  if (!(probability >= 0.0 && probability <= 1.0)) throw ProfileError("dropout probability must be in [0, 1]");
  return {Kind::Dropout, {}, probability};
}

FaultMode FaultMode::parse(std::string_view text) {
  if (text == "none") return none();
  if (text.starts_with("zero:")) {
    std::vector<Variable> vars;
    std::string_view rest = text.substr(5);
    if (rest == "all") return zero_battery({core::kVariables.begin(), core::kVariables.end()});
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto name = rest.substr(0, comma);
      const auto v = core::parse_variable(name);
      if (!v) throw ProfileError("fault: unknown variable '" + std::string(name) + "'");
      vars.push_back(*v);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (vars.empty()) throw ProfileError("fault: zero: needs at least one variable");
    return zero_battery(std::move(vars));
  }
  if (text.starts_with("drop:")) {
    double p = 0.0;
    std::istringstream in{std::string(text.substr(5))};
    if (!(in >> p) || !in.eof()) throw ProfileError("fault: bad dropout probability");
    return dropout(p);
  }
  throw ProfileError("fault must be none, zero:<vars> or drop:<p>");
}

std::string FaultMode::to_string() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Dropout: return fmt::format("drop:{}", dropout_probability);
    case Kind::ZeroBattery: {
      std::string out = "zero:";
      for (std::size_t i = 0; i < zeroed.size(); ++i) {
        if (i) out += ',';
        out += core::to_string(zeroed[i]);
      }
      return out;
    }
  }
  return "none";
}

ValueSampler::ValueSampler(const EnvironmentProfile& profile) : profile_(profile) { profile_.validate(); }

core::Environment ValueSampler::draw(std::mt19937_64& rng, double elapsed_minutes) const {
  core::Environment env;
  for (Variable v : core::kVariables) {
    const auto range = core::physical_range(v);
    env.at(v) = std::clamp(draw_value(profile_.spec(v), rng, elapsed_minutes), range.min, range.max);
  }
  return env;
}

}  // namespace wellness::emu
