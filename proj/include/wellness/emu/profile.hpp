#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wellness/core/model.hpp"

namespace wellness::emu {

enum class Shape { Normal, LogNormal, Constant };

std::string_view to_string(Shape shape);
std::optional<Shape> parse_shape(std::string_view text);

/// Generator for one variable. For LogNormal, mean and stddev describe the
/// emitted values, not the underlying normal.
struct VariableSpec {
  double mean = 0.0;
  double stddev = 0.0;
  Shape shape = Shape::Normal;
  double drift_per_minute = 0.0;
};

class ProfileError : public Error {
 public:
  using Error::Error;
};

struct EnvironmentProfile {
  std::string name;
  std::array<VariableSpec, 5> variables{};  ///< indexed by core::Variable
  std::uint64_t seed = 1;

  VariableSpec& spec(core::Variable v) { return variables[static_cast<std::size_t>(v)]; }
  const VariableSpec& spec(core::Variable v) const { return variables[static_cast<std::size_t>(v)]; }
  /// Throws ProfileError on a negative stddev, a non-positive log-normal
  /// mean or a non-finite parameter.
  void validate() const;
};

/// "indoor_office", "outdoor_daylight", "late_night_dorm".
std::vector<std::string> builtin_profile_names();
std::optional<EnvironmentProfile> builtin_profile(std::string_view name);

/// {"name": ..., "seed": ..., "variables": {"temperature": {"mean", "stddev",
///  "shape", "drift_per_minute"}, ...}}. Unlisted variables keep the
/// indoor_office settings.
EnvironmentProfile parse_profile(std::string_view json_text);
/// Built-in name, or a path to a profile file.
EnvironmentProfile resolve_profile(const std::string& name_or_path);

struct FaultMode {
  enum class Kind { None, ZeroBattery, Dropout };

  Kind kind = Kind::None;
  std::vector<core::Variable> zeroed;  ///< ZeroBattery
  double dropout_probability = 0.0;    ///< Dropout, in [0, 1]

  static FaultMode none() { return {}; }
  static FaultMode zero_battery(std::vector<core::Variable> variables) { return {Kind::ZeroBattery, std::move(variables), 0.0}; }
  static FaultMode dropout(double probability);

  /// "none" | "zero:<var>[,<var>...]" | "zero:all" | "drop:<p>".
  static FaultMode parse(std::string_view text);
  std::string to_string() const;
};

/// Draws one reading per call. Values are clamped to core::physical_range
/// before faults are applied.
class ValueSampler {
 public:
  explicit ValueSampler(const EnvironmentProfile& profile);

  core::Environment draw(std::mt19937_64& rng, double elapsed_minutes) const;

 private:
  EnvironmentProfile profile_;
};

}  // namespace wellness::emu
