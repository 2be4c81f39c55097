#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "wellness/emu/profile.hpp"

namespace wellness::emu {

class InvalidRate : public Error {
 public:
  using Error::Error;
};

inline constexpr double kMaxRateHz = 100.0;

/// One tick of the stream. Dropout consumes the seq without a sample.
struct Emission {
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  std::optional<core::SensorSample> sample;
};

/// Deterministic session stream: seq starts at 1, tick k is stamped
/// start_ms + (k-1)/rate. Same (profile, fault, rate, start) -> same values.
class SampleStream {
 public:
  /// Throws InvalidRate unless rate_hz is in (0, 100].
  SampleStream(const EnvironmentProfile& profile, FaultMode fault, double rate_hz, std::int64_t start_ms);

  Emission next();

  double rate_hz() const { return rate_hz_; }
  std::uint64_t last_seq() const { return seq_; }

 private:
  ValueSampler sampler_;
  FaultMode fault_;
  double rate_hz_;
  std::int64_t start_ms_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::uint64_t seq_ = 0;
};

SampleStream start_stream(const EnvironmentProfile& profile, FaultMode fault, double rate_hz, std::int64_t start_ms);

/// A single reading with seq 0, drawn from the profile's seed.
core::SensorSample snapshot(const EnvironmentProfile& profile, const FaultMode& fault = {},
                            std::int64_t timestamp_ms = 0);

/// `S <seq> <timestamp_ms> <temp_c> <rh_pct> <hpa> <lux> <db>`, 4 decimals.
std::string format_sample_line(const core::SensorSample& sample);
std::optional<core::SensorSample> parse_sample_line(std::string_view line);

}  // namespace wellness::emu
