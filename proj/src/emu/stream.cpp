#include "wellness/emu/stream.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace wellness::emu {

namespace {

void apply_fault(const FaultMode& fault, core::Environment& env) {
  if (fault.kind != FaultMode::Kind::ZeroBattery) return;
  for (core::Variable v : fault.zeroed) env.at(v) = 0.0;
}

}  // namespace

SampleStream::SampleStream(const EnvironmentProfile& profile, FaultMode fault, double rate_hz, std::int64_t start_ms)
    : sampler_(profile), fault_(std::move(fault)), rate_hz_(rate_hz), start_ms_(start_ms), rng_(profile.seed) {
  if (!(rate_hz > 0.0 && rate_hz <= kMaxRateHz)) {
    throw InvalidRate(fmt::format("rate {} Hz outside (0, {}]", rate_hz, kMaxRateHz));
  }
}

Emission SampleStream::next() {
  ++seq_;
  const double elapsed_s = static_cast<double>(seq_ - 1) / rate_hz_;
  Emission out;
  out.seq = seq_;
  out.timestamp_ms = start_ms_ + std::llround(elapsed_s * 1000.0);

  core::Environment env = sampler_.draw(rng_, elapsed_s / 60.0);
  // Always consume the dropout draw so the value sequence does not depend on p.
  const double roll = unit_(rng_);
  if (fault_.kind == FaultMode::Kind::Dropout && roll < fault_.dropout_probability) return out;

  apply_fault(fault_, env);
  out.sample = core::SensorSample{out.seq, out.timestamp_ms, env};
  return out;
}

SampleStream start_stream(const EnvironmentProfile& profile, FaultMode fault, double rate_hz, std::int64_t start_ms) {
  return SampleStream(profile, std::move(fault), rate_hz, start_ms);
}

core::SensorSample snapshot(const EnvironmentProfile& profile, const FaultMode& fault, std::int64_t timestamp_ms) {
  std::mt19937_64 rng(profile.seed);
  core::SensorSample sample{0, timestamp_ms, ValueSampler(profile).draw(rng, 0.0)};
  apply_fault(fault, sample.values);
  return sample;
}

std::string format_sample_line(const core::SensorSample& s) {
  return fmt::format("S {} {} {:.4f} {:.4f} {:.4f} {:.4f} {:.4f}", s.seq, s.timestamp_ms, s.values.temperature,
                     s.values.humidity, s.values.pressure, s.values.luminosity, s.values.audio);
}

std::optional<core::SensorSample> parse_sample_line(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string tag;
  core::SensorSample s;
  if (!(in >> tag) || tag != "S") return std::nullopt;
  if (!(in >> s.seq >> s.timestamp_ms >> s.values.temperature >> s.values.humidity >> s.values.pressure >>
        s.values.luminosity >> s.values.audio)) {
    return std::nullopt;
  }
  std::string trailing;
  if (in >> trailing) return std::nullopt;
  return s;
}

}  // namespace wellness::emu
