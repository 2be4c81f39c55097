#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wellness/error.hpp"

namespace wellness::ingest {

struct Experiment {
  std::string experiment_id;
  std::string name;
  std::string start_date;  ///< YYYY-MM-DD
  std::string end_date;    ///< YYYY-MM-DD
  int max_submissions_per_day = 3;
  int min_gap_hours = 2;
  /// Offset of the participants' local calendar day from UTC.
  int utc_offset_minutes = 0;

  /// Local calendar day index (days since 1970-01-01 local) of an instant.
  std::int64_t local_day(std::int64_t timestamp_ms) const;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// {"experiments": [{"experiment_id", "name", "start_date", "end_date",
///   "max_submissions_per_day"?, "min_gap_hours"?, "utc_offset_minutes"?}]}
std::vector<Experiment> parse_experiments(std::string_view json_text);
std::vector<Experiment> load_experiments(const std::string& path);

}  // namespace wellness::ingest
