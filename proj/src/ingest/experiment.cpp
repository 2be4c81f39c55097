#include "wellness/ingest/experiment.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace wellness::ingest {

namespace {

constexpr std::int64_t kMsPerDay = 24LL * 60 * 60 * 1000;

bool valid_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char dash1 = 0, dash2 = 0;
  std::istringstream in(text);
  if (!(in >> y >> dash1 >> m >> dash2 >> d) || dash1 != '-' || dash2 != '-' || text.size() != 10) return false;
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

}  // namespace

std::int64_t Experiment::local_day(std::int64_t timestamp_ms) const {
  const std::int64_t local = timestamp_ms + static_cast<std::int64_t>(utc_offset_minutes) * 60 * 1000;
  // Floor division so pre-epoch instants land on the right day.
  return local >= 0 ? local / kMsPerDay : -((-local + kMsPerDay - 1) / kMsPerDay);
}

std::vector<Experiment> parse_experiments(std::string_view json_text) {
  std::vector<Experiment> out;
  std::set<std::string> ids;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& record : doc.at("experiments")) {
      Experiment e;
      e.experiment_id = record.at("experiment_id").get<std::string>();
      e.name = record.value("name", e.experiment_id);
      e.start_date = record.at("start_date").get<std::string>();
      e.end_date = record.at("end_date").get<std::string>();
      e.max_submissions_per_day = record.value("max_submissions_per_day", 3);
      e.min_gap_hours = record.value("min_gap_hours", 2);
      e.utc_offset_minutes = record.value("utc_offset_minutes", 0);

      if (e.experiment_id.empty() || !ids.insert(e.experiment_id).second) {
        throw ConfigError("experiment ids must be non-empty and unique");
      }
      if (!valid_date(e.start_date) || !valid_date(e.end_date) || e.start_date > e.end_date) {
        throw ConfigError("experiment " + e.experiment_id + ": bad date window");
      }
      if (e.max_submissions_per_day <= 0 || e.min_gap_hours <= 0) {
        throw ConfigError("experiment " + e.experiment_id + ": limits must be positive");
      }
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return out;
}

std::vector<Experiment> load_experiments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiments(buffer.str());
}

}  // namespace wellness::ingest
