#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "ingest_support.hpp"
#include "wellness/ingest/records.hpp"

using namespace wellness::ingest;
using namespace wellness::testing;
using wellness::survey::SessionKind;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string accepted_id(const SubmitOutcome& o) {
  REQUIRE(accepted(o));
  return std::get<Accepted>(o).submission_id;
}

}  // namespace

TEST_CASE("experiment config") {
  const auto list = parse_experiments(R"({"experiments": [
    {"experiment_id": "e1", "name": "One", "start_date": "2024-01-01", "end_date": "2024-02-01"},
    {"experiment_id": "e2", "name": "Two", "start_date": "2024-01-01", "end_date": "2024-02-01",
     "max_submissions_per_day": 2, "min_gap_hours": 4, "utc_offset_minutes": -300}]})");
  REQUIRE(list.size() == 2);
  CHECK(list[0].max_submissions_per_day == 3);
  CHECK(list[0].min_gap_hours == 2);
  CHECK(list[1].max_submissions_per_day == 2);
  CHECK(list[1].utc_offset_minutes == -300);

  CHECK_THROWS_AS(parse_experiments("{}"), ConfigError);
  CHECK_THROWS_AS(parse_experiments(R"({"experiments": [{"experiment_id": "e", "name": "n",
    "start_date": "2024-13-01", "end_date": "2024-02-01"}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiments(R"({"experiments": [{"experiment_id": "e", "name": "n",
    "start_date": "2024-01-01", "end_date": "2024-02-01", "max_submissions_per_day": 0}]})"),
                  ConfigError);
  CHECK_THROWS_AS(load_experiments("/nonexistent/experiments.json"), ConfigError);
}

TEST_CASE("local calendar day") {
  Experiment utc;
  CHECK(utc.local_day(kDay0) == 19'786);
  CHECK(utc.local_day(kDay0 - 1) == 19'785);
  CHECK(utc.local_day(-1) == -1);
  Experiment east = utc;
  east.utc_offset_minutes = 120;
  CHECK(east.local_day(kDay0 - 1) == 19'786);
  Experiment west = utc;
  west.utc_offset_minutes = -300;
  CHECK(west.local_day(kDay0 + 4 * kHour) == 19'785);
}

TEST_CASE("submission records keep field order and survive a round trip") {
  auto s = make_submission("sub-000001", all_answers(SessionKind::FirstOfDay, true, 3));
  s.aggregate.means.temperature = 21.123456789012345;
  s.aggregate.means.luminosity = 1e-7;
  const std::string line = submission_to_line(s);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(parse_submission_line(line) == s);
  CHECK(submission_to_line(parse_submission_line(line)) == line);

  std::vector<std::string> keys;
  const Json parsed = Json::parse(line);
  for (const auto& [k, v] : parsed.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"submission_id", "participant_id", "experiment_id", "session_start_ms",
                                         "session_end_ms", "is_first_of_day", "question_bank_hash", "answers",
                                         "aggregate", "validity", "reason", "idempotency_key"});

  s.validity = wellness::core::Validity::invalid({wellness::core::ValidityCode::ZeroReadingSensor,
                                                  wellness::core::Variable::Audio});
  const auto invalid = Json::parse(submission_to_line(s));
  CHECK(invalid["validity"] == "invalid");
  CHECK(invalid["reason"] == "ZeroReadingSensor(audio)");
  CHECK(parse_submission_line(submission_to_line(s)) == s);

  CHECK_THROWS_AS(parse_submission_line("{"), RecordFormatError);
  CHECK_THROWS_AS(parse_submission_line(R"({"submission_id": 5})"), RecordFormatError);
}

TEST_CASE("sample log lines") {
  auto samples = constant_samples(3, office_env());
  samples[1].values.audio = 47.123456789;
  const auto [id, back] = parse_samples_line(samples_to_line("sub-000009", samples));
  CHECK(id == "sub-000009");
  CHECK(back == samples);
}

TEST_CASE("registration") {
  TempDir dir;
  IngestService service(test_experiments(), dir.path());
  const auto a = service.register_participant("exp-1");
  const auto b = service.register_participant("exp-1");
  CHECK(a.participant_id != b.participant_id);
  CHECK(a.auth_token != b.auth_token);
  CHECK(a.auth_token.size() == 32);
  CHECK_THROWS_AS(service.register_participant("exp-missing"), UnknownExperiment);
}

TEST_CASE("100 concurrent registrations yield 100 distinct tokens") {
  TempDir dir;
  IngestService service(test_experiments(), dir.path());
  std::vector<Registration> regs(100);
  std::vector<std::thread> threads;
  for (int t = 0; t < 10; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) regs[t * 10 + i] = service.register_participant("exp-1");
    });
  }
  for (auto& th : threads) th.join();
  std::set<std::string> tokens, ids;
  for (const auto& r : regs) {
    tokens.insert(r.auth_token);
    ids.insert(r.participant_id);
  }
  CHECK(tokens.size() == 100);
  CHECK(ids.size() == 100);
  IngestService reloaded(test_experiments(), dir.path());
  CHECK(accepted(reloaded.submit(regs[57].auth_token, make_envelope("k", SessionKind::FirstOfDay, kDay0 + 9 * kHour))));
}

TEST_CASE("protocol rules") {
  TempDir dir;
  IngestService service(test_experiments(), dir.path());
  const auto p = service.register_participant("exp-1");
  const auto q = service.register_participant("exp-1");

  CHECK(rejection(service.submit("bogus", make_envelope("k0", SessionKind::FirstOfDay, kDay0 + 8 * kHour))) ==
        RejectionCode::BadToken);
  CHECK(rejection(service.submit(p.auth_token, make_envelope("k1", SessionKind::Subsequent, kDay0 + 8 * kHour))) ==
        RejectionCode::WrongSessionKind);

  const std::string first = accepted_id(service.submit(p.auth_token, make_envelope("k1", SessionKind::FirstOfDay,
                                                                                    kDay0 + 8 * kHour)));
  CHECK(service.stored_count() == 1);

  SUBCASE("resend after a lost response returns the original id") {
    const auto again = service.submit(p.auth_token, make_envelope("k1", SessionKind::FirstOfDay, kDay0 + 8 * kHour));
    CHECK(accepted_id(again) == first);
    CHECK(std::get<Accepted>(again).replayed);
    CHECK(service.stored_count() == 1);
    CHECK(rejection(service.submit(q.auth_token, make_envelope("k1", SessionKind::FirstOfDay, kDay0 + 8 * kHour))) ==
          RejectionCode::IdempotencyConflict);
  }

  SUBCASE("gap and daily cap") {
    CHECK(rejection(service.submit(p.auth_token, make_envelope("k2", SessionKind::Subsequent,
                                                               kDay0 + 9 * kHour + 59 * 60'000))) ==
          RejectionCode::TooSoon);
    CHECK(rejection(service.submit(p.auth_token, make_envelope("k2", SessionKind::FirstOfDay, kDay0 + 10 * kHour))) ==
          RejectionCode::WrongSessionKind);
    CHECK(accepted(service.submit(p.auth_token, make_envelope("k2", SessionKind::Subsequent, kDay0 + 10 * kHour))));
    CHECK(accepted(service.submit(p.auth_token, make_envelope("k3", SessionKind::Subsequent, kDay0 + 15 * kHour))));
    CHECK(rejection(service.submit(p.auth_token, make_envelope("k4", SessionKind::Subsequent, kDay0 + 20 * kHour))) ==
          RejectionCode::TooManyToday);
    // Next calendar day starts fresh with the PSQI items.
    CHECK(accepted(service.submit(p.auth_token, make_envelope("k4", SessionKind::FirstOfDay, kDay0 + 32 * kHour))));
    // Gap applies to earlier sessions too.
    CHECK(rejection(service.submit(p.auth_token, make_envelope("k5", SessionKind::Subsequent,
                                                               kDay0 + 30 * kHour + 60'001))) ==
          RejectionCode::TooSoon);
    // Other participants are unaffected.
    CHECK(accepted(service.submit(q.auth_token, make_envelope("q1", SessionKind::FirstOfDay, kDay0 + 8 * kHour))));
  }

  SUBCASE("incomplete and malformed envelopes are never stored") {
    auto env = make_envelope("k2", SessionKind::Subsequent, kDay0 + 12 * kHour);
    env.response.answers.erase("k10_sad");
    env.response.answers.erase("pss_anger");
    const auto out = service.submit(p.auth_token, env);
    REQUIRE(rejection(out) == RejectionCode::Incomplete);
    CHECK(std::get<Rejection>(out).question_ids == std::vector<std::string>{"pss_anger", "k10_sad"});

    auto no_samples = make_envelope("k2", SessionKind::Subsequent, kDay0 + 12 * kHour);
    no_samples.samples.clear();
    CHECK(rejection(service.submit(p.auth_token, no_samples)) == RejectionCode::Malformed);
    auto window = make_envelope("k2", SessionKind::Subsequent, kDay0 + 12 * kHour);
    window.client_session_start_ms = window.client_session_end_ms;
    CHECK(rejection(service.submit(p.auth_token, window)) == RejectionCode::Malformed);
    auto unknown = make_envelope("k2", SessionKind::Subsequent, kDay0 + 12 * kHour);
    unknown.response.answers["mood"] = std::string("Yes");
    CHECK(rejection(service.submit(p.auth_token, unknown)) == RejectionCode::Malformed);
    auto keyless = make_envelope("", SessionKind::Subsequent, kDay0 + 12 * kHour);
    CHECK(rejection(service.submit(p.auth_token, keyless)) == RejectionCode::Malformed);
    CHECK(service.stored_count() == 1);
  }
}

TEST_CASE("invalid sessions are stored with their reason and hidden from the default export") {
  TempDir dir;
  IngestService service(test_experiments(), dir.path());
  CHECK(service.export_dataset("exp-empty", true).empty());
  CHECK_THROWS_AS(service.export_dataset("exp-missing", false), UnknownExperiment);

  auto dry = office_env();
  dry.humidity = 0.0;
  for (int i = 0; i < 5; ++i) {
    const auto p = service.register_participant("exp-1");
    const auto out = service.submit(p.auth_token, make_envelope(fmt::format("k{}", i), SessionKind::FirstOfDay,
                                                                kDay0 + (9 + i) * kHour, i == 2 ? dry : office_env()));
    CHECK(accepted(out));
  }
  const auto visible = service.export_dataset("exp-1", false);
  const auto all = service.export_dataset("exp-1", true);
  CHECK(visible.size() == 4);
  REQUIRE(all.size() == 5);
  CHECK(all[2].validity.reason->to_string() == "ZeroReadingSensor(humidity)");
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].session_end_ms <= all[i].session_end_ms);
}

TEST_CASE("an invalid session still counts toward the daily cap") {
  TempDir dir;
  IngestService service(test_experiments(), dir.path());
  const auto p = service.register_participant("exp-1");
  auto quiet = office_env();
  quiet.audio = 0;
  CHECK(accepted(service.submit(p.auth_token, make_envelope("a", SessionKind::FirstOfDay, kDay0 + 8 * kHour, quiet))));
  CHECK(accepted(service.submit(p.auth_token, make_envelope("b", SessionKind::Subsequent, kDay0 + 11 * kHour))));
  CHECK(accepted(service.submit(p.auth_token, make_envelope("c", SessionKind::Subsequent, kDay0 + 14 * kHour))));
  CHECK(rejection(service.submit(p.auth_token, make_envelope("d", SessionKind::Subsequent, kDay0 + 17 * kHour))) ==
        RejectionCode::TooManyToday);
}

TEST_CASE("storage failure is a fault, not a rejection, and the retry succeeds") {
  TempDir dir;
  const auto data = dir.path() / "store";
  IngestService service(test_experiments(), data);
  const auto p = service.register_participant("exp-1");
  CHECK(service.healthy());

  std::filesystem::remove_all(data);
  std::ofstream(data) << "not a directory";
  CHECK(!service.healthy());
  const auto env = make_envelope("k1", SessionKind::FirstOfDay, kDay0 + 8 * kHour);
  CHECK_THROWS_AS(service.submit(p.auth_token, env), StorageFailure);
  CHECK(service.stored_count() == 0);
  CHECK_THROWS_AS(service.register_participant("exp-1"), StorageFailure);

  std::filesystem::remove(data);
  std::filesystem::create_directories(data);
  CHECK(service.healthy());
  CHECK(accepted(service.submit(p.auth_token, env)));
  CHECK(service.stored_count() == 1);
}

TEST_CASE("restart restores state and journals re-parse byte-exactly") {
  TempDir dir;
  std::string before_ids;
  Registration p;
  {
    IngestService service(test_experiments(), dir.path());
    p = service.register_participant("exp-1");
    auto hot = office_env();
    hot.temperature = 99;
    CHECK(accepted(service.submit(p.auth_token, make_envelope("a", SessionKind::FirstOfDay, kDay0 + 8 * kHour))));
    CHECK(accepted(service.submit(p.auth_token, make_envelope("b", SessionKind::Subsequent, kDay0 + 11 * kHour, hot))));
  }
  const std::string journal = read_file(dir.path() / Journal::kSubmissionsFile);
  const std::string samples = read_file(dir.path() / Journal::kSamplesFile);

  IngestService service(test_experiments(), dir.path());
  CHECK(service.stored_count() == 2);
  CHECK(service.export_dataset("exp-1", true).size() == 2);
  CHECK(service.export_dataset("exp-1", false).size() == 1);

  std::string rewritten;
  for (const auto& s : service.export_dataset("exp-1", true)) rewritten += submission_to_line(s) + '\n';
  CHECK(rewritten == journal);
  std::string resampled;
  for (const auto& line : Journal(dir.path()).read_samples_lines()) {
    const auto [id, values] = parse_samples_line(line);
    resampled += samples_to_line(id, values) + '\n';
  }
  CHECK(resampled == samples);

  // Protocol state survives: replay, daily count, id sequence.
  const auto replay = service.submit(p.auth_token, make_envelope("b", SessionKind::Subsequent, kDay0 + 11 * kHour));
  CHECK(accepted_id(replay) == "sub-000002");
  CHECK(accepted_id(service.submit(p.auth_token, make_envelope("c", SessionKind::Subsequent, kDay0 + 14 * kHour))) ==
        "sub-000003");
  CHECK(rejection(service.submit(p.auth_token, make_envelope("d", SessionKind::Subsequent, kDay0 + 18 * kHour))) ==
        RejectionCode::TooManyToday);
  CHECK(read_file(dir.path() / Journal::kSubmissionsFile).starts_with(journal));
}
