#include <doctest.h>

#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "support.hpp"
#include "wellness/analysis/run.hpp"
#include "wellness/ingest/records.hpp"

using namespace wellness::analysis;
using namespace wellness::testing;
using wellness::core::Environment;
using wellness::core::Submission;
using wellness::stats::Method;
using wellness::survey::SessionKind;

namespace {

constexpr Method kAllMethods[] = {Method::Pearson, Method::Spearman, Method::Kendall};

Submission scored_submission(int index, int pss, int k10, Environment env, bool first_of_day = false,
                             int people = 0, int psqi = 0) {
  const auto kind = first_of_day ? SessionKind::FirstOfDay : SessionKind::Subsequent;
  auto s = make_submission(fmt::format("sub-{:06}", index + 1), response_with_scores(kind, pss, k10, people, psqi),
                           env);
  s.session_end_ms += index * 10'800'000LL;
  s.session_start_ms += index * 10'800'000LL;
  return s;
}

std::vector<ScoredSubmission> rows_of(const Dataset& d) { return prepare(d, {}).rows; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Varied dataset: scores cycle, sensors follow a mix of the scores.
Dataset mixed_dataset(int n, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> score(0, 10);
  std::normal_distribution<double> noise(0, 1);
  Dataset d;
  for (int i = 0; i < n; ++i) {
    const int pss = score(rng);
    const int k10 = std::clamp(pss + static_cast<int>(noise(rng) * 2), 0, 10);
    Environment env{22 + noise(rng), 40 + 3 * noise(rng), 1013 + noise(rng), 400 - 20.0 * pss + 10 * noise(rng),
                    45 + k10 + noise(rng)};
    d.submissions.push_back(scored_submission(i, pss, k10, env, i % 3 == 0, score(rng) % 4, score(rng)));
  }
  return d;
}

}  // namespace

TEST_CASE("survey matrix") {
  Dataset d;
  for (int i = 0; i < 12; ++i) d.submissions.push_back(scored_submission(i, i % 11, i % 11, office_env(), i % 2 == 0, i % 3, i % 5));
  const auto rows = rows_of(d);
  for (Method m : kAllMethods) {
    const auto t = build_survey_matrix(rows, m);
    CHECK(t.kind == TableKind::SurveyMatrix);
    CHECK(t.rows == std::vector<std::string>{"people", "psqi", "pss", "k10"});
    CHECK(t.cells.size() == 12);
    CHECK(t.find("pss", "pss", m) == nullptr);
    const auto* pk = t.find("pss", "k10", m);
    REQUIRE(pk->result);
    CHECK(pk->result->r == doctest::Approx(1.0));
    for (const auto& c : t.cells) {
      const auto* mirror = t.find(c.column, c.row, m);
      REQUIRE(mirror);
      CHECK(mirror->n == c.n);
      CHECK(mirror->result.has_value() == c.result.has_value());
      if (c.result) CHECK(mirror->result->r == doctest::Approx(c.result->r).epsilon(1e-14));
    }
    CHECK(t.find("psqi", "pss", m)->n == 6);
    CHECK(t.find("people", "pss", m)->n == 12);
  }
  CHECK_THROWS_AS(build_survey_matrix(std::span(rows).first(2), Method::Pearson), InsufficientData);
}

TEST_CASE("matrix cells equal a direct call on the extracted columns") {
  const auto rows = rows_of(mixed_dataset(40));
  const auto t = build_survey_matrix(rows, Method::Spearman);
  std::vector<double> pss, k10, psqi_x, psqi_y;
  for (const auto& r : rows) {
    pss.push_back(r.scores.pss);
    k10.push_back(r.scores.k10);
    if (r.scores.psqi) {
      psqi_x.push_back(*r.scores.psqi);
      psqi_y.push_back(r.scores.k10);
    }
  }
  const auto direct = wellness::stats::correlate(Method::Spearman, wellness::stats::PairedSeries(pss, k10));
  CHECK(std::abs(t.find("pss", "k10", Method::Spearman)->result->r - direct.r) < 1e-12);
  CHECK(t.find("pss", "k10", Method::Spearman)->result->p_value == doctest::Approx(direct.p_value).epsilon(1e-12));
  const auto psqi = wellness::stats::correlate(Method::Spearman, wellness::stats::PairedSeries(psqi_x, psqi_y));
  CHECK(std::abs(t.find("psqi", "k10", Method::Spearman)->result->r - psqi.r) < 1e-12);
  CHECK(t.find("psqi", "k10", Method::Spearman)->n == psqi_x.size());
}

TEST_CASE("variable table") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0, 2);
  Dataset d;
  for (int i = 0; i < 30; ++i) {
    const int pss = i % 11;
    Environment env = office_env();
    env.luminosity = 800 - 60.0 * pss + noise(rng);
    env.temperature = 21.0;
    env.audio = 45 + noise(rng);
    d.submissions.push_back(scored_submission(i, pss, (i * 7) % 11, env));
  }
  const auto rows = rows_of(d);
  const auto t = build_variable_survey_table(rows, kAllMethods);
  CHECK(t.rows == std::vector<std::string>{"temperature", "pressure", "humidity", "light", "audio"});
  CHECK(t.cells.size() == 60);

  const auto* light = t.find("light", "pss", Method::Pearson);
  REQUIRE(light->result);
  CHECK(light->result->r < -0.9);
  CHECK(light->result->significant);
  CHECK(light->highlighted);
  CHECK(light->n == 30);

  // Constant temperature and pressure are undefined, not errors.
  for (Method m : kAllMethods) {
    for (const char* col : {"people", "pss", "k10"}) {
      const auto* c = t.find("temperature", col, m);
      CHECK(!c->result);
      CHECK(c->unavailable == "degenerate variance");
    }
  }
  // No first-of-day rows at all: PSQI column has no pairs.
  CHECK(t.find("audio", "psqi", Method::Pearson)->n == 0);
  CHECK(t.find("audio", "psqi", Method::Pearson)->unavailable == "insufficient data");

  const std::string csv = render_csv(t);
  CHECK(csv.find("variable_survey,pearson,temperature,pss,30,-,-,-,0,0,0,degenerate variance") != std::string::npos);
  CHECK(render_text(t).find("-") != std::string::npos);
}

TEST_CASE("a planted r = 0.51 over 61 submissions lands in the 1e-5 decade") {
  std::vector<double> pss(61), z(61);
  std::mt19937_64 rng(61);
  std::normal_distribution<double> noise(0, 1);
  for (int i = 0; i < 61; ++i) {
    pss[i] = i % 11;
    z[i] = noise(rng);
  }
  const auto centre = [](std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    for (auto& x : v) x -= m;
  };
  const auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };
  std::vector<double> x = pss;
  centre(x);
  centre(z);
  const double proj = dot(z, x) / dot(x, x);
  for (int i = 0; i < 61; ++i) z[i] -= proj * x[i];
  const double sx = std::sqrt(dot(x, x)), sz = std::sqrt(dot(z, z));
  Dataset d;
  for (int i = 0; i < 61; ++i) {
    Environment env = office_env();
    env.temperature = 22 + 0.51 * x[i] / sx + std::sqrt(1 - 0.51 * 0.51) * z[i] / sz;
    d.submissions.push_back(scored_submission(i, static_cast<int>(pss[i]), 3, env));
  }
  const auto t = build_variable_survey_table(rows_of(d), std::vector<Method>{Method::Pearson});
  const auto* c = t.find("temperature", "pss", Method::Pearson);
  REQUIRE(c->result);
  CHECK(c->result->r == doctest::Approx(0.51).epsilon(1e-9));
  CHECK(c->result->p_value >= 1e-5);
  CHECK(c->result->p_value < 1e-4);
  std::vector<double> temps;
  for (const auto& s : d.submissions) temps.push_back(s.aggregate.means.temperature);
  const wellness::stats::PairedSeries series(temps, pss);
  CHECK(c->result->p_value == wellness::stats::p_value(Method::Pearson, c->result->r, series));
}

TEST_CASE("highlighting") {
  wellness::stats::CorrelationResult r;
  r.significant = true;
  r.r = 0.355;
  r.strength = wellness::stats::classify_strength(r.r);
  CHECK(should_highlight(r));
  r.r = -0.354;
  r.strength = wellness::stats::classify_strength(r.r);
  CHECK(!should_highlight(r));
  r.r = 0.9;
  r.strength = wellness::stats::classify_strength(r.r);
  r.significant = false;
  CHECK(!should_highlight(r));

  auto d = mixed_dataset(60, 3);
  std::vector<ReportTable> tables;
  const auto rows = rows_of(d);
  for (Method m : kAllMethods) {
    tables.push_back(build_survey_matrix(rows, m));
    const Method one[] = {m};
    tables.push_back(build_variable_survey_table(rows, one));
  }
  mark_confirmed(tables);
  int highlighted = 0, confirmed = 0;
  for (const auto& t : tables) {
    for (const auto& c : t.cells) {
      if (c.highlighted) {
        ++highlighted;
        CHECK(c.result->significant);
        CHECK(c.result->p_value < 0.05);
        CHECK(std::llround(std::abs(c.result->r) * 100) >= 36);
      }
      if (c.confirmed) {
        ++confirmed;
        const ReportTable* pearson_table = nullptr;
        const ReportTable* spearman_table = nullptr;
        for (const auto& o : tables) {
          if (o.kind != t.kind) continue;
          if (o.methods == std::vector<Method>{Method::Pearson}) pearson_table = &o;
          if (o.methods == std::vector<Method>{Method::Spearman}) spearman_table = &o;
        }
        CHECK(pearson_table->find(c.row, c.column, Method::Pearson)->highlighted);
        CHECK(spearman_table->find(c.row, c.column, Method::Spearman)->highlighted);
      }
    }
  }
  CHECK(highlighted > 0);
  CHECK(confirmed > 0);
}

TEST_CASE("histograms") {
  Dataset one;
  one.submissions.push_back(scored_submission(0, 1, 1, office_env()));
  const auto single = build_histogram(rows_of(one), wellness::core::Variable::Audio, 20);
  CHECK(single.bins.size() == 20);
  CHECK(std::count_if(single.bins.begin(), single.bins.end(), [](const auto& b) { return b.count > 0; }) == 1);
  CHECK(single.name == "hist_audio");
  CHECK_THROWS_AS(build_histogram({}, wellness::core::Variable::Audio, 20), InsufficientData);

  const auto rows = rows_of(mixed_dataset(57));
  for (auto v : wellness::core::kVariables) {
    const auto h = build_histogram(rows, v, 7);
    std::size_t total = 0;
    for (const auto& b : h.bins) total += b.count;
    CHECK(total == 57);
    CHECK(h.bins.back().upper >= h.bins.front().lower);
  }

  std::mt19937_64 rng(10'000);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<ScoredSubmission> many;
  const auto base = rows.front();
  for (int i = 0; i < 10'000; ++i) {
    auto r = base;
    r.submission.aggregate.means.humidity = u(rng);
    many.push_back(std::move(r));
  }
  const auto h = build_histogram(many, wellness::core::Variable::Humidity, 10);
  for (const auto& b : h.bins) CHECK(std::abs(static_cast<double>(b.count) - 1000.0) <= 3 * std::sqrt(1000.0));
}

TEST_CASE("csv and text carry the same numbers") {
  const auto rows = rows_of(mixed_dataset(45, 9));
  std::vector<ReportTable> tables{build_survey_matrix(rows, Method::Kendall),
                                  build_variable_survey_table(rows, std::vector<Method>{Method::Spearman}),
                                  build_histogram(rows, wellness::core::Variable::Pressure, 12)};
  for (const auto& t : tables) {
    const std::string csv = render_csv(t);
    const std::string text = render_text(t);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    int checked = 0;
    while (std::getline(lines, line)) {
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      if (t.kind == TableKind::Histogram) {
        for (std::size_t i = 1; i < 4; ++i) CHECK(text.find(fields[i]) != std::string::npos);
      } else if (fields[5] != "-") {
        CHECK(text.find(fields[5]) != std::string::npos);
        CHECK(text.find(fields[6]) != std::string::npos);
      }
      ++checked;
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("prepare filters, rejects and scores") {
  Dataset d = mixed_dataset(10);
  d.submissions[3].validity = wellness::core::Validity::invalid(
      {wellness::core::ValidityCode::ZeroReadingSensor, wellness::core::Variable::Audio});
  d.submissions[5].experiment_id = "exp-2";
  d.submissions.push_back(d.submissions[0]);

  const auto base = prepare(d, {});
  CHECK(base.total == 11);
  CHECK(base.rows.size() == 9);
  CHECK(base.rejected.size() == 2);

  PrepareOptions only;
  only.experiment = "exp-2";
  CHECK(prepare(d, only).rows.size() == 1);

  PrepareOptions with_invalid;
  with_invalid.include_invalid = true;
  CHECK(prepare(d, with_invalid).rows.size() == 10);

  // Revalidation trusts the data, not the stored flag.
  PrepareOptions revalidate;
  revalidate.revalidate = true;
  CHECK(prepare(d, revalidate).rows.size() == 10);
  d.samples[d.submissions[4].submission_id] = constant_samples(5, Environment{20, 0, 1000, 10, 40});
  const auto re = prepare(d, revalidate);
  CHECK(re.rows.size() == 9);
  CHECK(re.rejected[0].reason.to_string() == "ZeroReadingSensor(humidity)");

  // Invalid and incomplete: kept but unscorable.
  d.submissions[3].response.answers.erase("pss_anger");
  const auto unscorable = prepare(d, with_invalid);
  CHECK(unscorable.unscorable == 1);
}

TEST_CASE("run writes every table and a summary") {
  TempDir dir;
  Dataset d = mixed_dataset(68, 5);
  const std::string reasons[] = {"ZeroReadingSensor(humidity)", "ZeroReadingSensor(humidity)",
                                 "ZeroReadingSensor(audio)",    "OutOfPhysicalRange(pressure)",
                                 "IncompleteSurvey",            "ZeroReadingSensor(temperature)",
                                 "OutOfPhysicalRange(pressure)"};
  for (int i = 0; i < 7; ++i) {
    d.submissions[i * 9].validity = wellness::core::Validity::invalid(*wellness::core::ValidityReason::parse(reasons[i]));
  }
  std::string lines;
  for (const auto& s : d.submissions) lines += wellness::ingest::submission_to_line(s) + '\n';
  std::ofstream(dir.path() / "export.jsonl") << lines;

  AnalysisConfig config;
  config.inputs = {dir.path() / "export.jsonl"};
  config.methods = {Method::Pearson, Method::Spearman, Method::Kendall};
  config.out_dir = dir.path() / "out";
  std::ostringstream out, err;
  REQUIRE(run(config, out, err) == 0);
  for (const char* f : {"survey_matrix_pearson.csv", "survey_matrix_spearman.csv", "survey_matrix_kendall.csv",
                        "variable_survey_pearson.csv", "variable_survey_kendall.csv", "hist_temperature.csv",
                        "hist_luminosity.csv", "hist_audio.csv", "summary.txt"}) {
    CHECK(std::filesystem::exists(config.out_dir / f));
  }
  const std::string summary = read_file(config.out_dir / "summary.txt");
  CHECK(summary.find("valid: 61") != std::string::npos);
  CHECK(summary.find("rejected: 7") != std::string::npos);
  CHECK(summary.find("  ZeroReadingSensor(humidity): 2") != std::string::npos);
  CHECK(summary.find("  OutOfPhysicalRange(pressure): 2") != std::string::npos);
  CHECK(summary.find("  IncompleteSurvey: 1") != std::string::npos);
  CHECK(out.str() == summary);

  // Pure function of the inputs: byte-identical on a second run.
  const std::string first = read_file(config.out_dir / "variable_survey_spearman.csv");
  config.out_dir = dir.path() / "again";
  REQUIRE(run(config, out, err) == 0);
  CHECK(read_file(config.out_dir / "variable_survey_spearman.csv") == first);

  config.format = OutputFormat::Text;
  config.out_dir = dir.path() / "text";
  REQUIRE(run(config, out, err) == 0);
  CHECK(std::filesystem::exists(config.out_dir / "survey_matrix_kendall.txt"));
}

TEST_CASE("run reports unusable input") {
  TempDir dir;
  std::ofstream(dir.path() / "empty.jsonl") << "";
  AnalysisConfig config;
  config.inputs = {dir.path() / "empty.jsonl"};
  config.out_dir = dir.path() / "out";
  std::ostringstream out, err;
  CHECK(run(config, out, err) != 0);
  CHECK(err.str().find("no valid submissions") != std::string::npos);

  std::ostringstream err2;
  config.inputs = {dir.path() / "missing.jsonl"};
  CHECK(run(config, out, err2) != 0);
  CHECK(!err2.str().empty());

  std::ofstream(dir.path() / "bad.jsonl") << "{\"submission_id\": 1}\n";
  std::ostringstream err3;
  config.inputs = {dir.path() / "bad.jsonl"};
  CHECK(run(config, out, err3) != 0);
  CHECK(err3.str().find("line 1") != std::string::npos);

  config.methods.clear();
  config.inputs = {dir.path() / "empty.jsonl"};
  CHECK(run(config, out, err3) != 0);
}
