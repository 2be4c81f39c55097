#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "wellness/core/model.hpp"
#include "wellness/core/session.hpp"
#include "wellness/survey/response.hpp"

namespace wellness::testing {

class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "wellness-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Complete response; YesNo items answer Yes when yes(id) holds.
inline survey::SurveyResponse make_response(survey::SessionKind kind,
                                            const std::function<bool(const std::string&)>& yes,
                                            std::int64_t people = 0) {
  survey::SurveyResponse r;
  r.session_kind = kind;
  for (const auto* q : survey::QuestionBank::builtin().question_set(kind)) {
    switch (q->answer_kind) {
      case survey::AnswerKind::YesNo:
        r.answers[q->id] = std::string(yes(q->id) ? survey::kYes : survey::kNo);
        break;
      case survey::AnswerKind::TimeSlot: r.answers[q->id] = survey::time_slot_labels().front(); break;
      case survey::AnswerKind::HourBin: r.answers[q->id] = std::int64_t{7}; break;
      case survey::AnswerKind::Rating: r.answers[q->id] = std::int64_t{3}; break;
      case survey::AnswerKind::NonNegativeInt: r.answers[q->id] = people; break;
    }
  }
  return r;
}

inline survey::SurveyResponse all_answers(survey::SessionKind kind, bool yes, std::int64_t people = 0) {
  return make_response(kind, [yes](const std::string&) { return yes; }, people);
}

/// Response whose PSS and K10 scores equal pss and k10 (first items Yes).
inline survey::SurveyResponse response_with_scores(survey::SessionKind kind, int pss, int k10,
                                                   std::int64_t people = 0, int psqi = 0) {
  return make_response(
      kind,
      [&](const std::string& id) {
        const auto* q = survey::QuestionBank::builtin().find(id);
        int order_in_survey = 0;
        for (const auto* other : survey::QuestionBank::builtin().question_set(survey::SessionKind::FirstOfDay)) {
          if (other->survey == q->survey && other->answer_kind == survey::AnswerKind::YesNo) {
            if (other->id == id) break;
            ++order_in_survey;
          }
        }
        switch (q->survey) {
          case survey::Survey::Pss: return order_in_survey < pss;
          case survey::Survey::K10: return order_in_survey < k10;
          case survey::Survey::Psqi: return order_in_survey < psqi;
          default: return false;
        }
      },
      people);
}

inline core::Environment office_env() { return {22.0, 40.0, 1013.0, 300.0, 45.0}; }

inline std::vector<core::SensorSample> constant_samples(std::size_t n, core::Environment env,
                                                        std::int64_t start_ms = 1'700'000'000'000) {
  std::vector<core::SensorSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({i + 1, start_ms + static_cast<std::int64_t>(i) * 1000, env});
  }
  return out;
}

inline core::Submission make_submission(std::string id, survey::SurveyResponse response,
                                        core::Environment env = office_env(), std::string participant = "p-1") {
  core::Submission s;
  s.submission_id = id;
  s.participant_id = std::move(participant);
  s.experiment_id = "exp-1";
  s.session_start_ms = 1'700'000'000'000;
  s.session_end_ms = s.session_start_ms + 120'000;
  s.is_first_of_day = response.session_kind == survey::SessionKind::FirstOfDay;
  s.question_bank_hash = survey::QuestionBank::builtin().content_hash();
  s.response = std::move(response);
  s.aggregate = {env, 120};
  s.validity = core::Validity::valid();
  s.idempotency_key = "key-" + id;
  return s;
}

// Independent reference implementations used as test oracles.
namespace oracle {

/// Product-moment formula evaluated directly in extended precision.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

/// Rank of each value from stable sort positions: tied values get the mean
/// of the positions they occupy.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> position(v.size());
  for (std::size_t p = 0; p < order.size(); ++p) position[order[p]] = static_cast<double>(p + 1);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double sum = 0;
    int count = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] == v[i]) {
        sum += position[j];
        ++count;
      }
    }
    out[i] = sum / count;
  }
  return out;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

struct PairCounts {
  long long concordant = 0;
  long long discordant = 0;
  long long tied_x = 0;  ///< pairs tied in x only
  long long tied_y = 0;  ///< pairs tied in y only
};

inline PairCounts count_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++c.tied_x;
      } else if (dy == 0) {
        ++c.tied_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++c.concordant;
      } else {
        ++c.discordant;
      }
    }
  }
  return c;
}

/// Tau-b from explicit pair classification.
inline double kendall(const std::vector<double>& x, const std::vector<double>& y) {
  const auto c = count_pairs(x, y);
  const double untied_x = static_cast<double>(c.concordant + c.discordant + c.tied_y);
  const double untied_y = static_cast<double>(c.concordant + c.discordant + c.tied_x);
  return static_cast<double>(c.concordant - c.discordant) / std::sqrt(untied_x * untied_y);
}

using Statistic = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

/// Exact two-sided permutation p over every ordering of y.
inline double exact_permutation_p(const std::vector<double>& x, std::vector<double> y, const Statistic& stat) {
  const double observed = std::abs(stat(x, y));
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::vector<double> base = y;
  long long extreme = 0, total = 0;
  do {
    for (std::size_t i = 0; i < idx.size(); ++i) y[i] = base[idx[i]];
    if (std::abs(stat(x, y)) >= observed - 1e-12) ++extreme;
    ++total;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

/// Monte Carlo permutation p with `draws` shuffles of y.
inline double sampled_permutation_p(const std::vector<double>& x, std::vector<double> y, const Statistic& stat,
                                    int draws, std::uint64_t seed) {
  const double observed = std::abs(stat(x, y));
  std::mt19937_64 rng(seed);
  int extreme = 0;
  for (int d = 0; d < draws; ++d) {
    std::shuffle(y.begin(), y.end(), rng);
    if (std::abs(stat(x, y)) >= observed - 1e-12) ++extreme;
  }
  return (extreme + 1.0) / (draws + 1.0);
}

}  // namespace oracle

}  // namespace wellness::testing
