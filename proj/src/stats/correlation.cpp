#include "wellness/stats/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

namespace wellness::stats {

namespace {

constexpr double kMinPValue = std::numeric_limits<double>::min();

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

double clamp_p(double p) {
  if (!(p > kMinPValue)) return kMinPValue;
  return std::min(p, 1.0);
}

/// Sizes of runs of equal values in an already sorted sequence.
template <typename Eq>
std::vector<std::int64_t> run_lengths(std::size_t n, Eq equal) {
  std::vector<std::int64_t> runs;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || !equal(i - 1, i)) {
      runs.push_back(static_cast<std::int64_t>(i - start));
      start = i;
    }
  }
  return runs;
}

std::int64_t pairs_in(const std::vector<std::int64_t>& runs) {
  std::int64_t total = 0;
  for (auto t : runs) total += t * (t - 1) / 2;
  return total;
}

/// Merge sort that counts strict inversions (i < j, v[i] > v[j]).
std::int64_t sort_counting_inversions(std::vector<double>& v) {
  std::vector<double> buffer(v.size());
  std::int64_t inversions = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size());
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += static_cast<std::int64_t>(mid - i);
          buffer[k++] = v[j++];
        } else {
          buffer[k++] = v[i++];
        }
      }
      while (i < mid) buffer[k++] = v[i++];
      while (j < hi) buffer[k++] = v[j++];
    }
    std::swap(v, buffer);
  }
  return inversions;
}

struct KendallCounts {
  std::int64_t s = 0;        // concordant - discordant
  std::int64_t total = 0;    // n(n-1)/2
  std::vector<std::int64_t> x_ties;
  std::vector<std::int64_t> y_ties;
};

KendallCounts kendall_counts(const PairedSeries& s) {
  const std::size_t n = s.size();
  const auto x = s.x();
  const auto y = s.y();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  KendallCounts counts;
  counts.total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  counts.x_ties = run_lengths(n, [&](std::size_t i, std::size_t j) { return x[order[i]] == x[order[j]]; });
  const auto joint_ties = run_lengths(
      n, [&](std::size_t i, std::size_t j) { return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]]; });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t discordant = sort_counting_inversions(ys);
  counts.y_ties = run_lengths(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

  counts.s = counts.total - pairs_in(counts.x_ties) - pairs_in(counts.y_ties) + pairs_in(joint_ties) - 2 * discordant;
  return counts;
}

double tau_b_denominator(const KendallCounts& c) {
  const double dx = static_cast<double>(c.total - pairs_in(c.x_ties));
  const double dy = static_cast<double>(c.total - pairs_in(c.y_ties));
  if (dx == 0.0 || dy == 0.0) throw DegenerateVariance("kendall: every pair is tied in one series");
  return std::sqrt(dx * dy);
}

double kendall_p(double tau, const PairedSeries& s) {
  const KendallCounts c = kendall_counts(s);
  const double statistic = std::round(tau * tau_b_denominator(c));
  const double n = static_cast<double>(s.size());

  double v0 = n * (n - 1) * (2 * n + 5);
  double t_pairs = 0, u_pairs = 0, t_triples = 0, u_triples = 0;
  for (const auto run : c.x_ties) {
    const auto t = static_cast<double>(run);
    v0 -= t * (t - 1) * (2 * t + 5);
    t_pairs += t * (t - 1);
    t_triples += t * (t - 1) * (t - 2);
  }
  for (const auto run : c.y_ties) {
    const auto u = static_cast<double>(run);
    v0 -= u * (u - 1) * (2 * u + 5);
    u_pairs += u * (u - 1);
    u_triples += u * (u - 1) * (u - 2);
  }
  const double variance =
      v0 / 18.0 + t_pairs * u_pairs / (2 * n * (n - 1)) + t_triples * u_triples / (9 * n * (n - 1) * (n - 2));
  if (!(variance > 0.0)) throw DegenerateVariance("kendall: zero null variance");

  const double z = std::max(std::abs(statistic) - 1.0, 0.0) / std::sqrt(variance);
  return clamp_p(std::erfc(z / std::sqrt(2.0)));
}

double t_test_p(double r, std::size_t n) {
  if (std::abs(r) >= 1.0) return kMinPValue;
  const double df = static_cast<double>(n) - 2.0;
  // P(|T| >= t) with t^2 = df r^2 / (1 - r^2) reduces to I_{1-r^2}(df/2, 1/2).
  return clamp_p(boost::math::ibeta(df / 2.0, 0.5, 1.0 - r * r));
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Pearson: return "pearson";
    case Method::Spearman: return "spearman";
    case Method::Kendall: return "kendall";
  }
  return "?";
}

std::string_view to_string(Strength s) {
  switch (s) {
    case Strength::Weak: return "weak";
    case Strength::Moderate: return "moderate";
    case Strength::Strong: return "strong";
    case Strength::VeryStrong: return "very_strong";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (auto m : {Method::Pearson, Method::Spearman, Method::Kendall}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

PairedSeries::PairedSeries(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size()) {
    throw InvalidSeries(fmt::format("paired series lengths differ ({} vs {})", x_.size(), y_.size()));
  }
  if (x_.size() < 3) throw InvalidSeries(fmt::format("paired series needs n >= 3, got {}", x_.size()));
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x_.begin(), x_.end(), finite) || !std::all_of(y_.begin(), y_.end(), finite)) {
    throw InvalidSeries("paired series contains a non-finite value");
  }
}

double pearson(const PairedSeries& s) {
  const auto x = s.x();
  const auto y = s.y();
  if (is_constant(x) || is_constant(y)) throw DegenerateVariance("pearson: constant series");

  const double n = static_cast<double>(s.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return clamp_unit(sxy / std::sqrt(sxx * syy));
}

std::vector<double> rank_average_ties(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && values[order[end]] == values[order[start]]) ++end;
    // Positions start..end-1 hold ranks start+1..end; their mean is:
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t i = start; i < end; ++i) ranks[order[i]] = rank;
    start = end;
  }
  return ranks;
}

double spearman(const PairedSeries& s) {
  return pearson(PairedSeries(rank_average_ties(s.x()), rank_average_ties(s.y())));
}

double kendall(const PairedSeries& s) {
  const KendallCounts c = kendall_counts(s);
  return clamp_unit(static_cast<double>(c.s) / tau_b_denominator(c));
}

double coefficient(Method method, const PairedSeries& s) {
  switch (method) {
    case Method::Pearson: return pearson(s);
    case Method::Spearman: return spearman(s);
    case Method::Kendall: return kendall(s);
  }
  return 0.0;
}

double p_value(Method method, double r, const PairedSeries& s) {
  if (!(std::abs(r) <= 1.0)) throw OutOfRange(fmt::format("coefficient {} outside [-1, 1]", r));
  if (method == Method::Kendall) return kendall_p(r, s);
  return t_test_p(r, s.size());
}

Strength classify_strength(double r) {
  if (!(std::abs(r) <= 1.0)) throw OutOfRange(fmt::format("coefficient {} outside [-1, 1]", r));
  const auto hundredths = std::llround(std::abs(r) * 100.0);
  if (hundredths >= 90) return Strength::VeryStrong;
  if (hundredths >= 68) return Strength::Strong;
  if (hundredths >= 36) return Strength::Moderate;
  return Strength::Weak;
}

CorrelationResult correlate(Method method, const PairedSeries& s) {
  CorrelationResult result;
  result.method = method;
  result.r = coefficient(method, s);
  result.p_value = p_value(method, result.r, s);
  result.n = s.size();
  result.strength = classify_strength(result.r);
  result.significant = result.p_value < kSignificanceLevel;
  return result;
}

}  // namespace wellness::stats
