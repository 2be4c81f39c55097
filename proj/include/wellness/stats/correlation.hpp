#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wellness/error.hpp"

namespace wellness::stats {

enum class Method { Pearson, Spearman, Kendall };
enum class Strength { Weak, Moderate, Strong, VeryStrong };

std::string_view to_string(Method m);
std::string_view to_string(Strength s);
std::optional<Method> parse_method(std::string_view name);

inline constexpr double kSignificanceLevel = 0.05;

class InvalidSeries : public Error {
 public:
  using Error::Error;
};

/// Raised when a coefficient is undefined: a constant series, or a tau-b
/// denominator factor of zero.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Two equal-length, finite series with n >= 3. Missing values must be
/// removed by the caller (pairwise deletion).
class PairedSeries {
 public:
  PairedSeries(std::vector<double> x, std::vector<double> y);

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::size_t size() const { return x_.size(); }

  PairedSeries swapped() const { return PairedSeries(y_, x_); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

struct CorrelationResult {
  Method method{};
  double r = 0.0;  ///< tau-b for Kendall
  double p_value = 1.0;
  std::size_t n = 0;
  Strength strength = Strength::Weak;
  bool significant = false;
};

/// Product-moment coefficient.
double pearson(const PairedSeries& s);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> rank_average_ties(std::span<const double> values);

/// Pearson on average ranks.
double spearman(const PairedSeries& s);

/// Kendall tau-b, O(n log n) via sort and merge-sort inversion count.
double kendall(const PairedSeries& s);

double coefficient(Method method, const PairedSeries& s);

/// Two-sided p-value for a coefficient computed on s.
///   Pearson, Spearman: Student t with n-2 degrees of freedom.
///   Kendall: normal approximation on S = C - D with tie-adjusted variance
///   and a continuity correction of 1.
/// |r| = 1 yields the smallest positive normal double instead of 0.
double p_value(Method method, double r, const PairedSeries& s);

/// Bands on |r| rounded to two decimals: <= .35 Weak, .36-.67 Moderate,
/// .68-.89 Strong, >= .90 VeryStrong. Throws OutOfRange if |r| > 1.
Strength classify_strength(double r);

CorrelationResult correlate(Method method, const PairedSeries& s);

}  // namespace wellness::stats
