#ifndef NKLON_STATS_HPP
#define NKLON_STATS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace nklon {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t m = 0;          // second sample, 0 for one-sample tests
  std::string method;         // "exact" or the approximation used
};

enum class Alternative { TwoSided, Less, Greater };

// Standard normal distribution helpers, accurate to ~1 ulp via erfc and
// Newton-refined inversion.
double normal_cdf(double z);
double normal_sf(double z);
double inverse_normal_cdf(double p);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// Upper tail of Student's t with nu degrees of freedom.
double student_t_sf(double t, double nu);

// Pearson correlation; nullopt when either sample has zero variance.
std::optional<double> pearson(std::span<const double> xs,
                              std::span<const double> ys);

// Pearson r plus its two-sided significance from the t transform
// t = r*sqrt((n-2)/(1-r^2)).
TestResult pearson_test(std::span<const double> xs, std::span<const double> ys);

// Shapiro-Wilk W normality test, Royston's AS R94 approximation,
// 3 <= n <= 5000. Throws ParameterError on bad n or a constant sample.
TestResult shapiro_wilk(std::span<const double> sample);

// True when ln(sizes) passes Shapiro-Wilk at level alpha.
bool lognormal_check(std::span<const double> sizes, double alpha = 0.01);

// Mann-Whitney U of the first sample with midrank ties. Exact
// enumeration of the permutation distribution when n*m <= 400,
// otherwise normal approximation with tie and continuity correction.
TestResult mann_whitney(std::span<const double> a, std::span<const double> b,
                        Alternative alt = Alternative::TwoSided);

}  // namespace nklon

#endif
