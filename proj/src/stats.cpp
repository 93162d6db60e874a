#include "nklon/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "nklon/errors.hpp"

namespace nklon {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ParameterError("inverse_normal_cdf requires p in (0,1)");
  // Beasley-Springer style starting point, then Newton steps against the
  // erfc-based CDF; converges to full double precision in <= 4 steps for
  // any p this project produces (plotting positions, no extreme tails).
  double q = p - 0.5;
  double x;
  if (std::abs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    x = q * (2.5066282 + 9.0 * r);  // crude, refined below
  } else {
    double r = std::sqrt(-std::log(std::min(p, 1.0 - p)));
    x = (1.6 * r - 1.0) / (1.0 + 0.2 / r);
    if (q < 0) x = -x;
  }
  for (int i = 0; i < 8; ++i) {
    double err = normal_cdf(x) - p;
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf <= 0.0) break;
    double step = err / pdf;
    x -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Lentz's continued fraction for the regularized incomplete beta.
  auto betacf = [](double a_, double b_, double x_) {
    const int max_iter = 300;
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    double qab = a_ + b_, qap = a_ + 1.0, qam = a_ - 1.0;
    double c = 1.0, d = 1.0 - qab * x_ / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
      int m2 = 2 * m;
      double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) <= eps) break;
    }
    return h;
  };
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double nu) {
  if (t < 0.0) return 1.0 - student_t_sf(-t, nu);
  double x = nu / (nu + t * t);
  return 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
}

std::optional<double> pearson(std::span<const double> xs,
                              std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw ParameterError("pearson: samples must have equal length");
  const std::size_t n = xs.size();
  if (n < 2) throw ParameterError("pearson: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

TestResult pearson_test(std::span<const double> xs, std::span<const double> ys) {
  auto r = pearson(xs, ys);
  if (!r) throw ParameterError("pearson_test: zero variance sample");
  TestResult res;
  res.statistic = *r;
  res.n = xs.size();
  res.method = "t approximation";
  const double nu = static_cast<double>(xs.size()) - 2.0;
  if (nu < 1.0 || std::abs(*r) >= 1.0) {
    res.p_value = std::abs(*r) >= 1.0 ? 0.0 : 1.0;
    return res;
  }
  double t = *r * std::sqrt(nu / (1.0 - *r * *r));
  res.p_value = 2.0 * student_t_sf(std::abs(t), nu);
  res.p_value = std::min(res.p_value, 1.0);
  return res;
}

namespace {

double poly(const double* coeff, int count, double x) {
  double value = coeff[0];
  double xp = 1.0;
  for (int i = 1; i < count; ++i) {
    xp *= x;
    value += coeff[i] * xp;
  }
  return value;
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
  // Royston (1995), AS R94: W statistic from normal-scores coefficients
  // with polynomial corrections at both ends, p-value from a normalizing
  // transform of 1-W.
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000)
    throw ParameterError("shapiro_wilk: n must be in [3, 5000], got " +
                         std::to_string(n));
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (range <= 0.0)
    throw ParameterError("shapiro_wilk: sample has zero variance");

  static const double c1[6] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
  static const double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static const double c3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static const double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static const double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static const double c6[3] = {-0.4803, -0.082676, 0.0030302};
  static const double g[2] = {-2.273, 0.459};

  const std::size_t nn2 = n / 2;
  std::vector<double> a(nn2);
  const double an = static_cast<double>(n);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    const double an25 = an + 0.25;
    double summ2 = 0.0;
    for (std::size_t i = 0; i < nn2; ++i) {
      a[i] = inverse_normal_cdf((static_cast<double>(i) + 1.0 - 0.375) / an25);
      summ2 += a[i] * a[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, 6, rsn) - a[0] / ssumm2;
    double fac;
    std::size_t i1;
    if (n > 5) {
      i1 = 2;
      const double a2 = -a[1] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      i1 = 1;
      fac = std::sqrt((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = i1; i < nn2; ++i) a[i] /= -fac;
  }

  // W as the squared correlation between the sorted data and the
  // antisymmetric coefficient vector (a scaled by the range for
  // stability, exactly as in the published algorithm).
  double sx = 0.0;
  for (std::size_t i = 0; i < n; ++i) sx += x[i] / range;
  sx /= an;
  double sa = 0.0;  // the antisymmetric coefficients sum to zero
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    double coef;
    if (i < j) coef = -a[i];
    else if (i > j) coef = a[j];
    else coef = 0.0;
    const double asa = coef - sa;
    const double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = 1.0 - w1;

  TestResult res;
  res.statistic = w;
  res.n = n;
  res.method = "royston AS R94";
  if (n == 3) {
    const double pi6 = 1.90985931710274;    // 6/pi
    const double stqr = 1.04719755119660;   // asin(sqrt(3/4))
    res.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return res;
  }
  double y = std::log1p(-w);
  double mu, sigma;
  if (n <= 11) {
    const double gamma = poly(g, 2, an);
    if (y >= gamma) {
      res.p_value = 1e-99;
      return res;
    }
    y = -std::log(gamma - y);
    mu = poly(c3, 4, an);
    sigma = std::exp(poly(c4, 4, an));
  } else {
    const double lx = std::log(an);
    mu = poly(c5, 4, lx);
    sigma = std::exp(poly(c6, 3, lx));
  }
  res.p_value = normal_sf((y - mu) / sigma);
  return res;
}

bool lognormal_check(std::span<const double> sizes, double alpha) {
  if (sizes.size() < 3)
    throw ParameterError("lognormal_check: need at least 3 sizes");
  std::vector<double> logs;
  logs.reserve(sizes.size());
  for (double s : sizes) {
    if (!(s > 0.0)) throw ParameterError("lognormal_check: sizes must be > 0");
    logs.push_back(std::log(s));
  }
  return shapiro_wilk(logs).p_value > alpha;
}

namespace {

// Midranks of the pooled sample plus the tie term sum(t^3 - t).
struct PooledRanks {
  std::vector<double> ranks;  // aligned with the pooled order a then b
  double tie_sum = 0.0;
};

PooledRanks midranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t total = a.size() + b.size();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0u);
  auto value = [&](std::size_t i) {
    return i < a.size() ? a[i] : b[i - a.size()];
  };
  std::sort(order.begin(), order.end(),
            [&](std::size_t lhs, std::size_t rhs) { return value(lhs) < value(rhs); });
  PooledRanks out;
  out.ranks.resize(total);
  std::size_t i = 0;
  while (i < total) {
    std::size_t j = i;
    while (j + 1 < total && value(order[j + 1]) == value(order[i])) ++j;
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    const double t = static_cast<double>(j - i + 1);
    out.tie_sum += t * t * t - t;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = rank;
    i = j + 1;
  }
  return out;
}

// Exact permutation distribution of the rank sum, conditional on the
// observed (possibly tied) ranks. Doubled midranks are integers, so a
// subset-sum count over them is exact; counts stay below 2^53 for every
// n*m <= 400, so doubles hold them exactly.
double exact_mw_pvalue(const std::vector<double>& ranks, std::size_t na,
                       double u1, Alternative alt) {
  std::vector<std::int64_t> doubled(ranks.size());
  std::int64_t total = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = std::llround(2.0 * ranks[i]);
    total += doubled[i];
  }
  const std::size_t max_sum = static_cast<std::size_t>(total);
  // counts[c][s] = number of c-subsets of the doubled ranks with sum s
  std::vector<std::vector<double>> counts(
      na + 1, std::vector<double>(max_sum + 1, 0.0));
  counts[0][0] = 1.0;
  for (std::size_t item = 0; item < doubled.size(); ++item) {
    const std::size_t d = static_cast<std::size_t>(doubled[item]);
    const std::size_t cmax = std::min(item + 1, na);
    for (std::size_t c = cmax; c >= 1; --c) {
      auto& row = counts[c];
      const auto& prev = counts[c - 1];
      for (std::size_t s = max_sum; s >= d; --s) {
        if (prev[s - d] != 0.0) row[s] += prev[s - d];
      }
    }
  }
  const auto& pmf = counts[na];
  double denom = 0.0;
  for (double c : pmf) denom += c;
  // Doubled rank sum r2 maps to U via U = (r2 - na(na+1))/2.
  const double u_obs = u1;
  double p_le = 0.0, p_ge = 0.0;
  const double base = static_cast<double>(na) * (static_cast<double>(na) + 1.0);
  for (std::size_t r2 = 0; r2 <= max_sum; ++r2) {
    if (pmf[r2] == 0.0) continue;
    const double u = (static_cast<double>(r2) - base) / 2.0;
    if (u <= u_obs + 1e-9) p_le += pmf[r2];
    if (u >= u_obs - 1e-9) p_ge += pmf[r2];
  }
  p_le /= denom;
  p_ge /= denom;
  (void)nm;
  switch (alt) {
    case Alternative::Less: return std::min(1.0, p_le);
    case Alternative::Greater: return std::min(1.0, p_ge);
    case Alternative::TwoSided: return std::min(1.0, 2.0 * std::min(p_le, p_ge));
  }
  return 1.0;
}

}  // namespace

TestResult mann_whitney(std::span<const double> a, std::span<const double> b,
                        Alternative alt) {
  if (a.empty() || b.empty())
    throw ParameterError("mann_whitney: both samples must be nonempty");
  const std::size_t na = a.size(), nb = b.size();
  const double dn = static_cast<double>(na), dm = static_cast<double>(nb);
  const PooledRanks pooled = midranks(a, b);
  double r1 = 0.0;
  for (std::size_t i = 0; i < na; ++i) r1 += pooled.ranks[i];
  const double u1 = r1 - dn * (dn + 1.0) / 2.0;

  TestResult res;
  res.statistic = u1;
  res.n = na;
  res.m = nb;

  const std::size_t nm = na * nb;
  if (nm <= 400) {
    res.method = "exact";
    res.p_value = exact_mw_pvalue(pooled.ranks, na, u1, nm, alt);
    return res;
  }

  res.method = "normal approximation, tie + continuity correction";
  const double total = dn + dm;
  const double mu = dn * dm / 2.0;
  double var = dn * dm / 12.0 *
               ((total + 1.0) - pooled.tie_sum / (total * (total - 1.0)));
  if (var <= 0.0) {
    // every pooled value identical; no evidence either way
    res.p_value = 1.0;
    return res;
  }
  const double sd = std::sqrt(var);
  auto upper = [&](double u) {  // P(U >= u) with continuity correction
    return normal_sf((u - mu - 0.5) / sd);
  };
  auto lower = [&](double u) {  // P(U <= u)
    return normal_cdf((u - mu + 0.5) / sd);
  };
  switch (alt) {
    case Alternative::Greater: res.p_value = upper(u1); break;
    case Alternative::Less: res.p_value = lower(u1); break;
    case Alternative::TwoSided:
      res.p_value = std::min(1.0, 2.0 * std::min(lower(u1), upper(u1)));
      break;
  }
  return res;
}

}  // namespace nklon
