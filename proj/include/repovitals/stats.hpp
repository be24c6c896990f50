#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "repovitals/error.hpp"

namespace repovitals {

// ---------------------------------------------------------------------------
// Rank statistics: Mann-Whitney U, Kruskal-Wallis, Cliff's delta with
// magnitude bands, and Spearman's rho. All rank computations use average
// ranks for ties.
// ---------------------------------------------------------------------------

inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Sum of (t^3 - t) over tie groups of the pooled sample.
inline double tie_term(std::vector<double> pooled) {
  std::sort(pooled.begin(), pooled.end());
  double total = 0.0;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j + 1 < pooled.size() && pooled[j + 1] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    total += t * t * t - t;
    i = j + 1;
  }
  return total;
}

inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace detail {

// Regularized lower incomplete gamma P(a, x), series expansion (x < a + 1).
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x), continued fraction (x >= a + 1).
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Upper tail of the regularized incomplete gamma function.
inline double regularized_gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw Error(Errc::invalid_config, "gamma_q domain");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// Survival function of the chi-square distribution with df degrees of freedom.
inline double chi_square_sf(double x, int df) {
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, x / 2.0);
}

enum class Alternative { two_sided, greater, less };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  Alternative alternative = Alternative::two_sided;
};

namespace detail {

// U statistic for sample a (wins plus half-ties), via rank sums.
inline double u_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks(pooled);
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];
  const double n = static_cast<double>(a.size());
  return rank_sum_a - n * (n + 1.0) / 2.0;
}

// Exact permutation distribution of U, enumerating all choices of which
// pooled positions belong to sample a. Used when n*m is small.
inline double exact_mw_pvalue(std::span<const double> a,
                              std::span<const double> b, double u_obs,
                              Alternative alt) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks(pooled);
  const std::size_t total = pooled.size();
  const std::size_t na = a.size();
  const double mean = static_cast<double>(na) * static_cast<double>(b.size()) / 2.0;
  const double eps = 1e-9;

  std::vector<std::size_t> comb(na);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  long count_total = 0, count_ge = 0, count_le = 0, count_extreme = 0;
  while (true) {
    double rank_sum = 0.0;
    for (const auto i : comb) rank_sum += ranks[i];
    const double u = rank_sum - static_cast<double>(na) * (na + 1.0) / 2.0;
    ++count_total;
    if (u >= u_obs - eps) ++count_ge;
    if (u <= u_obs + eps) ++count_le;
    if (std::fabs(u - mean) >= std::fabs(u_obs - mean) - eps) ++count_extreme;
    // next combination
    std::size_t i = na;
    while (i > 0) {
      --i;
      if (comb[i] != i + total - na) break;
      if (i == 0) {
        i = total;
        break;
      }
    }
    if (i >= total || (i == 0 && comb[0] == total - na)) break;
    ++comb[i];
    for (std::size_t j = i + 1; j < na; ++j) comb[j] = comb[j - 1] + 1;
  }
  double p = 1.0;
  switch (alt) {
    case Alternative::greater: p = static_cast<double>(count_ge) / count_total; break;
    case Alternative::less: p = static_cast<double>(count_le) / count_total; break;
    case Alternative::two_sided:
      p = static_cast<double>(count_extreme) / count_total;
      break;
  }
  return std::min(1.0, p);
}

}  // namespace detail

// Mann-Whitney U test. Exact enumeration when n*m <= 20, tie-corrected normal
// approximation with continuity correction otherwise.
inline TestResult mann_whitney_u(std::span<const double> a,
                                 std::span<const double> b,
                                 Alternative alt = Alternative::two_sided) {
  if (a.empty() || b.empty())
    throw Error(Errc::empty_sample, "mann_whitney_u needs non-empty samples");
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  const double u = detail::u_statistic(a, b);

  TestResult r;
  r.statistic = u;
  r.alternative = alt;

  if (n * m <= 20.0) {
    r.p_value = detail::exact_mw_pvalue(a, b, u, alt);
    return r;
  }

  const double total = n + m;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double ties = tie_term(pooled);
  const double var =
      n * m / 12.0 * ((total + 1.0) - ties / (total * (total - 1.0)));
  if (var <= 0.0) {
    r.p_value = 1.0;  // all pooled values identical
    return r;
  }
  const double mean = n * m / 2.0;
  const double sd = std::sqrt(var);
  switch (alt) {
    case Alternative::greater:
      r.p_value = 1.0 - normal_cdf((u - mean - 0.5) / sd);
      break;
    case Alternative::less:
      r.p_value = normal_cdf((u - mean + 0.5) / sd);
      break;
    case Alternative::two_sided: {
      const double z = std::max(0.0, std::fabs(u - mean) - 0.5) / sd;
      r.p_value = 2.0 * (1.0 - normal_cdf(z));
      break;
    }
  }
  r.p_value = std::min(1.0, std::max(0.0, r.p_value));
  return r;
}

enum class Magnitude { negligible, small, medium, large };

inline const char* magnitude_name(Magnitude m) {
  switch (m) {
    case Magnitude::negligible: return "negligible";
    case Magnitude::small: return "small";
    case Magnitude::medium: return "medium";
    case Magnitude::large: return "large";
  }
  return "negligible";
}

// |d| <= 0.147 negligible, < 0.33 small, < 0.474 medium, else large.
inline Magnitude magnitude_of(double d) {
  const double a = std::fabs(d);
  if (a <= 0.147) return Magnitude::negligible;
  if (a < 0.33) return Magnitude::small;
  if (a < 0.474) return Magnitude::medium;
  return Magnitude::large;
}

struct EffectSize {
  double d = 0.0;
  Magnitude magnitude = Magnitude::negligible;
};

// Cliff's delta: (#(a_i > b_j) - #(a_i < b_j)) / (n*m). Win and loss counts
// are exact integers, so the result is a single correctly rounded ratio.
inline EffectSize cliffs_delta(std::span<const double> a,
                               std::span<const double> b) {
  if (a.empty() || b.empty())
    throw Error(Errc::empty_sample, "cliffs_delta needs non-empty samples");
  std::vector<double> sorted_b(b.begin(), b.end());
  std::sort(sorted_b.begin(), sorted_b.end());
  std::int64_t wins = 0, losses = 0;
  for (const double x : a) {
    const auto lo = std::lower_bound(sorted_b.begin(), sorted_b.end(), x);
    const auto hi = std::upper_bound(sorted_b.begin(), sorted_b.end(), x);
    wins += lo - sorted_b.begin();
    losses += sorted_b.end() - hi;
  }
  EffectSize e;
  e.d = static_cast<double>(wins - losses) /
        (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  e.magnitude = magnitude_of(e.d);
  return e;
}

// Kruskal-Wallis H test with tie correction; p from the chi-square
// approximation with (#groups - 1) degrees of freedom.
inline TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2)
    throw Error(Errc::too_few_groups, "kruskal_wallis needs at least 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(Errc::empty_sample, "kruskal_wallis group is empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  const double total = static_cast<double>(pooled.size());
  const auto ranks = average_ranks(pooled);

  double h = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) rank_sum += ranks[offset + i];
    h += rank_sum * rank_sum / static_cast<double>(g.size());
    offset += g.size();
  }
  h = 12.0 / (total * (total + 1.0)) * h - 3.0 * (total + 1.0);

  const double correction = 1.0 - tie_term(pooled) / (total * total * total - total);
  TestResult r;
  r.alternative = Alternative::two_sided;
  if (correction <= 0.0) {
    r.statistic = 0.0;  // zero variance: every value identical
    r.p_value = 1.0;
    return r;
  }
  h /= correction;
  if (h < 0.0 && h > -1e-9) h = 0.0;  // guard rounding
  r.statistic = h;
  r.p_value = chi_square_sf(h, static_cast<int>(groups.size()) - 1);
  return r;
}

// Spearman's rank correlation: Pearson correlation of average ranks.
inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(Errc::length_mismatch, "spearman_rho samples differ in length");
  if (x.size() < 3)
    throw Error(Errc::too_few_rows, "spearman_rho needs at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(Errc::zero_variance, "spearman_rho sample has zero rank variance");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace repovitals
