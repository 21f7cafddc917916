#include "causatree/stats.hpp"

#include <algorithm>
#include <cmath>

#include "causatree/error.hpp"
#include "causatree/infotheory.hpp"
#include "causatree/rng.hpp"

namespace causatree {

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    fail(ErrorKind::precondition, "ks_statistic needs two non-empty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> pooled;
  pooled.reserve(sa.size() + sb.size());
  pooled.insert(pooled.end(), sa.begin(), sa.end());
  pooled.insert(pooled.end(), sb.begin(), sb.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  const double n = static_cast<double>(sa.size());
  const double m = static_cast<double>(sb.size());
  auto cdf_at = [](const std::vector<double>& s, double v) {
    return static_cast<double>(
        std::upper_bound(s.begin(), s.end(), v) - s.begin());
  };
  auto cdf_before = [](const std::vector<double>& s, double v) {
    return static_cast<double>(
        std::lower_bound(s.begin(), s.end(), v) - s.begin());
  };
  double d = 0.0;
  for (double v : pooled) {
    // Both one-sided gaps at each pooled point: at the value itself and
    // just before it (the left limit), which is where ties can hide a gap.
    double at = std::fabs(cdf_at(sa, v) / n - cdf_at(sb, v) / m);
    double before = std::fabs(cdf_before(sa, v) / n - cdf_before(sb, v) / m);
    d = std::max(d, std::max(at, before));
  }
  return d;
}

double ks_threshold(std::size_t n, std::size_t m, double alpha) {
  if (n == 0 || m == 0)
    fail(ErrorKind::precondition, "ks_threshold needs non-empty samples");
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::precondition, "alpha must be in (0, 1)");
  double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    fail(ErrorKind::precondition, "cliffs_delta needs two non-empty samples");
  long long wins = 0, losses = 0;
  for (double x : a)
    for (double y : b) {
      if (x > y)
        ++wins;
      else if (x < y)
        ++losses;
    }
  return static_cast<double>(wins - losses) /
         (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

const char* to_string(DeltaBand b) {
  switch (b) {
    case DeltaBand::negligible: return "negligible";
    case DeltaBand::small: return "small";
    case DeltaBand::medium: return "medium";
    case DeltaBand::large: return "large";
  }
  return "unknown";
}

DeltaBand delta_band(double delta, const DeltaBands& bands) {
  double a = std::fabs(delta);
  if (a < bands.negligible) return DeltaBand::negligible;
  if (a < bands.small) return DeltaBand::small;
  if (a < bands.medium) return DeltaBand::medium;
  return DeltaBand::large;
}

double median(std::span<const double> v) {
  if (v.empty()) fail(ErrorKind::precondition, "median of an empty sample");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  std::size_t k = s.size() / 2;
  if (s.size() % 2 == 1) return s[k];
  return 0.5 * (s[k - 1] + s[k]);
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2)
    fail(ErrorKind::precondition, "sample variance needs at least 2 values");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) {
    double g = x - mean;
    acc += g * g;
  }
  return acc / static_cast<double>(v.size() - 1);
}

VarianceTestResult variance_stability_test(std::span<const double> a,
                                           std::span<const double> b,
                                           std::uint64_t seed,
                                           int n_permutations) {
  if (a.size() < 2 || b.size() < 2)
    fail(ErrorKind::precondition,
         "variance test needs at least 2 values per side");
  if (n_permutations < 1)
    fail(ErrorKind::precondition, "need at least one permutation");
  VarianceTestResult res;
  res.var_a = sample_variance(a);
  res.var_b = sample_variance(b);
  res.n_permutations = n_permutations;
  if (res.var_a == 0.0 && res.var_b == 0.0) {
    res.both_zero = true;
    res.p_value = 1.0;
    return res;
  }
  const double observed = std::fabs(std::log(res.var_a / res.var_b));

  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t na = a.size();

  long long ge = 0;
  for (int rep = 0; rep < n_permutations; ++rep) {
    // Per-replicate derived seed keeps replicates order-independent.
    SplitMix64 rng(derive_seed(seed, 0x7065726dULL, static_cast<std::uint64_t>(rep)));
    std::vector<double> p = pooled;
    shuffle(p, rng);
    double va = sample_variance(std::span<const double>(p.data(), na));
    double vb = sample_variance(
        std::span<const double>(p.data() + na, p.size() - na));
    double stat;
    if (va == 0.0 && vb == 0.0)
      stat = 0.0;  // relabeled groups both constant: no spread difference
    else
      stat = std::fabs(std::log(va / vb));
    if (stat >= observed) ++ge;
  }
  res.p_value = static_cast<double>(1 + ge) /
                static_cast<double>(n_permutations + 1);
  return res;
}

double gini_stability(std::span<const int> levels) {
  if (levels.empty())
    fail(ErrorKind::precondition, "gini_stability over no levels");
  std::vector<double> h(3, 0.0);
  for (int l : levels) {
    if (l < 0 || l > 2)
      fail(ErrorKind::precondition, "impact level outside {0,1,2}");
    h[static_cast<std::size_t>(l)] += 1.0;
  }
  return gini_impurity(h);
}

double ordinal_variance(std::span<const int> levels) {
  if (levels.empty())
    fail(ErrorKind::precondition, "ordinal_variance over no levels");
  double mean = 0.0;
  for (int l : levels) mean += static_cast<double>(l);
  mean /= static_cast<double>(levels.size());
  double acc = 0.0;
  for (int l : levels) {
    double g = static_cast<double>(l) - mean;
    acc += g * g;
  }
  return acc / static_cast<double>(levels.size());
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::indistinguishable: return "indistinguishable";
    case Verdict::first_better: return "first-better";
    case Verdict::second_better: return "second-better";
  }
  return "unknown";
}

ComparisonVerdict compare_verdict(std::span<const double> a,
                                  std::span<const double> b, double alpha,
                                  const DeltaBands& bands) {
  ComparisonVerdict out;
  out.ks_d = ks_statistic(a, b);
  out.ks_thresh = ks_threshold(a.size(), b.size(), alpha);
  out.cliffs = cliffs_delta(a, b);
  out.band = delta_band(out.cliffs, bands);
  out.median_a = median(a);
  out.median_b = median(b);
  if (out.ks_d < out.ks_thresh && out.band != DeltaBand::large) {
    out.verdict = Verdict::indistinguishable;
    return out;
  }
  if (out.median_a < out.median_b) {
    out.verdict = Verdict::first_better;
  } else if (out.median_b < out.median_a) {
    out.verdict = Verdict::second_better;
  } else if (out.cliffs != 0.0) {
    // Lower d2h is better, so a positive delta means `a` tends larger.
    out.verdict = out.cliffs < 0.0 ? Verdict::first_better
                                   : Verdict::second_better;
  } else {
    double mean_a = 0.0, mean_b = 0.0;
    for (double x : a) mean_a += x;
    for (double x : b) mean_b += x;
    mean_a /= static_cast<double>(a.size());
    mean_b /= static_cast<double>(b.size());
    if (mean_a < mean_b)
      out.verdict = Verdict::first_better;
    else if (mean_b < mean_a)
      out.verdict = Verdict::second_better;
    else
      out.verdict = Verdict::indistinguishable;
  }
  return out;
}

}  // namespace causatree
