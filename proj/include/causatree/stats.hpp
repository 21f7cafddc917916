#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace causatree {

// Exact two-sample Kolmogorov-Smirnov statistic: sup_x |F_a(x) - F_b(x)|
// evaluated at every pooled sample point from both sides of each jump, so
// ties are handled exactly.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Classical asymptotic two-sample critical value
//   c(alpha) * sqrt((n + m) / (n * m)),  c(alpha) = sqrt(-ln(alpha/2) / 2)
// (c(0.05) = 1.358).
double ks_threshold(std::size_t n, std::size_t m, double alpha);

// Cliff's delta: (#{a_i > b_j} - #{a_i < b_j}) / (n * m), in [-1, 1].
double cliffs_delta(std::span<const double> a, std::span<const double> b);

// Descriptive magnitude bands for |delta|.
struct DeltaBands {
  double negligible = 0.147;
  double small = 0.33;
  double medium = 0.474;
};

enum class DeltaBand { negligible, small, medium, large };
const char* to_string(DeltaBand b);
DeltaBand delta_band(double delta, const DeltaBands& bands = {});

double median(std::span<const double> v);
double sample_variance(std::span<const double> v);  // n-1 denominator

struct VarianceTestResult {
  double var_a = 0.0;
  double var_b = 0.0;
  double p_value = 1.0;
  bool both_zero = false;  // degenerate: both sides constant
  int n_permutations = 0;
};

// Two-sided seeded permutation test on |log(var_a / var_b)| with add-one
// smoothing: p = (1 + #{permuted stat >= observed}) / (n_permutations + 1).
// Two zero-variance sides are reported as indistinguishable (p = 1).
VarianceTestResult variance_stability_test(std::span<const double> a,
                                           std::span<const double> b,
                                           std::uint64_t seed,
                                           int n_permutations = 10000);

// Gini impurity of the level histogram of ordinal impact levels {0, 1, 2}.
double gini_stability(std::span<const int> levels);
// Population variance of the same levels (plain ordinal spread).
double ordinal_variance(std::span<const int> levels);

enum class Verdict { indistinguishable, first_better, second_better };
const char* to_string(Verdict v);

struct ComparisonVerdict {
  double ks_d = 0.0;
  double ks_thresh = 0.0;
  double cliffs = 0.0;
  DeltaBand band = DeltaBand::negligible;
  double median_a = 0.0;
  double median_b = 0.0;
  Verdict verdict = Verdict::indistinguishable;
};

// Fixed decision rule over two d2h distributions (lower is better):
// indistinguishable iff ks_d < threshold AND the delta band is negligible,
// small, or medium; otherwise the side with the lower median wins. Exactly
// tied medians fall back to the delta sign, then the means; a full tie is
// reported indistinguishable.
ComparisonVerdict compare_verdict(std::span<const double> a,
                                  std::span<const double> b, double alpha,
                                  const DeltaBands& bands = {});

}  // namespace causatree
