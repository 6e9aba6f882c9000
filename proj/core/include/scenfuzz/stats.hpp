#pragma once

#include <cstdint>
#include <vector>

namespace scenfuzz {

// Two-sided Wilcoxon rank-sum (Mann-Whitney) test with midranks, tie
// correction of the variance, and continuity correction. Returns p = 1.0
// when the pooled samples carry no information (all values identical or a
// group is empty).
struct RankSumResult {
  double statistic = 0.0;  // rank sum of the first sample
  double z = 0.0;
  double p_value = 1.0;
};

RankSumResult ranksum_test(const std::vector<double>& a, const std::vector<double>& b);

// Vargha-Delaney A12: probability that a random draw from `a` exceeds one
// from `b`, ties counted half. 0.5 means no effect; >0.5 favors `a`.
double a12(const std::vector<double>& a, const std::vector<double>& b);

struct A12Interval {
  double estimate = 0.5;
  double lo = 0.5;
  double hi = 0.5;
};

// Percentile bootstrap (5th/95th) of A12 with `resamples` paired draws.
A12Interval a12_bootstrap(const std::vector<double>& a, const std::vector<double>& b,
                          std::size_t resamples = 10000, uint64_t seed = 0);

}  // namespace scenfuzz
