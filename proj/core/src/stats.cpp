#include "scenfuzz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scenfuzz/rng.hpp"

namespace scenfuzz {

namespace {

// Midranks of the pooled sample; also accumulates sum(t^3 - t) over tie
// groups for the variance correction.
std::vector<double> midranks(const std::vector<double>& pooled, double& tie_term) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> ranks(n, 0.0);
  tie_term = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  return ranks;
}

double normal_sf(double z) {
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// C(n, k) when it stays within cap, otherwise 0. The running product is exact
// at every step, so there is no drift before the cap check.
unsigned long long combinations_capped(std::size_t n, std::size_t k, unsigned long long cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned long long c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > cap) return 0;
  }
  return c;
}

// Two-sided permutation p over every n1-subset of the pooled midranks: the
// fraction of splits whose rank sum deviates from the mean at least as far as
// the observed one.
double exact_two_sided_p(const std::vector<double>& ranks, std::size_t n1, double expected,
                         double observed_dev) {
  const std::size_t n = ranks.size();
  std::vector<std::size_t> pick(n1);
  std::iota(pick.begin(), pick.end(), 0u);
  unsigned long long extreme = 0;
  unsigned long long count = 0;
  while (true) {
    double sum = 0.0;
    for (std::size_t i : pick) sum += ranks[i];
    if (std::abs(sum - expected) >= observed_dev - 1e-12) ++extreme;
    ++count;

    std::size_t i = n1;
    bool done = true;
    while (i > 0) {
      --i;
      if (pick[i] != i + n - n1) {
        done = false;
        break;
      }
    }
    if (done) break;
    ++pick[i];
    for (std::size_t j = i + 1; j < n1; ++j) pick[j] = pick[j - 1] + 1;
  }
  return static_cast<double>(extreme) / static_cast<double>(count);
}

// Beyond this many splits the normal approximation takes over.
constexpr unsigned long long kExactSubsetCap = 200000;

}  // namespace

RankSumResult ranksum_test(const std::vector<double>& a, const std::vector<double>& b) {
  RankSumResult out;
  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  if (a.empty() || b.empty()) return out;

  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  double tie_term = 0.0;
  const std::vector<double> ranks = midranks(pooled, tie_term);

  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  out.statistic = r1;

  const double n = n1 + n2;
  const double expected = n1 * (n + 1.0) / 2.0;
  const double variance =
      n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (variance > 0.0) {
    double diff = r1 - expected;
    // Continuity correction pulls |diff| toward zero by half a rank unit.
    if (diff > 0.5) {
      diff -= 0.5;
    } else if (diff < -0.5) {
      diff += 0.5;
    } else {
      diff = 0.0;
    }
    out.z = diff / std::sqrt(variance);
    out.p_value = std::min(1.0, 2.0 * normal_sf(std::fabs(out.z)));
  } else {
    out.p_value = 1.0;
  }
  // Small samples get the exact permutation distribution instead; z keeps the
  // approximate value for reporting.
  if (combinations_capped(pooled.size(), a.size(), kExactSubsetCap) != 0) {
    out.p_value = exact_two_sided_p(ranks, a.size(), expected, std::abs(r1 - expected));
  }
  return out;
}

double a12(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return 0.5;
  double wins = 0.0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) {
        wins += 1.0;
      } else if (x == y) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

A12Interval a12_bootstrap(const std::vector<double>& a, const std::vector<double>& b,
                          std::size_t resamples, uint64_t seed) {
  A12Interval out;
  out.estimate = a12(a, b);
  out.lo = out.hi = out.estimate;
  if (a.empty() || b.empty() || resamples == 0) return out;

  Rng rng(derive_seed(seed, 0xa12, 0));
  std::uniform_int_distribution<std::size_t> pick_a(0, a.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_b(0, b.size() - 1);
  std::vector<double> stats(resamples);
  std::vector<double> ra(a.size()), rb(b.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& v : ra) v = a[pick_a(rng)];
    for (auto& v : rb) v = b[pick_b(rng)];
    stats[r] = a12(ra, rb);
  }
  std::sort(stats.begin(), stats.end());
  auto percentile = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  out.lo = std::clamp(percentile(0.05), 0.0, 1.0);
  out.hi = std::clamp(percentile(0.95), 0.0, 1.0);
  return out;
}

}  // namespace scenfuzz
