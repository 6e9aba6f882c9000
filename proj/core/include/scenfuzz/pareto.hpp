#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "scenfuzz/rng.hpp"

namespace scenfuzz {

/// Result of fast non-dominated sorting (minimization on every axis).
struct ParetoRanking {
  std::vector<std::vector<std::size_t>> fronts;  // fronts[0] is non-dominated
  std::vector<int> rank;                         // front index per individual
  std::vector<double> crowding;                  // +inf on front boundaries
};

/// True when a dominates b: no worse everywhere and better somewhere.
bool dominates(const std::array<double, 3>& a, const std::array<double, 3>& b);

/// Deb's fast non-dominated sort plus per-front crowding distances.
ParetoRanking nondominated_sort(const std::vector<std::array<double, 3>>& objectives);

/// Rank-and-crowding truncation: fills whole fronts first, then the final
/// front by descending crowding distance. Returns the kept indices.
std::vector<std::size_t> rank_crowding_survival(
    const std::vector<std::array<double, 3>>& objectives, std::size_t keep);

/// Binary tournament on (rank, crowding): lower rank wins, ties by larger
/// crowding. Returns `count` winners drawn with replacement.
std::vector<std::size_t> rank_crowding_tournament(const ParetoRanking& ranking,
                                                  std::size_t population_size, std::size_t count,
                                                  Rng& rng);

}  // namespace scenfuzz
