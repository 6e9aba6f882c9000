#include "scenfuzz/pareto.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace scenfuzz {

bool dominates(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  bool strictly_better = false;
  for (int i = 0; i < 3; ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly_better = true;
  }
  return strictly_better;
}

ParetoRanking nondominated_sort(const std::vector<std::array<double, 3>>& objectives) {
  const std::size_t n = objectives.size();
  ParetoRanking out;
  out.rank.assign(n, 0);
  out.crowding.assign(n, 0.0);
  if (n == 0) return out;

  std::vector<std::vector<std::size_t>> dominated_by(n);
  std::vector<int> domination_count(n, 0);
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(objectives[p], objectives[q])) {
        dominated_by[p].push_back(q);
      } else if (dominates(objectives[q], objectives[p])) {
        ++domination_count[p];
      }
    }
    if (domination_count[p] == 0) {
      out.rank[p] = 0;
      current.push_back(p);
    }
  }

  int front_index = 0;
  while (!current.empty()) {
    out.fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated_by[p]) {
        if (--domination_count[q] == 0) {
          out.rank[q] = front_index + 1;
          next.push_back(q);
        }
      }
    }
    std::sort(next.begin(), next.end());
    current = std::move(next);
    ++front_index;
  }

  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& front : out.fronts) {
    if (front.size() <= 2) {
      for (std::size_t i : front) out.crowding[i] = inf;
      continue;
    }
    for (int m = 0; m < 3; ++m) {
      std::vector<std::size_t> order(front);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return objectives[a][m] < objectives[b][m];
      });
      double lo = objectives[order.front()][m];
      double hi = objectives[order.back()][m];
      out.crowding[order.front()] = inf;
      out.crowding[order.back()] = inf;
      if (hi - lo <= 0.0) continue;
      for (std::size_t i = 1; i + 1 < order.size(); ++i) {
        if (out.crowding[order[i]] == inf) continue;
        out.crowding[order[i]] +=
            (objectives[order[i + 1]][m] - objectives[order[i - 1]][m]) / (hi - lo);
      }
    }
  }
  return out;
}

std::vector<std::size_t> rank_crowding_survival(
    const std::vector<std::array<double, 3>>& objectives, std::size_t keep) {
  ParetoRanking ranking = nondominated_sort(objectives);
  std::vector<std::size_t> kept;
  kept.reserve(keep);
  for (const auto& front : ranking.fronts) {
    if (kept.size() + front.size() <= keep) {
      kept.insert(kept.end(), front.begin(), front.end());
    } else {
      std::vector<std::size_t> order(front);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranking.crowding[a] > ranking.crowding[b];
      });
      for (std::size_t i : order) {
        if (kept.size() >= keep) break;
        kept.push_back(i);
      }
      break;
    }
    if (kept.size() >= keep) break;
  }
  return kept;
}

std::vector<std::size_t> rank_crowding_tournament(const ParetoRanking& ranking,
                                                  std::size_t population_size, std::size_t count,
                                                  Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, population_size - 1);
  std::vector<std::size_t> winners;
  winners.reserve(count);
  auto better = [&](std::size_t a, std::size_t b) {
    if (ranking.rank[a] != ranking.rank[b]) return ranking.rank[a] < ranking.rank[b];
    if (ranking.crowding[a] != ranking.crowding[b]) {
      return ranking.crowding[a] > ranking.crowding[b];
    }
    return a <= b;
  };
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    winners.push_back(better(a, b) ? a : b);
  }
  return winners;
}

}  // namespace scenfuzz
