#include "bsl/reference.hpp"

#include <algorithm>
#include <iterator>

namespace bsl::reference {

namespace {

std::vector<std::vector<ElementKey>> level_lists(const std::set<ElementKey>& elements, const LevelOf& level_of,
                                                 Level beta) {
  std::vector<std::vector<ElementKey>> lists(beta + 2);
  for (Level k = 1; k <= beta; ++k) lists[k].push_back(front_key);
  for (ElementKey x : elements) {
    if (x == front_key) continue;
    const Level top = level_of(x);
    for (Level k = 1; k <= top && k <= beta; ++k) lists[k].push_back(x);
  }
  return lists;
}

}  // namespace

std::vector<Partition> partition(const std::set<ElementKey>& elements, const LevelOf& level_of, Level beta) {
  const auto lists = level_lists(elements, level_of, beta);
  std::vector<Partition> out;
  for (Level k = 1; k <= beta; ++k) {
    // Boundaries at level k are the members of L_{k+1}; level beta is a single partition.
    const std::set<ElementKey> cuts(lists[k + 1].begin(), lists[k + 1].end());
    for (ElementKey x : lists[k]) {
      if (out.empty() || out.back().label.level != k || cuts.count(x) != 0) {
        out.push_back({{x, k}, {}});
      }
      out.back().nodes.push_back(x);
    }
  }
  return out;
}

SearchPath search_path(const std::set<ElementKey>& elements, const LevelOf& level_of, Level beta, ElementKey y) {
  const auto lists = level_lists(elements, level_of, beta);
  SearchPath path;
  ElementKey entry = front_key;
  for (Level k = beta; k >= 1; --k) {
    const auto& list = lists[k];
    const auto it = std::upper_bound(list.begin(), list.end(), y);
    const ElementKey predecessor = *std::prev(it);
    path.push_back({{entry, k}, predecessor});
    entry = predecessor;
  }
  return path;
}

std::vector<StoredString> as_strings(const std::vector<Partition>& partitions) {
  std::vector<StoredString> out;
  out.reserve(partitions.size());
  for (const Partition& p : partitions) out.push_back({p.label, p.nodes});
  return out;
}

}  // namespace bsl::reference
