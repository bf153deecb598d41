#pragma once

#include <functional>
#include <set>
#include <vector>

#include "bsl/bskiplist.hpp"

// Brute-force models of the structure, built straight from the element set and
// the level function. They share no code with BSkipList and serve as oracles.
namespace bsl::reference {

using LevelOf = std::function<Level(ElementKey)>;

/// Every partition of every level for `elements` (front added implicitly),
/// ordered by (level, min element).
[[nodiscard]] std::vector<Partition> partition(const std::set<ElementKey>& elements, const LevelOf& level_of,
                                               Level beta);

/// Per-level predecessors (largest element <= y in L_k) of a plain skip list, as a
/// search path from beta down to 1. The entered partition at level k is headed by
/// the level k+1 predecessor.
[[nodiscard]] SearchPath search_path(const std::set<ElementKey>& elements, const LevelOf& level_of, Level beta,
                                     ElementKey y);

/// Partitions converted to allocator strings, for rebuild_canonical().
[[nodiscard]] std::vector<StoredString> as_strings(const std::vector<Partition>& partitions);

}  // namespace bsl::reference
