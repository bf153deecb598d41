#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "bsl/allocator.hpp"
#include "bsl/blockstore.hpp"
#include "bsl/hashing.hpp"

namespace bsl {

/// Optional replacement for the hashed level function, used by tests to force
/// specific level assignments. Results are clamped to [1, beta]; front stays at beta.
using LevelFunction = std::function<Level(ElementKey)>;

/// One level-k segment of L_k between consecutive L_{k+1} elements.
struct Partition {
  PartitionLabel label;
  std::vector<ElementKey> nodes;

  friend bool operator==(const Partition&, const Partition&) = default;
};

struct PathStep {
  PartitionLabel entered;
  ElementKey predecessor = front_key;

  friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// One entry per level, from beta down to 1.
using SearchPath = std::vector<PathStep>;

struct LookupResult {
  bool found = false;
  IoStats io;
  std::uint64_t allocator_lookups = 0;
};

struct RangeResult {
  std::vector<ElementKey> elements;
  IoStats io;
};

struct InvariantReport {
  enum class Violation { layout, encoding, partition_shape, membership, boundary, refinement, counts };

  struct Entry {
    Violation kind;
    std::string detail;
  };

  std::vector<Entry> entries;

  [[nodiscard]] bool clean() const noexcept { return entries.empty(); }
  [[nodiscard]] std::set<Violation> classes() const;
};

[[nodiscard]] const char* to_string(InvariantReport::Violation violation) noexcept;

/// Test hooks that deliberately break maintenance so negative controls can fail.
enum class Fault { none, skip_merge };

/// A uniquely represented B-skip-list. Every level-k partition is stored through
/// the allocator as one string labelled (min element, k); the slot image depends
/// only on the stored set, the seeds and the parameters.
///
/// Single writer. Read-only calls may run concurrently only while no mutation is in flight.
class BSkipList {
 public:
  /// Builds an empty structure (front only) in a blank store.
  [[nodiscard]] static BSkipList create(const Params& params, const HashSeeds& seeds,
                                        std::unique_ptr<BlockStore> store, LevelFunction levels = {});
  /// Wraps a store that already holds a structure built with the same params and seeds.
  [[nodiscard]] static BSkipList attach(const Params& params, const HashSeeds& seeds,
                                        std::unique_ptr<BlockStore> store, LevelFunction levels = {});
  [[nodiscard]] static BSkipList in_memory(const Params& params, const HashSeeds& seeds,
                                           LevelFunction levels = {});
  [[nodiscard]] static BSkipList create_file(const std::filesystem::path& path, const Params& params,
                                             std::uint64_t master_seed);
  /// Reopens a file. Throws StoreError when `master_seed` differs from the recorded one.
  [[nodiscard]] static BSkipList open_file(const std::filesystem::path& path, std::uint64_t master_seed);

  [[nodiscard]] Level level(ElementKey x) const;

  [[nodiscard]] SearchPath search_path(ElementKey y);
  [[nodiscard]] LookupResult lookup(ElementKey y);
  /// No-op when y is already present.
  IoStats insert(ElementKey y);
  /// No-op when y is absent.
  IoStats erase(ElementKey y);
  [[nodiscard]] RangeResult range_query(ElementKey x, ElementKey y);

  [[nodiscard]] InvariantReport check_invariants() const;
  /// All partitions, ordered by (level, min element). Reads the whole table, uncharged.
  [[nodiscard]] std::vector<Partition> partitions() const;

  [[nodiscard]] std::uint64_t element_count() const noexcept { return elements_; }
  /// beta front nodes plus level(x) nodes per stored element.
  [[nodiscard]] std::uint64_t node_count() const noexcept { return nodes_; }
  /// Highest level of any stored element; 0 when empty.
  [[nodiscard]] Level max_level() const noexcept;

  [[nodiscard]] const Params& params() const noexcept { return params_; }
  [[nodiscard]] const HashSeeds& seeds() const noexcept { return seeds_; }
  [[nodiscard]] BlockStore& store() noexcept { return *store_; }
  [[nodiscard]] const BlockStore& store() const noexcept { return *store_; }
  [[nodiscard]] const Allocator& allocator() const noexcept { return *allocator_; }
  [[nodiscard]] Digest digest() const { return store_->image_digest(); }

  void inject_fault(Fault fault) noexcept { fault_ = fault; }

 private:
  struct Visit {
    PartitionLabel label;
    std::vector<ElementKey> nodes;
    std::size_t predecessor = 0;  // index into nodes
  };

  BSkipList(const Params& params, const HashSeeds& seeds, std::unique_ptr<BlockStore> store,
            LevelFunction levels);

  /// Root-to-leaf descent; visits[k] is the partition entered at level k (index 0 unused).
  /// The predecessor is the largest element <= y, or < y when `strict`.
  [[nodiscard]] std::vector<Visit> descend(ElementKey y, bool strict);
  [[nodiscard]] std::vector<ElementKey> read_partition(const PartitionLabel& label);
  void rescan();
  static void require_user_key(ElementKey y, const char* op);

  Params params_;
  HashSeeds seeds_;
  LevelFunction levels_;
  std::unique_ptr<BlockStore> store_;
  std::unique_ptr<Allocator> allocator_;
  std::uint64_t elements_ = 0;
  std::uint64_t nodes_ = 0;
  std::vector<std::uint64_t> per_level_;  // per_level_[k] = stored elements with level k
  std::uint64_t allocator_lookups_ = 0;
  Fault fault_ = Fault::none;
};

}  // namespace bsl
