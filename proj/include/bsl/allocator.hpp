#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsl/blockstore.hpp"
#include "bsl/hashing.hpp"

namespace bsl {

/// One partition as the allocator sees it: a label plus its nodes in increasing order.
/// On slots it is one NODE per payload element followed by one END.
struct StoredString {
  PartitionLabel label;
  std::vector<ElementKey> payload;

  /// Slots occupied, including the END slot.
  [[nodiscard]] std::uint64_t length() const noexcept { return payload.size() + 1; }

  friend bool operator==(const StoredString&, const StoredString&) = default;
};

/// Tie-break key between strings with the same home slot: smaller wins.
struct Priority {
  SlotIndex hash = 0;
  std::array<std::uint8_t, 9> label_bytes{};

  friend auto operator<=>(const Priority&, const Priority&) = default;
};

struct AllocLookup {
  std::optional<StoredString> string;
  SlotIndex start = 0;             // valid when found
  std::uint64_t displacement = 0;  // (start - hash) mod p when found, slots probed otherwise
};

struct DisplacementStats {
  double mean = 0.0;
  std::uint64_t max = 0;
  std::map<std::uint64_t, std::uint64_t> histogram;  // displacement -> count
  std::uint64_t strings = 0;
};

struct LayoutViolation {
  enum class Kind { layout, encoding };
  Kind kind = Kind::layout;
  SlotIndex slot = 0;
  std::string detail;
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AllocatorError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Maps a label to its home slot. Defaults to label_hash(); tests may pin slots directly.
using LabelHasher = std::function<SlotIndex(const PartitionLabel&)>;

[[nodiscard]] LabelHasher seeded_hasher(const HashSeeds& seeds, std::uint64_t slots);

/// Uniquely represented variable-length allocator over a cyclic slot table.
///
/// Each string sits in contiguous slots, is preceded by END or EMPTY, and starts
/// no later than the first EMPTY slot at or after its hash. Within a run of
/// occupied slots, strings appear in order of their home slot measured from the
/// run's start (ties by Priority), each as early as possible. That layout is a
/// function of the stored set alone; insert and erase maintain it incrementally.
class Allocator {
 public:
  Allocator(BlockStore& store, LabelHasher hasher, double alpha_max = 0.9);
  Allocator(BlockStore& store, const HashSeeds& seeds, double alpha_max = 0.9);

  [[nodiscard]] AllocLookup lookup(const PartitionLabel& label) const;
  void insert(const PartitionLabel& label, std::span<const ElementKey> payload);
  void erase(const PartitionLabel& label);

  [[nodiscard]] std::uint64_t occupied() const noexcept { return occupied_; }
  [[nodiscard]] std::uint64_t slot_limit() const noexcept { return slot_limit_; }
  [[nodiscard]] std::uint64_t string_count() const noexcept { return strings_; }
  [[nodiscard]] double load() const noexcept {
    return static_cast<double>(occupied_) / static_cast<double>(store_.slot_count());
  }
  [[nodiscard]] DisplacementStats displacement_stats() const;

  /// Every stored string, in slot order of their starts.
  [[nodiscard]] std::vector<StoredString> strings() const;
  /// Full-table check of the layout invariants; empty when the table is well formed.
  /// `layout` covers contiguity, termination and probe-range placement; `encoding`
  /// covers node contents (shared level byte, increasing elements, unique labels).
  [[nodiscard]] std::vector<LayoutViolation> verify_layout() const;

  [[nodiscard]] SlotIndex home(const PartitionLabel& label) const { return hasher_(label); }
  [[nodiscard]] Priority priority(const PartitionLabel& label) const { return {hasher_(label), label.bytes()}; }

  [[nodiscard]] BlockStore& store() noexcept { return store_; }
  [[nodiscard]] const BlockStore& store() const noexcept { return store_; }

 private:
  struct Pending {
    Priority priority;
    StoredString string;
  };

  [[nodiscard]] SlotIndex next(SlotIndex slot) const noexcept { return slot + 1 == p_ ? 0 : slot + 1; }
  [[nodiscard]] SlotIndex prev(SlotIndex slot) const noexcept { return slot == 0 ? p_ - 1 : slot - 1; }
  [[nodiscard]] SlotIndex offset(SlotIndex from, SlotIndex to) const noexcept {
    return to >= from ? to - from : to + p_ - from;
  }

  /// Reads the string starting at `start` (which must be a NODE).
  [[nodiscard]] StoredString read_string(SlotIndex start) const;
  void erase_at(SlotIndex start, std::uint64_t length);
  void write_at(SlotIndex start, const StoredString& string);
  /// First slot at or after the home of `priority` that is EMPTY or starts a string
  /// that belongs after it.
  [[nodiscard]] SlotIndex find_slot(const Priority& priority) const;
  /// Places pending strings in order, shifting later strings forward as needed.
  /// `pending` must already be in run order.
  void place(std::vector<Pending> pending);
  void scan_counts();

  BlockStore& store_;
  LabelHasher hasher_;
  std::uint64_t p_;
  std::uint64_t slot_limit_;
  std::uint64_t occupied_ = 0;
  std::uint64_t strings_ = 0;
};

/// Canonical image of `strings`, built directly as the cyclic first-come-first-served
/// schedule: strings sorted by (home, Priority), each starting at the later of its home
/// and the end of its predecessor, iterated around the table until the wrap-around
/// carry is stable. Serves as the layout oracle for the incremental operations.
[[nodiscard]] std::vector<std::uint8_t> rebuild_canonical(std::span<const StoredString> strings,
                                                          std::uint64_t slots, const LabelHasher& hasher,
                                                          double alpha_max = 0.9);

}  // namespace bsl
