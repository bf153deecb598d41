#include "bsl/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iterator>
#include <set>

namespace bsl {

namespace {

PartitionLabel label_at(const SlotRecord& record) noexcept { return {record.element, record.level}; }

std::string describe(const PartitionLabel& label) {
  return "(" + std::to_string(label.min_element) + ", " + std::to_string(label.level) + ")";
}

}  // namespace

LabelHasher seeded_hasher(const HashSeeds& seeds, std::uint64_t slots) {
  return [seeds, slots](const PartitionLabel& label) { return label_hash(label, seeds, slots); };
}

Allocator::Allocator(BlockStore& store, LabelHasher hasher, double alpha_max)
    : store_(store),
      hasher_(std::move(hasher)),
      p_(store.slot_count()),
      slot_limit_(static_cast<std::uint64_t>(std::floor(alpha_max * static_cast<double>(store.slot_count())))) {
  if (p_ < 2) throw AllocatorError("allocator needs at least two slots");
  scan_counts();
}

Allocator::Allocator(BlockStore& store, const HashSeeds& seeds, double alpha_max)
    : Allocator(store, seeded_hasher(seeds, store.slot_count()), alpha_max) {}

void Allocator::scan_counts() {
  occupied_ = 0;
  strings_ = 0;
  SlotRecord before = store_.read_slot(p_ - 1);
  for (SlotIndex i = 0; i < p_; ++i) {
    const SlotRecord cur = store_.read_slot(i);
    if (!cur.is_empty()) ++occupied_;
    if (cur.is_node() && !before.is_node()) ++strings_;
    before = cur;
  }
}

StoredString Allocator::read_string(SlotIndex start) const {
  StoredString out;
  SlotRecord first = store_.read_slot(start);
  out.label = label_at(first);
  SlotIndex i = start;
  for (std::uint64_t steps = 0; steps < p_; ++steps) {
    const SlotRecord cur = steps == 0 ? first : store_.read_slot(i);
    if (cur.is_end()) return out;
    if (!cur.is_node()) throw AllocatorError("string at slot " + std::to_string(start) + " is not terminated");
    out.payload.push_back(cur.element);
    i = next(i);
  }
  throw AllocatorError("string at slot " + std::to_string(start) + " never terminates");
}

void Allocator::erase_at(SlotIndex start, std::uint64_t length) {
  SlotIndex i = start;
  for (std::uint64_t j = 0; j < length; ++j, i = next(i)) store_.write_slot(i, SlotRecord::empty());
  occupied_ -= length;
  --strings_;
}

void Allocator::write_at(SlotIndex start, const StoredString& string) {
  SlotIndex i = start;
  for (ElementKey element : string.payload) {
    store_.write_slot(i, SlotRecord::node(element, string.label.level));
    i = next(i);
  }
  store_.write_slot(i, SlotRecord::end());
  occupied_ += string.length();
  ++strings_;
}

AllocLookup Allocator::lookup(const PartitionLabel& label) const {
  const SlotIndex home_slot = hasher_(label);
  AllocLookup result;
  SlotRecord before = store_.read_slot(prev(home_slot));
  SlotIndex i = home_slot;
  for (std::uint64_t probed = 0; probed < p_; ++probed) {
    const SlotRecord cur = store_.read_slot(i);
    if (cur.is_empty()) {
      result.displacement = probed;
      return result;
    }
    if (cur.is_node() && !before.is_node() && label_at(cur) == label) {
      result.string = read_string(i);
      result.start = i;
      result.displacement = probed;
      return result;
    }
    before = cur;
    i = next(i);
  }
  result.displacement = p_;
  return result;
}

SlotIndex Allocator::find_slot(const Priority& priority) const {
  SlotRecord before = store_.read_slot(prev(priority.hash));
  SlotIndex i = priority.hash;
  for (std::uint64_t probed = 0; probed < p_; ++probed) {
    const SlotRecord cur = store_.read_slot(i);
    if (cur.is_empty()) return i;
    if (cur.is_node() && !before.is_node()) {
      // The resident went past fewer slots than we have: its home is later, so we go first.
      const Priority resident = this->priority(label_at(cur));
      const std::uint64_t resident_displacement = offset(resident.hash, i);
      if (probed > resident_displacement || (probed == resident_displacement && priority < resident)) return i;
    }
    before = cur;
    i = next(i);
  }
  throw CapacityError("allocator table has no free slot");
}

void Allocator::place(std::vector<Pending> pending) {
  std::deque<Pending> queue(std::make_move_iterator(pending.begin()), std::make_move_iterator(pending.end()));
  while (!queue.empty()) {
    Pending top = std::move(queue.front());
    queue.pop_front();
    const SlotIndex start = find_slot(top.priority);
    // The target range can only hold strings that start inside it: `start` is EMPTY
    // or a string start, so nothing from before reaches past it. Everything evicted
    // belongs after `top`, and is queued in slot order.
    SlotIndex i = start;
    for (std::uint64_t j = 0; j < top.string.length(); ++j, i = next(i)) {
      if (store_.read_slot(i).is_empty()) continue;
      StoredString evicted = read_string(i);
      erase_at(i, evicted.length());
      const Priority evicted_priority = priority(evicted.label);
      queue.push_back({evicted_priority, std::move(evicted)});
    }
    write_at(start, top.string);
  }
}

void Allocator::insert(const PartitionLabel& label, std::span<const ElementKey> payload) {
  if (payload.empty()) throw AllocatorError("cannot store an empty string");
  if (payload.front() != label.min_element) throw AllocatorError("payload must start with the label element");
  if (!std::is_sorted(payload.begin(), payload.end(), std::less_equal<>())) {
    throw AllocatorError("payload must be strictly increasing");
  }
  const std::uint64_t length = payload.size() + 1;
  if (occupied_ + length > slot_limit_) {
    throw CapacityError("inserting " + describe(label) + " would push the load past alpha_max");
  }
  if (lookup(label).string) throw AllocatorError("label " + describe(label) + " is already stored");
  StoredString string{label, {payload.begin(), payload.end()}};
  std::vector<Pending> pending;
  pending.push_back({priority(label), std::move(string)});
  place(std::move(pending));
}

void Allocator::erase(const PartitionLabel& label) {
  const AllocLookup found = lookup(label);
  if (!found.string) throw AllocatorError("label " + describe(label) + " is not stored");
  const std::uint64_t length = found.string->length();
  erase_at(found.start, length);

  // Everything in the run after the gap may now belong earlier; re-place all of it.
  std::vector<Pending> pending;
  SlotIndex i = found.start;
  for (std::uint64_t j = 0; j < length; ++j) i = next(i);
  while (!store_.read_slot(i).is_empty()) {
    StoredString follower = read_string(i);
    const std::uint64_t follower_length = follower.length();
    erase_at(i, follower_length);
    for (std::uint64_t j = 0; j < follower_length; ++j) i = next(i);
    const Priority follower_priority = priority(follower.label);
    pending.push_back({follower_priority, std::move(follower)});
  }
  place(std::move(pending));
}

std::vector<StoredString> Allocator::strings() const {
  std::vector<StoredString> out;
  out.reserve(strings_);
  SlotRecord before = store_.read_slot(p_ - 1);
  for (SlotIndex i = 0; i < p_; ++i) {
    const SlotRecord cur = store_.read_slot(i);
    if (cur.is_node() && !before.is_node()) out.push_back(read_string(i));
    before = cur;
  }
  return out;
}

DisplacementStats Allocator::displacement_stats() const {
  DisplacementStats stats;
  std::uint64_t total = 0;
  SlotRecord before = store_.read_slot(p_ - 1);
  for (SlotIndex i = 0; i < p_; ++i) {
    const SlotRecord cur = store_.read_slot(i);
    if (cur.is_node() && !before.is_node()) {
      const std::uint64_t d = offset(hasher_(label_at(cur)), i);
      ++stats.histogram[d];
      stats.max = std::max(stats.max, d);
      total += d;
      ++stats.strings;
    }
    before = cur;
  }
  if (stats.strings > 0) stats.mean = static_cast<double>(total) / static_cast<double>(stats.strings);
  return stats;
}

std::vector<LayoutViolation> Allocator::verify_layout() const {
  using Kind = LayoutViolation::Kind;
  std::vector<LayoutViolation> out;
  std::vector<SlotRecord> slots(p_);
  for (SlotIndex i = 0; i < p_; ++i) slots[i] = store_.read_slot(i);

  std::uint64_t occupied = 0;
  std::uint64_t starts = 0;
  std::set<PartitionLabel> seen;
  for (SlotIndex i = 0; i < p_; ++i) {
    const SlotRecord& cur = slots[i];
    const SlotRecord& before = slots[prev(i)];
    if (!cur.is_empty()) ++occupied;
    if (cur.is_end() && !before.is_node()) {
      out.push_back({Kind::layout, i, "END slot does not follow a node"});
    }
    if (cur.is_node() && slots[next(i)].is_empty()) {
      out.push_back({Kind::layout, i, "string is not terminated by END"});
    }
    if (!cur.is_node() || before.is_node()) continue;

    ++starts;
    const PartitionLabel label = label_at(cur);
    if (!seen.insert(label).second) {
      out.push_back({Kind::encoding, i, "label " + describe(label) + " stored twice"});
    }
    SlotIndex j = next(i);
    ElementKey last = cur.element;
    for (std::uint64_t steps = 0; steps < p_ && slots[j].is_node(); ++steps, j = next(j)) {
      if (slots[j].level != cur.level) {
        out.push_back({Kind::encoding, j, "node level differs from its string's label level"});
      }
      if (slots[j].element <= last) out.push_back({Kind::encoding, j, "string elements not increasing"});
      last = slots[j].element;
    }
    const SlotIndex home_slot = hasher_(label);
    for (SlotIndex k = home_slot; k != i; k = next(k)) {
      if (slots[k].is_empty()) {
        out.push_back({Kind::layout, i,
                       "string " + describe(label) + " starts past the first EMPTY slot after its hash"});
        break;
      }
    }
  }
  if (occupied != occupied_ || starts != strings_) {
    out.push_back({Kind::layout, 0, "cached occupancy counters disagree with the table"});
  }
  return out;
}

std::vector<std::uint8_t> rebuild_canonical(std::span<const StoredString> strings, std::uint64_t slots,
                                            const LabelHasher& hasher, double alpha_max) {
  struct Item {
    Priority priority;
    const StoredString* string;
  };
  std::vector<Item> items;
  items.reserve(strings.size());
  std::uint64_t total = 0;
  for (const auto& s : strings) {
    items.push_back({{hasher(s.label), s.label.bytes()}, &s});
    total += s.length();
  }
  const auto limit = static_cast<std::uint64_t>(std::floor(alpha_max * static_cast<double>(slots)));
  if (total > limit) throw CapacityError("rebuild_canonical: strings exceed alpha_max * p");
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.priority < b.priority; });

  // One pass around the table in home order. `carry` slots at the start are still
  // busy with the tail of the previous pass.
  std::vector<std::uint64_t> starts(items.size());
  auto lap = [&](std::uint64_t carry) {
    std::uint64_t busy_until = carry;
    for (std::size_t k = 0; k < items.size(); ++k) {
      starts[k] = std::max(items[k].priority.hash, busy_until);
      busy_until = starts[k] + items[k].string->length();
    }
    return busy_until > slots ? busy_until - slots : 0;
  };
  // Load below 1 leaves an idle slot, after which the first pass is already exact;
  // the second pass starts from the exact carry. Further passes only confirm it.
  std::uint64_t carry = lap(0);
  for (int pass = 0; pass < 4; ++pass) {
    const std::uint64_t next_carry = lap(carry);
    if (next_carry == carry) break;
    carry = next_carry;
  }

  std::vector<std::uint8_t> image(slots * kSlotBytes, 0);
  auto put = [&](std::uint64_t position, const SlotRecord& record) {
    record.encode(std::span<std::uint8_t, kSlotBytes>(image.data() + (position % slots) * kSlotBytes, kSlotBytes));
  };
  for (std::size_t k = 0; k < items.size(); ++k) {
    const StoredString& s = *items[k].string;
    std::uint64_t position = starts[k];
    for (ElementKey element : s.payload) put(position++, SlotRecord::node(element, s.label.level));
    put(position, SlotRecord::end());
  }
  return image;
}

}  // namespace bsl
