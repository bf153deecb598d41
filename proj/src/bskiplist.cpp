#include "bsl/bskiplist.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>

namespace bsl {

namespace {

/// Opens a logical operation unless the caller already has one open.
class OpScope {
 public:
  explicit OpScope(BlockStore& store) : store_(store), owner_(!store.in_op()) {
    if (owner_) store_.begin_op();
  }
  ~OpScope() {
    if (owner_ && store_.in_op()) store_.end_op();
  }
  OpScope(const OpScope&) = delete;
  OpScope& operator=(const OpScope&) = delete;

  IoStats io() const noexcept { return store_.current(); }

 private:
  BlockStore& store_;
  bool owner_;
};

std::string describe(const PartitionLabel& label) {
  return "(" + std::to_string(label.min_element) + ", " + std::to_string(label.level) + ")";
}

}  // namespace

std::set<InvariantReport::Violation> InvariantReport::classes() const {
  std::set<Violation> out;
  for (const auto& entry : entries) out.insert(entry.kind);
  return out;
}

const char* to_string(InvariantReport::Violation violation) noexcept {
  using V = InvariantReport::Violation;
  switch (violation) {
    case V::layout: return "layout";
    case V::encoding: return "encoding";
    case V::partition_shape: return "partition_shape";
    case V::membership: return "membership";
    case V::boundary: return "boundary";
    case V::refinement: return "refinement";
    case V::counts: return "counts";
  }
  return "unknown";
}

BSkipList::BSkipList(const Params& params, const HashSeeds& seeds, std::unique_ptr<BlockStore> store,
                     LevelFunction levels)
    : params_(params), seeds_(seeds), levels_(std::move(levels)), store_(std::move(store)) {
  params_.validate();
  if (!store_) throw std::invalid_argument("BSkipList needs a store");
  if (store_->slot_count() != params_.slots) throw DomainError("store size does not match params.slots");
  if (store_->block_size() != params_.block_size) throw DomainError("store block size does not match params");
  allocator_ = std::make_unique<Allocator>(*store_, seeds_, params_.alpha_max);
  per_level_.assign(params_.beta + 1, 0);
}

BSkipList BSkipList::create(const Params& params, const HashSeeds& seeds, std::unique_ptr<BlockStore> store,
                            LevelFunction levels) {
  if (store && !store->is_blank()) throw StoreError("create: store is not empty");
  BSkipList list(params, seeds, std::move(store), std::move(levels));
  const std::vector<ElementKey> front{front_key};
  for (Level k = 1; k <= list.params_.beta; ++k) list.allocator_->insert({front_key, k}, front);
  list.nodes_ = list.params_.beta;
  return list;
}

BSkipList BSkipList::attach(const Params& params, const HashSeeds& seeds, std::unique_ptr<BlockStore> store,
                            LevelFunction levels) {
  BSkipList list(params, seeds, std::move(store), std::move(levels));
  list.rescan();
  return list;
}

BSkipList BSkipList::in_memory(const Params& params, const HashSeeds& seeds, LevelFunction levels) {
  auto store = std::make_unique<BlockStore>(BlockStore::in_memory(params.slots, params.block_size));
  return create(params, seeds, std::move(store), std::move(levels));
}

BSkipList BSkipList::create_file(const std::filesystem::path& path, const Params& params,
                                 std::uint64_t master_seed) {
  params.validate();
  auto backend = FileBackend::create(path, StoreHeader::from(params, master_seed));
  auto store = std::make_unique<BlockStore>(std::move(backend), params.block_size);
  return create(params, HashSeeds::from_master(master_seed), std::move(store));
}

BSkipList BSkipList::open_file(const std::filesystem::path& path, std::uint64_t master_seed) {
  auto backend = FileBackend::open(path);
  const StoreHeader header = backend->header();
  if (header.master_seed != master_seed) throw StoreError("open: master seed differs from the one in the file");
  const Params params = Params::make(header.capacity, header.gamma, header.block_size, header.slots);
  if (params.beta != header.beta) throw StoreError("open: header beta is inconsistent with capacity and gamma");
  auto store = std::make_unique<BlockStore>(std::move(backend), header.block_size);
  return attach(params, HashSeeds::from_master(master_seed), std::move(store));
}

void BSkipList::rescan() {
  std::fill(per_level_.begin(), per_level_.end(), 0);
  elements_ = 0;
  nodes_ = 0;
  for (const Partition& partition : partitions()) {
    nodes_ += partition.nodes.size();
    if (partition.label.level != 1) continue;
    for (ElementKey x : partition.nodes) {
      if (x == front_key) continue;
      ++elements_;
      ++per_level_[level(x)];
    }
  }
}

void BSkipList::require_user_key(ElementKey y, const char* op) {
  if (y == front_key) throw DomainError(std::string(op) + ": key 0 is reserved for the front sentinel");
}

Level BSkipList::level(ElementKey x) const {
  if (x == front_key) return params_.beta;
  if (!levels_) return level_of(x, seeds_, params_);
  return std::clamp<Level>(levels_(x), 1, params_.beta);
}

Level BSkipList::max_level() const noexcept {
  for (Level k = params_.beta; k >= 1; --k) {
    if (per_level_[k] != 0) return k;
  }
  return 0;
}

std::vector<ElementKey> BSkipList::read_partition(const PartitionLabel& label) {
  ++allocator_lookups_;
  AllocLookup found = allocator_->lookup(label);
  if (!found.string) throw std::logic_error("partition " + describe(label) + " is missing from the table");
  return std::move(found.string->payload);
}

std::vector<BSkipList::Visit> BSkipList::descend(ElementKey y, bool strict) {
  std::vector<Visit> visits(params_.beta + 1);
  ElementKey entry = front_key;
  for (Level k = params_.beta; k >= 1; --k) {
    Visit& visit = visits[k];
    // Descending from x at level k+1 lands on (x, k): level(x) > k makes x a level-k head.
    visit.label = {entry, k};
    visit.nodes = read_partition(visit.label);
    auto beyond = strict ? std::lower_bound(visit.nodes.begin(), visit.nodes.end(), y)
                         : std::upper_bound(visit.nodes.begin(), visit.nodes.end(), y);
    visit.predecessor = static_cast<std::size_t>(beyond - visit.nodes.begin()) - 1;
    entry = visit.nodes[visit.predecessor];
  }
  return visits;
}

SearchPath BSkipList::search_path(ElementKey y) {
  require_user_key(y, "search_path");
  OpScope scope(*store_);
  const auto visits = descend(y, false);
  SearchPath path;
  for (Level k = params_.beta; k >= 1; --k) path.push_back({visits[k].label, visits[k].nodes[visits[k].predecessor]});
  return path;
}

LookupResult BSkipList::lookup(ElementKey y) {
  require_user_key(y, "lookup");
  OpScope scope(*store_);
  const std::uint64_t before = allocator_lookups_;
  const auto visits = descend(y, false);
  LookupResult result;
  result.found = visits[1].nodes[visits[1].predecessor] == y;
  result.io = scope.io();
  result.allocator_lookups = allocator_lookups_ - before;
  return result;
}

IoStats BSkipList::insert(ElementKey y) {
  require_user_key(y, "insert");
  OpScope scope(*store_);
  auto visits = descend(y, false);
  if (visits[1].nodes[visits[1].predecessor] == y) return scope.io();
  if (elements_ >= params_.capacity) throw CapacityError("insert: structure is at capacity N");
  const Level top = level(y);
  // top new nodes plus one END per split-off partition.
  const std::uint64_t extra = 2 * static_cast<std::uint64_t>(top) - 1;
  if (allocator_->occupied() + extra > allocator_->slot_limit()) {
    throw CapacityError("insert: table load would pass alpha_max");
  }

  for (Level k = 1; k <= top; ++k) {
    Visit& visit = visits[k];
    const auto cut = visit.nodes.begin() + static_cast<std::ptrdiff_t>(visit.predecessor + 1);
    allocator_->erase(visit.label);
    if (k == top) {
      visit.nodes.insert(cut, y);
      allocator_->insert(visit.label, visit.nodes);
    } else {
      std::vector<ElementKey> right{y};
      right.insert(right.end(), cut, visit.nodes.end());
      visit.nodes.erase(cut, visit.nodes.end());
      allocator_->insert(visit.label, visit.nodes);
      allocator_->insert({y, k}, right);
    }
  }
  ++elements_;
  nodes_ += top;
  ++per_level_[top];
  return scope.io();
}

IoStats BSkipList::erase(ElementKey y) {
  require_user_key(y, "erase");
  OpScope scope(*store_);
  // Strict search: at every level below level(y) this enters the partition just left of (y, k).
  auto visits = descend(y, true);
  const Level top = level(y);
  // Below its top level y heads its own partition; at level(y) it sits right after its predecessor.
  const Visit& home = visits[top];
  if (home.predecessor + 1 >= home.nodes.size() || home.nodes[home.predecessor + 1] != y) {
    return scope.io();
  }
  for (Level k = 1; k <= top; ++k) {
    Visit& left = visits[k];
    if (k == top) {
      allocator_->erase(left.label);
      left.nodes.erase(left.nodes.begin() + static_cast<std::ptrdiff_t>(left.predecessor + 1));
      allocator_->insert(left.label, left.nodes);
      continue;
    }
    if (fault_ == Fault::skip_merge && k == 1) continue;
    const PartitionLabel right_label{y, k};
    const std::vector<ElementKey> right = read_partition(right_label);
    allocator_->erase(left.label);
    allocator_->erase(right_label);
    left.nodes.insert(left.nodes.end(), right.begin() + 1, right.end());
    allocator_->insert(left.label, left.nodes);
  }
  --elements_;
  nodes_ -= top;
  --per_level_[top];
  return scope.io();
}

RangeResult BSkipList::range_query(ElementKey x, ElementKey y) {
  require_user_key(x, "range_query");
  if (x > y) throw DomainError("range_query: lower bound exceeds upper bound");
  OpScope scope(*store_);
  RangeResult result;

  struct Cursor {
    PartitionLabel label;
    std::vector<ElementKey> nodes;
    std::size_t index = 0;
    bool loaded = false;
  };
  const Level beta = params_.beta;
  std::vector<Cursor> cursors(beta + 1);
  {
    auto visits = descend(x, false);
    for (Level k = 1; k <= beta; ++k) {
      cursors[k] = {visits[k].label, std::move(visits[k].nodes), visits[k].predecessor, true};
    }
  }

  // Next element of L_k after cursor k. A cursor parked on a fresh head has not
  // been read yet; it is loaded only when iteration has to go past that head.
  auto next_at = [&](auto&& self, Level k) -> std::optional<ElementKey> {
    if (k > beta) return std::nullopt;
    Cursor& cursor = cursors[k];
    if (!cursor.loaded) {
      cursor.nodes = read_partition(cursor.label);
      cursor.loaded = true;
    }
    if (cursor.index + 1 < cursor.nodes.size()) return cursor.nodes[++cursor.index];
    // Partition exhausted: the next L_k element is the next L_{k+1} element.
    const auto head = self(self, k + 1);
    if (!head) return std::nullopt;
    cursor = {{*head, k}, {}, 0, false};
    return head;
  };

  ElementKey current = cursors[1].nodes[cursors[1].index];
  if (current >= x && current <= y) result.elements.push_back(current);
  while (true) {
    const auto following = next_at(next_at, 1);
    if (!following || *following > y) break;
    if (*following >= x) result.elements.push_back(*following);
  }
  result.io = scope.io();
  return result;
}

std::vector<Partition> BSkipList::partitions() const {
  std::vector<Partition> out;
  for (StoredString& s : allocator_->strings()) out.push_back({s.label, std::move(s.payload)});
  std::sort(out.begin(), out.end(), [](const Partition& a, const Partition& b) {
    return std::pair(a.label.level, a.label.min_element) < std::pair(b.label.level, b.label.min_element);
  });
  return out;
}

InvariantReport BSkipList::check_invariants() const {
  using V = InvariantReport::Violation;
  InvariantReport report;
  auto flag = [&](V kind, std::string detail) { report.entries.push_back({kind, std::move(detail)}); };

  for (const LayoutViolation& v : allocator_->verify_layout()) {
    flag(v.kind == LayoutViolation::Kind::layout ? V::layout : V::encoding,
         "slot " + std::to_string(v.slot) + ": " + v.detail);
  }

  const Level beta = params_.beta;
  const auto all = partitions();
  std::vector<std::set<ElementKey>> heads(beta + 2);
  std::vector<std::set<ElementKey>> lists(beta + 2);  // L_k
  std::map<ElementKey, std::vector<Level>> appearances;
  std::uint64_t node_total = 0;

  for (const Partition& partition : all) {
    const Level k = partition.label.level;
    const std::string name = describe(partition.label);
    if (k < 1 || k > beta) {
      flag(V::partition_shape, name + " has a level outside [1, beta]");
      continue;
    }
    node_total += partition.nodes.size();
    heads[k].insert(partition.label.min_element);
    for (std::size_t i = 0; i < partition.nodes.size(); ++i) {
      const ElementKey x = partition.nodes[i];
      const Level lx = level(x);
      lists[k].insert(x);
      appearances[x].push_back(k);
      if (i == 0) {
        if (lx < k) flag(V::partition_shape, name + " head has level below the partition level");
        if (!(lx > k || x == front_key || k == beta)) {
          flag(V::partition_shape, name + " head does not rise above the partition level");
        }
      } else if (lx != k) {
        flag(V::partition_shape, name + " holds " + std::to_string(x) + " whose level is not the partition level");
      }
    }
  }

  std::uint64_t distinct = 0;
  for (auto& [x, seen] : appearances) {
    std::sort(seen.begin(), seen.end());
    const Level expected = level(x);
    bool ok = seen.size() == expected;
    for (std::size_t i = 0; ok && i < seen.size(); ++i) ok = seen[i] == i + 1;
    if (!ok) flag(V::membership, "element " + std::to_string(x) + " is not on exactly levels 1..level(x)");
    if (x != front_key) ++distinct;
  }
  if (appearances.find(front_key) == appearances.end()) flag(V::membership, "front sentinel is missing");

  for (Level k = 1; k <= beta; ++k) {
    std::set<ElementKey> expected{front_key};
    if (k < beta) expected.insert(lists[k + 1].begin(), lists[k + 1].end());
    if (heads[k] != expected) {
      flag(V::boundary, "level " + std::to_string(k) + " partition heads differ from L_" + std::to_string(k + 1));
    }
    if (k >= 2 && !std::includes(heads[k - 1].begin(), heads[k - 1].end(), heads[k].begin(), heads[k].end())) {
      flag(V::refinement, "level " + std::to_string(k - 1) + " partitioning does not refine level " +
                              std::to_string(k));
    }
  }

  if (distinct != elements_ || node_total != nodes_) {
    flag(V::counts, "element/node counters disagree with the stored partitions");
  }
  return report;
}

}  // namespace bsl
