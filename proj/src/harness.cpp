#include "bsl/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "bsl/reference.hpp"

namespace bsl::harness {

namespace {

// Stream separators so the key sequence never aliases the structure seeds.
constexpr std::uint64_t kKeyStream = 0x6b65792d73747265ULL;
constexpr std::uint64_t kTraceStream = 0x74726163652d7273ULL;

std::string fixed(double value, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

double mean_of(const std::vector<std::uint64_t>& xs) {
  if (xs.empty()) return 0.0;
  const double sum = std::accumulate(xs.begin(), xs.end(), 0.0);
  return sum / static_cast<double>(xs.size());
}

/// Nearest-rank 95th percentile.
double p95_of(std::vector<std::uint64_t> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(xs.size())));
  return static_cast<double>(xs[std::max<std::size_t>(rank, 1) - 1]);
}

double max_of(const std::vector<std::uint64_t>& xs) {
  return xs.empty() ? 0.0 : static_cast<double>(*std::max_element(xs.begin(), xs.end()));
}

/// Distinct random keys; `taken` is updated.
ElementKey fresh_key(Rng& rng, std::unordered_set<ElementKey>& taken) {
  while (true) {
    const ElementKey key = rng.key();
    if (taken.insert(key).second) return key;
  }
}

/// Keys present in the structure, with O(1) random pick and removal.
class KeyPool {
 public:
  bool contains(ElementKey key) const { return index_.count(key) != 0; }
  bool empty() const { return keys_.empty(); }
  std::size_t size() const { return keys_.size(); }

  void add(ElementKey key) {
    index_.emplace(key, keys_.size());
    keys_.push_back(key);
    sorted_.insert(key);
  }
  void remove(ElementKey key) {
    const auto it = index_.find(key);
    const std::size_t slot = it->second;
    index_.erase(it);
    if (slot + 1 != keys_.size()) {
      keys_[slot] = keys_.back();
      index_[keys_[slot]] = slot;
    }
    keys_.pop_back();
    sorted_.erase(key);
  }
  ElementKey pick(Rng& rng) const { return keys_[rng.below(keys_.size())]; }
  const std::set<ElementKey>& sorted() const { return sorted_; }

 private:
  std::vector<ElementKey> keys_;
  std::unordered_map<ElementKey, std::size_t> index_;
  std::set<ElementKey> sorted_;
};

enum class OpKind { insert, erase, lookup, range };
constexpr std::array<OpKind, 4> kOpKinds{OpKind::insert, OpKind::erase, OpKind::lookup, OpKind::range};

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::insert: return "insert";
    case OpKind::erase: return "delete";
    case OpKind::lookup: return "lookup";
    case OpKind::range: return "range";
  }
  return "?";
}

BSkipList make_structure(const WorkloadSpec& spec) {
  const Params params = spec.geometry.params();
  if (spec.backend == Backend::file) {
    if (spec.file.empty()) throw std::invalid_argument("file backend needs a path");
    std::filesystem::remove(spec.file);
    return BSkipList::create_file(spec.file, params, spec.master_seed);
  }
  return BSkipList::in_memory(params, HashSeeds::from_master(spec.master_seed));
}

}  // namespace

// --- op mix -------------------------------------------------------------------

OpMix OpMix::parse(const std::string& text) {
  OpMix mix{0.0, 0.0, 0.0, 0.0};
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("mix entry '" + item + "' is not name=weight");
    const std::string name = item.substr(0, eq);
    std::size_t used = 0;
    double weight = 0.0;
    try {
      weight = std::stod(item.substr(eq + 1), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("mix weight for '" + name + "' is not a number");
    }
    if (used != item.size() - eq - 1) throw std::invalid_argument("mix weight for '" + name + "' is not a number");
    if (name == "insert") mix.insert = weight;
    else if (name == "delete" || name == "erase") mix.erase = weight;
    else if (name == "lookup") mix.lookup = weight;
    else if (name == "range") mix.range = weight;
    else throw std::invalid_argument("unknown op '" + name + "' in mix");
  }
  mix.validate();
  return mix;
}

void OpMix::validate() const {
  for (double w : {insert, erase, lookup, range}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("op weights must be finite and non-negative");
  }
  if (insert + erase + lookup + range <= 0.0) throw std::invalid_argument("op weights must not all be zero");
}

// --- run ----------------------------------------------------------------------

RunResult run(const WorkloadSpec& spec) {
  spec.mix.validate();
  BSkipList list = make_structure(spec);
  Rng rng(spec.master_seed ^ kKeyStream);
  KeyPool pool;
  std::unordered_set<ElementKey> drawn;

  for (std::uint64_t i = 0; i < spec.n; ++i) {
    const ElementKey key = fresh_key(rng, drawn);
    list.insert(key);
    pool.add(key);
  }

  const std::array<double, 4> weights{spec.mix.insert, spec.mix.erase, spec.mix.lookup, spec.mix.range};
  const double total = weights[0] + weights[1] + weights[2] + weights[3];
  std::array<std::vector<std::uint64_t>, 4> io;
  std::array<double, 4> seconds{};
  using Clock = std::chrono::steady_clock;

  for (std::uint64_t i = 0; i < spec.ops; ++i) {
    double pick = rng.unit() * total;
    std::size_t which = 0;
    while (which + 1 < weights.size() && (weights[which] == 0.0 || pick >= weights[which])) {
      pick -= weights[which];
      ++which;
    }
    while (weights[which] == 0.0) --which;  // rounding at the top end

    const auto started = Clock::now();
    IoStats cost;
    switch (kOpKinds[which]) {
      case OpKind::insert: {
        const ElementKey key = fresh_key(rng, drawn);
        cost = list.insert(key);
        pool.add(key);
        break;
      }
      case OpKind::erase: {
        const ElementKey key = pool.empty() || rng.below(8) == 0 ? rng.key() : pool.pick(rng);
        cost = list.erase(key);
        if (pool.contains(key)) pool.remove(key);
        break;
      }
      case OpKind::lookup: {
        const ElementKey key = pool.empty() || rng.below(2) == 0 ? rng.key() : pool.pick(rng);
        cost = list.lookup(key).io;
        break;
      }
      case OpKind::range: {
        // Spans about range_k stored elements starting at a stored key.
        ElementKey from = pool.empty() ? rng.key() : pool.pick(rng);
        ElementKey to = from;
        auto it = pool.sorted().find(from);
        for (std::uint64_t step = 1; it != pool.sorted().end() && step < spec.range_k; ++step) {
          if (++it != pool.sorted().end()) to = *it;
        }
        cost = list.range_query(from, to).io;
        break;
      }
    }
    if (spec.timing) seconds[which] += std::chrono::duration<double>(Clock::now() - started).count();
    io[which].push_back(cost.total());
  }

  RunResult result;
  result.element_count = list.element_count();
  result.digest = list.digest();
  for (std::size_t i = 0; i < kOpKinds.size(); ++i) {
    if (io[i].empty()) continue;
    CsvRow row;
    row.experiment = spec.experiment;
    row.n = spec.n;
    row.gamma = list.params().gamma;
    row.block_size = list.params().block_size;
    row.op = op_name(kOpKinds[i]);
    row.mean_io = mean_of(io[i]);
    row.p95_io = p95_of(io[i]);
    row.node_count = list.node_count();
    row.load = list.allocator().load();
    row.max_level = list.max_level();
    row.wall_time = seconds[i];
    result.rows.push_back(row);
  }
  return result;
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << "experiment,n,gamma,B,op,mean_io_blocks,p95_io_blocks,node_count,load,max_level,wall_time_s\n";
  for (const CsvRow& r : rows) {
    out << r.experiment << ',' << r.n << ',' << r.gamma << ',' << r.block_size << ',' << r.op << ','
        << fixed(r.mean_io) << ',' << fixed(r.p95_io) << ',' << r.node_count << ',' << fixed(r.load) << ','
        << r.max_level << ',' << fixed(r.wall_time) << '\n';
  }
}

// --- unique representation ----------------------------------------------------

UrResult verify_ur(const UrSpec& spec) {
  if (spec.trials < 2) throw std::invalid_argument("verify-ur needs at least 2 trials");
  const Params params = spec.geometry.params();

  Rng key_rng(spec.master_seed ^ kKeyStream);
  std::unordered_set<ElementKey> drawn;
  std::vector<ElementKey> finals;
  for (std::uint64_t i = 0; i < spec.n; ++i) finals.push_back(fresh_key(key_rng, drawn));
  std::vector<ElementKey> junk;
  for (std::uint64_t i = 0; i < spec.n / 2 + 1; ++i) junk.push_back(fresh_key(key_rng, drawn));

  UrResult result;
  result.pass = true;
  for (std::uint64_t t = 0; t < spec.trials; ++t) {
    const HashSeeds seeds = HashSeeds::from_master(spec.vary_seed ? spec.master_seed + t : spec.master_seed);
    BSkipList list = BSkipList::in_memory(params, seeds);

    // Each key gets its own event script; scripts are interleaved at random,
    // keeping per-key order. Trial 0 is the plain sorted insertion trace.
    struct Event {
      ElementKey key;
      bool insert;
    };
    std::vector<std::vector<Event>> scripts;
    if (t == 0) {
      std::vector<ElementKey> sorted = finals;
      std::sort(sorted.begin(), sorted.end());
      for (ElementKey key : sorted) list.insert(key);
    } else {
      Rng rng(mix64(spec.master_seed ^ kTraceStream) + t);
      for (ElementKey key : finals) {
        switch (rng.below(4)) {
          case 0: scripts.push_back({{key, true}}); break;
          case 1: scripts.push_back({{key, true}, {key, true}}); break;
          case 2: scripts.push_back({{key, true}, {key, false}, {key, true}}); break;
          default: scripts.push_back({{key, false}, {key, true}}); break;
        }
      }
      for (ElementKey key : junk) {
        if (rng.below(2) == 0) scripts.push_back({{key, true}, {key, false}});
        else scripts.push_back({{key, false}, {key, true}, {key, false}, {key, false}});
      }
      std::vector<std::uint32_t> tokens;
      for (std::uint32_t s = 0; s < scripts.size(); ++s) tokens.insert(tokens.end(), scripts[s].size(), s);
      for (std::size_t i = tokens.size(); i > 1; --i) std::swap(tokens[i - 1], tokens[rng.below(i)]);
      std::vector<std::size_t> cursor(scripts.size(), 0);
      for (std::uint32_t s : tokens) {
        const Event& event = scripts[s][cursor[s]++];
        if (event.insert) list.insert(event.key);
        else list.erase(event.key);
      }
    }
    if (list.element_count() != spec.n) result.pass = false;
    result.digests.push_back(to_hex(list.digest()));
    if (result.digests.back() != result.digests.front()) result.pass = false;
  }
  return result;
}

// --- oracle -------------------------------------------------------------------

OracleResult verify_oracle(const OracleSpec& spec) {
  OracleResult result;
  if (spec.n_max == 0) return result;

  Geometry geometry = spec.geometry;
  geometry.capacity = std::max(geometry.capacity, spec.n_max);
  const Params params = geometry.params();
  const HashSeeds seeds = HashSeeds::from_master(spec.master_seed);
  BSkipList list = BSkipList::in_memory(params, seeds);
  list.inject_fault(spec.fault);
  const LabelHasher hasher = seeded_hasher(seeds, params.slots);
  const reference::LevelOf level = [&](ElementKey x) { return level_of(x, seeds, params); };

  Rng rng(spec.master_seed ^ kTraceStream);
  std::set<ElementKey> model;
  // A universe about twice n_max keeps hits, duplicates and absent deletes common.
  const std::uint64_t universe = 2 * spec.n_max + 1;
  auto random_key = [&] { return 1 + rng.below(universe); };

  auto mismatch = [&](std::uint64_t op, const std::string& what) {
    ++result.mismatches;
    if (result.first_mismatch.empty()) result.first_mismatch = "op " + std::to_string(op) + ": " + what;
  };

  for (std::uint64_t op = 0; op < spec.ops; ++op) {
    const std::uint64_t roll = rng.below(100);
    const ElementKey key = random_key();
    if (roll < 40) {
      if (model.size() < spec.n_max || model.count(key) != 0) {
        list.insert(key);
        model.insert(key);
      } else {
        list.erase(key);
      }
    } else if (roll < 70) {
      list.erase(key);
      model.erase(key);
    } else if (roll < 85) {
      const bool found = list.lookup(key).found;
      if (found != (model.count(key) != 0)) mismatch(op, "lookup(" + std::to_string(key) + ") disagrees");
      if (list.search_path(key) != reference::search_path(model, level, params.beta, key)) {
        mismatch(op, "search path for " + std::to_string(key) + " differs from the skip-list oracle");
      }
    } else {
      const ElementKey hi = std::min<ElementKey>(universe, key + rng.below(spec.n_max / 4 + 2));
      const auto got = list.range_query(key, hi).elements;
      const std::vector<ElementKey> want(model.lower_bound(key), model.upper_bound(hi));
      if (got != want) mismatch(op, "range [" + std::to_string(key) + ", " + std::to_string(hi) + "] differs");
    }

    if (list.element_count() != model.size()) mismatch(op, "element count differs");
    const auto expected = reference::partition(model, level, params.beta);
    if (list.partitions() != expected) mismatch(op, "partitions differ from the from-scratch partitioner");
    const auto canonical = rebuild_canonical(reference::as_strings(expected), params.slots, hasher, params.alpha_max);
    if (list.store().image() != canonical) mismatch(op, "slot image differs from rebuild_canonical");
    if (spec.invariant_every != 0 && op % spec.invariant_every == 0 && !list.check_invariants().clean()) {
      mismatch(op, "invariant check failed");
    }
    ++result.ops_run;
    if (result.mismatches != 0) break;
  }
  result.pass = result.mismatches == 0;
  return result;
}

// --- statistics ---------------------------------------------------------------

BSkipList build_random(const Geometry& geometry, std::uint64_t n, std::uint64_t seed, std::vector<ElementKey>* keys) {
  BSkipList list = BSkipList::in_memory(geometry.params(), HashSeeds::from_master(seed));
  Rng rng(seed ^ kKeyStream);
  std::unordered_set<ElementKey> drawn;
  for (std::uint64_t i = 0; i < n; ++i) {
    const ElementKey key = fresh_key(rng, drawn);
    list.insert(key);
    if (keys != nullptr) keys->push_back(key);
  }
  return list;
}

PartitionTail partition_tail(const Geometry& geometry, std::uint64_t n, std::uint64_t trials, std::uint64_t master_seed,
                             const std::vector<std::uint64_t>& lambdas) {
  PartitionTail tail;
  for (std::uint64_t lambda : lambdas) tail.tails.push_back({lambda, 0});
  for (std::uint64_t t = 0; t < trials; ++t) {
    const BSkipList list = build_random(geometry, n, master_seed + t);
    for (const Partition& partition : list.partitions()) {
      ++tail.partitions;
      for (TailCount& count : tail.tails) {
        if (partition.nodes.size() >= count.lambda) ++count.at_least;
      }
    }
  }
  return tail;
}

std::vector<TrialShape> shape_trials(const Geometry& geometry, std::uint64_t n, std::uint64_t trials,
                                     std::uint64_t master_seed) {
  std::vector<TrialShape> out;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t seed = master_seed + t;
    BSkipList list = BSkipList::in_memory(geometry.params(), HashSeeds::from_master(seed));
    Rng rng(seed ^ kKeyStream);
    std::unordered_set<ElementKey> drawn;
    TrialShape shape;
    for (std::uint64_t i = 0; i < n; ++i) {
      list.insert(fresh_key(rng, drawn));
      shape.peak_load = std::max(shape.peak_load, list.allocator().load());
    }
    shape.max_level = list.max_level();
    shape.node_count = list.node_count();
    shape.load = list.allocator().load();
    out.push_back(shape);
  }
  return out;
}

std::vector<IoSample> lookup_io(const Geometry& geometry, const std::vector<std::uint64_t>& checkpoints,
                                std::uint64_t lookups, std::uint64_t master_seed) {
  std::vector<std::uint64_t> sizes = checkpoints;
  std::sort(sizes.begin(), sizes.end());
  BSkipList list = BSkipList::in_memory(geometry.params(), HashSeeds::from_master(master_seed));
  Rng rng(master_seed ^ kKeyStream);
  Rng probe(master_seed ^ kTraceStream);
  std::unordered_set<ElementKey> drawn;
  std::vector<ElementKey> keys;

  std::vector<IoSample> out;
  for (std::uint64_t n : sizes) {
    while (keys.size() < n) {
      keys.push_back(fresh_key(rng, drawn));
      list.insert(keys.back());
    }
    std::vector<std::uint64_t> io;
    for (std::uint64_t i = 0; i < lookups; ++i) {
      const ElementKey key = keys.empty() || (i & 1U) ? probe.key() : keys[probe.below(keys.size())];
      io.push_back(list.lookup(key).io.total());
    }
    out.push_back({n, mean_of(io), p95_of(io), max_of(io), io.size()});
  }
  return out;
}

std::vector<RangeSample> range_io(const Geometry& geometry, std::uint64_t n, const std::vector<std::uint64_t>& ks,
                                  std::uint64_t queries, std::uint64_t master_seed) {
  std::vector<ElementKey> keys;
  BSkipList list = build_random(geometry, n, master_seed, &keys);
  std::sort(keys.begin(), keys.end());
  Rng rng(master_seed ^ kTraceStream);

  std::vector<RangeSample> out;
  for (std::uint64_t k : ks) {
    RangeSample sample;
    sample.k = k;
    std::vector<std::uint64_t> io;
    if (k == 0 || k > keys.size()) throw std::invalid_argument("range size must be in [1, n]");
    for (std::uint64_t q = 0; q < queries; ++q) {
      const std::size_t first = rng.below(keys.size() - k + 1);
      const std::vector<ElementKey> want(keys.begin() + static_cast<std::ptrdiff_t>(first),
                                         keys.begin() + static_cast<std::ptrdiff_t>(first + k));
      const RangeResult got = list.range_query(want.front(), want.back());
      if (got.elements != want) sample.outputs_match = false;
      io.push_back(got.io.total());
    }
    sample.mean = mean_of(io);
    sample.max = max_of(io);
    sample.queries = io.size();
    out.push_back(sample);
  }
  return out;
}

AllocatorSample allocator_io(std::uint64_t slots, std::uint64_t block_size, std::uint64_t gamma, double load,
                             std::uint64_t ops, std::uint64_t master_seed) {
  BlockStore store = BlockStore::in_memory(slots, block_size);
  Allocator allocator(store, HashSeeds::from_master(master_seed));
  Rng rng(master_seed ^ kKeyStream);

  // Labels are (id << 24, 1) with payload id << 24, id << 24 + 1, ...
  std::uint64_t next_id = 1;
  auto make = [&] {
    std::uint64_t length = 1;
    while (rng.below(gamma) != 0 && length < (1U << 20)) ++length;
    const ElementKey base = next_id++ << 24;
    StoredString s{{base, 1}, {}};
    for (std::uint64_t i = 0; i < length; ++i) s.payload.push_back(base + i);
    return s;
  };
  std::vector<StoredString> stored;
  const auto target = static_cast<std::uint64_t>(load * static_cast<double>(slots));
  while (true) {
    StoredString s = make();
    if (allocator.occupied() + s.length() > target) break;
    allocator.insert(s.label, s.payload);
    stored.push_back(std::move(s));
  }

  std::vector<std::uint64_t> io;
  std::vector<std::uint64_t> lengths;
  auto measure = [&](auto&& body, std::uint64_t length) {
    store.begin_op();
    body();
    io.push_back(store.end_op().total());
    lengths.push_back(length);
  };
  for (std::uint64_t i = 0; i < ops && !stored.empty(); ++i) {
    const std::size_t victim = rng.below(stored.size());
    const StoredString gone = stored[victim];
    stored[victim] = stored.back();
    stored.pop_back();
    measure([&] { allocator.erase(gone.label); }, gone.length());

    StoredString s = make();
    while (allocator.occupied() + s.length() > allocator.slot_limit()) s = make();
    measure([&] { allocator.insert(s.label, s.payload); }, s.length());
    stored.push_back(s);

    const StoredString& probe = stored[rng.below(stored.size())];
    measure([&] { (void)allocator.lookup(probe.label); }, probe.length());
  }

  AllocatorSample sample;
  sample.block_size = block_size;
  sample.mean_io = mean_of(io);
  sample.mean_length = mean_of(lengths);
  sample.ratio = sample.mean_io / (sample.mean_length / static_cast<double>(block_size) + 1.0);
  const DisplacementStats d = allocator.displacement_stats();
  sample.mean_displacement = d.mean;
  sample.max_displacement = d.max;
  sample.load = allocator.load();
  sample.ops = io.size();
  return sample;
}

double lookup_bound(std::uint64_t block_size, std::uint64_t gamma, std::uint64_t capacity) {
  const double r = static_cast<double>(block_size) / static_cast<double>(gamma);
  return std::exp(r) / (1.0 - std::exp(-r)) * static_cast<double>(beta_for(capacity, gamma));
}

std::optional<StatsKind> parse_stats_kind(const std::string& text) {
  if (text == "partitions") return StatsKind::partitions;
  if (text == "depth") return StatsKind::depth;
  if (text == "displacement") return StatsKind::displacement;
  if (text == "io") return StatsKind::io;
  return std::nullopt;
}

std::vector<StatsRow> stats(const StatsSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("stats needs at least one trial");
  const Geometry& g = spec.geometry;
  const double gamma = static_cast<double>(g.gamma);
  std::vector<StatsRow> rows;
  auto row = [&](std::string kind, std::string parameter, double empirical, std::optional<double> bound,
                 double sigma, std::uint64_t samples, std::uint64_t block_size) {
    rows.push_back({std::move(kind), g.gamma, block_size, spec.n, spec.trials, std::move(parameter), empirical, bound,
                    sigma, samples});
  };

  switch (spec.kind) {
    case StatsKind::partitions: {
      const PartitionTail tail =
          partition_tail(g, spec.n, spec.trials, spec.master_seed, {g.gamma, 2 * g.gamma, 3 * g.gamma});
      for (const TailCount& count : tail.tails) {
        const double bound = std::exp(-static_cast<double>(count.lambda) / gamma);
        const double freq = static_cast<double>(count.at_least) / static_cast<double>(tail.partitions);
        const double sigma = std::sqrt(bound * (1.0 - bound) / static_cast<double>(tail.partitions));
        row("partitions", "P[size>=" + std::to_string(count.lambda) + "]", freq, bound, sigma, tail.partitions,
            g.block_size);
      }
      break;
    }
    case StatsKind::depth: {
      const auto shapes = shape_trials(g, spec.n, spec.trials, spec.master_seed);
      const double log_n = std::log(static_cast<double>(std::max<std::uint64_t>(spec.n, 2))) / std::log(gamma);
      const Level beta = beta_for(g.capacity, g.gamma);
      for (int c = 1; c <= 2; ++c) {
        const double threshold = (c + 1) * log_n;
        std::uint64_t hits = 0;
        for (const TrialShape& s : shapes) hits += s.max_level >= threshold ? 1 : 0;
        const double bound = std::pow(static_cast<double>(spec.n), -c);
        row("depth", "P[depth>=" + fixed(threshold, 3) + "]", static_cast<double>(hits) / shapes.size(), bound,
            std::sqrt(bound * (1 - bound) / shapes.size()), shapes.size(), g.block_size);
      }
      std::uint64_t over = 0;
      for (const TrialShape& s : shapes) over += s.max_level > beta ? 1 : 0;
      row("depth", "P[depth>beta]", static_cast<double>(over) / shapes.size(), 0.0, 0.0, shapes.size(), g.block_size);
      break;
    }
    case StatsKind::displacement: {
      const std::uint64_t slots = g.slots != 0 ? g.slots : next_prime(100000);
      for (std::uint64_t t = 0; t < spec.trials; ++t) {
        const AllocatorSample s = allocator_io(slots, g.block_size, g.gamma, spec.load, spec.lookups / 3 + 1,
                                               spec.master_seed + t);
        row("displacement", "mean_io_per_op", s.mean_io, s.mean_length / static_cast<double>(g.block_size) + 1.0,
            0.0, s.ops, g.block_size);
        row("displacement", "io_ratio", s.ratio, std::nullopt, 0.0, s.ops, g.block_size);
        row("displacement", "mean_displacement", s.mean_displacement, std::nullopt, 0.0, s.ops, g.block_size);
      }
      break;
    }
    case StatsKind::io: {
      for (std::uint64_t t = 0; t < spec.trials; ++t) {
        const auto samples = lookup_io(g, {spec.n}, spec.lookups, spec.master_seed + t);
        const IoSample& s = samples.front();
        row("io", "mean_lookup_blocks", s.mean, lookup_bound(g.block_size, g.gamma, g.capacity), 0.0, s.count,
            g.block_size);
        row("io", "p95_lookup_blocks", s.p95, std::nullopt, 0.0, s.count, g.block_size);
      }
      break;
    }
  }
  return rows;
}

void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& rows) {
  out << "kind,gamma,B,n,trials,parameter,empirical,bound,sigma,samples\n";
  for (const StatsRow& r : rows) {
    out << r.kind << ',' << r.gamma << ',' << r.block_size << ',' << r.n << ',' << r.trials << ',' << r.parameter
        << ',' << fixed(r.empirical) << ',' << (r.bound ? fixed(*r.bound) : "") << ',' << fixed(r.sigma) << ','
        << r.samples << '\n';
  }
}

}  // namespace bsl::harness
